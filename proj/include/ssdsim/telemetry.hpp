#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "ssdsim/ftl.hpp"
#include "ssdsim/hil.hpp"
#include "ssdsim/pal.hpp"
#include "ssdsim/types.hpp"

namespace ssdsim {

/// Fixed-capacity uniform sample of a stream (Algorithm R). Exact while the
/// stream is no longer than the capacity.
class Reservoir {
 public:
  static constexpr std::size_t kDefaultCapacity = 1'000'000;

  explicit Reservoir(std::size_t capacity = kDefaultCapacity, std::uint64_t seed = 0x5eed);

  void add(Tick value);
  std::uint64_t seen() const { return seen_; }
  const std::vector<Tick> &samples() const { return samples_; }

 private:
  std::size_t capacity_;
  std::uint64_t seen_ = 0;
  std::vector<Tick> samples_;
  std::mt19937_64 rng_;
};

// Nearest-rank percentile (p in (0, 1]) of an unsorted sample; 0 if empty.
Tick percentile(std::vector<Tick> samples, double p);

struct RequestBucketStats {
  HostOp op = HostOp::Read;
  std::uint64_t request_bytes = 0;
  std::uint64_t count = 0;
  std::uint64_t bytes = 0;
  double mean_ns = 0;
  Tick median_ns = 0;
  Tick p99_ns = 0;
  Tick min_ns = 0;
  Tick max_ns = 0;
  double mean_queueing_ns = 0;
  double mean_firmware_ns = 0;
  double mean_flash_ns = 0;
  Tick first_arrival = 0;
  Tick last_finish = 0;
  double bandwidth_mbps = 0;  // bytes / (last_finish - first_arrival), 10^6 B/s
};

struct StatsReport {
  std::vector<RequestBucketStats> buckets;  // by op, then request size
  std::uint64_t requests = 0;

  std::uint64_t host_read_pages = 0;
  std::uint64_t host_write_pages = 0;
  std::uint64_t gc_read_pages = 0;
  std::uint64_t gc_write_pages = 0;
  std::uint64_t erase_transactions = 0;

  FtlStats ftl;
  double write_amplification = 1.0;
  bool zero_writes = true;  // WA is reported as 1.0 when nothing was written

  std::map<std::uint32_t, std::uint64_t> erase_histogram;  // erase count -> blocks
  Tick span_begin = 0;
  Tick span_end = 0;
  std::vector<double> channel_busy;  // fraction of [span_begin, span_end)
  std::vector<double> die_busy;
};

struct WearRow {
  BlockId block = 0;
  std::uint32_t erase_count = 0;
  std::uint32_t invalid_count = 0;
};

std::vector<WearRow> wear_snapshot(const MappingState &mapping);

/// Streaming aggregation of completions and flash transactions.
class Telemetry {
 public:
  Telemetry(std::uint32_t channels, std::uint32_t dies,
            std::size_t reservoir_capacity = Reservoir::kDefaultCapacity);

  void accumulate(const CompletionRecord &record);
  void accumulate(const TransactionRecord &record);

  // Snapshot of FTL counters and per-block wear, taken when the run ends.
  void set_ftl_state(const MappingState &mapping);

  StatsReport report() const;

 private:
  __extension__ using Wide = unsigned __int128;  // latency sums never overflow

  struct Bucket {
    std::uint64_t count = 0;
    std::uint64_t bytes = 0;
    Wide latency_sum = 0;
    Wide queueing_sum = 0;
    Wide firmware_sum = 0;
    Wide flash_sum = 0;
    Tick min = kTickMax;
    Tick max = 0;
    Tick first_arrival = kTickMax;
    Tick last_finish = 0;
    Reservoir reservoir;
  };

  std::size_t reservoir_capacity_;
  std::map<std::pair<HostOp, std::uint64_t>, Bucket> buckets_;
  std::uint64_t requests_ = 0;
  std::uint64_t txn_counts_[5] = {};
  std::vector<Tick> channel_busy_;
  std::vector<Tick> die_busy_;
  Tick span_begin_ = kTickMax;
  Tick span_end_ = 0;
  FtlStats ftl_;
  std::map<std::uint32_t, std::uint64_t> erase_histogram_;
};

// Long-format CSV: point,section,key,field,value. Stable row order.
void write_report_csv(std::ostream &out, const std::string &point,
                      const StatsReport &report, bool header = true);
void write_report_human(std::ostream &out, const std::string &point,
                        const StatsReport &report);
void write_wear_csv(std::ostream &out, const std::string &point,
                    const std::vector<WearRow> &rows, bool header = true);

}  // namespace ssdsim
