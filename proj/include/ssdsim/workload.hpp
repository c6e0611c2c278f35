#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ssdsim/config.hpp"
#include "ssdsim/types.hpp"

namespace ssdsim {

struct TraceEvent {
  Tick tick = 0;
  HostOp op = HostOp::Read;
  std::uint64_t lba = 0;
  std::uint32_t n_sector = 0;

  bool operator==(const TraceEvent &) const = default;
};

class EventStream {
 public:
  virtual ~EventStream() = default;
  virtual std::optional<TraceEvent> next() = 0;
};

/// Streaming reader for the trace CSV format:
///
///     tick,op,lba,n_sector      (optional header)
///     0,W,0,16
///     100,R,0,16
///
/// op is R or W. Blank lines are skipped. Ticks must not decrease.
class TraceReader final : public EventStream {
 public:
  explicit TraceReader(const std::filesystem::path &path);
  explicit TraceReader(std::istream &in);

  // Throws TraceParseError on a malformed line, OrderError if ticks regress.
  std::optional<TraceEvent> next() override;

  std::size_t line() const { return line_; }

 private:
  std::unique_ptr<std::ifstream> owned_;
  std::istream *in_;
  std::string buffer_;
  std::size_t line_ = 0;
  Tick last_tick_ = 0;
};

std::vector<TraceEvent> parse_trace(const std::filesystem::path &path);

void write_trace(std::ostream &out, const std::vector<TraceEvent> &events);

/// One point of a request-size sweep.
struct SweepPoint {
  AccessPattern pattern = AccessPattern::Sequential;
  HostOp op = HostOp::Read;
  std::uint64_t request_bytes = 8192;
  std::uint64_t total_bytes = 64ull << 20;
  std::uint32_t queue_depth = 32;
  std::uint64_t seed = 1;
  std::uint64_t span_sectors = 0;  // LBAs are drawn from [0, span_sectors)

  std::uint64_t request_sectors() const { return request_bytes / kSectorSize; }
  std::uint64_t request_count() const;
  std::string label() const;  // e.g. "seq_read_64K"
};

struct SweepSpec {
  AccessPattern pattern = AccessPattern::Sequential;
  std::vector<HostOp> ops{HostOp::Read, HostOp::Write};
  std::vector<std::uint64_t> request_sizes;
  std::uint64_t total_bytes = 64ull << 20;
  std::uint32_t queue_depth = 32;
  std::uint64_t seed = 1;
  std::uint64_t span_sectors = 0;

  // Resolves the [workload] section; a zero span means the exported capacity.
  static SweepSpec from(const SsdConfig &config);
  // Op-major, then request size in listed order.
  std::vector<SweepPoint> points() const;
};

/// Deterministic request stream for one sweep point. Sequential requests
/// advance the LBA and wrap at the span; random ones are uniform over the
/// size-aligned offsets in the span. Ticks are all zero; the driver issues
/// closed-loop and stamps arrival times itself.
class SweepGenerator final : public EventStream {
 public:
  explicit SweepGenerator(const SweepPoint &point);
  std::optional<TraceEvent> next() override;

 private:
  SweepPoint point_;
  std::uint64_t slots_;  // aligned request positions within the span
  std::uint64_t emitted_ = 0;
  std::mt19937_64 rng_;
  std::uniform_int_distribution<std::uint64_t> slot_dist_;
};

// Every point of spec, concatenated in points() order.
std::vector<TraceEvent> generate_sweep(const SweepSpec &spec);

std::string format_size(std::uint64_t bytes);

}  // namespace ssdsim
