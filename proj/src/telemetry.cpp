#include "ssdsim/telemetry.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "ssdsim/workload.hpp"

namespace ssdsim {

Reservoir::Reservoir(std::size_t capacity, std::uint64_t seed)
    : capacity_(capacity), rng_(seed) {}

void Reservoir::add(Tick value) {
  ++seen_;
  if (samples_.size() < capacity_) {
    samples_.push_back(value);
    return;
  }
  std::uniform_int_distribution<std::uint64_t> pick(0, seen_ - 1);
  const auto j = pick(rng_);
  if (j < capacity_) samples_[j] = value;
}

Tick percentile(std::vector<Tick> samples, double p) {
  if (samples.empty()) return 0;
  const auto n = samples.size();
  auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(samples.begin(), samples.begin() + (rank - 1), samples.end());
  return samples[rank - 1];
}

std::vector<WearRow> wear_snapshot(const MappingState &mapping) {
  std::vector<WearRow> rows;
  const auto blocks = mapping.blocks();
  rows.reserve(blocks.size());
  for (BlockId id = 0; id < blocks.size(); ++id) {
    rows.push_back({id, blocks[id].erase_count, blocks[id].invalid_count()});
  }
  return rows;
}

Telemetry::Telemetry(std::uint32_t channels, std::uint32_t dies,
                     std::size_t reservoir_capacity)
    : reservoir_capacity_(reservoir_capacity), channel_busy_(channels, 0), die_busy_(dies, 0) {}

void Telemetry::accumulate(const CompletionRecord &record) {
  auto [it, inserted] = buckets_.try_emplace({record.op, record.bytes});
  auto &b = it->second;
  if (inserted) b.reservoir = Reservoir(reservoir_capacity_);
  ++b.count;
  b.bytes += record.bytes;
  b.latency_sum += record.device_latency;
  b.queueing_sum += record.breakdown.queueing;
  b.firmware_sum += record.breakdown.firmware;
  b.flash_sum += record.breakdown.flash;
  b.min = std::min(b.min, record.device_latency);
  b.max = std::max(b.max, record.device_latency);
  b.first_arrival = std::min(b.first_arrival, record.arrival_tick);
  b.last_finish = std::max(b.last_finish, record.finish_tick);
  b.reservoir.add(record.device_latency);
  ++requests_;
  span_begin_ = std::min(span_begin_, record.arrival_tick);
  span_end_ = std::max(span_end_, record.finish_tick);
}

void Telemetry::accumulate(const TransactionRecord &record) {
  ++txn_counts_[static_cast<std::size_t>(record.op)];
  channel_busy_.at(record.addr.channel) += record.phases.cmd + record.phases.bus;
  die_busy_.at(record.die) += record.finish_tick - record.start_tick;
  span_begin_ = std::min(span_begin_, record.start_tick);
  span_end_ = std::max(span_end_, record.finish_tick);
}

void Telemetry::set_ftl_state(const MappingState &mapping) {
  ftl_ = mapping.stats();
  erase_histogram_.clear();
  for (const auto &b : mapping.blocks()) ++erase_histogram_[b.erase_count];
}

StatsReport Telemetry::report() const {
  StatsReport r;
  r.requests = requests_;
  for (const auto &[key, b] : buckets_) {
    RequestBucketStats s;
    s.op = key.first;
    s.request_bytes = key.second;
    s.count = b.count;
    s.bytes = b.bytes;
    const auto n = static_cast<long double>(b.count);
    s.mean_ns = static_cast<double>(static_cast<long double>(b.latency_sum) / n);
    s.mean_queueing_ns = static_cast<double>(static_cast<long double>(b.queueing_sum) / n);
    s.mean_firmware_ns = static_cast<double>(static_cast<long double>(b.firmware_sum) / n);
    s.mean_flash_ns = static_cast<double>(static_cast<long double>(b.flash_sum) / n);
    s.median_ns = percentile(b.reservoir.samples(), 0.5);
    s.p99_ns = percentile(b.reservoir.samples(), 0.99);
    s.min_ns = b.min;
    s.max_ns = b.max;
    s.first_arrival = b.first_arrival;
    s.last_finish = b.last_finish;
    const Tick span = b.last_finish - b.first_arrival;
    s.bandwidth_mbps = span == 0 ? 0.0
                                 : static_cast<double>(b.bytes) * 1000.0 /
                                       static_cast<double>(span);
    r.buckets.push_back(s);
  }

  r.host_read_pages = txn_counts_[static_cast<std::size_t>(SubOp::Read)];
  r.host_write_pages = txn_counts_[static_cast<std::size_t>(SubOp::Write)];
  r.gc_read_pages = txn_counts_[static_cast<std::size_t>(SubOp::GcRead)];
  r.gc_write_pages = txn_counts_[static_cast<std::size_t>(SubOp::GcWrite)];
  r.erase_transactions = txn_counts_[static_cast<std::size_t>(SubOp::Erase)];
  r.zero_writes = r.host_write_pages == 0;
  r.write_amplification =
      r.zero_writes ? 1.0
                    : static_cast<double>(r.host_write_pages + r.gc_write_pages) /
                          static_cast<double>(r.host_write_pages);

  r.ftl = ftl_;
  r.erase_histogram = erase_histogram_;
  r.span_begin = span_begin_ == kTickMax ? 0 : span_begin_;
  r.span_end = span_end_;
  const Tick span = r.span_end - r.span_begin;
  auto fraction = [span](Tick busy) {
    return span == 0 ? 0.0 : static_cast<double>(busy) / static_cast<double>(span);
  };
  for (auto busy : channel_busy_) r.channel_busy.push_back(fraction(busy));
  for (auto busy : die_busy_) r.die_busy.push_back(fraction(busy));
  return r;
}

namespace {

struct Row {
  std::string section;
  std::string key;
  std::string field;
  std::string value;
};

std::string num(double v) { return fmt::format("{:.6f}", v); }
std::string num(std::uint64_t v) { return fmt::format("{}", v); }

std::vector<Row> report_rows(const StatsReport &r) {
  std::vector<Row> rows;
  auto add = [&rows](std::string section, std::string key, std::string field,
                     std::string value) {
    rows.push_back({std::move(section), std::move(key), std::move(field), std::move(value)});
  };

  add("run", "-", "requests", num(r.requests));
  add("run", "-", "span_begin_ns", num(r.span_begin));
  add("run", "-", "span_end_ns", num(r.span_end));

  for (const auto &b : r.buckets) {
    const auto key = fmt::format("{}_{}", to_string(b.op), format_size(b.request_bytes));
    add("latency", key, "count", num(b.count));
    add("latency", key, "bytes", num(b.bytes));
    add("latency", key, "mean_ns", num(b.mean_ns));
    add("latency", key, "median_ns", num(b.median_ns));
    add("latency", key, "p99_ns", num(b.p99_ns));
    add("latency", key, "min_ns", num(b.min_ns));
    add("latency", key, "max_ns", num(b.max_ns));
    add("latency", key, "mean_queueing_ns", num(b.mean_queueing_ns));
    add("latency", key, "mean_firmware_ns", num(b.mean_firmware_ns));
    add("latency", key, "mean_flash_ns", num(b.mean_flash_ns));
    add("latency", key, "first_arrival_ns", num(b.first_arrival));
    add("latency", key, "last_finish_ns", num(b.last_finish));
    add("latency", key, "bandwidth_mbps", num(b.bandwidth_mbps));
  }

  add("flash", "-", "host_read_pages", num(r.host_read_pages));
  add("flash", "-", "host_write_pages", num(r.host_write_pages));
  add("flash", "-", "gc_read_pages", num(r.gc_read_pages));
  add("flash", "-", "gc_write_pages", num(r.gc_write_pages));
  add("flash", "-", "erase_transactions", num(r.erase_transactions));

  add("gc", "-", "invocations", num(r.ftl.gc_invocations));
  add("gc", "-", "victims", num(r.ftl.gc_victims));
  add("gc", "-", "pages_moved", num(r.ftl.pages_moved));
  add("gc", "-", "compactions", num(r.ftl.compactions));
  add("gc", "-", "data_merges", num(r.ftl.data_merges));
  add("gc", "-", "log_merges", num(r.ftl.log_merges));
  add("gc", "-", "block_erases", num(r.ftl.erases));
  add("gc", "-", "write_amplification", num(r.write_amplification));
  add("gc", "-", "zero_writes", num(std::uint64_t{r.zero_writes}));

  for (const auto &[count, blocks] : r.erase_histogram) {
    add("erase_histogram", num(std::uint64_t{count}), "blocks", num(blocks));
  }
  for (std::size_t c = 0; c < r.channel_busy.size(); ++c) {
    add("channel", num(std::uint64_t{c}), "busy_fraction", num(r.channel_busy[c]));
  }
  for (std::size_t d = 0; d < r.die_busy.size(); ++d) {
    add("die", num(std::uint64_t{d}), "busy_fraction", num(r.die_busy[d]));
  }
  return rows;
}

}  // namespace

void write_report_csv(std::ostream &out, const std::string &point,
                      const StatsReport &report, bool header) {
  if (header) out << "point,section,key,field,value\n";
  for (const auto &row : report_rows(report)) {
    out << fmt::format("{},{},{},{},{}\n", point, row.section, row.key, row.field, row.value);
  }
}

void write_report_human(std::ostream &out, const std::string &point,
                        const StatsReport &report) {
  out << fmt::format("== {} ==\n", point);
  std::string group;
  for (const auto &row : report_rows(report)) {
    const auto heading = row.key == "-" ? row.section : row.section + " " + row.key;
    if (heading != group) {
      out << fmt::format("{}\n", heading);
      group = heading;
    }
    out << fmt::format("  {:<20} {}\n", row.field, row.value);
  }
  out << "\n";
}

void write_wear_csv(std::ostream &out, const std::string &point,
                    const std::vector<WearRow> &rows, bool header) {
  if (header) out << "point,block_id,erase_count,invalid_count\n";
  for (const auto &row : rows) {
    out << fmt::format("{},{},{},{}\n", point, row.block, row.erase_count, row.invalid_count);
  }
}

}  // namespace ssdsim
