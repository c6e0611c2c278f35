#include "ssdsim/workload.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <string_view>

#include <fmt/format.h>

#include "ssdsim/errors.hpp"

namespace ssdsim {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <typename T>
bool parse_uint(std::string_view s, T &out) {
  s = trim(s);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

TraceReader::TraceReader(const std::filesystem::path &path)
    : owned_(std::make_unique<std::ifstream>(path)), in_(owned_.get()) {
  if (!*owned_) {
    throw TraceParseError(0, fmt::format("cannot open trace '{}'", path.string()));
  }
}

TraceReader::TraceReader(std::istream &in) : in_(&in) {}

std::optional<TraceEvent> TraceReader::next() {
  while (std::getline(*in_, buffer_)) {
    ++line_;
    const auto text = trim(buffer_);
    if (text.empty()) continue;

    std::string_view fields[4];
    std::size_t count = 0;
    std::string_view rest = text;
    for (;;) {
      const auto comma = rest.find(',');
      if (count == 4) {
        count = 5;
        break;
      }
      fields[count++] = trim(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (line_ == 1 && fields[0] == "tick") continue;
    if (count != 4) {
      throw TraceParseError(line_, fmt::format("expected 4 fields, got '{}'", text));
    }

    TraceEvent ev;
    if (!parse_uint(fields[0], ev.tick)) {
      throw TraceParseError(line_, fmt::format("bad tick '{}'", fields[0]));
    }
    if (fields[1] == "R" || fields[1] == "r") {
      ev.op = HostOp::Read;
    } else if (fields[1] == "W" || fields[1] == "w") {
      ev.op = HostOp::Write;
    } else {
      throw TraceParseError(line_, fmt::format("bad op '{}' (expected R or W)", fields[1]));
    }
    if (!parse_uint(fields[2], ev.lba)) {
      throw TraceParseError(line_, fmt::format("bad lba '{}'", fields[2]));
    }
    if (!parse_uint(fields[3], ev.n_sector) || ev.n_sector == 0) {
      throw TraceParseError(line_, fmt::format("bad sector count '{}'", fields[3]));
    }
    if (ev.tick < last_tick_) {
      throw OrderError(line_, fmt::format("tick {} is earlier than previous tick {}",
                                          ev.tick, last_tick_));
    }
    last_tick_ = ev.tick;
    return ev;
  }
  if (in_->bad()) throw TraceParseError(line_, "read error");
  return std::nullopt;
}

std::vector<TraceEvent> parse_trace(const std::filesystem::path &path) {
  TraceReader reader(path);
  std::vector<TraceEvent> out;
  while (auto ev = reader.next()) out.push_back(*ev);
  return out;
}

void write_trace(std::ostream &out, const std::vector<TraceEvent> &events) {
  out << "tick,op,lba,n_sector\n";
  for (const auto &e : events) {
    out << fmt::format("{},{},{},{}\n", e.tick, e.op == HostOp::Read ? 'R' : 'W', e.lba,
                       e.n_sector);
  }
}

std::string format_size(std::uint64_t bytes) {
  if (bytes != 0 && bytes % (1ull << 30) == 0) return fmt::format("{}G", bytes >> 30);
  if (bytes != 0 && bytes % (1ull << 20) == 0) return fmt::format("{}M", bytes >> 20);
  if (bytes != 0 && bytes % (1ull << 10) == 0) return fmt::format("{}K", bytes >> 10);
  return fmt::format("{}", bytes);
}

std::uint64_t SweepPoint::request_count() const {
  return std::max<std::uint64_t>(1, total_bytes / request_bytes);
}

std::string SweepPoint::label() const {
  return fmt::format("{}_{}_{}", pattern == AccessPattern::Sequential ? "seq" : "rand",
                     to_string(op), format_size(request_bytes));
}

SweepSpec SweepSpec::from(const SsdConfig &config) {
  const auto &w = config.workload;
  const std::uint64_t capacity = total_logical_pages(config.topology, config.firmware) *
                                 (config.topology.page_size / kSectorSize);
  SweepSpec spec;
  spec.pattern = w.pattern;
  spec.ops = w.ops;
  spec.request_sizes = w.request_sizes;
  spec.total_bytes = w.total_bytes;
  spec.queue_depth = w.queue_depth;
  spec.seed = w.seed;
  spec.span_sectors = w.span_bytes == 0 ? capacity : w.span_bytes / kSectorSize;
  if (spec.span_sectors > capacity) {
    throw ValidationError("workload.span_bytes", "exceeds the exported capacity");
  }
  for (auto size : spec.request_sizes) {
    if (size / kSectorSize > spec.span_sectors) {
      throw ValidationError("workload.request_sizes",
                            fmt::format("{} does not fit in the span", format_size(size)));
    }
  }
  return spec;
}

std::vector<SweepPoint> SweepSpec::points() const {
  std::vector<SweepPoint> out;
  for (auto op : ops) {
    for (auto size : request_sizes) {
      out.push_back({pattern, op, size, total_bytes, queue_depth, seed, span_sectors});
    }
  }
  return out;
}

SweepGenerator::SweepGenerator(const SweepPoint &point)
    : point_(point), slots_(point.span_sectors / point.request_sectors()) {
  // Each point gets its own stream so adding a size to a sweep does not
  // perturb the others.
  std::seed_seq seq{point.seed, point.request_bytes, static_cast<std::uint64_t>(point.op),
                    static_cast<std::uint64_t>(point.pattern)};
  rng_.seed(seq);
  slot_dist_ = std::uniform_int_distribution<std::uint64_t>(0, slots_ == 0 ? 0 : slots_ - 1);
}

std::optional<TraceEvent> SweepGenerator::next() {
  if (emitted_ >= point_.request_count() || slots_ == 0) return std::nullopt;
  const auto sectors = point_.request_sectors();
  const std::uint64_t slot = point_.pattern == AccessPattern::Sequential
                                 ? emitted_ % slots_
                                 : slot_dist_(rng_);
  ++emitted_;
  return TraceEvent{0, point_.op, slot * sectors, static_cast<std::uint32_t>(sectors)};
}

std::vector<TraceEvent> generate_sweep(const SweepSpec &spec) {
  std::vector<TraceEvent> out;
  for (const auto &point : spec.points()) {
    SweepGenerator gen(point);
    while (auto ev = gen.next()) out.push_back(*ev);
  }
  return out;
}

}  // namespace ssdsim
