#include "ssdsim/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "ssdsim/errors.hpp"

namespace ssdsim {

namespace pt = boost::property_tree;

std::string_view to_string(PageType type) {
  switch (type) {
    case PageType::Lsb:
      return "LSB";
    case PageType::Csb:
      return "CSB";
    case PageType::Msb:
      return "MSB";
    case PageType::MetaLsb:
      return "MetaLSB";
    case PageType::MetaCsb:
      return "MetaCSB";
  }
  return "?";
}

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::uint64_t parse_u64(const std::string &key, std::string_view text) {
  auto s = trim(text);
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ValidationError(key, fmt::format("expected an unsigned integer, got '{}'", s));
  }
  return value;
}

std::uint32_t parse_u32(const std::string &key, std::string_view text) {
  auto v = parse_u64(key, text);
  if (v > std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError(key, "value does not fit in 32 bits");
  }
  return static_cast<std::uint32_t>(v);
}

double parse_double(const std::string &key, std::string_view text) {
  auto s = trim(text);
  double value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty() ||
      !std::isfinite(value)) {
    throw ValidationError(key, fmt::format("expected a number, got '{}'", s));
  }
  return value;
}

bool parse_bool(const std::string &key, std::string_view text) {
  auto s = lower(trim(text));
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ValidationError(key, fmt::format("expected a boolean, got '{}'", s));
}

// Byte quantities accept an optional binary suffix: 8K, 32M, 1G.
std::uint64_t parse_bytes(const std::string &key, std::string_view text) {
  auto s = trim(text);
  if (s.empty()) throw ValidationError(key, "empty size");
  std::uint64_t mult = 1;
  switch (std::toupper(static_cast<unsigned char>(s.back()))) {
    case 'K':
      mult = 1ull << 10;
      break;
    case 'M':
      mult = 1ull << 20;
      break;
    case 'G':
      mult = 1ull << 30;
      break;
    default:
      break;
  }
  if (mult != 1) s.pop_back();
  auto v = parse_u64(key, s);
  if (v > std::numeric_limits<std::uint64_t>::max() / mult) {
    throw ValidationError(key, "size overflows 64 bits");
  }
  return v * mult;
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    auto t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

std::string format_bytes(std::uint64_t v) {
  if (v != 0 && v % (1ull << 30) == 0) return fmt::format("{}G", v >> 30);
  if (v != 0 && v % (1ull << 20) == 0) return fmt::format("{}M", v >> 20);
  if (v != 0 && v % (1ull << 10) == 0) return fmt::format("{}K", v >> 10);
  return fmt::format("{}", v);
}

bool checked_mul(std::uint64_t a, std::uint64_t b, std::uint64_t &out) {
  return !__builtin_mul_overflow(a, b, &out);
}

using Setter = void (*)(SsdConfig &, const std::string &key, const std::string &value);

struct KeySpec {
  const char *name;
  Setter set;
};

const std::vector<KeySpec> &key_table() {
  static const std::vector<KeySpec> table{
      {"topology.channels", [](SsdConfig &c, const std::string &k, const std::string &v) { c.topology.channels = parse_u32(k, v); }},
      {"topology.packages", [](SsdConfig &c, const std::string &k, const std::string &v) { c.topology.packages = parse_u32(k, v); }},
      {"topology.dies", [](SsdConfig &c, const std::string &k, const std::string &v) { c.topology.dies = parse_u32(k, v); }},
      {"topology.planes", [](SsdConfig &c, const std::string &k, const std::string &v) { c.topology.planes = parse_u32(k, v); }},
      {"topology.blocks", [](SsdConfig &c, const std::string &k, const std::string &v) { c.topology.blocks = parse_u32(k, v); }},
      {"topology.pages", [](SsdConfig &c, const std::string &k, const std::string &v) { c.topology.pages = parse_u32(k, v); }},
      {"topology.page_size", [](SsdConfig &c, const std::string &k, const std::string &v) { c.topology.page_size = static_cast<std::uint32_t>(std::min<std::uint64_t>(parse_bytes(k, v), std::numeric_limits<std::uint32_t>::max())); }},
      {"topology.dma_mhz", [](SsdConfig &c, const std::string &k, const std::string &v) { c.topology.dma_mhz = parse_u32(k, v); }},
      {"topology.dma_width", [](SsdConfig &c, const std::string &k, const std::string &v) { c.topology.dma_width = parse_u32(k, v); }},
      {"topology.order", [](SsdConfig &c, const std::string &, const std::string &v) { c.topology.order = trim(v); }},
      {"timing.n_state", [](SsdConfig &c, const std::string &k, const std::string &v) { c.timing.n_state = parse_u32(k, v); }},
      {"timing.n_meta", [](SsdConfig &c, const std::string &k, const std::string &v) { c.timing.n_meta = parse_u32(k, v); }},
      {"timing.t_cmd_ns", [](SsdConfig &c, const std::string &k, const std::string &v) { c.timing.t_cmd = parse_u64(k, v); }},
      {"timing.t_read_lsb_ns", [](SsdConfig &c, const std::string &k, const std::string &v) { c.timing.t_read[0] = parse_u64(k, v); }},
      {"timing.t_read_csb_ns", [](SsdConfig &c, const std::string &k, const std::string &v) { c.timing.t_read[1] = parse_u64(k, v); }},
      {"timing.t_read_msb_ns", [](SsdConfig &c, const std::string &k, const std::string &v) { c.timing.t_read[2] = parse_u64(k, v); }},
      {"timing.t_prog_lsb_ns", [](SsdConfig &c, const std::string &k, const std::string &v) { c.timing.t_prog[0] = parse_u64(k, v); }},
      {"timing.t_prog_csb_ns", [](SsdConfig &c, const std::string &k, const std::string &v) { c.timing.t_prog[1] = parse_u64(k, v); }},
      {"timing.t_prog_msb_ns", [](SsdConfig &c, const std::string &k, const std::string &v) { c.timing.t_prog[2] = parse_u64(k, v); }},
      {"timing.t_erase_ns", [](SsdConfig &c, const std::string &k, const std::string &v) { c.timing.t_erase = parse_u64(k, v); }},
      {"firmware.op_ratio", [](SsdConfig &c, const std::string &k, const std::string &v) { c.firmware.op_ratio = parse_double(k, v); }},
      {"firmware.gc_threshold", [](SsdConfig &c, const std::string &k, const std::string &v) { c.firmware.gc_threshold = parse_double(k, v); }},
      {"firmware.log_blocks_per_set", [](SsdConfig &c, const std::string &k, const std::string &v) { c.firmware.log_blocks_per_set = parse_u32(k, v); }},
      {"firmware.blocks_per_set", [](SsdConfig &c, const std::string &k, const std::string &v) { c.firmware.blocks_per_set = parse_u32(k, v); }},
      {"firmware.queue_depth", [](SsdConfig &c, const std::string &k, const std::string &v) { c.firmware.queue_depth = parse_u32(k, v); }},
      {"workload.pattern", [](SsdConfig &c, const std::string &k, const std::string &v) {
         auto s = lower(trim(v));
         if (s == "sequential") c.workload.pattern = AccessPattern::Sequential;
         else if (s == "random") c.workload.pattern = AccessPattern::Random;
         else throw ValidationError(k, fmt::format("expected sequential|random, got '{}'", s));
       }},
      {"workload.op", [](SsdConfig &c, const std::string &k, const std::string &v) {
         c.workload.ops.clear();
         for (const auto &item : split_list(v)) {
           auto s = lower(item);
           if (s == "read") c.workload.ops.push_back(HostOp::Read);
           else if (s == "write") c.workload.ops.push_back(HostOp::Write);
           else throw ValidationError(k, fmt::format("expected read|write, got '{}'", s));
         }
       }},
      {"workload.request_sizes", [](SsdConfig &c, const std::string &k, const std::string &v) {
         c.workload.request_sizes.clear();
         for (const auto &item : split_list(v)) c.workload.request_sizes.push_back(parse_bytes(k, item));
       }},
      {"workload.total_bytes", [](SsdConfig &c, const std::string &k, const std::string &v) { c.workload.total_bytes = parse_bytes(k, v); }},
      {"workload.queue_depth", [](SsdConfig &c, const std::string &k, const std::string &v) { c.workload.queue_depth = parse_u32(k, v); }},
      {"workload.seed", [](SsdConfig &c, const std::string &k, const std::string &v) { c.workload.seed = parse_u64(k, v); }},
      {"workload.span_bytes", [](SsdConfig &c, const std::string &k, const std::string &v) { c.workload.span_bytes = parse_bytes(k, v); }},
      {"workload.prefill", [](SsdConfig &c, const std::string &k, const std::string &v) { c.workload.prefill = parse_bool(k, v); }},
  };
  return table;
}

}  // namespace

SsdConfig parse_config(std::string_view text) {
  // Boost's INI reader only knows ';' comments; accept '#' too without
  // disturbing line numbers.
  std::string normalized;
  normalized.reserve(text.size());
  std::istringstream lines{std::string(text)};
  for (std::string line; std::getline(lines, line);) {
    auto first = line.find_first_not_of(" \t");
    if (first != std::string::npos && line[first] == '#') line[first] = ';';
    normalized += line;
    normalized += '\n';
  }

  pt::ptree tree;
  try {
    std::istringstream in(normalized);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error &e) {
    throw ParseError(fmt::format("line {}: {}", e.line(), e.message()));
  }

  SsdConfig config;
  const auto &table = key_table();
  for (const auto &[section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ParseError(fmt::format("key '{}' outside of a section", section));
    }
    for (const auto &[name, value] : body) {
      auto key = section + "." + name;
      auto it = std::find_if(table.begin(), table.end(),
                             [&](const KeySpec &k) { return key == k.name; });
      if (it == table.end()) throw ValidationError(key, "unknown key");
      it->set(config, key, value.data());
    }
  }
  validate(config);
  return config;
}

SsdConfig load_config(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(fmt::format("cannot open config file '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::uint64_t total_logical_pages(const Topology &topology,
                                  const FirmwarePolicy &policy) {
  const auto total = topology.total_pages();
  const long double exact =
      static_cast<long double>(total) * (1.0L - static_cast<long double>(policy.op_ratio));
  // 5 * (1 - 0.2) lands a hair under 4 in binary floating point.
  const long double nearest = std::nearbyint(exact);
  if (std::fabs(exact - nearest) <= 1e-9L * std::max<long double>(1.0L, exact)) {
    return static_cast<std::uint64_t>(nearest);
  }
  return static_cast<std::uint64_t>(std::floor(exact));
}

Tick page_transfer_ns(const Topology &topology) {
  const std::uint64_t per_us = std::uint64_t{topology.dma_mhz} * topology.dma_width;
  return (std::uint64_t{topology.page_size} * 1000 + per_us - 1) / per_us;
}

std::uint32_t gc_threshold_blocks(const Topology &topology,
                                  const FirmwarePolicy &policy) {
  auto th = static_cast<std::uint32_t>(
      std::ceil(policy.gc_threshold * static_cast<double>(topology.blocks) - 1e-9));
  return std::max<std::uint32_t>(th, 1);
}

void validate(const SsdConfig &config) {
  const auto &t = config.topology;
  const std::pair<const char *, std::uint32_t> counts[] = {
      {"topology.channels", t.channels}, {"topology.packages", t.packages},
      {"topology.dies", t.dies},         {"topology.planes", t.planes},
      {"topology.blocks", t.blocks},     {"topology.pages", t.pages},
      {"topology.dma_mhz", t.dma_mhz},   {"topology.dma_width", t.dma_width}};
  for (const auto &[key, value] : counts) {
    if (value < 1) throw ValidationError(key, "must be >= 1");
  }
  if (t.page_size < 512 || (t.page_size & (t.page_size - 1)) != 0) {
    throw ValidationError("topology.page_size", "must be a power of two >= 512");
  }
  {
    auto sorted = t.order;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != "CDPW") {
      throw ValidationError("topology.order",
                            "must be a permutation of C, W, D, P (e.g. CWDP)");
    }
  }
  std::uint64_t total = 1;
  for (std::uint64_t f : {std::uint64_t{t.channels}, std::uint64_t{t.packages},
                          std::uint64_t{t.dies}, std::uint64_t{t.planes},
                          std::uint64_t{t.blocks}, std::uint64_t{t.pages}}) {
    if (!checked_mul(total, f, total)) {
      throw ValidationError("topology.blocks", "total physical pages overflow the PPN width");
    }
  }
  std::uint64_t bytes = 0;
  if (!checked_mul(total, t.page_size, bytes)) {
    throw ValidationError("topology.page_size", "device capacity overflows 64 bits");
  }

  const auto &tm = config.timing;
  if (tm.n_state < 1 || tm.n_state > 3) {
    throw ValidationError("timing.n_state", "must be 1 (SLC), 2 (MLC) or 3 (TLC)");
  }
  if (tm.n_meta > t.pages) {
    throw ValidationError("timing.n_meta", "cannot exceed pages per block");
  }
  if (tm.t_cmd == 0) throw ValidationError("timing.t_cmd_ns", "must be > 0");
  if (tm.t_erase == 0) throw ValidationError("timing.t_erase_ns", "must be > 0");
  static const char *kRead[] = {"timing.t_read_lsb_ns", "timing.t_read_csb_ns", "timing.t_read_msb_ns"};
  static const char *kProg[] = {"timing.t_prog_lsb_ns", "timing.t_prog_csb_ns", "timing.t_prog_msb_ns"};
  for (std::uint32_t i = 0; i < tm.n_state; ++i) {
    if (tm.t_read[i] == 0) throw ValidationError(kRead[i], "must be > 0");
    if (tm.t_prog[i] == 0) throw ValidationError(kProg[i], "must be > 0");
  }

  const auto &f = config.firmware;
  if (!(f.op_ratio >= 0.0 && f.op_ratio < 1.0)) {
    throw ValidationError("firmware.op_ratio", "must satisfy 0 <= op_ratio < 1");
  }
  if (!(f.gc_threshold > 0.0)) {
    throw ValidationError("firmware.gc_threshold", "must be > 0");
  }
  if (!(f.gc_threshold < f.op_ratio)) {
    throw ValidationError("firmware.gc_threshold", "must be < firmware.op_ratio");
  }
  if (f.log_blocks_per_set < 1) {
    throw ValidationError("firmware.log_blocks_per_set", "must be >= 1");
  }
  if (f.blocks_per_set < 1) {
    throw ValidationError("firmware.blocks_per_set", "must be >= 1");
  }
  if (f.queue_depth < 1) throw ValidationError("firmware.queue_depth", "must be >= 1");

  const auto logical_pages = total_logical_pages(t, f);
  if (logical_pages == 0) {
    throw ValidationError("firmware.op_ratio", "leaves no exported capacity");
  }
  const auto sb = t.superblock_pages();
  const auto logical_blocks = (logical_pages + sb - 1) / sb;
  const auto reserve = std::uint64_t{gc_threshold_blocks(t, f)} + 1;
  if (t.blocks < logical_blocks + reserve) {
    throw ValidationError(
        "firmware.op_ratio",
        fmt::format("{} blocks cannot hold {} logical blocks plus a GC reserve of {}",
                    t.blocks, logical_blocks, reserve));
  }

  const auto &w = config.workload;
  if (w.ops.empty()) throw ValidationError("workload.op", "needs at least one op");
  if (w.request_sizes.empty()) {
    throw ValidationError("workload.request_sizes", "needs at least one size");
  }
  for (auto size : w.request_sizes) {
    if (size == 0 || size % kSectorSize != 0) {
      throw ValidationError("workload.request_sizes",
                            fmt::format("{} is not a positive multiple of 512", size));
    }
  }
  if (w.total_bytes == 0 || w.total_bytes % kSectorSize != 0) {
    throw ValidationError("workload.total_bytes", "must be a positive multiple of 512");
  }
  if (w.span_bytes % kSectorSize != 0) {
    throw ValidationError("workload.span_bytes", "must be a multiple of 512");
  }
  if (w.queue_depth < 1) throw ValidationError("workload.queue_depth", "must be >= 1");
}

std::string to_ini(const SsdConfig &c) {
  std::string out;
  auto add = [&](std::string_view key, const auto &value) {
    out += fmt::format("{} = {}\n", key, value);
  };
  out += "[topology]\n";
  add("channels", c.topology.channels);
  add("packages", c.topology.packages);
  add("dies", c.topology.dies);
  add("planes", c.topology.planes);
  add("blocks", c.topology.blocks);
  add("pages", c.topology.pages);
  add("page_size", c.topology.page_size);
  add("dma_mhz", c.topology.dma_mhz);
  add("dma_width", c.topology.dma_width);
  add("order", c.topology.order);
  out += "\n[timing]\n";
  add("n_state", c.timing.n_state);
  add("n_meta", c.timing.n_meta);
  add("t_cmd_ns", c.timing.t_cmd);
  add("t_read_lsb_ns", c.timing.t_read[0]);
  add("t_read_csb_ns", c.timing.t_read[1]);
  add("t_read_msb_ns", c.timing.t_read[2]);
  add("t_prog_lsb_ns", c.timing.t_prog[0]);
  add("t_prog_csb_ns", c.timing.t_prog[1]);
  add("t_prog_msb_ns", c.timing.t_prog[2]);
  add("t_erase_ns", c.timing.t_erase);
  out += "\n[firmware]\n";
  add("op_ratio", c.firmware.op_ratio);
  add("gc_threshold", c.firmware.gc_threshold);
  add("log_blocks_per_set", c.firmware.log_blocks_per_set);
  add("blocks_per_set", c.firmware.blocks_per_set);
  add("queue_depth", c.firmware.queue_depth);
  out += "\n[workload]\n";
  add("pattern", c.workload.pattern == AccessPattern::Sequential ? "sequential" : "random");
  {
    std::vector<std::string_view> ops;
    for (auto op : c.workload.ops) ops.push_back(to_string(op));
    add("op", fmt::format("{}", fmt::join(ops, ",")));
  }
  {
    std::vector<std::string> sizes;
    for (auto s : c.workload.request_sizes) sizes.push_back(format_bytes(s));
    add("request_sizes", fmt::format("{}", fmt::join(sizes, ",")));
  }
  add("total_bytes", format_bytes(c.workload.total_bytes));
  add("queue_depth", c.workload.queue_depth);
  add("seed", c.workload.seed);
  add("span_bytes", format_bytes(c.workload.span_bytes));
  add("prefill", c.workload.prefill ? "true" : "false");
  return out;
}

std::string describe(const SsdConfig &c) {
  const auto &t = c.topology;
  const auto logical = total_logical_pages(t, c.firmware);
  const auto t_bus = page_transfer_ns(t);
  std::string out = "# effective configuration\n";
  out += to_ini(c);
  out += "\n# derived\n";
  out += fmt::format("physical_pages = {}\n", t.total_pages());
  out += fmt::format("exported_pages = {}\n", logical);
  out += fmt::format("exported_sectors = {}\n", logical * (t.page_size / kSectorSize));
  out += fmt::format("exported_bytes = {}\n", logical * t.page_size);
  out += fmt::format("superblock_pages = {}\n", t.superblock_pages());
  out += fmt::format("gc_threshold_blocks = {}\n", gc_threshold_blocks(t, c.firmware));
  out += fmt::format("page_transfer_ns = {}\n", t_bus);
  out += fmt::format("channel_bandwidth_bound_mbps = {:.3f}\n",
                     static_cast<double>(t.page_size) * 1000.0 / static_cast<double>(t_bus));
  return out;
}

}  // namespace ssdsim
