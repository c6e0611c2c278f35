#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ssdsim/types.hpp"

namespace ssdsim {

/// Physical organization of the device. Counts are per parent level: a
/// channel holds `packages` packages, a package holds `dies` dies, and so on.
struct Topology {
  std::uint32_t channels = 8;
  std::uint32_t packages = 8;
  std::uint32_t dies = 4;
  std::uint32_t planes = 2;
  std::uint32_t blocks = 1024;  // per plane
  std::uint32_t pages = 256;    // per block
  std::uint32_t page_size = 8192;
  std::uint32_t dma_mhz = 400;
  std::uint32_t dma_width = 1;  // bytes moved per bus cycle
  // Striping permutation, least significant digit first:
  // C = channel, W = package (way), D = die, P = plane.
  std::string order = "CWDP";

  // channel x package x die x plane
  std::uint64_t units() const {
    return std::uint64_t{channels} * packages * dies * planes;
  }
  std::uint64_t total_dies() const {
    return std::uint64_t{channels} * packages * dies;
  }
  std::uint64_t total_pages() const { return units() * blocks * pages; }
  // One FTL block spans the same block index on every unit.
  std::uint64_t superblock_pages() const { return units() * pages; }

  bool operator==(const Topology &) const = default;
};

enum class PageType : std::uint8_t { Lsb, Csb, Msb, MetaLsb, MetaCsb };

std::string_view to_string(PageType type);

struct TimingModel {
  std::uint32_t n_state = 3;  // bits per cell: 1 SLC, 2 MLC, 3 TLC
  std::uint32_t n_meta = 8;
  Tick t_cmd = 250;
  // Indexed by LSB, CSB, MSB. Defaults keep MSB/LSB = 8 and MSB/CSB = 1.3
  // for programs, MSB/LSB = 1.84 and MSB/CSB = 1.37 for reads.
  std::array<Tick, 3> t_read{45'000, 60'438, 82'800};
  std::array<Tick, 3> t_prog{250'000, 1'538'462, 2'000'000};
  Tick t_erase = 3'500'000;

  std::span<const Tick> read_latencies() const { return {t_read.data(), n_state}; }
  std::span<const Tick> prog_latencies() const { return {t_prog.data(), n_state}; }

  bool operator==(const TimingModel &) const = default;
};

struct FirmwarePolicy {
  double op_ratio = 0.2;
  double gc_threshold = 0.05;
  std::uint32_t log_blocks_per_set = 8;
  std::uint32_t blocks_per_set = 1;
  std::uint32_t queue_depth = 32;

  bool operator==(const FirmwarePolicy &) const = default;
};

enum class AccessPattern : std::uint8_t { Sequential, Random };

// Raw [workload] section. Turned into SweepSpec values by the workload module.
struct WorkloadSection {
  AccessPattern pattern = AccessPattern::Sequential;
  std::vector<HostOp> ops{HostOp::Read, HostOp::Write};
  std::vector<std::uint64_t> request_sizes{
      8ull << 10,  16ull << 10, 32ull << 10, 64ull << 10, 128ull << 10,
      256ull << 10, 512ull << 10, 1ull << 20, 2ull << 20,  4ull << 20,
      8ull << 20,  16ull << 20, 32ull << 20};
  std::uint64_t total_bytes = 64ull << 20;
  std::uint32_t queue_depth = 32;
  std::uint64_t seed = 1;
  std::uint64_t span_bytes = 0;  // 0: whole exported capacity
  bool prefill = true;

  bool operator==(const WorkloadSection &) const = default;
};

struct SsdConfig {
  Topology topology;
  TimingModel timing;
  FirmwarePolicy firmware;
  WorkloadSection workload;

  bool operator==(const SsdConfig &) const = default;
};

// Throws ParseError for unreadable/malformed input and ValidationError for
// invariant violations. Missing keys keep their defaults.
SsdConfig load_config(const std::filesystem::path &path);
SsdConfig parse_config(std::string_view text);

// Checks every documented invariant; throws ValidationError naming the key.
void validate(const SsdConfig &config);

// Canonical text form. parse_config(to_ini(c)) == c for any valid c.
std::string to_ini(const SsdConfig &config);

// Human-readable effective configuration plus derived quantities.
std::string describe(const SsdConfig &config);

std::uint64_t total_logical_pages(const Topology &topology,
                                  const FirmwarePolicy &policy);

// ceil(page_size / (dma_mhz * dma_width)) in ns.
Tick page_transfer_ns(const Topology &topology);

// Blocks the GC keeps free: ceil(gc_threshold * blocks), at least one.
std::uint32_t gc_threshold_blocks(const Topology &topology,
                                  const FirmwarePolicy &policy);

}  // namespace ssdsim
