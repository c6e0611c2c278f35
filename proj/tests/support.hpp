#pragma once

// Shared fixtures for the test binaries: small device builders and a tiny
// seeded generator for property tests.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "ssdsim/config.hpp"

namespace ssdsim::test {

inline std::filesystem::path source_dir() { return SSDSIM_SOURCE_DIR; }

// One channel/package/die/plane unless overridden.
inline SsdConfig small_device(std::uint32_t blocks = 64, std::uint32_t pages = 16) {
  SsdConfig c;
  c.topology.channels = 1;
  c.topology.packages = 1;
  c.topology.dies = 1;
  c.topology.planes = 1;
  c.topology.blocks = blocks;
  c.topology.pages = pages;
  c.timing.n_meta = std::min(c.timing.n_meta, pages);
  return c;
}

/// Seeded case generator. Property tests draw everything from one of these
/// so a failing case is reproduced by its seed alone.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng_);
  }
  double real(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }
  template <typename T>
  const T &pick(const std::vector<T> &items) {
    return items[uniform(0, items.size() - 1)];
  }

 private:
  std::mt19937_64 rng_;
};

// Runs `body(gen)` for `cases` seeds derived from `base`.
template <typename F>
void for_all(std::uint64_t base, int cases, F &&body) {
  for (int i = 0; i < cases; ++i) {
    Gen gen(base * 1'000'003 + static_cast<std::uint64_t>(i));
    body(gen, i);
  }
}

inline std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace ssdsim::test
