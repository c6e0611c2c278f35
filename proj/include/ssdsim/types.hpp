#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace ssdsim {

// Simulation time in nanoseconds.
using Tick = std::uint64_t;
using Lpn = std::uint64_t;
using Ppn = std::uint64_t;
using BlockId = std::uint32_t;
using RequestId = std::uint64_t;
using SubRequestId = std::uint64_t;

inline constexpr Tick kTickMax = std::numeric_limits<Tick>::max();
inline constexpr BlockId kNoBlock = std::numeric_limits<BlockId>::max();
inline constexpr std::uint32_t kSectorSize = 512;

enum class HostOp : std::uint8_t { Read, Write };

// Kinds of page-level work the FTL hands to PAL.
enum class SubOp : std::uint8_t { Read, Write, GcRead, GcWrite, Erase };

// The three flash transaction shapes PAL knows how to time.
enum class FlashOp : std::uint8_t { Read, Write, Erase };

constexpr FlashOp flash_op_of(SubOp op) {
  switch (op) {
    case SubOp::Read:
    case SubOp::GcRead:
      return FlashOp::Read;
    case SubOp::Write:
    case SubOp::GcWrite:
      return FlashOp::Write;
    case SubOp::Erase:
      return FlashOp::Erase;
  }
  return FlashOp::Read;
}

constexpr std::string_view to_string(HostOp op) {
  return op == HostOp::Read ? "read" : "write";
}

constexpr std::string_view to_string(SubOp op) {
  switch (op) {
    case SubOp::Read:
      return "read";
    case SubOp::Write:
      return "write";
    case SubOp::GcRead:
      return "gc_read";
    case SubOp::GcWrite:
      return "gc_write";
    case SubOp::Erase:
      return "erase";
  }
  return "?";
}

}  // namespace ssdsim
