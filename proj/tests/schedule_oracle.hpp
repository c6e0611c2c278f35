#pragma once

// Tick-by-tick reference scheduler. Occupancy is a plain boolean per tick
// per resource, and every candidate start is tried in order, so it shares
// no code or data structures with the calendar-based scheduler.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ssdsim/pal.hpp"

namespace ssdsim::test {

class TickOracle {
 public:
  TickOracle(std::uint32_t channels, std::uint32_t dies, Tick horizon)
      : horizon_(horizon),
        channel_(channels, std::vector<bool>(horizon, false)),
        die_(dies, std::vector<bool>(horizon, false)) {}

  // Same contract as timeline_schedule.
  Placement schedule(const ScheduleRequest &r) {
    const auto &ph = r.phases;
    for (Tick s = r.issue_tick;; ++s) {
      if (r.op == FlashOp::Read) {
        if (!free(channel_[r.channel], s, s + ph.cmd)) continue;
        Tick b = s + ph.cmd + ph.cell;
        while (!free(channel_[r.channel], b, b + ph.bus)) ++b;
        if (!free(die_[r.die], s, b + ph.bus)) continue;
        mark(channel_[r.channel], s, s + ph.cmd);
        mark(channel_[r.channel], b, b + ph.bus);
        mark(die_[r.die], s, b + ph.bus);
        return {s, b, b + ph.bus};
      }
      const Tick chan_end = s + ph.cmd + (r.op == FlashOp::Write ? ph.bus : 0);
      if (!free(channel_[r.channel], s, chan_end)) continue;
      if (!free(die_[r.die], s, s + ph.total())) continue;
      mark(channel_[r.channel], s, chan_end);
      mark(die_[r.die], s, s + ph.total());
      return {s, s + ph.cmd, s + ph.total()};
    }
  }

 private:
  bool free(const std::vector<bool> &busy, Tick begin, Tick end) const {
    for (Tick t = begin; t < end; ++t) {
      if (t >= horizon_) throw std::out_of_range("oracle horizon too small");
      if (busy[t]) return false;
    }
    return true;
  }
  static void mark(std::vector<bool> &busy, Tick begin, Tick end) {
    for (Tick t = begin; t < end; ++t) busy[t] = true;
  }

  Tick horizon_;
  std::vector<std::vector<bool>> channel_;
  std::vector<std::vector<bool>> die_;
};

}  // namespace ssdsim::test
