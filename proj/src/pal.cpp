#include "ssdsim/pal.hpp"

#include <algorithm>
#include <iterator>

#include <fmt/format.h>

#include "ssdsim/errors.hpp"

namespace ssdsim {

namespace {

std::uint32_t radix_of(char digit, const Topology &t) {
  switch (digit) {
    case 'C':
      return t.channels;
    case 'W':
      return t.packages;
    case 'D':
      return t.dies;
    default:
      return t.planes;
  }
}

std::uint32_t &field_of(char digit, PhysicalPageAddr &a) {
  switch (digit) {
    case 'C':
      return a.channel;
    case 'W':
      return a.package;
    case 'D':
      return a.die;
    default:
      return a.plane;
  }
}

}  // namespace

PhysicalPageAddr ppn_disassemble(Ppn ppn, const Topology &topology) {
  if (ppn >= topology.total_pages()) {
    throw OutOfRange(fmt::format("PPN {} beyond {} physical pages", ppn,
                                 topology.total_pages()));
  }
  PhysicalPageAddr addr;
  for (char digit : topology.order) {
    const auto radix = radix_of(digit, topology);
    field_of(digit, addr) = static_cast<std::uint32_t>(ppn % radix);
    ppn /= radix;
  }
  addr.page = static_cast<std::uint32_t>(ppn % topology.pages);
  addr.block = static_cast<std::uint32_t>(ppn / topology.pages);
  return addr;
}

Ppn ppn_assemble(const PhysicalPageAddr &addr, const Topology &topology) {
  Ppn ppn = std::uint64_t{addr.block} * topology.pages + addr.page;
  auto copy = addr;
  for (auto it = topology.order.rbegin(); it != topology.order.rend(); ++it) {
    ppn = ppn * radix_of(*it, topology) + field_of(*it, copy);
  }
  return ppn;
}

std::uint32_t die_index(const PhysicalPageAddr &addr, const Topology &topology) {
  return (addr.channel * topology.packages + addr.package) * topology.dies + addr.die;
}

PageType classify_page(std::uint32_t page_index, const TimingModel &timing,
                       const Topology &topology) {
  if (page_index < timing.n_meta) {
    if (page_index < 5 || timing.n_state == 1) return PageType::MetaLsb;
    return PageType::MetaCsb;
  }
  const auto f = ((page_index - timing.n_meta) / topology.planes) % timing.n_state;
  if (f == 0) return PageType::Lsb;
  if (f == 1) return PageType::Csb;
  return PageType::Msb;
}

Phases transaction_latency(FlashOp op, PageType type, const TimingModel &timing,
                           const Topology &topology) {
  std::size_t slot = 0;
  switch (type) {
    case PageType::Lsb:
    case PageType::MetaLsb:
      slot = 0;
      break;
    case PageType::Csb:
    case PageType::MetaCsb:
      slot = 1;
      break;
    case PageType::Msb:
      slot = 2;
      break;
  }
  switch (op) {
    case FlashOp::Read:
      return {timing.t_cmd, page_transfer_ns(topology), timing.t_read[slot]};
    case FlashOp::Write:
      return {timing.t_cmd, page_transfer_ns(topology), timing.t_prog[slot]};
    case FlashOp::Erase:
      return {timing.t_cmd, 0, timing.t_erase};
  }
  return {};
}

Tick ResourceCalendar::earliest_free(Tick from, Tick duration) const {
  if (duration == 0) return from;
  Tick t = from;
  auto it = slots_.upper_bound(t);
  if (it != slots_.begin()) {
    auto prev = std::prev(it);
    if (prev->second > t) t = prev->second;
  }
  for (; it != slots_.end(); ++it) {
    if (it->first >= t + duration) break;
    t = std::max(t, it->second);
  }
  return t;
}

bool ResourceCalendar::is_free(Tick begin, Tick end) const {
  return first_conflict_end(begin, end) == begin;
}

Tick ResourceCalendar::first_conflict_end(Tick begin, Tick end) const {
  if (begin >= end) return begin;
  auto it = slots_.upper_bound(begin);
  if (it != slots_.begin()) {
    auto prev = std::prev(it);
    if (prev->second > begin) return prev->second;
  }
  if (it != slots_.end() && it->first < end) return it->second;
  return begin;
}

void ResourceCalendar::reserve(Tick begin, Tick end) {
  if (begin >= end) return;
  if (!is_free(begin, end)) {
    throw InvariantViolation(
        fmt::format("double booking of resource at [{}, {})", begin, end));
  }
  busy_time_ += end - begin;
  busy_until_ = std::max(busy_until_, end);
  auto next = slots_.lower_bound(begin);
  if (next != slots_.begin()) {
    auto prev = std::prev(next);
    if (prev->second == begin) {
      begin = prev->first;
      slots_.erase(prev);
    }
  }
  if (next != slots_.end() && next->first == end) {
    end = next->second;
    slots_.erase(next);
  }
  slots_.emplace(begin, end);
}

void ResourceCalendar::retire_before(Tick horizon) {
  auto it = slots_.begin();
  while (it != slots_.end() && it->second <= horizon) it = slots_.erase(it);
}

Timeline::Timeline(std::uint32_t channels, std::uint32_t dies)
    : channels_(channels), dies_(dies) {}

void Timeline::retire_before(Tick horizon) {
  for (auto &c : channels_) c.retire_before(horizon);
  for (auto &d : dies_) d.retire_before(horizon);
}

Tick TransactionRecord::bus_begin() const {
  switch (flash_op()) {
    case FlashOp::Read:
      return finish_tick - phases.bus;
    case FlashOp::Write:
      return start_tick + phases.cmd;
    case FlashOp::Erase:
      return start_tick + phases.cmd;
  }
  return start_tick;
}

Tick TransactionRecord::cell_begin() const {
  switch (flash_op()) {
    case FlashOp::Read:
    case FlashOp::Erase:
      return start_tick + phases.cmd;
    case FlashOp::Write:
      return start_tick + phases.cmd + phases.bus;
  }
  return start_tick;
}

Placement timeline_schedule(const ScheduleRequest &request, Timeline &timeline) {
  auto &channel = timeline.channel(request.channel);
  auto &die = timeline.die(request.die);
  const auto &ph = request.phases;
  Tick s = request.issue_tick;

  if (request.op != FlashOp::Read) {
    // Writes keep the bus for command and data-in back to back.
    const Tick chan_len = request.op == FlashOp::Write ? ph.cmd + ph.bus : ph.cmd;
    const Tick die_len = ph.total();
    for (;;) {
      s = channel.earliest_free(s, chan_len);
      const Tick conflict = die.first_conflict_end(s, s + die_len);
      if (conflict != s) {
        s = conflict;
        continue;
      }
      channel.reserve(s, s + chan_len);
      die.reserve(s, s + die_len);
      return {s, s + ph.cmd, s + die_len};
    }
  }

  for (;;) {
    s = channel.earliest_free(s, ph.cmd);
    const Tick cell_end = s + ph.cmd + ph.cell;
    Tick conflict = die.first_conflict_end(s, cell_end);
    if (conflict != s) {
      s = conflict;
      continue;
    }
    const Tick b = channel.earliest_free(cell_end, ph.bus);
    conflict = die.first_conflict_end(s, b + ph.bus);
    if (conflict != s) {
      s = conflict;
      continue;
    }
    channel.reserve(s, s + ph.cmd);
    channel.reserve(b, b + ph.bus);
    die.reserve(s, b + ph.bus);
    return {s, b, b + ph.bus};
  }
}

Pal::Pal(const Topology &topology, const TimingModel &timing)
    : topology_(topology),
      timing_(timing),
      timeline_(topology.channels,
                static_cast<std::uint32_t>(topology.total_dies())) {}

TransactionRecord Pal::submit(RequestId request_id, SubOp op, Ppn ppn, Tick issue_tick) {
  TransactionRecord rec;
  rec.sub_id = next_sub_id_++;
  rec.request_id = request_id;
  rec.op = op;
  rec.ppn = ppn;
  rec.addr = ppn_disassemble(ppn, topology_);
  rec.die = die_index(rec.addr, topology_);
  rec.page_type = classify_page(rec.addr.page, timing_, topology_);
  rec.phases = transaction_latency(rec.flash_op(), rec.page_type, timing_, topology_);
  rec.issue_tick = issue_tick;

  const auto placed = timeline_schedule(
      {rec.flash_op(), rec.addr.channel, rec.die, issue_tick, rec.phases}, timeline_);
  rec.start_tick = placed.start;
  rec.finish_tick = placed.finish;
  if (observer_) observer_(rec);
  return rec;
}

}  // namespace ssdsim
