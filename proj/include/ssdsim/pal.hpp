#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "ssdsim/config.hpp"
#include "ssdsim/types.hpp"

namespace ssdsim {

struct PhysicalPageAddr {
  std::uint32_t channel = 0;
  std::uint32_t package = 0;
  std::uint32_t die = 0;
  std::uint32_t plane = 0;
  std::uint32_t block = 0;
  std::uint32_t page = 0;

  bool operator==(const PhysicalPageAddr &) const = default;
};

// Striping follows topology.order for the unit digits, then page, then
// block, so consecutive PPNs walk across channels first by default.
// Throws OutOfRange for ppn >= total pages.
PhysicalPageAddr ppn_disassemble(Ppn ppn, const Topology &topology);
Ppn ppn_assemble(const PhysicalPageAddr &addr, const Topology &topology);

// Flat die index: (channel * packages + package) * dies + die.
std::uint32_t die_index(const PhysicalPageAddr &addr, const Topology &topology);

// Latency class of a page within its block. The first min(5, n_meta)
// pages behave as LSB, the rest of the meta pages as CSB; beyond that the
// class cycles every n_plane pages through the n_state page types.
PageType classify_page(std::uint32_t page_index, const TimingModel &timing,
                       const Topology &topology);

struct Phases {
  Tick cmd = 0;
  Tick bus = 0;
  Tick cell = 0;

  Tick total() const { return cmd + bus + cell; }
  bool operator==(const Phases &) const = default;
};

Phases transaction_latency(FlashOp op, PageType type, const TimingModel &timing,
                           const Topology &topology);

/// Non-overlapping reservations of one resource (a channel bus or a die).
///
/// Reservations may be placed into any gap, so later-issued work can use
/// idle time left before earlier reservations. Everything ending at or
/// before the retire horizon is dropped.
class ResourceCalendar {
 public:
  // Earliest t >= from such that [t, t + duration) is free.
  Tick earliest_free(Tick from, Tick duration) const;
  bool is_free(Tick begin, Tick end) const;
  // If [begin, end) overlaps a reservation, the end of the first one.
  Tick first_conflict_end(Tick begin, Tick end) const;

  void reserve(Tick begin, Tick end);
  void retire_before(Tick horizon);

  Tick busy_until() const { return busy_until_; }
  Tick busy_time() const { return busy_time_; }
  std::size_t size() const { return slots_.size(); }

 private:
  std::map<Tick, Tick> slots_;  // begin -> end
  Tick busy_until_ = 0;
  Tick busy_time_ = 0;
};

/// Per-resource occupancy for the whole device.
class Timeline {
 public:
  Timeline() = default;
  Timeline(std::uint32_t channels, std::uint32_t dies);

  ResourceCalendar &channel(std::uint32_t c) { return channels_.at(c); }
  const ResourceCalendar &channel(std::uint32_t c) const { return channels_.at(c); }
  ResourceCalendar &die(std::uint32_t d) { return dies_.at(d); }
  const ResourceCalendar &die(std::uint32_t d) const { return dies_.at(d); }

  std::uint32_t channel_count() const { return static_cast<std::uint32_t>(channels_.size()); }
  std::uint32_t die_count() const { return static_cast<std::uint32_t>(dies_.size()); }

  Tick channel_busy_until(std::uint32_t c) const { return channels_.at(c).busy_until(); }
  Tick die_busy_until(std::uint32_t d) const { return dies_.at(d).busy_until(); }

  void retire_before(Tick horizon);

 private:
  std::vector<ResourceCalendar> channels_;
  std::vector<ResourceCalendar> dies_;
};

struct TransactionRecord {
  SubRequestId sub_id = 0;
  RequestId request_id = 0;
  SubOp op = SubOp::Read;
  Ppn ppn = 0;
  PhysicalPageAddr addr;
  std::uint32_t die = 0;  // flat die index
  PageType page_type = PageType::Lsb;
  Tick issue_tick = 0;
  Tick start_tick = 0;   // command phase begins
  Tick finish_tick = 0;  // last phase ends
  Phases phases;

  FlashOp flash_op() const { return flash_op_of(op); }
  // Channel-held intervals, in time order.
  Tick cmd_begin() const { return start_tick; }
  Tick bus_begin() const;
  Tick cell_begin() const;
};

/// What the timeline needs to place one flash transaction.
struct ScheduleRequest {
  FlashOp op = FlashOp::Read;
  std::uint32_t channel = 0;
  std::uint32_t die = 0;  // flat die index
  Tick issue_tick = 0;
  Phases phases;
};

struct Placement {
  Tick start = 0;      // command start
  Tick bus_start = 0;  // data transfer start (== cmd end for writes)
  Tick finish = 0;
};

// Reads run cmd -> cell -> bus, writes cmd -> bus -> cell, erases cmd ->
// cell. The channel is held for cmd and bus; the die from cmd start until
// the transaction finishes. Picks the earliest feasible start, and for
// reads the earliest bus slot after the cell phase.
Placement timeline_schedule(const ScheduleRequest &request, Timeline &timeline);

/// Parallelism abstraction layer: address decomposition, page-type aware
/// latency and contention-aware scheduling of every flash transaction.
class Pal {
 public:
  using Observer = std::function<void(const TransactionRecord &)>;

  Pal(const Topology &topology, const TimingModel &timing);

  // Flash transaction for one page-level sub-request (erases target any
  // page of the block being erased).
  TransactionRecord submit(RequestId request_id, SubOp op, Ppn ppn, Tick issue_tick);

  // Drops reservations that can no longer affect scheduling. Every later
  // submit must use issue_tick >= horizon.
  void retire_before(Tick horizon) { timeline_.retire_before(horizon); }

  void set_observer(Observer observer) { observer_ = std::move(observer); }

  const Timeline &timeline() const { return timeline_; }
  const Topology &topology() const { return topology_; }
  const TimingModel &timing() const { return timing_; }
  SubRequestId transactions() const { return next_sub_id_; }

 private:
  Topology topology_;
  TimingModel timing_;
  Timeline timeline_;
  Observer observer_;
  SubRequestId next_sub_id_ = 0;
};

}  // namespace ssdsim
