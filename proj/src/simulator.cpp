#include "ssdsim/simulator.hpp"

#include <ostream>

#include <fmt/format.h>

#include "ssdsim/errors.hpp"

namespace ssdsim {

void write_transaction_header(std::ostream &out) {
  out << "sub_id,channel,die,start,finish,t_cmd,t_bus,t_cell,op,request_id,ppn\n";
}

void write_transaction_row(std::ostream &out, const TransactionRecord &r) {
  out << fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", r.sub_id, r.addr.channel, r.die,
                     r.start_tick, r.finish_tick, r.phases.cmd, r.phases.bus, r.phases.cell,
                     to_string(r.op), r.request_id, r.ppn);
}

namespace {

std::uint64_t exported_sectors(const SsdConfig &config) {
  return total_logical_pages(config.topology, config.firmware) *
         (config.topology.page_size / kSectorSize);
}

}  // namespace

Simulator::Simulator(const SsdConfig &config, SimulatorOptions options)
    : config_(config),
      options_(options),
      pal_(config.topology, config.timing),
      ftl_(config, pal_, options.track_tokens),
      hil_(exported_sectors(config), config.firmware.queue_depth, ftl_),
      telemetry_(config.topology.channels,
                 static_cast<std::uint32_t>(config.topology.total_dies()),
                 options.reservoir_capacity) {
  if (options_.transaction_log) write_transaction_header(*options_.transaction_log);
  pal_.set_observer([this](const TransactionRecord &rec) {
    telemetry_.accumulate(rec);
    if (options_.transaction_log) write_transaction_row(*options_.transaction_log, rec);
  });
}

HostRequest Simulator::make_request(const TraceEvent &event, Tick arrival) {
  return HostRequest{next_id_++, event.op, event.lba, event.n_sector, arrival};
}

void Simulator::advance(Tick tick) {
  hil_.advance_to(tick);
  for (const auto &rec : hil_.drain_completed()) telemetry_.accumulate(rec);
  pal_.retire_before(hil_.now());
}

void Simulator::finish() {
  while (auto next = hil_.next_completion_tick()) advance(*next);
}

void Simulator::run_open_loop(EventStream &events) {
  while (auto event = events.next()) {
    Tick arrival = std::max(event->tick, hil_.now());
    advance(arrival);
    auto request = make_request(*event, arrival);
    while (hil_.submit(request) == SubmitResult::QueueFull) {
      const auto next = hil_.next_completion_tick();
      if (!next) throw InvariantViolation("queue full with nothing in flight");
      advance(*next);
      request.arrival_tick = hil_.now();
    }
    hil_.dispatch();
  }
  finish();
}

void Simulator::run_closed_loop(EventStream &events, std::uint32_t depth) {
  depth = std::max<std::uint32_t>(1, std::min(depth, hil_.queue_depth()));
  auto event = events.next();
  while (event || hil_.outstanding() > 0) {
    while (event && hil_.outstanding() < depth) {
      const auto result = hil_.submit(make_request(*event, hil_.now()));
      if (result == SubmitResult::QueueFull) {
        throw InvariantViolation("closed-loop issue exceeded the device queue");
      }
      event = events.next();
    }
    hil_.dispatch();
    if (const auto next = hil_.next_completion_tick()) advance(*next);
  }
}

void Simulator::prefill_sectors(std::uint64_t lba, std::uint64_t n_sector) {
  if (n_sector == 0) return;
  const std::uint64_t spp = config_.topology.page_size / kSectorSize;
  ftl_.prefill(lba / spp, (lba + n_sector + spp - 1) / spp);
}

StatsReport Simulator::report() {
  telemetry_.set_ftl_state(ftl_.mapping());
  return telemetry_.report();
}

}  // namespace ssdsim
