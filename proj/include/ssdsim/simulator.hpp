#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>

#include "ssdsim/config.hpp"
#include "ssdsim/ftl.hpp"
#include "ssdsim/hil.hpp"
#include "ssdsim/pal.hpp"
#include "ssdsim/telemetry.hpp"
#include "ssdsim/workload.hpp"

namespace ssdsim {

struct SimulatorOptions {
  std::ostream *transaction_log = nullptr;  // CSV, one row per flash transaction
  bool track_tokens = false;
  std::size_t reservoir_capacity = Reservoir::kDefaultCapacity;
};

void write_transaction_header(std::ostream &out);
void write_transaction_row(std::ostream &out, const TransactionRecord &record);

/// One simulated device: HIL in front of the FTL, which drives PAL. Owns
/// the event loop and feeds every completion and flash transaction into
/// telemetry.
class Simulator {
 public:
  explicit Simulator(const SsdConfig &config, SimulatorOptions options = {});

  Simulator(const Simulator &) = delete;
  Simulator &operator=(const Simulator &) = delete;

  // Open loop: each event arrives at its own tick. When the device queue is
  // full, the event is retried at the next completion and arrives then.
  void run_open_loop(EventStream &events);

  // Closed loop: keeps `depth` requests outstanding, issuing the next one
  // as soon as a slot frees up. Event ticks are ignored.
  void run_closed_loop(EventStream &events, std::uint32_t depth);

  // Marks the pages backing [lba, lba + n_sector) as written, untimed.
  void prefill_sectors(std::uint64_t lba, std::uint64_t n_sector);

  StatsReport report();
  std::vector<WearRow> wear() const { return wear_snapshot(ftl_.mapping()); }

  const SsdConfig &config() const { return config_; }
  Hil &hil() { return hil_; }
  Ftl &ftl() { return ftl_; }
  Pal &pal() { return pal_; }
  Telemetry &telemetry() { return telemetry_; }
  std::uint64_t capacity_sectors() const { return hil_.capacity_sectors(); }

 private:
  HostRequest make_request(const TraceEvent &event, Tick arrival);
  void advance(Tick tick);
  void finish();

  SsdConfig config_;
  SimulatorOptions options_;
  Pal pal_;
  Ftl ftl_;
  Hil hil_;
  Telemetry telemetry_;
  RequestId next_id_ = 0;
};

}  // namespace ssdsim
