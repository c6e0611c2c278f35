#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ssdsim/config.hpp"
#include "ssdsim/telemetry.hpp"
#include "ssdsim/workload.hpp"

namespace ssdsim {

struct SweepOptions {
  // When set, each point writes its flash transactions to
  // <dir>/txn_<label>.csv.
  std::optional<std::filesystem::path> transaction_log_dir;
};

struct PointResult {
  std::string label;
  SweepPoint point;
  StatsReport report;
  std::vector<WearRow> wear;
};

// Runs one point on a freshly built device. Read points start from a
// prefilled device when the [workload] section asks for it.
PointResult run_point(const SsdConfig &config, const SweepPoint &point,
                      const SweepOptions &options = {});

// Reference runner: points one after another.
std::vector<PointResult> run_sweep_serial(const SsdConfig &config,
                                          const std::vector<SweepPoint> &points,
                                          const SweepOptions &options = {});

// Same results as run_sweep_serial, with points spread over `jobs` OpenMP
// threads (0 = OpenMP default). Points share nothing, so the results are
// identical whatever the thread count.
std::vector<PointResult> run_sweep_parallel(const SsdConfig &config,
                                            const std::vector<SweepPoint> &points,
                                            const SweepOptions &options = {},
                                            int jobs = 0);

}  // namespace ssdsim
