#include "ssdsim/sweep.hpp"

#include <exception>
#include <fstream>

#include <omp.h>

#include "ssdsim/errors.hpp"
#include "ssdsim/simulator.hpp"

namespace ssdsim {

namespace {

// Sectors a point can touch, so a read point only prefills what it reads.
std::uint64_t touched_sectors(const SweepPoint &point) {
  if (point.pattern == AccessPattern::Random) return point.span_sectors;
  const auto slots = point.span_sectors / point.request_sectors();
  const auto used = std::min(point.request_count(), slots);
  return used * point.request_sectors();
}

}  // namespace

PointResult run_point(const SsdConfig &config, const SweepPoint &point,
                      const SweepOptions &options) {
  std::ofstream log;
  SimulatorOptions sim_options;
  if (options.transaction_log_dir) {
    const auto path = *options.transaction_log_dir / ("txn_" + point.label() + ".csv");
    log.open(path);
    if (!log) throw Error(ErrorCategory::Config, "cannot write " + path.string());
    sim_options.transaction_log = &log;
  }

  Simulator sim(config, sim_options);
  if (point.op == HostOp::Read && config.workload.prefill) {
    sim.prefill_sectors(0, touched_sectors(point));
  }
  SweepGenerator events(point);
  sim.run_closed_loop(events, point.queue_depth);
  return PointResult{point.label(), point, sim.report(), sim.wear()};
}

std::vector<PointResult> run_sweep_serial(const SsdConfig &config,
                                          const std::vector<SweepPoint> &points,
                                          const SweepOptions &options) {
  std::vector<PointResult> results;
  results.reserve(points.size());
  for (const auto &point : points) results.push_back(run_point(config, point, options));
  return results;
}

std::vector<PointResult> run_sweep_parallel(const SsdConfig &config,
                                            const std::vector<SweepPoint> &points,
                                            const SweepOptions &options, int jobs) {
  std::vector<PointResult> results(points.size());
  std::vector<std::exception_ptr> errors(points.size());
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
  const auto n = static_cast<std::ptrdiff_t>(points.size());

#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      results[i] = run_point(config, points[i], options);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  // Report the failure the serial runner would have hit first.
  for (auto &e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

}  // namespace ssdsim
