#include "ssdsim/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "ssdsim/config.hpp"
#include "ssdsim/errors.hpp"
#include "ssdsim/simulator.hpp"
#include "ssdsim/sweep.hpp"
#include "ssdsim/workload.hpp"

namespace ssdsim {

namespace {

struct Manifest {
  std::string config_path;
  std::string trace_path;
  bool sweep = false;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool txn_log = false;
  bool validate_only = false;
  int jobs = 1;
};

std::shared_ptr<spdlog::logger> make_logger() {
  auto logger = spdlog::get("ssdsim");
  if (!logger) logger = spdlog::stderr_logger_mt("ssdsim");
  auto level = spdlog::level::warn;
  if (const char *env = std::getenv("SIMPLE_SSD_LOG")) {
    level = spdlog::level::from_str(env);
  }
  logger->set_level(level);
  return logger;
}

SsdConfig load(const Manifest &m) {
  auto config = m.config_path.empty() ? SsdConfig{} : load_config(m.config_path);
  if (m.seed) config.workload.seed = *m.seed;
  validate(config);
  return config;
}

std::ofstream open_output(const std::filesystem::path &path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCategory::Config, "cannot write " + path.string());
  return out;
}

void write_outputs(const Manifest &m, const std::vector<PointResult> &results,
                   std::ostream &out) {
  for (const auto &r : results) {
    for (const auto &b : r.report.buckets) {
      out << fmt::format("{:<24} requests {:>8}  mean {:>14.1f} ns  p99 {:>12} ns  {:>10.2f} MB/s\n",
                         r.label, b.count, b.mean_ns, b.p99_ns, b.bandwidth_mbps);
    }
    out << fmt::format("{:<24} gc {} erases {} WA {:.3f}\n", r.label,
                       r.report.ftl.gc_invocations, r.report.ftl.erases,
                       r.report.write_amplification);
  }
  if (m.out_dir.empty()) return;

  const std::filesystem::path dir(m.out_dir);
  auto csv = open_output(dir / "report.csv");
  auto txt = open_output(dir / "report.txt");
  auto wear = open_output(dir / "wear.csv");
  bool first = true;
  for (const auto &r : results) {
    write_report_csv(csv, r.label, r.report, first);
    write_report_human(txt, r.label, r.report);
    write_wear_csv(wear, r.label, r.wear, first);
    first = false;
  }
}

PointResult run_trace(const Manifest &m, const SsdConfig &config) {
  std::ofstream log;
  SimulatorOptions options;
  if (m.txn_log) {
    log = open_output(std::filesystem::path(m.out_dir) / "txn_trace.csv");
    options.transaction_log = &log;
  }
  Simulator sim(config, options);
  TraceReader reader(m.trace_path);
  sim.run_open_loop(reader);

  return PointResult{"trace", {}, sim.report(), sim.wear()};
}

int execute(const Manifest &m, std::ostream &out, spdlog::logger &log) {
  const auto config = load(m);
  if (m.validate_only) {
    out << describe(config);
    return kExitOk;
  }
  if (m.sweep == !m.trace_path.empty()) {
    throw Error(ErrorCategory::Config, "give exactly one of --trace or --sweep");
  }
  if (m.txn_log && m.out_dir.empty()) {
    throw Error(ErrorCategory::Config, "--txn-log needs --out");
  }
  if (!m.out_dir.empty()) std::filesystem::create_directories(m.out_dir);

  std::vector<PointResult> results;
  if (m.sweep) {
    const auto points = SweepSpec::from(config).points();
    SweepOptions options;
    if (m.txn_log) options.transaction_log_dir = m.out_dir;
    log.info("running {} sweep points on {} job(s)", points.size(), m.jobs);
    results = m.jobs == 1 ? run_sweep_serial(config, points, options)
                          : run_sweep_parallel(config, points, options, m.jobs);
  } else {
    log.info("replaying trace {}", m.trace_path);
    results.push_back(run_trace(m, config));
  }
  write_outputs(m, results, out);
  return kExitOk;
}

int exit_code_for(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::Config:
      return kExitConfig;
    case ErrorCategory::Workload:
    case ErrorCategory::Request:
      return kExitWorkload;
    case ErrorCategory::Invariant:
      return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  Manifest m;
  CLI::App app{"Deterministic discrete-event SSD simulator", "ssdsim"};
  app.option_defaults()->always_capture_default();
  app.add_option("--config", m.config_path, "Configuration file (defaults when omitted)");
  app.add_option("--trace", m.trace_path, "Trace CSV to replay open-loop");
  app.add_flag("--sweep", m.sweep, "Run the request-size sweep from [workload]");
  app.add_option("--seed", m.seed, "Override workload.seed");
  app.add_option("--out", m.out_dir, "Directory for report.csv, report.txt and wear.csv");
  app.add_flag("--txn-log", m.txn_log, "Also write per-transaction CSV logs to --out");
  app.add_flag("--validate", m.validate_only, "Print the effective configuration and exit");
  app.add_option("--jobs", m.jobs, "Sweep points simulated in parallel")
      ->check(CLI::PositiveNumber);
  app.add_subcommand("run", "Run a trace or a sweep")->fallthrough();
  auto *check = app.add_subcommand("validate", "Check a configuration")->fallthrough();
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }
  if (check->parsed()) m.validate_only = true;

  auto log = make_logger();
  try {
    return execute(m, out, *log);
  } catch (const Error &e) {
    const int code = exit_code_for(e.category());
    const char *kind = code == kExitConfig     ? "config error"
                       : code == kExitWorkload ? "workload error"
                                               : "internal error";
    err << fmt::format("ssdsim: {}: {}\n", kind, e.what());
    return code;
  } catch (const std::filesystem::filesystem_error &e) {
    err << fmt::format("ssdsim: config error: {}\n", e.what());
    return kExitConfig;
  } catch (const std::exception &e) {
    err << fmt::format("ssdsim: internal error: {}\n", e.what());
    return kExitInternal;
  }
}

}  // namespace ssdsim
