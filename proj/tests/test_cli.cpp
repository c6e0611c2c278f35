#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "ssdsim/cli.hpp"
#include "support.hpp"

using namespace ssdsim;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ssdsim");
  std::vector<const char *> argv;
  for (const auto &a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  explicit TempDir(const std::string &name)
      : path_(std::filesystem::temp_directory_path() / ("ssdsim_cli_" + name)) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::filesystem::path operator/(const std::string &leaf) const { return path_ / leaf; }
  std::string str() const { return path_.string(); }

  std::string write(const std::string &leaf, const std::string &text) const {
    std::ofstream(path_ / leaf) << text;
    return (path_ / leaf).string();
  }

 private:
  std::filesystem::path path_;
};

std::string config_path(const std::string &name) {
  return (test::source_dir() / "configs" / name).string();
}

std::size_t count_lines(const std::string &text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_CASE("validate prints the exported capacity of the baseline device") {
  for (auto args : {std::vector<std::string>{"validate", "--config", config_path("baseline.cfg")},
                    std::vector<std::string>{"--validate", "--config", config_path("baseline.cfg")}}) {
    const auto r = cli(args);
    CHECK(r.code == 0);
    CHECK(r.out.find("exported_pages = 107374182") != std::string::npos);
    CHECK(r.out.find("page_transfer_ns = 20480") != std::string::npos);
  }
}

TEST_CASE("validate names an unknown key and exits with a config error") {
  TempDir dir("badkey");
  const auto path = dir.write("bad.cfg", "[topology]\nchanels = 4\n");
  const auto r = cli({"validate", "--config", path});
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("chanels") != std::string::npos);
}

TEST_CASE("an empty config prints the full default table") {
  TempDir dir("empty");
  const auto empty = cli({"validate", "--config", dir.write("empty.cfg", "")});
  const auto none = cli({"validate"});
  CHECK(empty.code == 0);
  CHECK(empty.out == none.out);
  for (const char *key : {"channels = 8", "packages = 8", "dies = 4", "planes = 2",
                          "blocks = 1024", "pages = 256", "page_size = 8192", "op_ratio",
                          "gc_threshold", "exported_pages = 107374182"}) {
    CAPTURE(key);
    CHECK(empty.out.find(key) != std::string::npos);
  }
}

TEST_CASE("a missing config file exits 1") {
  const auto r = cli({"run", "--config", "/nonexistent/ssd.cfg", "--sweep"});
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("config error") != std::string::npos);
}

TEST_CASE("exactly one workload source is required") {
  TempDir dir("sources");
  const auto trace = dir.write("t.csv", "0,W,0,16\n");
  CHECK(cli({"run", "--config", config_path("small_gc.cfg")}).code == kExitConfig);
  CHECK(cli({"run", "--config", config_path("small_gc.cfg"), "--sweep", "--trace", trace}).code ==
        kExitConfig);
  CHECK(cli({"run", "--sweep", "--txn-log"}).code == kExitConfig);
  CHECK(cli({"run", "--bogus-flag"}).code == kExitConfig);
}

TEST_CASE("the baseline sweep reports one row per request size") {
  TempDir dir("sweep");
  const auto r = cli({"run", "--config", config_path("baseline.cfg"), "--sweep", "--out", dir.str()});
  REQUIRE(r.code == 0);
  // Thirteen sizes from 8K to 32M, for reads and for writes, plus a gc line each.
  CHECK(count_lines(r.out) == 2 * 13 * 2);
  for (const char *label : {"seq_read_8K", "seq_read_32M", "seq_write_8K", "seq_write_32M"}) {
    CHECK(r.out.find(label) != std::string::npos);
  }
  const auto csv = test::read_file(dir / "report.csv");
  CHECK(csv.rfind("point,section,key,field,value\n", 0) == 0);
  CHECK(csv.find("seq_write_32M,latency,write_32M,bandwidth_mbps,") != std::string::npos);
  CHECK(test::read_file(dir / "wear.csv").rfind("point,block_id,erase_count,invalid_count\n", 0) == 0);
  CHECK(std::filesystem::exists(dir / "report.txt"));
}

TEST_CASE("the same seed twice gives identical output files") {
  TempDir a("seed_a"), b("seed_b");
  const auto cfg = config_path("small_gc.cfg");
  REQUIRE(cli({"run", "--config", cfg, "--sweep", "--seed", "7", "--out", a.str(), "--txn-log"}).code == 0);
  REQUIRE(cli({"run", "--config", cfg, "--sweep", "--seed", "7", "--out", b.str(), "--txn-log"}).code == 0);
  for (const char *f : {"report.csv", "report.txt", "wear.csv", "txn_rand_write_8K.csv"}) {
    CAPTURE(f);
    const auto left = test::read_file(a / f);
    CHECK_FALSE(left.empty());
    CHECK(left == test::read_file(b / f));
  }
  TempDir c("seed_c");
  REQUIRE(cli({"run", "--config", cfg, "--sweep", "--seed", "8", "--out", c.str()}).code == 0);
  CHECK(test::read_file(a / "report.csv") != test::read_file(c / "report.csv"));
}

TEST_CASE("parallel jobs do not change the output") {
  TempDir a("jobs_1"), b("jobs_3");
  const auto cfg = config_path("baseline.cfg");
  REQUIRE(cli({"run", "--config", cfg, "--sweep", "--out", a.str()}).code == 0);
  REQUIRE(cli({"run", "--config", cfg, "--sweep", "--jobs", "3", "--out", b.str()}).code == 0);
  CHECK(test::read_file(a / "report.csv") == test::read_file(b / "report.csv"));
}

TEST_CASE("trace problems exit with a workload error") {
  TempDir dir("trace_err");
  const auto cfg = config_path("small_gc.cfg");
  const auto malformed = dir.write("bad.csv", "tick,op,lba,n_sector\nx,R,0,16\n");
  auto r = cli({"run", "--config", cfg, "--trace", malformed});
  CHECK(r.code == kExitWorkload);
  CHECK(r.err.find("line 2") != std::string::npos);

  const auto unmapped = dir.write("unmapped.csv", "0,R,0,16\n");
  CHECK(cli({"run", "--config", cfg, "--trace", unmapped}).code == kExitWorkload);

  const auto beyond = dir.write("beyond.csv", "0,W,999999999999,16\n");
  CHECK(cli({"run", "--config", cfg, "--trace", beyond}).code == kExitWorkload);

  CHECK(cli({"run", "--config", cfg, "--trace", (dir / "missing.csv").string()}).code ==
        kExitWorkload);
}

TEST_CASE("a trace run writes reports and a transaction log") {
  TempDir dir("trace_ok");
  const auto trace = dir.write("t.csv", "tick,op,lba,n_sector\n0,W,0,32\n1000,R,0,32\n");
  const auto r = cli({"run", "--config", config_path("small_gc.cfg"), "--trace", trace, "--out",
                      dir.str(), "--txn-log"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("trace") != std::string::npos);
  const auto log = test::read_file(dir / "txn_trace.csv");
  CHECK(count_lines(log) == 1 + 4);
  CHECK(test::read_file(dir / "report.csv").find("trace,latency,read_16K,count,1") !=
        std::string::npos);
}
