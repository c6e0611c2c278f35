#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <sstream>

#include "ssdsim/errors.hpp"
#include "ssdsim/workload.hpp"
#include "support.hpp"

using namespace ssdsim;
using ssdsim::test::Gen;

namespace {

std::vector<TraceEvent> drain(EventStream &s) {
  std::vector<TraceEvent> out;
  while (auto ev = s.next()) out.push_back(*ev);
  return out;
}

std::vector<TraceEvent> read_all(const std::string &text) {
  std::istringstream in(text);
  TraceReader reader(in);
  return drain(reader);
}

SweepPoint point(AccessPattern pattern, HostOp op, std::uint64_t size, std::uint64_t total,
                 std::uint64_t span_sectors = 1ull << 21, std::uint64_t seed = 1) {
  SweepPoint p;
  p.pattern = pattern;
  p.op = op;
  p.request_bytes = size;
  p.total_bytes = total;
  p.seed = seed;
  p.span_sectors = span_sectors;
  return p;
}

}  // namespace

TEST_CASE("a two-line trace yields a write then a read") {
  const auto events = read_all("0,W,0,16\n100,R,0,16\n");
  REQUIRE(events.size() == 2);
  CHECK(events[0] == TraceEvent{0, HostOp::Write, 0, 16});
  CHECK(events[1] == TraceEvent{100, HostOp::Read, 0, 16});
}

TEST_CASE("header and blank lines are skipped") {
  const auto events = read_all("tick,op,lba,n_sector\n\n5,r,8,1\r\n\n");
  REQUIRE(events.size() == 1);
  CHECK(events[0] == TraceEvent{5, HostOp::Read, 8, 1});
}

TEST_CASE("a malformed line reports its line number") {
  std::istringstream in("tick,op,lba,n_sector\nx,R,0,16\n");
  TraceReader reader(in);
  try {
    reader.next();
    FAIL("expected a parse error");
  } catch (const TraceParseError &e) {
    CHECK(e.line() == 2);
    CHECK(e.category() == ErrorCategory::Workload);
  }
  for (const char *bad : {"0,X,0,16", "0,R,-1,16", "0,R,0,0", "0,R,0", "0,R,0,16,9", "0,R,0,abc"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(read_all(bad), TraceParseError);
  }
}

TEST_CASE("regressing ticks are an order error") {
  std::istringstream in("10,R,0,1\n20,R,0,1\n15,W,0,1\n");
  TraceReader reader(in);
  reader.next();
  reader.next();
  try {
    reader.next();
    FAIL("expected an order error");
  } catch (const OrderError &e) {
    CHECK(e.line() == 3);
  }
  CHECK(read_all("7,R,0,1\n7,W,0,1\n").size() == 2);  // equal ticks are fine
}

TEST_CASE("a missing trace file is a workload error") {
  CHECK_THROWS_AS(TraceReader("/nonexistent/trace.csv"), TraceParseError);
}

TEST_CASE("a million-line trace streams one event per line") {
  const auto path = std::filesystem::temp_directory_path() / "ssdsim_million.csv";
  {
    std::ofstream out(path);
    out << "tick,op,lba,n_sector\n";
    for (int i = 0; i < 1'000'000; ++i) out << i << (i % 3 ? ",R," : ",W,") << i % 4096 << ",8\n";
  }
  TraceReader reader(path);
  std::size_t count = 0;
  while (reader.next()) ++count;
  CHECK(count == 1'000'000);
  CHECK(reader.line() == 1'000'001);
  std::filesystem::remove(path);
}

TEST_CASE("written traces parse back identically") {
  test::for_all(41, 30, [](Gen &g, int) {
    std::vector<TraceEvent> events;
    Tick t = 0;
    for (int i = 0, n = static_cast<int>(g.uniform(0, 200)); i < n; ++i) {
      t += g.uniform(0, 1'000'000);
      events.push_back({t, g.coin() ? HostOp::Read : HostOp::Write, g.uniform(0, 1ull << 40),
                        static_cast<std::uint32_t>(g.uniform(1, 1u << 20))});
    }
    std::ostringstream out;
    write_trace(out, events);
    CHECK(read_all(out.str()) == events);
  });
}

TEST_CASE("sequential 8K writes over 64K step by 16 sectors") {
  SweepGenerator gen(point(AccessPattern::Sequential, HostOp::Write, 8 << 10, 64 << 10));
  const auto events = drain(gen);
  REQUIRE(events.size() == 8);
  for (std::size_t i = 0; i < events.size(); ++i) {
    CHECK(events[i].lba == 16 * i);
    CHECK(events[i].n_sector == 16);
    CHECK(events[i].op == HostOp::Write);
  }
}

TEST_CASE("sequential requests wrap at the span") {
  SweepGenerator gen(point(AccessPattern::Sequential, HostOp::Read, 8 << 10, 64 << 10, 48));
  std::vector<std::uint64_t> lbas;
  for (const auto &e : drain(gen)) lbas.push_back(e.lba);
  CHECK(lbas == std::vector<std::uint64_t>{0, 16, 32, 0, 16, 32, 0, 16});
}

TEST_CASE("the same seed gives the same stream") {
  const auto p = point(AccessPattern::Random, HostOp::Read, 4 << 10, 4 << 20, 1ull << 21, 99);
  SweepGenerator a(p), b(p);
  CHECK(drain(a) == drain(b));
  auto q = p;
  q.seed = 100;
  SweepGenerator c(p), d(q);
  CHECK(drain(c) != drain(d));
}

TEST_CASE("random reads stay inside a 1 GiB span and are size-aligned") {
  const std::uint64_t span = (1ull << 30) / kSectorSize;
  for (std::uint64_t size : {8ull << 10, 64ull << 10, 1ull << 20}) {
    CAPTURE(size);
    SweepGenerator gen(point(AccessPattern::Random, HostOp::Read, size, 10'000 * size, span));
    const auto events = drain(gen);
    REQUIRE(events.size() == 10'000);
    std::set<std::uint64_t> distinct;
    for (const auto &e : events) {
      REQUIRE(e.lba % (size / kSectorSize) == 0);
      REQUIRE(e.lba + e.n_sector <= span);
      distinct.insert(e.lba);
    }
    CHECK(distinct.size() > 1);
  }
}

TEST_CASE("a sequential sweep touches exactly total_bytes / 512 sectors") {
  test::for_all(12, 40, [](Gen &g, int) {
    const std::uint64_t size = kSectorSize * g.uniform(1, 256);
    const std::uint64_t count = g.uniform(1, 64);
    const std::uint64_t span = size / kSectorSize * count * g.uniform(1, 3);
    SweepGenerator gen(point(AccessPattern::Sequential, HostOp::Write, size, size * count, span));
    std::set<std::uint64_t> sectors;
    for (const auto &e : drain(gen)) {
      for (std::uint64_t s = 0; s < e.n_sector; ++s) sectors.insert(e.lba + s);
    }
    CHECK(sectors.size() == size * count / kSectorSize);
  });
}

TEST_CASE("sweep spec expands op-major with capacity as the default span") {
  SsdConfig c = test::small_device(64, 16);
  c.workload.request_sizes = {8 << 10, 16 << 10};
  const auto spec = SweepSpec::from(c);
  CHECK(spec.span_sectors == total_logical_pages(c.topology, c.firmware) * 16);
  const auto points = spec.points();
  REQUIRE(points.size() == 4);
  CHECK(points[0].label() == "seq_read_8K");
  CHECK(points[1].label() == "seq_read_16K");
  CHECK(points[2].label() == "seq_write_8K");
  CHECK(points[3].label() == "seq_write_16K");

  c.workload.span_bytes = 1ull << 40;
  CHECK_THROWS_AS(SweepSpec::from(c), ValidationError);
}

TEST_CASE("request counts and size labels") {
  CHECK(point(AccessPattern::Sequential, HostOp::Read, 32 << 20, 64 << 20).request_count() == 2);
  CHECK(point(AccessPattern::Sequential, HostOp::Read, 32 << 20, 1 << 20).request_count() == 1);
  CHECK(format_size(8192) == "8K");
  CHECK(format_size(32u << 20) == "32M");
  CHECK(format_size(1ull << 30) == "1G");
  CHECK(format_size(1536) == "1536");
}
