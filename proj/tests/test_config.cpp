#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "ssdsim/config.hpp"
#include "ssdsim/errors.hpp"
#include "support.hpp"

using namespace ssdsim;
using ssdsim::test::Gen;

TEST_CASE("baseline config file loads the baseline topology") {
  const auto c = load_config(test::source_dir() / "configs" / "baseline.cfg");
  const auto &t = c.topology;
  CHECK(t.channels == 8);
  CHECK(t.packages == 8);
  CHECK(t.dies == 4);
  CHECK(t.planes == 2);
  CHECK(t.blocks == 1024);
  CHECK(t.pages == 256);
  CHECK(t.page_size == 8192);
  CHECK(t.dma_mhz == 400);
  CHECK(t.dma_width == 1);
  CHECK(c.firmware.op_ratio == doctest::Approx(0.2));
  CHECK(c.firmware.gc_threshold == doctest::Approx(0.05));
  CHECK(c.firmware.log_blocks_per_set == 8);
}

TEST_CASE("gc threshold at or above the over-provisioning ratio is rejected") {
  try {
    parse_config("[firmware]\nop_ratio = 0.2\ngc_threshold = 0.3\n");
    FAIL("expected ValidationError");
  } catch (const ValidationError &e) {
    CHECK(e.key() == "firmware.gc_threshold");
  }
}

TEST_CASE("an empty file yields the documented defaults") {
  const auto c = parse_config("");
  CHECK(c == SsdConfig{});
  // The documented default table, written out independently.
  CHECK(c.topology.channels == 8);
  CHECK(c.topology.packages == 8);
  CHECK(c.topology.dies == 4);
  CHECK(c.topology.planes == 2);
  CHECK(c.topology.blocks == 1024);
  CHECK(c.topology.pages == 256);
  CHECK(c.topology.page_size == 8192);
  CHECK(c.topology.dma_mhz == 400);
  CHECK(c.topology.dma_width == 1);
  CHECK(c.topology.order == "CWDP");
  CHECK(c.timing.n_state == 3);
  CHECK(c.timing.n_meta == 8);
  CHECK(c.timing.t_cmd == 250);
  CHECK(c.timing.t_read[0] == 45'000);
  CHECK(c.timing.t_prog[0] == 250'000);
  CHECK(c.timing.t_erase == 3'500'000);
  CHECK(c.firmware.blocks_per_set == 1);
  CHECK(c.firmware.queue_depth == 32);
  CHECK(c.workload.request_sizes.front() == 8 * 1024);
  CHECK(c.workload.request_sizes.back() == 32 * 1024 * 1024);
  CHECK(c.workload.request_sizes.size() == 13);
}

TEST_CASE("comments, suffixes and lists parse") {
  const auto c = parse_config(
      "# leading comment\n[topology]\npage_size = 16K\n; other comment\n"
      "[workload]\nop = write\nrequest_sizes = 4K, 1M\n");
  CHECK(c.topology.page_size == 16384);
  CHECK(c.workload.ops == std::vector<HostOp>{HostOp::Write});
  CHECK(c.workload.request_sizes == std::vector<std::uint64_t>{4096, 1 << 20});
}

TEST_CASE("unknown keys and bad values name the key") {
  auto key_of = [](const char *text) {
    try {
      parse_config(text);
    } catch (const ValidationError &e) {
      return e.key();
    }
    return std::string("<none>");
  };
  CHECK(key_of("[topology]\nchanels = 4\n") == "topology.chanels");
  CHECK(key_of("[topology]\nchannels = 0\n") == "topology.channels");
  CHECK(key_of("[topology]\nchannels = four\n") == "topology.channels");
  CHECK(key_of("[topology]\npage_size = 1000\n") == "topology.page_size");
  CHECK(key_of("[topology]\norder = CCDP\n") == "topology.order");
  CHECK(key_of("[timing]\nn_state = 4\n") == "timing.n_state");
  CHECK(key_of("[firmware]\nlog_blocks_per_set = 0\n") == "firmware.log_blocks_per_set");
  CHECK(key_of("[firmware]\nop_ratio = 1.0\n") == "firmware.op_ratio");
  CHECK(key_of("[workload]\nrequest_sizes = 1000\n") == "workload.request_sizes");
}

TEST_CASE("malformed text is a parse error, a missing file too") {
  CHECK_THROWS_AS(parse_config("[topology\nchannels = 1\n"), ParseError);
  CHECK_THROWS_AS(load_config("/nonexistent/ssdsim.cfg"), ParseError);
}

TEST_CASE("exported capacity") {
  Topology baseline;
  FirmwarePolicy policy;
  // 8*8*4*2*1024*256 = 134217728 physical pages; 80% of that, floored.
  CHECK(total_logical_pages(baseline, policy) == 134'217'728ull * 8 / 10);
  CHECK(total_logical_pages(baseline, policy) == 107'374'182);

  policy.op_ratio = 0.0;
  CHECK(total_logical_pages(baseline, policy) == 134'217'728);

  Topology tiny{1, 1, 1, 1, 4, 4};
  policy.op_ratio = 0.25;
  CHECK(total_logical_pages(tiny, policy) == 12);

  Topology five{1, 1, 1, 1, 5, 1};
  policy.op_ratio = 0.2;
  CHECK(total_logical_pages(five, policy) == 4);
}

TEST_CASE("exported capacity never grows with the over-provisioning ratio") {
  test::for_all(11, 200, [](Gen &g, int) {
    Topology t{static_cast<std::uint32_t>(g.uniform(1, 8)),
               static_cast<std::uint32_t>(g.uniform(1, 8)),
               static_cast<std::uint32_t>(g.uniform(1, 4)),
               static_cast<std::uint32_t>(g.uniform(1, 2)),
               static_cast<std::uint32_t>(g.uniform(1, 2048)),
               static_cast<std::uint32_t>(g.uniform(1, 512))};
    FirmwarePolicy a, b;
    a.op_ratio = g.real(0.0, 0.95);
    b.op_ratio = g.real(a.op_ratio, 0.99);
    CHECK(total_logical_pages(t, b) <= total_logical_pages(t, a));
  });
}

TEST_CASE("derived timing quantities") {
  Topology t;
  CHECK(page_transfer_ns(t) == 20'480);
  FirmwarePolicy f;
  CHECK(gc_threshold_blocks(t, f) == 52);  // ceil(0.05 * 1024)
  t.blocks = 4;
  CHECK(gc_threshold_blocks(t, f) == 1);
}

TEST_CASE("default TLC latencies keep the documented ratios") {
  TimingModel m;
  const double lsb = m.t_prog[0], csb = m.t_prog[1], msb = m.t_prog[2];
  CHECK(msb / lsb == doctest::Approx(8.0).epsilon(0.10));
  CHECK(msb / csb == doctest::Approx(1.3).epsilon(0.10));
  const double rl = m.t_read[0], rc = m.t_read[1], rm = m.t_read[2];
  CHECK(rm / rc == doctest::Approx(1.37).epsilon(0.10));
  CHECK(rm / rl == doctest::Approx(1.84).epsilon(0.10));
}

TEST_CASE("timing table exposes exactly n_state latencies") {
  for (std::uint32_t n = 1; n <= 3; ++n) {
    TimingModel m;
    m.n_state = n;
    CHECK(m.read_latencies().size() == n);
    CHECK(m.prog_latencies().size() == n);
  }
}

TEST_CASE("serialized configs load back unchanged") {
  test::for_all(23, 150, [](Gen &g, int) {
    SsdConfig c = test::small_device(static_cast<std::uint32_t>(g.uniform(16, 512)),
                                     static_cast<std::uint32_t>(g.uniform(1, 64)));
    c.topology.channels = static_cast<std::uint32_t>(g.uniform(1, 8));
    c.topology.packages = static_cast<std::uint32_t>(g.uniform(1, 4));
    c.topology.page_size = 512u << g.uniform(0, 6);
    c.topology.dma_width = static_cast<std::uint32_t>(g.uniform(1, 4));
    c.topology.order = g.pick(std::vector<std::string>{"CWDP", "PDWC", "WCPD"});
    c.timing.n_state = static_cast<std::uint32_t>(g.uniform(1, 3));
    c.timing.t_read[1] = g.uniform(1, 1'000'000);
    c.firmware.op_ratio = g.real(0.3, 0.6);
    c.firmware.gc_threshold = g.real(0.01, 0.1);
    c.firmware.log_blocks_per_set = static_cast<std::uint32_t>(g.uniform(1, 16));
    c.workload.pattern = g.coin() ? AccessPattern::Random : AccessPattern::Sequential;
    c.workload.request_sizes = {512 * g.uniform(1, 64), 512 * g.uniform(1, 4096)};
    c.workload.seed = g.uniform(0, ~0ull);
    c.workload.prefill = g.coin();
    validate(c);
    const auto reloaded = parse_config(to_ini(c));
    CHECK(reloaded == c);
  });
}

TEST_CASE("describe reports derived quantities") {
  const auto text = describe(SsdConfig{});
  CHECK(text.find("exported_pages = 107374182") != std::string::npos);
  CHECK(text.find("page_transfer_ns = 20480") != std::string::npos);
  CHECK(text.find("channels = 8") != std::string::npos);
}
