// Copyright 2026 The rase-echo Authors
// SPDX-License-Identifier: Apache-2.0
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "rase/error.hpp"
#include "rase/run_config.hpp"

using namespace rase;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_run_config(in, "test.cfg");
}

std::string config_error(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    return e.what();
  }
  FAIL("expected a config error");
  return {};
}

}  // namespace

TEST_CASE("empty input gives defaults") {
  const RunConfig c = parse("# nothing\n\n");
  CHECK(c.sequence.sample_rate == 10e6);
  CHECK(c.sequence.n_modes == 1);
  CHECK(c.analysis.b_step == 0.01);
  CHECK(c.analysis.bootstrap_resamples == 1000);
  CHECK(c.analysis.dip_b < 0.0);
}

TEST_CASE("units and values") {
  const RunConfig c = parse(
      "sample_rate_mhz = 20\n"
      "ase_decay_tau_us = 100   # trailing comment\n"
      "signal_bandwidth_khz = 300\n"
      "alpha_l = 0.25\n"
      "eta = 0.2\n"
      "warm = true\n"
      "dip_b = 0.4\n"
      "trace_bin_us = 2.5\n");
  CHECK(c.sequence.sample_rate == doctest::Approx(20e6));
  CHECK(c.sequence.ase_decay_tau == doctest::Approx(100e-6));
  CHECK(c.sequence.signal_bandwidth == doctest::Approx(300e3));
  CHECK(c.sequence.physics.alpha_l == 0.25);
  CHECK(c.sequence.warm);
  CHECK(c.analysis.dip_b == 0.4);
  CHECK(c.analysis.trace_bin == doctest::Approx(2.5e-6));
  CHECK(parse("dip_b = auto\n").analysis.dip_b < 0.0);
}

TEST_CASE("errors name the line") {
  CHECK(config_error("eta = 0.1\nbogus = 3\n").find("test.cfg:2") != std::string::npos);
  CHECK(config_error("eta = 0.1\neta = 0.2\n").find("duplicate") != std::string::npos);
  CHECK(config_error("eta = abc\n").find("test.cfg:1") != std::string::npos);
  CHECK(config_error("eta =\n").find("test.cfg:1") != std::string::npos);
  CHECK(config_error("n_shots = -3\n").find("test.cfg:1") != std::string::npos);
  config_error("warm = maybe\n");
  config_error("no equals sign\n");
  config_error("eta = 1.5\n");
  config_error("n_shots = 0\n");
  config_error("confidence_level = 1\n");
}

TEST_CASE("format round trip") {
  RunConfig c = parse("alpha_l = 0.78\neta = 0.123456789012345\nn_modes = 2\nwarm = true\n"
                      "dip_b = 0.3\nbootstrap_seed = 99\n");
  const RunConfig back = parse(format_run_config(c));
  CHECK(format_run_config(back) == format_run_config(c));
  CHECK(back.sequence.physics.eta == c.sequence.physics.eta);
  CHECK(back.analysis.dip_b == 0.3);
  CHECK(back.analysis.bootstrap_seed == 99);
}

TEST_CASE("shipped presets parse") {
  std::size_t n = 0;
  for (const auto& e : std::filesystem::directory_iterator(RASE_SOURCE_DIR "/presets")) {
    if (e.path().extension() != ".cfg") continue;
    CAPTURE(e.path().string());
    const RunConfig c = load_run_config(e.path().string());
    CHECK_NOTHROW(c.sequence.validate());
    ++n;
  }
  CHECK(n == 8);
  CHECK_THROWS_AS(load_run_config("/nonexistent.cfg"), Error);
}
