// Copyright 2026 The rase-echo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Plain-text run configuration: one `key = value` per line, `#` starts a
// comment. Physical quantities carry their unit in the key name. Unknown
// keys are rejected.

#include <cstdint>
#include <istream>
#include <string>

#include "rase/sequence_synth.hpp"

namespace rase {

struct AnalysisOptions {
  double b_step = 0.01;
  std::size_t bootstrap_resamples = 1000;
  double confidence_level = 0.95;
  double trace_bin = 5e-6;         // s
  double dip_b = -1.0;             // < 0 selects the sample minimum on the grid
  bool phase_reference = true;
  std::uint64_t bootstrap_seed = 7;

  void validate() const;
};

struct RunConfig {
  SequenceConfig sequence;
  AnalysisOptions analysis;
};

/// `source` names the input in error messages.
RunConfig parse_run_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_run_config(const std::string& path);

/// Canonical `key = value` text; parse_run_config(format_run_config(c)) == c.
std::string format_run_config(const RunConfig& config);

}  // namespace rase
