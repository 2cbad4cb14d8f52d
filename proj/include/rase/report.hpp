// Copyright 2026 The rase-echo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

namespace rase {

/// A CSV table as written by write_analysis: `#` comment lines, one header
/// row, then rows. Numeric columns parse to doubles, others stay text.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
  std::vector<double> numbers(const std::string& name) const;
  std::vector<std::string> text(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

/// CSVs that render_report reads.
const std::vector<std::string>& report_inputs();

/// Writes variance_trace.svg, spectra.svg, crosscorr.svg
/// and inseparability.svg into `dir`. Output depends only on the
/// CSV contents. Returns the written paths.
std::vector<std::string> render_report(const std::string& dir);

}  // namespace rase
