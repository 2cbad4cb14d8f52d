// Copyright 2026 The rase-echo Authors
// SPDX-License-Identifier: Apache-2.0
#include "rase/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rase/error.hpp"

namespace rase {

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  fail(ErrorKind::Format, "CSV has no column '" + name + "'");
}

std::vector<double> CsvTable::numbers(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> v;
  v.reserve(rows.size());
  for (const auto& r : rows) {
    try {
      v.push_back(std::stod(r.at(c)));
    } catch (const std::exception&) {
      v.push_back(std::nan(""));
    }
  }
  return v;
}

std::vector<std::string> CsvTable::text(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<std::string> v;
  for (const auto& r : rows) v.push_back(r.at(c));
  return v;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Format, "cannot read '" + path + "'");
  CsvTable t;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto cells = split(line);
    if (t.columns.empty()) {
      t.columns = std::move(cells);
    } else {
      if (cells.size() != t.columns.size())
        fail(ErrorKind::Format, path + ": row width differs from header");
      t.rows.push_back(std::move(cells));
    }
  }
  if (t.columns.empty()) fail(ErrorKind::Format, path + ": no header row");
  return t;
}

const std::vector<std::string>& report_inputs() {
  static const std::vector<std::string> files = {
      "variance_trace.csv", "spectrum_vacuum.csv", "spectrum_ase.csv",
      "spectrum_rase.csv",  "crosscorr.csv",       "inseparability.csv"};
  return files;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct Series {
  std::vector<double> x, y;
  std::string colour;
  std::string label;
  bool dashed = false;
};

struct Band {
  std::vector<double> x, lo, hi;
  std::string colour;
};

class Plot {
 public:
  Plot(std::string title, std::string xlabel, std::string ylabel)
      : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

  void add(Series s) { series_.push_back(std::move(s)); }
  void add(Band b) { bands_.push_back(std::move(b)); }
  void hline(double y, std::string colour) { hlines_.emplace_back(y, std::move(colour)); }
  void log_y() { log_y_ = true; }

  std::string svg() {
    limits();
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
       << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\" font-family=\"sans-serif\" "
       << "font-size=\"12\">\n";
    os << "<rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << kW / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
       << title_ << "</text>\n";
    os << "<rect x=\"" << kL << "\" y=\"" << kT << "\" width=\"" << kW - kL - kR
       << "\" height=\"" << kH - kT - kB << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double fx = x0_ + (x1_ - x0_) * i / 4.0;
      const double fy = y0_ + (y1_ - y0_) * i / 4.0;
      os << "<text x=\"" << num(px(fx)) << "\" y=\"" << kH - kB + 16
         << "\" text-anchor=\"middle\">" << tick(fx) << "</text>\n";
      os << "<text x=\"" << kL - 6 << "\" y=\"" << num(py_raw(fy) + 4)
         << "\" text-anchor=\"end\">" << tick(log_y_ ? std::pow(10.0, fy) : fy) << "</text>\n";
    }
    os << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 8 << "\" text-anchor=\"middle\">"
       << xlabel_ << "</text>\n";
    os << "<text x=\"16\" y=\"" << kH / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << kH / 2 << ")\">" << ylabel_ << "</text>\n";
    for (const auto& b : bands_) {
      os << "<polygon fill=\"" << b.colour << "\" fill-opacity=\"0.3\" stroke=\"none\" points=\"";
      for (std::size_t i = 0; i < b.x.size(); ++i) os << num(px(b.x[i])) << ',' << num(py(b.hi[i])) << ' ';
      for (std::size_t i = b.x.size(); i-- > 0;) os << num(px(b.x[i])) << ',' << num(py(b.lo[i])) << ' ';
      os << "\"/>\n";
    }
    for (const auto& [y, c] : hlines_)
      os << "<line x1=\"" << kL << "\" x2=\"" << kW - kR << "\" y1=\"" << num(py(y)) << "\" y2=\""
         << num(py(y)) << "\" stroke=\"" << c << "\" stroke-dasharray=\"2,3\"/>\n";
    int legend = 0;
    for (const auto& s : series_) {
      os << "<polyline fill=\"none\" stroke=\"" << s.colour << "\" stroke-width=\"1.2\""
         << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        os << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
      }
      os << "\"/>\n";
      if (!s.label.empty()) {
        const int ly = kT + 14 + 16 * legend++;
        os << "<line x1=\"" << kW - kR - 150 << "\" x2=\"" << kW - kR - 130 << "\" y1=\"" << ly - 4
           << "\" y2=\"" << ly - 4 << "\" stroke=\"" << s.colour << "\""
           << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
        os << "<text x=\"" << kW - kR - 125 << "\" y=\"" << ly << "\">" << s.label << "</text>\n";
      }
    }
    os << "</svg>\n";
    return os.str();
  }

 private:
  static constexpr int kW = 720, kH = 440, kL = 70, kR = 20, kT = 32, kB = 48;

  double ty(double y) const { return log_y_ ? std::log10(std::max(y, 1e-300)) : y; }
  double px(double x) const { return kL + (x - x0_) / (x1_ - x0_) * (kW - kL - kR); }
  double py_raw(double y) const { return kH - kB - (y - y0_) / (y1_ - y0_) * (kH - kT - kB); }
  double py(double y) const { return py_raw(ty(y)); }

  void limits() {
    double xl = INFINITY, xh = -INFINITY, yl = INFINITY, yh = -INFINITY;
    auto take = [&](double x, double y) {
      if (!std::isfinite(x) || !std::isfinite(y) || (log_y_ && y <= 0)) return;
      xl = std::min(xl, x);
      xh = std::max(xh, x);
      yl = std::min(yl, ty(y));
      yh = std::max(yh, ty(y));
    };
    for (const auto& s : series_)
      for (std::size_t i = 0; i < s.x.size(); ++i) take(s.x[i], s.y[i]);
    for (const auto& b : bands_)
      for (std::size_t i = 0; i < b.x.size(); ++i) {
        take(b.x[i], b.lo[i]);
        take(b.x[i], b.hi[i]);
      }
    for (const auto& h : hlines_) take(std::isfinite(xl) ? xl : 0.0, h.first);
    if (!std::isfinite(xl)) xl = 0, xh = 1, yl = 0, yh = 1;
    if (xh <= xl) xh = xl + 1;
    if (yh <= yl) yh = yl + 1;
    const double pad = 0.05 * (yh - yl);
    x0_ = xl;
    x1_ = xh;
    y0_ = yl - pad;
    y1_ = yh + pad;
  }

  std::string title_, xlabel_, ylabel_;
  std::vector<Series> series_;
  std::vector<Band> bands_;
  std::vector<std::pair<double, std::string>> hlines_;
  bool log_y_ = false;
  double x0_ = 0, x1_ = 1, y0_ = 0, y1_ = 1;
};

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write '" + p.string() + "'");
  out << text;
  if (!out) fail(ErrorKind::Io, "write failed on '" + p.string() + "'");
}

}  // namespace

std::vector<std::string> render_report(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path d(dir);
  std::vector<std::string> missing;
  for (const auto& f : report_inputs())
    if (!fs::is_regular_file(d / f)) missing.push_back(f);
  if (!missing.empty()) {
    std::string msg = "missing analysis CSVs in '" + dir + "':";
    for (const auto& m : missing) msg += " " + m;
    msg += " (expected:";
    for (const auto& f : report_inputs()) msg += " " + f;
    msg += ")";
    fail(ErrorKind::Format, msg);
  }
  std::vector<std::string> written;

  {
    const auto t = read_csv((d / "variance_trace.csv").string());
    const auto time = t.numbers("time_us");
    const auto v = t.numbers("var_sum");
    const auto sentinel = t.numbers("sentinel");
    Series s{{}, {}, "#1f4e9c", "Var(x)+Var(p)"};
    for (std::size_t i = 0; i < time.size(); ++i) {
      if (sentinel[i] != 0.0) continue;
      s.x.push_back(time[i]);
      s.y.push_back(v[i]);
    }
    Plot p("Variance trace", "time (us)", "Var(x) + Var(p)");
    p.add(std::move(s));
    p.hline(2.0, "#888888");
    const auto path = d / "variance_trace.svg";
    write_text(path, p.svg());
    written.push_back(path.string());
  }
  {
    Plot p("Heterodyne spectra", "frequency (kHz)", "power");
    p.log_y();
    const char* colours[3] = {"#888888", "#1f4e9c", "#c0392b"};
    const char* windows[3] = {"vacuum", "ase", "rase"};
    for (int w = 0; w < 3; ++w) {
      const auto t = read_csv((d / ("spectrum_" + std::string(windows[w]) + ".csv")).string());
      p.add(Series{t.numbers("frequency_khz"), t.numbers("power"), colours[w], windows[w]});
    }
    const auto path = d / "spectra.svg";
    write_text(path, p.svg());
    written.push_back(path.string());
  }
  {
    const auto t = read_csv((d / "crosscorr.csv").string());
    const auto tau = t.numbers("tau_us");
    const auto se = t.numbers("std_error");
    std::vector<double> three(se.size());
    std::transform(se.begin(), se.end(), three.begin(), [](double e) { return 3.0 * e; });
    Plot p("Cross-correlation", "tau (us)", "|C(tau)|");
    p.add(Series{tau, t.numbers("magnitude"), "#1f4e9c", "|C|"});
    p.add(Series{tau, three, "#888888", "3 SE", true});
    const auto path = d / "crosscorr.svg";
    write_text(path, p.svg());
    written.push_back(path.string());
  }
  {
    const auto t = read_csv((d / "inseparability.csv").string());
    const auto mode = t.numbers("mode");
    const auto b = t.numbers("b");
    const auto s = t.numbers("s_hat");
    const auto lo = t.numbers("ci_low");
    const auto hi = t.numbers("ci_high");
    const auto th = t.numbers("s_theory");
    Series meas{{}, {}, "#1f4e9c", "S(b) measured"};
    Series theory{{}, {}, "#c0392b", "S(b) designed", true};
    Band band{{}, {}, {}, "#1f4e9c"};
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (mode[i] != 0.0) continue;
      meas.x.push_back(b[i]);
      meas.y.push_back(s[i]);
      theory.x.push_back(b[i]);
      theory.y.push_back(th[i]);
      band.x.push_back(b[i]);
      band.lo.push_back(lo[i]);
      band.hi.push_back(hi[i]);
    }
    Plot p("Inseparability, mode 0", "b", "Var(u) + Var(v)");
    p.add(std::move(band));
    p.add(std::move(meas));
    p.add(std::move(theory));
    p.hline(2.0, "#000000");
    const auto path = d / "inseparability.svg";
    write_text(path, p.svg());
    written.push_back(path.string());
  }
  return written;
}

}  // namespace rase
