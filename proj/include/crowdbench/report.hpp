// Copyright 2026 The crowdbench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Tabular and SVG output: CSV and markdown tables, atomic file writes and a
// small dependency-free SVG line/point plotter.

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "crowdbench/error.hpp"

namespace crowdbench {

enum class OutputFormat { kCsv, kMarkdown, kSvg };

inline OutputFormat parse_output_format(const std::string& name) {
  if (name == "csv") return OutputFormat::kCsv;
  if (name == "markdown" || name == "md") return OutputFormat::kMarkdown;
  if (name == "svg") return OutputFormat::kSvg;
  throw validation_error("unknown output format '" + name +
                         "' (expected csv, markdown or svg)");
}

using FormatSet = std::set<OutputFormat>;

inline const FormatSet& all_formats() {
  static const FormatSet formats = {OutputFormat::kCsv, OutputFormat::kMarkdown,
                                    OutputFormat::kSvg};
  return formats;
}

// Fixed-point rendering; "nan" / "inf" for non-finite values.
inline std::string fmt(double value, int decimals = 6) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  std::string out(buf);
  if (out.find_first_not_of("-0.") == std::string::npos && out[0] == '-') {
    out.erase(0, 1);  // no "-0.000000"
  }
  return out;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) {
    if (row.size() != header.size()) {
      throw validation_error("table row has " + std::to_string(row.size()) +
                             " cells, header has " +
                             std::to_string(header.size()));
    }
    rows.push_back(std::move(row));
  }
};

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string to_csv(const Table& t) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv_field(cells[i]);
    }
    out += '\n';
  };
  line(t.header);
  for (const auto& row : t.rows) line(row);
  return out;
}

inline std::string to_markdown(const Table& t) {
  auto cell = [](const std::string& s) {
    std::string out;
    for (char c : s) {
      if (c == '|') out += '\\';
      out += c == '\n' ? ' ' : c;
    }
    return out;
  };
  std::string out = "|";
  for (const auto& h : t.header) out += " " + cell(h) + " |";
  out += "\n|";
  for (std::size_t i = 0; i < t.header.size(); ++i) out += " --- |";
  out += '\n';
  for (const auto& row : t.rows) {
    out += "|";
    for (const auto& c : row) out += " " + cell(c) + " |";
    out += '\n';
  }
  return out;
}

// Writes to a temporary sibling and renames it over `path`.
inline void write_atomic(const std::filesystem::path& path,
                         const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw io_error("failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw io_error("cannot move " + tmp.string() + " to " + path.string() +
                   ": " + ec.message());
  }
}

// Writes <stem>.csv and/or <stem>.md; returns the files written.
inline std::vector<std::filesystem::path> emit_table(
    const std::filesystem::path& dir, const std::string& stem, const Table& t,
    const FormatSet& formats) {
  std::vector<std::filesystem::path> written;
  if (formats.count(OutputFormat::kCsv)) {
    written.push_back(dir / (stem + ".csv"));
    write_atomic(written.back(), to_csv(t));
  }
  if (formats.count(OutputFormat::kMarkdown)) {
    written.push_back(dir / (stem + ".md"));
    write_atomic(written.back(), to_markdown(t));
  }
  return written;
}

// Lowercase alphanumerics plus '-', '.', '_'; everything else becomes '_'.
inline std::string file_slug(const std::string& s) {
  std::string out;
  for (unsigned char c : s) {
    out += std::isalnum(c) || c == '-' || c == '.' || c == '_'
               ? static_cast<char>(std::tolower(c))
               : '_';
  }
  return out.empty() ? "_" : out;
}

// --- SVG plots ---------------------------------------------------------------

struct PlotSeries {
  std::string label;
  std::vector<double> xs, ys;
  std::vector<double> lo, hi;  // optional error bars or band, same length
  bool dashed = false;
  bool points = false;  // markers instead of a connecting line
  bool band = false;    // lo/hi drawn as a shaded band rather than bars
  int color = -1;       // palette index; -1 picks by series position
};

struct ReferenceLine {
  // Horizontal at y = value, or the diagonal y = x when `diagonal` is set.
  double value = 0.0;
  bool diagonal = false;
  std::string label;
};

struct Plot {
  std::string title, x_label, y_label;
  std::vector<PlotSeries> series;
  std::vector<ReferenceLine> references;
  std::vector<std::string> category_labels;  // x tick labels at 0, 1, ...
  std::optional<std::pair<double, double>> x_range, y_range;
};

namespace detail {

inline const char* palette(int i) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f",
                                  "#bcbd22", "#17becf"};
  return kColors[static_cast<std::size_t>(i) % 10];
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::pair<double, double> padded(double lo, double hi) {
  if (!(lo < hi)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = (hi - lo) * 0.05;
  return {lo - pad, hi + pad};
}

// Step of 1, 2 or 5 times a power of ten giving about `target` intervals.
inline double nice_step(double span, int target = 5) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  return (f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0) * mag;
}

inline std::vector<double> ticks(double lo, double hi, double step) {
  std::vector<double> out;
  for (double k = std::ceil(lo / step - 1e-9); k * step <= hi + step * 1e-9; ++k) {
    out.push_back(k * step);
  }
  return out;
}

inline int tick_decimals(double step) {
  return std::max(0, static_cast<int>(-std::floor(std::log10(step) + 1e-9)));
}

}  // namespace detail

inline std::string render_svg(const Plot& plot) {
  const bool categorical = !plot.category_labels.empty();
  const double kW = 760, kL = 70, kR = 200, kT = 40;
  const double kB = categorical ? 150 : 60;
  const double kH = 420 + kB;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  auto widen = [](double& a, double& b, double v) {
    if (std::isfinite(v)) {
      a = std::min(a, v);
      b = std::max(b, v);
    }
  };
  for (const auto& s : plot.series) {
    for (double x : s.xs) widen(x0, x1, x);
    for (double y : s.ys) widen(y0, y1, y);
    for (double y : s.lo) widen(y0, y1, y);
    for (double y : s.hi) widen(y0, y1, y);
  }
  for (const auto& r : plot.references) {
    if (!r.diagonal) widen(y0, y1, r.value);
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1;
  if (!std::isfinite(y0)) y0 = 0, y1 = 1;
  auto [xa, xb] = plot.x_range.value_or(
      categorical ? std::make_pair(-0.5, double(plot.category_labels.size()) - 0.5)
                  : detail::padded(x0, x1));
  auto [ya, yb] = plot.y_range.value_or(detail::padded(y0, y1));
  const double pw = kW - kL - kR, ph = kH - kT - kB;
  auto px = [&](double x) { return kL + (x - xa) / (xb - xa) * pw; };
  auto py = [&](double y) { return kT + (yb - y) / (yb - ya) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
    << "\" height=\"" << kH << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << kW / 2 - kR / 2 << "\" y=\"22\" text-anchor=\"middle\""
    << " font-size=\"15\">" << detail::xml_escape(plot.title) << "</text>\n"
    << "<rect x=\"" << kL << "\" y=\"" << kT << "\" width=\"" << pw
    << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"#333\"/>\n";

  // Ticks.
  if (categorical) {
    for (std::size_t i = 0; i < plot.category_labels.size(); ++i) {
      const double x = px(double(i)), y = kT + ph + 12;
      o << "<text x=\"" << x << "\" y=\"" << y << "\" transform=\"rotate(-45 "
        << x << " " << y << ")\" text-anchor=\"end\" font-size=\"10\">"
        << detail::xml_escape(plot.category_labels[i]) << "</text>\n";
    }
  } else {
    const double step = detail::nice_step(xb - xa);
    for (double x : detail::ticks(xa, xb, step)) {
      o << "<text x=\"" << px(x) << "\" y=\"" << kT + ph + 16
        << "\" text-anchor=\"middle\">" << fmt(x, detail::tick_decimals(step))
        << "</text>\n";
    }
  }
  const double ystep = detail::nice_step(yb - ya);
  for (double y : detail::ticks(ya, yb, ystep)) {
    o << "<text x=\"" << kL - 6 << "\" y=\"" << py(y) + 4
      << "\" text-anchor=\"end\">" << fmt(y, detail::tick_decimals(ystep))
      << "</text>\n"
      << "<line x1=\"" << kL << "\" x2=\"" << kL + pw << "\" y1=\"" << py(y)
      << "\" y2=\"" << py(y) << "\" stroke=\"#eee\"/>\n";
  }
  o << "<text x=\"" << kL + pw / 2 << "\" y=\"" << kH - 12
    << "\" text-anchor=\"middle\">" << detail::xml_escape(plot.x_label)
    << "</text>\n"
    << "<text transform=\"translate(18," << kT + ph / 2
    << ") rotate(-90)\" text-anchor=\"middle\">"
    << detail::xml_escape(plot.y_label) << "</text>\n";

  o << "<defs><clipPath id=\"plot-area\"><rect x=\"" << kL << "\" y=\"" << kT
    << "\" width=\"" << pw << "\" height=\"" << ph
    << "\"/></clipPath></defs>\n<g clip-path=\"url(#plot-area)\">\n";
  for (const auto& r : plot.references) {
    if (r.diagonal) {
      const double a = std::max(xa, ya), b = std::min(xb, yb);
      o << "<line x1=\"" << px(a) << "\" y1=\"" << py(a) << "\" x2=\"" << px(b)
        << "\" y2=\"" << py(b) << "\" stroke=\"#555\" stroke-dasharray=\"6 4\"/>\n";
    } else {
      o << "<line x1=\"" << kL << "\" x2=\"" << kL + pw << "\" y1=\""
        << py(r.value) << "\" y2=\"" << py(r.value)
        << "\" stroke=\"#555\" stroke-dasharray=\"6 4\"/>\n";
    }
    if (!r.label.empty()) {
      const double ly = r.diagonal ? py(std::min(xb, yb)) + 14 : py(r.value) - 4;
      o << "<text x=\"" << kL + pw - 4 << "\" y=\"" << ly
        << "\" text-anchor=\"end\" fill=\"#555\">"
        << detail::xml_escape(r.label) << "</text>\n";
    }
  }

  for (std::size_t si = 0; si < plot.series.size(); ++si) {
    const auto& s = plot.series[si];
    const char* color = detail::palette(s.color >= 0 ? s.color : int(si));
    const bool has_bounds = s.lo.size() == s.xs.size() && s.hi.size() == s.xs.size();
    if (s.band && has_bounds && !s.xs.empty()) {
      o << "<polygon fill=\"" << color << "\" fill-opacity=\"0.15\" points=\"";
      for (std::size_t i = 0; i < s.xs.size(); ++i) {
        o << px(s.xs[i]) << "," << py(s.hi[i]) << " ";
      }
      for (std::size_t i = s.xs.size(); i-- > 0;) {
        o << px(s.xs[i]) << "," << py(s.lo[i]) << " ";
      }
      o << "\"/>\n";
    } else if (has_bounds) {
      for (std::size_t i = 0; i < s.xs.size(); ++i) {
        o << "<line x1=\"" << px(s.xs[i]) << "\" x2=\"" << px(s.xs[i])
          << "\" y1=\"" << py(s.lo[i]) << "\" y2=\"" << py(s.hi[i])
          << "\" stroke=\"" << color << "\"/>\n";
      }
    }
    if (s.points) {
      for (std::size_t i = 0; i < s.xs.size(); ++i) {
        o << "<circle cx=\"" << px(s.xs[i]) << "\" cy=\"" << py(s.ys[i])
          << "\" r=\"4\" fill=\"" << (s.dashed ? "white" : color)
          << "\" stroke=\"" << color << "\"/>\n";
      }
    } else if (!s.xs.empty()) {
      o << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\"" << (s.dashed ? " stroke-dasharray=\"6 4\"" : "")
        << " points=\"";
      for (std::size_t i = 0; i < s.xs.size(); ++i) {
        o << px(s.xs[i]) << "," << py(s.ys[i]) << " ";
      }
      o << "\"/>\n";
    }
  }
  o << "</g>\n";

  // Legend.
  for (std::size_t si = 0; si < plot.series.size(); ++si) {
    const auto& s = plot.series[si];
    if (s.label.empty()) continue;
    const char* color = detail::palette(s.color >= 0 ? s.color : int(si));
    const double ly = kT + 10 + 18.0 * double(si);
    o << "<line x1=\"" << kW - kR + 12 << "\" x2=\"" << kW - kR + 36
      << "\" y1=\"" << ly << "\" y2=\"" << ly << "\" stroke=\"" << color
      << "\" stroke-width=\"2\"" << (s.dashed ? " stroke-dasharray=\"6 4\"" : "")
      << "/>\n<text x=\"" << kW - kR + 42 << "\" y=\"" << ly + 4 << "\">"
      << detail::xml_escape(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

inline void emit_plot(const std::filesystem::path& dir, const std::string& stem,
                      const Plot& plot, const FormatSet& formats) {
  if (formats.count(OutputFormat::kSvg)) {
    write_atomic(dir / (stem + ".svg"), render_svg(plot));
  }
}

}  // namespace crowdbench
