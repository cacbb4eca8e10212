#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "limits_sd/engine.hpp"
#include "limits_sd/number_format.hpp"
#include "limits_sd/scenario.hpp"

namespace limits_sd {

// CSV: '.' decimals, LF line endings, shortest round-trip numbers.

inline std::string run_csv(const RunResult& r) {
  std::string out = "time";
  for (const auto& [name, _] : r.series) out += "," + name;
  out += "\n";
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    out += format_number(r.times[i]);
    for (const auto& [_, values] : r.series) out += "," + format_number(values[i]);
    out += "\n";
  }
  return out;
}

inline std::string warnings_log(const std::vector<Warning>& warnings) {
  std::string out = "time,element,kind,message\n";
  for (const auto& w : warnings) {
    std::string msg = w.message;
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    out += format_number(w.time) + "," + w.element + "," + w.kind + "," + msg + "\n";
  }
  return out;
}

inline std::string comparison_csv_header() { return "variable,year,base,other,pct_delta\n"; }

/// Rows for one report; an undefined delta is written as an empty field.
inline std::string comparison_csv_rows(const ComparisonReport& rep) {
  std::string out;
  for (std::size_t i = 0; i < rep.years.size(); ++i) {
    out += rep.variable + "," + format_number(rep.years[i]) + "," + format_number(rep.base_values[i]) + "," +
           format_number(rep.other_values[i]) + "," + (rep.pct_delta[i] ? format_number(*rep.pct_delta[i]) : "") +
           "\n";
  }
  return out;
}

inline std::string comparison_summary(const ComparisonReport& rep) {
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string("undefined"); };
  std::string out;
  out += "variable: " + rep.variable + "\n";
  out += "base: " + rep.base_scenario + ", other: " + rep.other_scenario + "\n";
  out += "peak " + rep.base_scenario + ": " + format_number(rep.peak_base.peak_value) + " at " +
         format_number(rep.peak_base.peak_time) + "\n";
  out += "peak " + rep.other_scenario + ": " + format_number(rep.peak_scenario.peak_value) + " at " +
         format_number(rep.peak_scenario.peak_time) + "\n";
  out += "peak delta pct: " + opt(percent_delta(rep.peak_base.peak_value, rep.peak_scenario.peak_value)) + "\n";
  out += "residue delta pct (final sample): " + opt(rep.residue_delta_2100) + "\n";
  if (rep.window) {
    out += "cumulative overshoot pct " + format_number(rep.window->from) + ":" + format_number(rep.window->to) +
           ": " + opt(rep.cumulative_overshoot_pct) + "\n";
  }
  for (std::size_t i = 0; i < rep.years.size(); ++i) {
    out += "  " + format_number(rep.years[i]) + ": " + opt(rep.pct_delta[i]) + "\n";
  }
  return out;
}

// ---- SVG line chart -------------------------------------------------------

namespace detail {

inline std::string fixed2(double v) {
  if (v == 0.0) v = 0.0;  // drop negative zero
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  return std::string(buf, res.ptr);
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

/// 1, 2 or 5 times a power of ten, giving at most `max_ticks` intervals.
inline double nice_step(double span, int max_ticks) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / max_ticks;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

}  // namespace detail

struct ChartSeries {
  std::string label;
  std::vector<double> values;
};

/// Two-or-more-series line chart on a fixed 800x450 viewBox with decade ticks
/// on the time axis. Output depends only on the inputs.
inline std::string svg_line_chart(const std::string& title, const std::vector<double>& times,
                                  const std::vector<ChartSeries>& series) {
  using detail::fixed2;
  constexpr double W = 800, H = 450, left = 90, right = 20, top = 40, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

  const double t0 = times.empty() ? 0.0 : times.front();
  const double t1 = times.empty() ? 1.0 : std::max(times.back(), t0 + 1e-9);
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (const auto& s : series) {
    for (double v : s.values) {
      if (!std::isfinite(v)) continue;
      lo = any ? std::min(lo, v) : v;
      hi = any ? std::max(hi, v) : v;
      any = true;
    }
  }
  lo = std::min(lo, 0.0);
  if (!(hi > lo)) hi = lo + 1.0;
  const double ystep = detail::nice_step(hi - lo, 5);
  lo = std::floor(lo / ystep) * ystep;
  hi = std::ceil(hi / ystep) * ystep;

  auto sx = [&](double t) { return left + (t - t0) / (t1 - t0) * pw; };
  auto sy = [&](double v) { return top + (hi - v) / (hi - lo) * ph; };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 450\" width=\"800\" height=\"450\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"450\" fill=\"white\"/>\n";
  out += "<text x=\"400\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
         detail::xml_escape(title) + "</text>\n";
  out += "<g stroke=\"#999\" stroke-width=\"1\">\n";
  out += "<line x1=\"" + fixed2(left) + "\" y1=\"" + fixed2(top + ph) + "\" x2=\"" + fixed2(left + pw) + "\" y2=\"" +
         fixed2(top + ph) + "\"/>\n";
  out += "<line x1=\"" + fixed2(left) + "\" y1=\"" + fixed2(top) + "\" x2=\"" + fixed2(left) + "\" y2=\"" +
         fixed2(top + ph) + "\"/>\n";
  out += "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (double t = std::ceil(t0 / 10.0) * 10.0; t <= t1 + 1e-9; t += 10.0) {
    const double x = sx(t);
    out += "<line x1=\"" + fixed2(x) + "\" y1=\"" + fixed2(top + ph) + "\" x2=\"" + fixed2(x) + "\" y2=\"" +
           fixed2(top + ph + 5) + "\" stroke=\"#999\"/>\n";
    out += "<text x=\"" + fixed2(x) + "\" y=\"" + fixed2(top + ph + 18) + "\" text-anchor=\"middle\">" +
           format_number(t) + "</text>\n";
  }
  const int nyt = static_cast<int>(std::lround((hi - lo) / ystep));
  for (int k = 0; k <= nyt; ++k) {
    const double v = lo + k * ystep;
    const double y = sy(v);
    out += "<line x1=\"" + fixed2(left - 5) + "\" y1=\"" + fixed2(y) + "\" x2=\"" + fixed2(left) + "\" y2=\"" +
           fixed2(y) + "\" stroke=\"#999\"/>\n";
    out += "<text x=\"" + fixed2(left - 8) + "\" y=\"" + fixed2(y + 4) + "\" text-anchor=\"end\">" +
           format_number(std::abs(v) < ystep * 1e-9 ? 0.0 : v) + "</text>\n";
  }
  out += "</g>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = colors[s % 4];
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < times.size() && i < series[s].values.size(); ++i) {
      const double v = series[s].values[i];
      if (!std::isfinite(v)) continue;
      if (!first) out += " ";
      out += fixed2(sx(times[i])) + "," + fixed2(sy(v));
      first = false;
    }
    out += "\"/>\n";
    const double ly = top + 14 + 16 * static_cast<double>(s);
    out += "<line x1=\"" + fixed2(left + pw - 150) + "\" y1=\"" + fixed2(ly) + "\" x2=\"" + fixed2(left + pw - 130) +
           "\" y2=\"" + fixed2(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + fixed2(left + pw - 125) + "\" y=\"" + fixed2(ly + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + detail::xml_escape(series[s].label) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace limits_sd
