#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "limits_sd/ai_augmentation.hpp"
#include "limits_sd/errors.hpp"
#include "limits_sd/number_format.hpp"
#include "limits_sd/scenario.hpp"
#include "limits_sd/world3.hpp"

namespace limits_sd {

// ===========================================================================
// Generic box-constrained coordinate descent
// ===========================================================================

struct SearchBox {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<bool> log_scale;  // search in log space (requires lower > 0)
};

/// Coupling constraint between coordinates. The start point must satisfy it
/// and the feasible set must be convex along every search line.
using Feasibility = std::function<bool(std::span<const double>)>;

struct SearchOptions {
  std::size_t budget = 500;   // objective evaluations, including the start point
  double tolerance = 1e-6;    // final line-search bracket, as a fraction of a coordinate's range
  double initial_span = 1.0;  // first coordinate bracket, as a fraction of the range
  bool pattern_moves = true;  // line search along each sweep's net displacement
  Feasibility feasible;
};

struct SearchResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  double start_value = std::numeric_limits<double>::infinity();
  std::size_t evaluations = 0;
  std::vector<double> accepted;  // objective of every accepted iterate, start first
  bool improved = false;
};

namespace detail {

class CoordinateMap {
public:
  CoordinateMap(double lo, double hi, bool log_scale) : log_(log_scale && lo > 0.0), lo_(lo), hi_(hi) {}
  double to_unit(double x) const {
    if (hi_ == lo_) return 0.0;
    return log_ ? std::log(x / lo_) / std::log(hi_ / lo_) : (x - lo_) / (hi_ - lo_);
  }
  double from_unit(double u) const {
    if (hi_ == lo_) return lo_;
    const double x = log_ ? lo_ * std::pow(hi_ / lo_, u) : lo_ + u * (hi_ - lo_);
    return std::clamp(x, lo_, hi_);
  }

private:
  bool log_;
  double lo_, hi_;
};

}  // namespace detail

/// Minimizes `f` over a box by cyclic coordinate descent with golden-section
/// line searches. Coordinates are searched in unit space (log-mapped where
/// requested) on a bracket around the current value that widens when the
/// minimum lands near its edge and narrows otherwise. After each sweep a
/// further golden-section search runs along the sweep's net displacement,
/// which then joins the direction set. A point is accepted only if it improves the best value, so the accepted
/// sequence never increases. Fixed coordinates (lower == upper) never move.
/// Deterministic: no randomness, fixed sweep order.
inline SearchResult coordinate_descent(const std::function<double(std::span<const double>)>& f,
                                       std::vector<double> start, const SearchBox& box,
                                       const SearchOptions& opt = {}) {
  const std::size_t n = start.size();
  if (box.lower.size() != n || box.upper.size() != n) throw InvalidConfig("search box dimension mismatch");
  std::vector<detail::CoordinateMap> maps;
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(box.lower[i] <= box.upper[i])) throw InvalidConfig("search box lower > upper");
    start[i] = std::clamp(start[i], box.lower[i], box.upper[i]);
    maps.emplace_back(box.lower[i], box.upper[i], i < box.log_scale.size() && box.log_scale[i]);
    if (box.lower[i] < box.upper[i]) free.push_back(i);
  }
  if (opt.feasible && !opt.feasible(start)) throw InvalidConfig("search start point violates the constraint");

  SearchResult res;
  res.x = start;
  if (opt.budget == 0) return res;

  auto eval = [&](const std::vector<double>& x) {
    ++res.evaluations;
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };
  res.value = res.start_value = eval(res.x);
  res.accepted.push_back(res.value);

  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = maps[i].to_unit(res.x[i]);
  auto point = [&](const std::vector<double>& base, const std::vector<double>& dir, double t) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = maps[i].from_unit(std::clamp(base[i] + t * dir[i], 0.0, 1.0));
    return x;
  };
  // Largest t in [0, limit] keeping base + t*dir inside the unit box and feasible.
  auto reach = [&](const std::vector<double>& base, const std::vector<double>& dir, double limit) {
    double t = limit;
    for (std::size_t i = 0; i < n; ++i) {
      if (dir[i] > 0) t = std::min(t, (1.0 - base[i]) / dir[i]);
      if (dir[i] < 0) t = std::min(t, -base[i] / dir[i]);
    }
    t = std::max(t, 0.0);
    if (opt.feasible && t > 0 && !opt.feasible(point(base, dir, t))) {
      double ok = 0.0, bad = t;
      for (int k = 0; k < 60; ++k) {
        const double mid = 0.5 * (ok + bad);
        (opt.feasible(point(base, dir, mid)) ? ok : bad) = mid;
      }
      t = ok;
    }
    return t;
  };

  // Golden-section search of t in [ta, tb] along dir from u, with Brent's
  // parabolic steps whenever the last three probes fit a sensible parabola.
  // Accepts the best probe if it improves on the current value and returns
  // its t (0 when nothing improved).
  auto line_search = [&](const std::vector<double>& dir, double ta, double tb, double t_tol) {
    const double cgold = (3.0 - std::sqrt(5.0)) / 2.0;
    double best_v = res.value, best_t = 0.0;
    auto probe = [&](double t) {
      const double v = eval(point(u, dir, t));
      if (v < best_v) {
        best_v = v;
        best_t = t;
      }
      return v;
    };
    // Start from the current point when it lies inside the bracket; its value
    // is already known.
    const bool inside = ta < 0.0 && 0.0 < tb;
    double x = inside ? 0.0 : ta + cgold * (tb - ta);
    double w = x, v = x;
    double fx = inside ? res.value : probe(x), fw = fx, fv = fx;
    double step = 0.0, prev_step = 0.0;
    const double tol = t_tol / 2;
    while (res.evaluations < opt.budget) {
      const double mid = 0.5 * (ta + tb);
      if (std::abs(x - mid) <= 2 * tol - 0.5 * (tb - ta)) break;
      bool golden = true;
      if (std::abs(prev_step) > tol) {
        const double r = (x - w) * (fx - fv);
        double q = (x - v) * (fx - fw);
        double pnum = (x - v) * q - (x - w) * r;
        q = 2 * (q - r);
        if (q > 0) pnum = -pnum;
        q = std::abs(q);
        if (std::abs(pnum) < std::abs(0.5 * q * prev_step) && pnum > q * (ta - x) && pnum < q * (tb - x)) {
          prev_step = step;
          step = pnum / q;
          const double t = x + step;
          if (t - ta < 2 * tol || tb - t < 2 * tol) step = mid >= x ? tol : -tol;
          golden = false;
        }
      }
      if (golden) {
        prev_step = x >= mid ? ta - x : tb - x;
        step = cgold * prev_step;
      }
      const double t = std::abs(step) >= tol ? x + step : x + (step > 0 ? tol : -tol);
      const double ft = probe(t);
      if (ft <= fx) {
        (t >= x ? ta : tb) = x;
        v = w, fv = fw;
        w = x, fw = fx;
        x = t, fx = ft;
      } else {
        (t < x ? ta : tb) = t;
        if (ft <= fw || w == x) {
          v = w, fv = fw;
          w = t, fw = ft;
        } else if (ft <= fv || v == x || v == w) {
          v = t, fv = ft;
        }
      }
    }
    if (best_v < res.value) {
      for (std::size_t i = 0; i < n; ++i) u[i] = std::clamp(u[i] + best_t * dir[i], 0.0, 1.0);
      res.x = point(u, dir, 0.0);
      res.value = best_v;
      res.accepted.push_back(best_v);
      res.improved = true;
      return best_t;
    }
    return 0.0;
  };

  // Line searches stop at this fraction of their bracket; precision grows as
  // the brackets shrink.
  constexpr double kRelativeLineTolerance = 0.05;

  // Search directions start as the free coordinate axes. With pattern moves on,
  // each sweep's net displacement replaces the direction that gave the largest
  // decrease (Powell's update), which lets the search follow correlated valleys.
  struct Direction {
    std::vector<double> d;  // unit space, max |component| = 1
    double span;
  };
  std::vector<Direction> dirs;
  auto reset_directions = [&] {
    dirs.clear();
    for (std::size_t i : free) {
      std::vector<double> d(n, 0.0);
      d[i] = 1.0;
      dirs.push_back({std::move(d), opt.initial_span});
    }
  };
  reset_directions();
  auto negate = [](std::vector<double> d) {
    for (double& v : d) v = -v;
    return d;
  };
  auto active = [&] {
    for (const auto& dir : dirs) {
      if (dir.span >= opt.tolerance) return true;
    }
    return false;
  };

  // When every bracket has collapsed, restart from the axes as long as the
  // previous round still made progress; kinks in the objective can otherwise
  // freeze the search early.
  double round_start_value = res.value;
  for (;;) {
    if (!active()) {
      const bool progressed = res.value < round_start_value - 1e-12 * std::abs(round_start_value);
      if (!progressed || res.evaluations >= opt.budget) break;
      round_start_value = res.value;
      reset_directions();
    }
    if (res.evaluations >= opt.budget) break;
    const std::vector<double> sweep_start = u;
    const double value_at_start = res.value;
    double biggest_drop = 0.0;
    std::size_t biggest = 0;
    for (std::size_t k = 0; k < dirs.size() && res.evaluations < opt.budget; ++k) {
      Direction& dir = dirs[k];
      if (dir.span < opt.tolerance) continue;
      const double up = reach(u, dir.d, dir.span / 2);
      const double down = reach(u, negate(dir.d), dir.span / 2);
      if (up + down <= opt.tolerance) {
        dir.span /= 2;
        continue;
      }
      const double before = res.value;
      const double t = line_search(dir.d, -down, up, std::max(opt.tolerance, kRelativeLineTolerance * (up + down)));
      const bool near_edge = t != 0.0 && std::abs(t) > 0.25 * dir.span;
      dir.span = near_edge ? std::min(1.0, dir.span * 2) : dir.span / 2;
      if (before - res.value > biggest_drop) {
        biggest_drop = before - res.value;
        biggest = k;
      }
    }
    if (!opt.pattern_moves || res.evaluations >= opt.budget || biggest_drop <= 0.0) continue;
    std::vector<double> d(n);
    double longest = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d[i] = u[i] - sweep_start[i];
      longest = std::max(longest, std::abs(d[i]));
    }
    if (longest <= opt.tolerance) continue;
    for (double& v : d) v /= longest;
    const double tmax = reach(u, d, 2.0 * longest);
    if (tmax > opt.tolerance) line_search(d, 0.0, tmax, std::max(opt.tolerance, kRelativeLineTolerance * tmax));
    if (value_at_start - res.value > 0.0 && dirs.size() > 1) {
      dirs.erase(dirs.begin() + static_cast<std::ptrdiff_t>(biggest));
      dirs.push_back({std::move(d), std::min(1.0, 2.0 * longest)});
    }
  }
  return res;
}

// ===========================================================================
// AI parameter calibration
// ===========================================================================

struct CalibrationTarget {
  std::string variable = world3::kPersistentPollution;
  std::vector<double> years = kBenchmarkYears;
  std::vector<double> target_pct;
  std::vector<double> weights;  // empty means uniform

  double weight(std::size_t i) const { return weights.empty() ? 1.0 : weights.at(i); }

  void validate() const {
    if (years.size() != target_pct.size() || years.empty()) {
      throw FormatError("targets need one value per year");
    }
    if (!weights.empty() && weights.size() != years.size()) throw FormatError("weights need one value per year");
    for (double v : target_pct) {
      if (!std::isfinite(v)) throw FormatError("targets must be finite");
    }
    for (double w : weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw FormatError("weights must be finite and nonnegative");
    }
  }
};

/// Published persistent-pollution deltas, in percent, at the benchmark years.
inline CalibrationTarget published_pollution_target() {
  CalibrationTarget t;
  t.target_pct = {0.94, 3.77, 21.69, 37.31, 45.35};
  return t;
}

/// Published footprint deltas. Used for validation only, never fitted.
inline CalibrationTarget published_footprint_target() {
  CalibrationTarget t;
  t.variable = world3::kHumanEcologicalFootprint;
  t.target_pct = {0.01, 8.40, 7.09, 3.83, 10.71};
  return t;
}

/// Target file: "variable = <name>", then one "<year> = <pct> [weight]" per line.
inline CalibrationTarget parse_targets(std::string_view text) {
  CalibrationTarget t;
  t.years.clear();
  std::vector<double> weights;
  bool any_weight = false;
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string line(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    const std::string where = "targets line " + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (eq == std::string::npos) throw FormatError(where + "expected 'key = value'");
    auto words = [](const std::string& s) {
      std::vector<std::string> out;
      std::size_t i = 0;
      while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
      }
      return out;
    };
    const auto key = words(line.substr(0, eq));
    const auto val = words(line.substr(eq + 1));
    if (key.size() != 1 || val.empty()) throw FormatError(where + "expected 'key = value'");
    if (key[0] == "variable") {
      if (val.size() != 1 || !is_identifier(val[0])) throw FormatError(where + "bad variable name");
      t.variable = val[0];
      continue;
    }
    auto year = parse_number(key[0]);
    auto pct = parse_number(val[0]);
    if (!year || !pct || val.size() > 2) throw FormatError(where + "expected '<year> = <pct> [weight]'");
    double w = 1.0;
    if (val.size() == 2) {
      auto pw = parse_number(val[1]);
      if (!pw) throw FormatError(where + "weight is not a number");
      w = *pw;
      any_weight = true;
    }
    t.years.push_back(*year);
    t.target_pct.push_back(*pct);
    weights.push_back(w);
  }
  if (any_weight) t.weights = std::move(weights);
  t.validate();
  return t;
}

inline std::string format_targets(const CalibrationTarget& t) {
  std::string out = "variable = " + t.variable + "\n";
  for (std::size_t i = 0; i < t.years.size(); ++i) {
    out += format_number(t.years[i]) + " = " + format_number(t.target_pct[i]);
    if (!t.weights.empty()) out += " " + format_number(t.weights[i]);
    out += "\n";
  }
  return out;
}

struct ParamRange {
  double lower = 0.0;
  double upper = 0.0;
  bool log_scale = false;

  bool fixed() const { return lower == upper; }
};

/// Search box over AiParams, indexed like kAiFields, plus the admissible
/// e-waste share of the combined initial coefficient.
struct ParamBounds {
  std::array<ParamRange, kAiFields.size()> ranges{};
  double ewaste_share_min = 0.1;
  double ewaste_share_max = 0.5;

  ParamRange& operator[](std::string_view key) { return ranges[index_of(key)]; }
  const ParamRange& operator[](std::string_view key) const { return ranges[index_of(key)]; }

  static std::size_t index_of(std::string_view key) {
    const AiField* f = find_ai_field(key);
    if (!f) throw FormatError("unknown parameter '" + std::string(key) + "'");
    return static_cast<std::size_t>(f - kAiFields.data());
  }

  void validate() const {
    for (std::size_t i = 0; i < ranges.size(); ++i) {
      const auto& r = ranges[i];
      const std::string k = kAiFields[i].key;
      if (!std::isfinite(r.lower) || !std::isfinite(r.upper) || r.lower > r.upper) {
        throw FormatError("bounds for " + k + " must be finite with lower <= upper");
      }
      if (r.log_scale && r.lower <= 0.0) throw FormatError("log-scale bounds for " + k + " must be positive");
      AiParams lo, hi;
      for (std::size_t j = 0; j < ranges.size(); ++j) {
        lo.*kAiFields[j].member = ranges[j].lower;
        hi.*kAiFields[j].member = ranges[j].upper;
      }
      try {
        validate_ai_params(lo);
        validate_ai_params(hi);
      } catch (const InvalidConfig& e) {
        throw FormatError(std::string("bounds violate parameter ranges: ") + e.what());
      }
    }
    if (!(0.0 <= ewaste_share_min && ewaste_share_min <= ewaste_share_max && ewaste_share_max <= 1.0)) {
      throw FormatError("ewaste share bounds must satisfy 0 <= min <= max <= 1");
    }
  }
};

/// Default search box. fioai, conversion_const and activation_year are fixed:
/// fioai and conversion_const multiply both coefficients, so only their product
/// with the coefficients is identifiable from pollution deltas.
inline ParamBounds default_bounds() {
  ParamBounds b;
  b["fioai"] = {0.02, 0.02};
  b["carbon_coeff_initial"] = {1e-4, 1e-1, true};
  b["ewaste_coeff_initial"] = {1e-5, 1e-1, true};
  b["carbon_decline_rate"] = {0.0, 0.2};
  b["ewaste_decline_rate"] = {0.0, 0.2};
  b["coeff_floor"] = {1e-3, 0.5};
  b["conversion_const"] = {1.0, 1.0};
  b["activation_year"] = {2020.0, 2020.0};
  return b;
}

/// Bounds file: "<key> = <lower> <upper> [log]" or "<key> = <value>" (fixed),
/// plus "ewaste_share = <min> <max>". Keys not mentioned keep their defaults.
inline ParamBounds parse_bounds(std::string_view text) {
  ParamBounds b = default_bounds();
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string line(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "bounds line " + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError(where + "expected 'key = value'");
    std::vector<std::string> words;
    for (std::size_t i = eq + 1; i < line.size();) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
      if (j > i) words.push_back(line.substr(i, j - i));
      i = j;
    }
    std::string key = line.substr(0, eq);
    key.erase(0, key.find_first_not_of(" \t"));
    key.erase(key.find_last_not_of(" \t") + 1);
    bool log_scale = !words.empty() && words.back() == "log";
    if (log_scale) words.pop_back();
    std::vector<double> nums;
    for (const auto& w : words) {
      auto v = parse_number(w);
      if (!v) throw FormatError(where + "'" + w + "' is not a number");
      nums.push_back(*v);
    }
    if (nums.empty() || nums.size() > 2) throw FormatError(where + "expected one or two numbers");
    const double lo = nums.front(), hi = nums.back();
    if (key == "ewaste_share") {
      b.ewaste_share_min = lo;
      b.ewaste_share_max = hi;
    } else {
      if (!find_ai_field(key)) throw FormatError(where + "unknown parameter '" + key + "'");
      b[key] = {lo, hi, log_scale};
    }
  }
  b.validate();
  return b;
}

/// Documented start point of the search (clamped into the bounds).
inline AiParams default_start_params() {
  AiParams p;
  p.fioai = 0.02;
  p.carbon_coeff_initial = 5e-3;
  p.ewaste_coeff_initial = 1e-3;
  p.carbon_decline_rate = 0.05;
  p.ewaste_decline_rate = 0.05;
  p.coeff_floor = 0.2;
  p.conversion_const = 1.0;
  p.activation_year = 2020.0;
  return p;
}

/// Runs BAU once and scores AI parameter sets against a target.
class CalibrationProblem {
public:
  CalibrationProblem(CalibrationTarget target, ModelSpec base = load_world3_corpus(), SimConfig config = {})
      : target_(std::move(target)), base_(std::move(base)), config_(std::move(config)) {
    target_.validate();
    bau_ = integrate_run(base_, config_);
    bau_.scenario = "bau";
  }

  const CalibrationTarget& target() const { return target_; }
  const RunResult& bau() const { return bau_; }
  const ModelSpec& base() const { return base_; }

  RunResult run(const AiParams& p) const {
    RunResult r = integrate_run(augment_model(base_, p), config_);
    r.scenario = "ai_augmented";
    return r;
  }

  std::vector<std::optional<double>> achieved(const AiParams& p) const {
    return compare_runs(bau_, run(p), target_.variable, target_.years).pct_delta;
  }

  /// Weighted sum of squared residuals; +inf when the run fails or a delta is
  /// undefined.
  double objective(const AiParams& p) const {
    try {
      const auto got = achieved(p);
      double sum = 0.0;
      for (std::size_t i = 0; i < got.size(); ++i) {
        if (!got[i]) return std::numeric_limits<double>::infinity();
        const double r = *got[i] - target_.target_pct[i];
        sum += target_.weight(i) * r * r;
      }
      return sum;
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  }

private:
  CalibrationTarget target_;
  ModelSpec base_;
  SimConfig config_;
  RunResult bau_;
};

inline double objective(const AiParams& p, const CalibrationTarget& target) {
  return CalibrationProblem(target).objective(p);
}

struct CalibrationResult {
  AiParams params;
  AiParams start;
  double objective = std::numeric_limits<double>::infinity();
  double start_objective = std::numeric_limits<double>::infinity();
  std::vector<std::optional<double>> achieved;
  std::vector<std::optional<double>> residuals;
  std::size_t budget = 0;
  std::size_t evaluations = 0;
  std::vector<double> accepted;
  bool improved = false;
  std::string diagnostic;  // set when the budget ran out without improvement
  std::uint64_t corpus_checksum = 0;

  double max_abs_residual() const {
    double m = 0.0;
    for (const auto& r : residuals) m = std::max(m, r ? std::abs(*r) : std::numeric_limits<double>::infinity());
    return m;
  }
};

inline AiParams params_from_vector(std::span<const double> x) {
  AiParams p;
  for (std::size_t i = 0; i < kAiFields.size(); ++i) p.*kAiFields[i].member = x[i];
  return p;
}

inline std::vector<double> params_to_vector(const AiParams& p) {
  std::vector<double> x;
  for (const auto& f : kAiFields) x.push_back(p.*f.member);
  return x;
}

inline CalibrationResult calibrate_ai_params(const CalibrationProblem& problem, const ParamBounds& bounds,
                                             std::size_t budget = 500,
                                             const AiParams& start = default_start_params(),
                                             double tolerance = 1e-3) {
  bounds.validate();
  SearchBox box;
  for (const auto& r : bounds.ranges) {
    box.lower.push_back(r.lower);
    box.upper.push_back(r.upper);
    box.log_scale.push_back(r.log_scale);
  }
  const std::size_t ci = ParamBounds::index_of("carbon_coeff_initial");
  const std::size_t ei = ParamBounds::index_of("ewaste_coeff_initial");
  const double smin = bounds.ewaste_share_min, smax = bounds.ewaste_share_max;

  SearchOptions opt;
  opt.budget = budget;
  opt.tolerance = tolerance;
  // ewaste / (carbon + ewaste) stays within [smin, smax]; a zero total is
  // admitted so fully zero pathways remain expressible.
  opt.feasible = [=](std::span<const double> x) {
    const double total = x[ci] + x[ei];
    if (total <= 0.0) return true;
    const double share = x[ei] / total;
    return share >= smin * (1 - 1e-12) && share <= smax * (1 + 1e-12);
  };

  std::vector<double> x0 = params_to_vector(start);
  for (std::size_t i = 0; i < x0.size(); ++i) {
    x0[i] = bounds.ranges[i].fixed() ? bounds.ranges[i].lower
                                     : std::clamp(x0[i], bounds.ranges[i].lower, bounds.ranges[i].upper);
  }

  auto f = [&](std::span<const double> x) { return problem.objective(params_from_vector(x)); };
  SearchResult sr = coordinate_descent(f, x0, box, opt);

  CalibrationResult out;
  out.start = params_from_vector(x0);
  out.params = params_from_vector(sr.x);
  out.objective = sr.value;
  out.start_objective = sr.start_value;
  out.budget = budget;
  out.evaluations = sr.evaluations;
  out.accepted = sr.accepted;
  out.improved = sr.improved;
  out.corpus_checksum = fnv1a64(serialize_model(problem.base()));
  if (!sr.improved) {
    out.diagnostic = budget == 0 ? "budget of 0 evaluations: start parameters returned unevaluated"
                                 : "budget exhausted without improvement over the start parameters";
    out.objective = budget == 0 ? problem.objective(out.params) : sr.value;
    out.start_objective = out.objective;
  }
  try {
    out.achieved = problem.achieved(out.params);
  } catch (const Error&) {
    out.achieved.assign(problem.target().years.size(), std::nullopt);
  }
  for (std::size_t i = 0; i < out.achieved.size(); ++i) {
    out.residuals.push_back(out.achieved[i] ? std::optional<double>(*out.achieved[i] - problem.target().target_pct[i])
                                            : std::nullopt);
  }
  return out;
}

inline CalibrationResult calibrate_ai_params(const CalibrationTarget& target, const ParamBounds& bounds = default_bounds(),
                                             std::size_t budget = 500) {
  return calibrate_ai_params(CalibrationProblem(target), bounds, budget);
}

/// Plain-text provenance report: targets, achieved values, residuals, budget
/// and the checksum of the model that was fitted.
inline std::string format_calibration_report(const CalibrationResult& r, const CalibrationTarget& t,
                                             double tolerance_pp) {
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string("undefined"); };
  std::string out;
  out += "variable: " + t.variable + "\n";
  out += "model checksum (fnv1a64 of canonical text): " + checksum_hex(r.corpus_checksum) + "\n";
  out += "budget: " + std::to_string(r.budget) + "\n";
  out += "evaluations: " + std::to_string(r.evaluations) + "\n";
  out += "start objective: " + format_number(r.start_objective) + "\n";
  out += "final objective: " + format_number(r.objective) + "\n";
  out += "accepted iterates: " + std::to_string(r.accepted.size()) + "\n";
  if (!r.diagnostic.empty()) out += "diagnostic: " + r.diagnostic + "\n";
  out += "tolerance (pp): " + format_number(tolerance_pp) + "\n";
  out += "\nyear,target_pct,achieved_pct,residual_pp,within_tolerance\n";
  for (std::size_t i = 0; i < t.years.size(); ++i) {
    const bool ok = r.residuals[i] && std::abs(*r.residuals[i]) <= tolerance_pp;
    out += format_number(t.years[i]) + "," + format_number(t.target_pct[i]) + "," + opt(r.achieved[i]) + "," +
           opt(r.residuals[i]) + "," + (ok ? "yes" : "no") + "\n";
  }
  out += "\nparameters:\n" + format_ai_preset(r.params);
  out += "\nstart parameters:\n" + format_ai_preset(r.start);
  return out;
}

}  // namespace limits_sd
