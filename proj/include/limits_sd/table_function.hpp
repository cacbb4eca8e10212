#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "limits_sd/errors.hpp"
#include "limits_sd/number_format.hpp"

namespace limits_sd {

/// Non-fatal diagnostic produced during a run.
struct Warning {
  double time = 0.0;
  std::string element;
  std::string kind;
  std::string message;

  friend bool operator==(const Warning&, const Warning&) = default;
};

inline constexpr const char* kLookupBoundsWarning = "LOOKUP_BOUNDS";

struct Knot {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Knot&, const Knot&) = default;
};

struct LookupResult {
  double value = 0.0;
  bool out_of_bounds = false;
};

/// Piecewise-linear lookup. Queries outside the knot range clamp to the
/// nearest endpoint and are flagged so the caller can log a warning.
class TableFunction {
public:
  TableFunction() = default;

  explicit TableFunction(std::vector<Knot> knots) : knots_(std::move(knots)) {
    if (knots_.size() < 2) throw InvalidElement("table needs at least 2 knots");
    for (std::size_t i = 0; i < knots_.size(); ++i) {
      if (!std::isfinite(knots_[i].x) || !std::isfinite(knots_[i].y)) {
        throw InvalidElement("table knots must be finite");
      }
      if (i > 0 && !(knots_[i].x > knots_[i - 1].x)) {
        throw InvalidElement("table x values must be strictly increasing");
      }
    }
    auto [lo, hi] = std::minmax_element(knots_.begin(), knots_.end(),
                                        [](const Knot& a, const Knot& b) { return a.y < b.y; });
    y_min_ = lo->y;
    y_max_ = hi->y;
  }

  const std::vector<Knot>& knots() const { return knots_; }
  double x_min() const { return knots_.front().x; }
  double x_max() const { return knots_.back().x; }
  double y_min() const { return y_min_; }
  double y_max() const { return y_max_; }

  LookupResult evaluate(double x) const {
    if (x <= knots_.front().x) return {knots_.front().y, x < knots_.front().x};
    if (x >= knots_.back().x) return {knots_.back().y, x > knots_.back().x};
    if (std::isnan(x)) return {x, false};
    auto hi = std::upper_bound(knots_.begin(), knots_.end(), x,
                               [](double v, const Knot& k) { return v < k.x; });
    auto lo = hi - 1;
    const double t = (x - lo->x) / (hi->x - lo->x);
    double y = lo->y + t * (hi->y - lo->y);
    // Rounding can push the interpolant a hair outside its bracket.
    return {std::clamp(y, std::min(lo->y, hi->y), std::max(lo->y, hi->y)), false};
  }

  friend bool operator==(const TableFunction& a, const TableFunction& b) {
    return a.knots_ == b.knots_;
  }

private:
  std::vector<Knot> knots_;
  double y_min_ = 0.0;
  double y_max_ = 0.0;
};

inline std::string lookup_bounds_message(const std::string& table, double x, const TableFunction& t) {
  return "input " + format_number(x) + " outside [" + format_number(t.x_min()) + ", " +
         format_number(t.x_max()) + "] of table '" + table + "'; clamped";
}

/// Evaluates `table` at `x`; an out-of-bounds query appends exactly one
/// LOOKUP_BOUNDS record to `warnings`.
inline double lookup_eval(const TableFunction& table, double x, std::vector<Warning>& warnings,
                          double time = 0.0, const std::string& element = {},
                          const std::string& table_name = {}) {
  LookupResult r = table.evaluate(x);
  if (r.out_of_bounds) {
    warnings.push_back({time, element, kLookupBoundsWarning,
                        lookup_bounds_message(table_name.empty() ? element : table_name, x, table)});
  }
  return r.value;
}

}  // namespace limits_sd
