#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "limits_sd/ai_augmentation.hpp"
#include "limits_sd/engine.hpp"
#include "limits_sd/errors.hpp"
#include "limits_sd/number_format.hpp"
#include "limits_sd/world3.hpp"

namespace limits_sd {

struct Scenario {
  std::string name;
  std::string base_corpus = std::string(kWorld3CorpusId);
  std::map<std::string, double> overrides;
  std::string augmentation_ref;          // preset name, empty when not augmented
  std::optional<AiParams> augmentation;  // resolved preset
  std::string description;
};

/// Resolves a preset reference (as written in a registry) to parameters.
using PresetResolver = std::function<AiParams(const std::string&)>;

inline constexpr std::string_view kDefaultPresetName = "ai-params.preset";

inline AiParams resolve_builtin_preset(const std::string& ref) {
  if (ref == kDefaultPresetName) return default_ai_params();
  throw FormatError("unknown augmentation preset '" + ref + "'");
}

/// Registry text format:
///
///   [name]                      starts a scenario
///   description = "text"
///   corpus = "world3-03"        optional, the only corpus shipped
///   augmentation = "preset"     optional AI preset reference
///   override.<constant> = <number>
///
/// '#' starts a comment outside quoted strings.
class ScenarioRegistry {
public:
  ScenarioRegistry() = default;

  static ScenarioRegistry parse(std::string_view text, const PresetResolver& resolve = resolve_builtin_preset) {
    ScenarioRegistry reg;
    Scenario* cur = nullptr;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t nl = text.find('\n', pos);
      if (nl == std::string_view::npos) nl = text.size();
      std::string line = strip_comment(text.substr(pos, nl - pos));
      pos = nl + 1;
      ++line_no;
      const std::string where = "registry line " + std::to_string(line_no) + ": ";
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']' || line.size() < 3) throw FormatError(where + "malformed section header");
        std::string name = trim(line.substr(1, line.size() - 2));
        if (!is_identifier(name)) throw FormatError(where + "scenario name must be snake_case");
        if (reg.index_.count(name)) throw FormatError(where + "duplicate scenario '" + name + "'");
        reg.index_[name] = reg.scenarios_.size();
        reg.scenarios_.push_back(Scenario{});
        cur = &reg.scenarios_.back();
        cur->name = std::move(name);
        continue;
      }
      if (!cur) throw FormatError(where + "entry before the first [scenario] header");
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw FormatError(where + "expected 'key = value'");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key == "description" || key == "corpus" || key == "augmentation") {
        std::string s = unquote(value, where);
        if (key == "description") {
          cur->description = std::move(s);
        } else if (key == "corpus") {
          if (s != kWorld3CorpusId) throw FormatError(where + "unknown corpus '" + s + "'");
          cur->base_corpus = std::move(s);
        } else {
          cur->augmentation = resolve(s);
          cur->augmentation_ref = std::move(s);
        }
      } else if (key.rfind("override.", 0) == 0) {
        const std::string target = key.substr(9);
        if (!is_identifier(target)) throw FormatError(where + "bad override name '" + target + "'");
        auto v = parse_number(value);
        if (!v || !std::isfinite(*v)) throw FormatError(where + "override value is not a number");
        cur->overrides[target] = *v;
      } else {
        throw FormatError(where + "unknown key '" + key + "'");
      }
    }
    return reg;
  }

  const Scenario& find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw UnknownScenario(name);
    return scenarios_[it->second];
  }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  const std::vector<Scenario>& scenarios() const { return scenarios_; }

private:
  static std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    return std::string(s.substr(b, s.find_last_not_of(" \t\r") - b + 1));
  }

  static std::string strip_comment(std::string_view s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) quoted = !quoted;
      if (s[i] == '#' && !quoted) return std::string(s.substr(0, i));
    }
    return std::string(s);
  }

  static std::string unquote(const std::string& v, const std::string& where) {
    if (v.size() < 2 || v.front() != '"' || v.back() != '"') throw FormatError(where + "expected a quoted string");
    std::string out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      if (v[i] == '\\' && i + 2 < v.size()) ++i;
      out += v[i];
    }
    return out;
  }

  std::vector<Scenario> scenarios_;
  std::map<std::string, std::size_t> index_;
};

/// Registry shipped with the library: bau, ai_augmented, bau2.
inline const ScenarioRegistry& default_registry() {
  static const ScenarioRegistry reg = ScenarioRegistry::parse(embedded::scenario_registry);
  return reg;
}

/// The scenario's model: the base corpus, augmented when requested.
inline ModelSpec scenario_model(const Scenario& s, const ModelSpec& base) {
  return s.augmentation ? augment_model(base, *s.augmentation) : base;
}

/// Runs `s` against `base`. Scenario overrides apply first; overrides in
/// `config` take precedence over them.
inline RunResult run_scenario(const Scenario& s, const SimConfig& config, const ModelSpec& base) {
  SimConfig cfg = config;
  for (const auto& [k, v] : s.overrides) cfg.overrides.emplace(k, v);
  RunResult r = integrate_run(scenario_model(s, base), cfg);
  r.scenario = s.name;
  return r;
}

inline RunResult run_scenario(const Scenario& s, const SimConfig& config) {
  return run_scenario(s, config, load_world3_corpus());
}

inline RunResult run_scenario(const std::string& name, const SimConfig& config = {}) {
  return run_scenario(default_registry().find(name), config);
}

// ---- metrics --------------------------------------------------------------

inline const std::vector<double> kBenchmarkYears{2020, 2040, 2060, 2080, 2100};

struct PeakMetrics {
  double peak_time = 0.0;
  double peak_value = 0.0;
  double value_at_end = 0.0;

  friend bool operator==(const PeakMetrics&, const PeakMetrics&) = default;
};

/// Earliest maximum of `series`, plus its final value.
inline PeakMetrics peak_metrics(const std::vector<double>& series, const std::vector<double>& times) {
  if (series.empty() || times.empty()) throw EmptySeries();
  if (series.size() != times.size()) throw GridMismatch();
  std::size_t best = 0;
  for (std::size_t i = 1; i < series.size(); ++i) {
    if (series[i] > series[best]) best = i;
  }
  return {times[best], series[best], series.back()};
}

/// 100 * (other - base) / base, undefined when base is zero or non-finite.
inline std::optional<double> percent_delta(double base, double other) {
  if (base == 0.0 || !std::isfinite(base) || !std::isfinite(other)) return std::nullopt;
  return 100.0 * (other - base) / base;
}

struct YearWindow {
  double from = 2020.0;
  double to = 2070.0;
};

/// 100 * (integral(other) - integral(base)) / integral(base) over `window`,
/// trapezoidal rule on the sample grid. Window ends snap to the nearest
/// sample. Undefined when the base integral is zero.
inline std::optional<double> cumulative_overshoot(const std::vector<double>& base, const std::vector<double>& other,
                                                  const std::vector<double>& times, YearWindow window) {
  if (base.empty() || times.empty()) throw EmptySeries();
  if (base.size() != times.size() || other.size() != times.size()) throw GridMismatch();
  if (!(window.from < window.to) || window.from < times.front() || window.to > times.back()) {
    throw WindowOutOfRange("window " + format_number(window.from) + ":" + format_number(window.to) +
                           " outside run range " + format_number(times.front()) + ":" +
                           format_number(times.back()));
  }
  auto nearest = [&](double y) {
    auto it = std::lower_bound(times.begin(), times.end(), y);
    std::size_t i = static_cast<std::size_t>(it - times.begin());
    if (i == times.size() || (i > 0 && y - times[i - 1] <= times[i] - y)) --i;
    return i;
  };
  const std::size_t a = nearest(window.from);
  const std::size_t b = nearest(window.to);
  double ib = 0.0, io = 0.0;
  for (std::size_t i = a; i < b; ++i) {
    const double h = times[i + 1] - times[i];
    ib += 0.5 * h * (base[i] + base[i + 1]);
    io += 0.5 * h * (other[i] + other[i + 1]);
  }
  if (ib == 0.0) return std::nullopt;
  return 100.0 * (io - ib) / ib;
}

struct ComparisonReport {
  std::string variable;
  std::string base_scenario;
  std::string other_scenario;
  std::vector<double> years;
  std::vector<double> base_values;
  std::vector<double> other_values;
  std::vector<std::optional<double>> pct_delta;
  PeakMetrics peak_base;
  PeakMetrics peak_scenario;
  std::optional<double> residue_delta_2100;  // percent delta of the final samples
  std::optional<YearWindow> window;
  std::optional<double> cumulative_overshoot_pct;
};

inline ComparisonReport compare_runs(const RunResult& base, const RunResult& other, const std::string& variable,
                                     const std::vector<double>& years = kBenchmarkYears,
                                     std::optional<YearWindow> window = std::nullopt) {
  if (base.times != other.times) throw GridMismatch();
  const auto& b = base.at(variable);
  const auto& o = other.at(variable);
  ComparisonReport rep;
  rep.variable = variable;
  rep.base_scenario = base.scenario;
  rep.other_scenario = other.scenario;
  rep.years = years;
  for (double y : years) {
    const std::size_t i = base.index_of(y);
    rep.base_values.push_back(b[i]);
    rep.other_values.push_back(o[i]);
    rep.pct_delta.push_back(percent_delta(b[i], o[i]));
  }
  rep.peak_base = peak_metrics(b, base.times);
  rep.peak_scenario = peak_metrics(o, other.times);
  rep.residue_delta_2100 = percent_delta(b.back(), o.back());
  if (window) {
    rep.window = window;
    rep.cumulative_overshoot_pct = cumulative_overshoot(b, o, base.times, *window);
  }
  return rep;
}

}  // namespace limits_sd
