#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "limits_sd/errors.hpp"
#include "limits_sd/expression.hpp"
#include "limits_sd/model_spec.hpp"
#include "limits_sd/table_function.hpp"

namespace limits_sd {

struct SimConfig {
  double t_start = 1900.0;
  double t_end = 2100.0;
  double dt = 0.5;
  std::map<std::string, double> overrides;  // constant name -> value
  bool record_all = true;                   // false: skip constant series

  /// Number of integration steps; throws InvalidConfig if the grid is not whole.
  std::size_t steps() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidConfig("dt must be > 0");
    if (!(t_end > t_start)) throw InvalidConfig("t_end must be greater than t_start");
    const double ratio = (t_end - t_start) / dt;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
      throw InvalidConfig("(t_end - t_start) / dt must be an integer");
    }
    return static_cast<std::size_t>(rounded);
  }

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

struct RunResult {
  std::string scenario;
  std::vector<double> times;
  std::map<std::string, std::vector<double>> series;
  /// inflow - outflow per stock for each step; one shorter than `times`.
  std::map<std::string, std::vector<double>> stock_net_flows;
  std::vector<Warning> warnings;
  SimConfig config_echo;

  bool has(const std::string& name) const { return series.count(name) != 0; }

  const std::vector<double>& at(const std::string& name) const {
    auto it = series.find(name);
    if (it == series.end()) throw UnknownVariable(name);
    return it->second;
  }

  /// Index of the sample nearest to `year`.
  std::size_t index_of(double year) const {
    if (times.empty()) throw EmptySeries();
    const double dt = times.size() > 1 ? times[1] - times[0] : 1.0;
    double pos = std::round((year - times.front()) / dt);
    if (pos < 0 || pos > static_cast<double>(times.size() - 1)) {
      throw WindowOutOfRange("year " + std::to_string(year) + " outside run");
    }
    return static_cast<std::size_t>(pos);
  }

  double value_at(const std::string& name, double year) const { return at(name)[index_of(year)]; }
};

// ---------------------------------------------------------------------------
// Delay primitives

struct SmoothStep {
  double state;
  double output;
};

/// One Euler step of first-order smoothing.
inline SmoothStep smooth_eval(double state, double input, double averaging_time, double dt) {
  if (!(averaging_time > 0.0)) throw NonpositiveAveragingTime();
  const double next = state + dt * (input - state) / averaging_time;
  return {next, next};
}

/// Material held in each of the three cascaded stages.
using Delay3State = std::array<double, 3>;

struct Delay3Step {
  Delay3State state;
  double output;  // outflow rate of the new state
};

/// Outflow rate of the last stage for the given stage contents.
inline double delay3_outflow(const Delay3State& s, double delay_time) {
  return s[2] / (delay_time / 3.0);
}

/// Stage contents that pass `rate` straight through (equilibrium).
inline Delay3State delay3_equilibrium(double rate, double delay_time) {
  const double level = rate * delay_time / 3.0;
  return {level, level, level};
}

/// One Euler step of a third-order material delay. Each stage drains with time
/// constant delay_time / 3; stored material changes by exactly
/// dt * (input - previous output).
inline Delay3Step delay3_eval(const Delay3State& s, double input, double delay_time, double dt) {
  if (!(delay_time > 0.0)) throw NonpositiveDelayTime();
  const double stage_time = delay_time / 3.0;
  const double r1 = s[0] / stage_time;
  const double r2 = s[1] / stage_time;
  const double r3 = s[2] / stage_time;
  Delay3State next{s[0] + dt * (input - r1), s[1] + dt * (r1 - r2), s[2] + dt * (r2 - r3)};
  return {next, delay3_outflow(next, delay_time)};
}

namespace detail {

enum class Op : std::uint8_t {
  Const, Slot, Time, Neg, Add, Sub, Mul, Div, Pow, Min, Max, Exp, Ln, Step, Clip, Lookup
};

struct Instr {
  Op op;
  std::uint32_t slot = 0;
  double value = 0.0;
};

struct Program {
  std::vector<Instr> code;
};

struct EvalFailure {
  std::string cause;
};

// Evaluation scratch shared by one run.
struct EvalContext {
  const std::vector<double>* values = nullptr;
  const std::vector<const TableFunction*>* tables = nullptr;
  const std::vector<std::string>* names = nullptr;
  std::vector<Warning>* warnings = nullptr;
  std::vector<double> stack;
  double time = 0.0;
  const std::string* element = nullptr;
};

class Compiler {
public:
  explicit Compiler(const std::unordered_map<std::string, std::uint32_t>& slots) : slots_(slots) {}

  Program compile(const Expression& e) const {
    Program p;
    emit(e, p.code);
    return p;
  }

private:
  void emit(const Expression& e, std::vector<Instr>& code) const {
    switch (e.kind) {
      case Expression::Kind::Literal:
        code.push_back({Op::Const, 0, e.value});
        return;
      case Expression::Kind::Variable:
        if (e.name == kTimeVariable) {
          code.push_back({Op::Time});
        } else {
          code.push_back({Op::Slot, slots_.at(e.name)});
        }
        return;
      case Expression::Kind::Negate:
        emit(e.args[0], code);
        code.push_back({Op::Neg});
        return;
      case Expression::Kind::Binary: {
        emit(e.args[0], code);
        emit(e.args[1], code);
        Op op = Op::Add;
        switch (e.op) {
          case '+': op = Op::Add; break;
          case '-': op = Op::Sub; break;
          case '*': op = Op::Mul; break;
          case '/': op = Op::Div; break;
          default: op = Op::Pow; break;
        }
        code.push_back({op});
        return;
      }
      case Expression::Kind::Call: {
        if (e.name == "lookup") {
          emit(e.args[1], code);
          code.push_back({Op::Lookup, slots_.at(e.args[0].name)});
          return;
        }
        for (const auto& a : e.args) emit(a, code);
        Op op = Op::Min;
        if (e.name == "min") op = Op::Min;
        else if (e.name == "max") op = Op::Max;
        else if (e.name == "exp") op = Op::Exp;
        else if (e.name == "ln") op = Op::Ln;
        else if (e.name == "step") op = Op::Step;
        else if (e.name == "clip") op = Op::Clip;
        code.push_back({op});
        return;
      }
    }
  }

  const std::unordered_map<std::string, std::uint32_t>& slots_;
};

inline double lookup_in(EvalContext& ctx, std::uint32_t table_slot, double x) {
  const TableFunction& t = *(*ctx.tables)[table_slot];
  LookupResult r = t.evaluate(x);
  if (r.out_of_bounds) {
    const std::string& table_name = (*ctx.names)[table_slot];
    ctx.warnings->push_back(
        {ctx.time, *ctx.element, kLookupBoundsWarning, lookup_bounds_message(table_name, x, t)});
  }
  return r.value;
}

inline double run_program(const Program& p, EvalContext& ctx) {
  auto& st = ctx.stack;
  st.clear();
  const auto& v = *ctx.values;
  for (const Instr& in : p.code) {
    switch (in.op) {
      case Op::Const: st.push_back(in.value); break;
      case Op::Slot: st.push_back(v[in.slot]); break;
      case Op::Time: st.push_back(ctx.time); break;
      case Op::Neg: st.back() = -st.back(); break;
      case Op::Exp: st.back() = std::exp(st.back()); break;
      case Op::Ln:
        if (!(st.back() > 0.0)) throw EvalFailure{"logarithm of non-positive value"};
        st.back() = std::log(st.back());
        break;
      case Op::Lookup: st.back() = lookup_in(ctx, in.slot, st.back()); break;
      case Op::Clip: {
        const double threshold = st.back(); st.pop_back();
        const double x = st.back(); st.pop_back();
        const double otherwise = st.back(); st.pop_back();
        const double reached = st.back();
        st.back() = x >= threshold ? reached : otherwise;
        break;
      }
      default: {
        const double b = st.back();
        st.pop_back();
        double& a = st.back();
        switch (in.op) {
          case Op::Add: a = a + b; break;
          case Op::Sub: a = a - b; break;
          case Op::Mul: a = a * b; break;
          case Op::Div:
            if (b == 0.0) throw EvalFailure{"division by zero"};
            a = a / b;
            break;
          case Op::Pow: a = std::pow(a, b); break;
          case Op::Min: a = std::min(a, b); break;
          case Op::Max: a = std::max(a, b); break;
          case Op::Step: a = ctx.time >= b ? a : 0.0; break;
          default: break;
        }
      }
    }
  }
  return st.back();
}

}  // namespace detail

/// Fixed-step explicit Euler integrator over a validated ModelSpec.
///
/// Per step: stateless elements are evaluated in plan order against the
/// current stateful values, then every stock/smooth/delay3 computes its update
/// from those values and all states advance together. The start time uses the
/// initialization plan so stateful elements can start from same-time values.
class Simulator {
public:
  explicit Simulator(ModelSpec spec) : spec_(spec.is_validated() ? std::move(spec) : build_dependency_graph(std::move(spec))) {
    compile();
  }

  // Compiled tables point into spec_, so the object is pinned.
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  const ModelSpec& spec() const { return spec_; }

  RunResult run(const SimConfig& config) const {
    const std::size_t steps = config.steps();
    const std::size_t n = names_.size();

    std::vector<double> values(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (kinds_[i] == ElementKind::Constant) values[i] = constant_values_[i];
    }
    for (const auto& [name, value] : config.overrides) {
      auto it = slots_.find(name);
      if (it == slots_.end() || kinds_[it->second] != ElementKind::Constant) throw OverrideUnknown(name);
      if (!std::isfinite(value)) throw InvalidConfig("override for '" + name + "' is not finite");
      values[it->second] = value;
    }

    RunResult result;
    result.config_echo = config;
    result.times.resize(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) {
      result.times[k] = config.t_start + static_cast<double>(k) * config.dt;
    }

    std::vector<std::uint32_t> recorded;
    for (std::uint32_t i = 0; i < n; ++i) {
      if (config.record_all || kinds_[i] != ElementKind::Constant) recorded.push_back(i);
    }
    std::vector<std::vector<double>*> columns;
    for (auto i : recorded) {
      auto& col = result.series[names_[i]];
      col.resize(steps + 1);
      columns.push_back(&col);
    }
    std::vector<std::vector<double>*> flow_columns(n, nullptr);
    for (std::uint32_t i = 0; i < n; ++i) {
      if (kinds_[i] == ElementKind::Stock) {
        auto& col = result.stock_net_flows[names_[i]];
        col.resize(steps);
        flow_columns[i] = &col;
      }
    }

    detail::EvalContext ctx;
    ctx.values = &values;
    ctx.tables = &tables_;
    ctx.names = &names_;
    ctx.warnings = &result.warnings;
    ctx.time = result.times[0];

    std::vector<double> stock_state(n, 0.0);
    std::vector<double> smooth_state(n, 0.0);
    std::vector<Delay3State> delay_state(n, Delay3State{});
    std::vector<double> delay_time(n, 1.0);

    auto eval = [&](const detail::Program& p, std::uint32_t slot) {
      ctx.element = &names_[slot];
      try {
        const double x = detail::run_program(p, ctx);
        if (!std::isfinite(x)) throw detail::EvalFailure{"non-finite result"};
        return x;
      } catch (const detail::EvalFailure& f) {
        throw RuntimeEvalError(ctx.time, names_[slot], f.cause);
      }
    };

    // Start time: everything in initialization order.
    for (auto slot : init_order_) {
      switch (kinds_[slot]) {
        case ElementKind::Constant: break;
        case ElementKind::Table:
        case ElementKind::Auxiliary:
          values[slot] = eval(primary_[slot], slot);
          break;
        case ElementKind::Stock:
          stock_state[slot] = eval(init_[slot], slot);
          values[slot] = stock_state[slot];
          break;
        case ElementKind::Smooth:
          smooth_state[slot] = eval(init_[slot], slot);
          values[slot] = smooth_state[slot];
          break;
        case ElementKind::Delay3: {
          const double input = eval(primary_[slot], slot);
          const double d = eval(secondary_[slot], slot);
          if (!(d > 0.0)) throw RuntimeEvalError(ctx.time, names_[slot], "delay time must be > 0");
          delay_time[slot] = d;
          delay_state[slot] = delay3_equilibrium(input, d);
          values[slot] = delay3_outflow(delay_state[slot], d);
          break;
        }
      }
    }
    auto record = [&](std::size_t k) {
      for (std::size_t c = 0; c < recorded.size(); ++c) (*columns[c])[k] = values[recorded[c]];
    };
    record(0);

    std::vector<double> next_scalar(n, 0.0);
    std::vector<Delay3State> next_delay(n, Delay3State{});
    for (std::size_t k = 1; k <= steps; ++k) {
      // Updates from the state at times[k-1]; nothing is applied until all are computed.
      for (auto slot : stateful_) {
        switch (kinds_[slot]) {
          case ElementKind::Stock: {
            const double in = eval(primary_[slot], slot);
            const double out = eval(secondary_[slot], slot);
            const double net = in - out;
            (*flow_columns[slot])[k - 1] = net;
            next_scalar[slot] = stock_state[slot] + config.dt * net;
            break;
          }
          case ElementKind::Smooth: {
            const double input = eval(primary_[slot], slot);
            const double avg = eval(secondary_[slot], slot);
            if (!(avg > 0.0)) throw RuntimeEvalError(ctx.time, names_[slot], "averaging time must be > 0");
            next_scalar[slot] = smooth_eval(smooth_state[slot], input, avg, config.dt).state;
            break;
          }
          case ElementKind::Delay3: {
            const double input = eval(primary_[slot], slot);
            const double d = eval(secondary_[slot], slot);
            if (!(d > 0.0)) throw RuntimeEvalError(ctx.time, names_[slot], "delay time must be > 0");
            delay_time[slot] = d;
            next_delay[slot] = delay3_eval(delay_state[slot], input, d, config.dt).state;
            break;
          }
          default: break;
        }
      }
      ctx.time = result.times[k];
      for (auto slot : stateful_) {
        switch (kinds_[slot]) {
          case ElementKind::Stock:
            stock_state[slot] = next_scalar[slot];
            values[slot] = stock_state[slot];
            break;
          case ElementKind::Smooth:
            smooth_state[slot] = next_scalar[slot];
            values[slot] = smooth_state[slot];
            break;
          case ElementKind::Delay3:
            delay_state[slot] = next_delay[slot];
            values[slot] = delay3_outflow(delay_state[slot], delay_time[slot]);
            break;
          default: break;
        }
        if (!std::isfinite(values[slot])) throw RuntimeEvalError(ctx.time, names_[slot], "non-finite state");
      }
      for (auto slot : eval_order_) values[slot] = eval(primary_[slot], slot);
      record(k);
    }
    return result;
  }

private:
  void compile() {
    for (const auto& [name, e] : spec_.elements()) {
      slots_.emplace(name, static_cast<std::uint32_t>(names_.size()));
      names_.push_back(name);
    }
    const std::size_t n = names_.size();
    kinds_.resize(n);
    constant_values_.assign(n, 0.0);
    tables_.assign(n, nullptr);
    primary_.resize(n);
    secondary_.resize(n);
    init_.resize(n);
    detail::Compiler c(slots_);
    for (const auto& [name, e] : spec_.elements()) {
      const std::uint32_t s = slots_.at(name);
      kinds_[s] = e.kind();
      switch (e.kind()) {
        case ElementKind::Constant:
          constant_values_[s] = e.as<ConstantDef>().value;
          break;
        case ElementKind::Table: {
          const auto& t = e.as<TableDef>();
          tables_[s] = &t.table;
          // A table element is its own lookup applied to its input.
          detail::Program p = c.compile(t.input);
          p.code.push_back({detail::Op::Lookup, s});
          primary_[s] = std::move(p);
          break;
        }
        case ElementKind::Auxiliary:
          primary_[s] = c.compile(e.as<AuxiliaryDef>().expr);
          break;
        case ElementKind::Stock: {
          const auto& d = e.as<StockDef>();
          init_[s] = c.compile(d.initial);
          primary_[s] = c.compile(d.inflow);
          secondary_[s] = c.compile(d.outflow);
          break;
        }
        case ElementKind::Smooth: {
          const auto& d = e.as<SmoothDef>();
          primary_[s] = c.compile(d.input);
          secondary_[s] = c.compile(d.averaging_time);
          init_[s] = c.compile(d.initial ? *d.initial : d.input);
          break;
        }
        case ElementKind::Delay3: {
          const auto& d = e.as<Delay3Def>();
          primary_[s] = c.compile(d.input);
          secondary_[s] = c.compile(d.delay_time);
          break;
        }
      }
      if (e.is_stateful()) stateful_.push_back(s);
    }
    for (const auto& name : spec_.eval_order()) {
      const auto s = slots_.at(name);
      if (kinds_[s] != ElementKind::Constant) eval_order_.push_back(s);
    }
    for (const auto& name : spec_.init_order()) init_order_.push_back(slots_.at(name));
  }

  ModelSpec spec_;
  std::unordered_map<std::string, std::uint32_t> slots_;
  std::vector<std::string> names_;
  std::vector<ElementKind> kinds_;
  std::vector<double> constant_values_;
  std::vector<const TableFunction*> tables_;
  std::vector<detail::Program> primary_;
  std::vector<detail::Program> secondary_;
  std::vector<detail::Program> init_;
  std::vector<std::uint32_t> stateful_;
  std::vector<std::uint32_t> eval_order_;
  std::vector<std::uint32_t> init_order_;
};

/// Runs `spec` under `config`. Bit-identical output for identical inputs.
inline RunResult integrate_run(const ModelSpec& spec, const SimConfig& config) {
  return Simulator(spec).run(config);
}

}  // namespace limits_sd
