#pragma once

#include <cmath>
#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "limits_sd/number_format.hpp"

namespace limits_sd {

/// Expression tree used by auxiliaries, flows, table inputs and delay parameters.
///
/// Node shapes:
///   Literal   value
///   Variable  name            (an element name, or the builtin `time`)
///   Negate    args[0]
///   Binary    op, args[0], args[1]   with op one of + - * / ^
///   Call      name(args...)   name one of the builtins below
struct Expression {
  enum class Kind { Literal, Variable, Negate, Binary, Call };

  Kind kind = Kind::Literal;
  double value = 0.0;
  std::string name;
  char op = 0;
  std::vector<Expression> args;

  static Expression literal(double v) {
    Expression e;
    e.kind = Kind::Literal;
    e.value = v;
    return e;
  }
  static Expression variable(std::string n) {
    Expression e;
    e.kind = Kind::Variable;
    e.name = std::move(n);
    return e;
  }
  static Expression negate(Expression operand) {
    Expression e;
    e.kind = Kind::Negate;
    e.args.push_back(std::move(operand));
    return e;
  }
  static Expression binary(char op, Expression lhs, Expression rhs) {
    Expression e;
    e.kind = Kind::Binary;
    e.op = op;
    e.args.push_back(std::move(lhs));
    e.args.push_back(std::move(rhs));
    return e;
  }
  static Expression call(std::string fn, std::vector<Expression> args) {
    Expression e;
    e.kind = Kind::Call;
    e.name = std::move(fn);
    e.args = std::move(args);
    return e;
  }

  friend bool operator==(const Expression&, const Expression&) = default;
};

inline constexpr std::string_view kTimeVariable = "time";

struct BuiltinInfo {
  std::string_view name;
  std::size_t arity;
};

// step(height, start_time), clip(if_reached, otherwise, x, threshold), lookup(table, x)
inline constexpr BuiltinInfo kBuiltins[] = {
    {"min", 2}, {"max", 2}, {"exp", 1}, {"ln", 1}, {"step", 2}, {"clip", 4}, {"lookup", 2},
};

inline const BuiltinInfo* find_builtin(std::string_view name) {
  for (const auto& b : kBuiltins) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

/// Value references made by `expr`. The table argument of `lookup` is reported
/// separately because it names a table's knots, not a value dependency.
struct References {
  std::set<std::string> values;
  std::set<std::string> tables;
  bool uses_time = false;
};

inline void collect_references(const Expression& expr, References& out) {
  switch (expr.kind) {
    case Expression::Kind::Literal:
      return;
    case Expression::Kind::Variable:
      if (expr.name == kTimeVariable) {
        out.uses_time = true;
      } else {
        out.values.insert(expr.name);
      }
      return;
    case Expression::Kind::Call:
      if (expr.name == "lookup" && !expr.args.empty() &&
          expr.args[0].kind == Expression::Kind::Variable) {
        out.tables.insert(expr.args[0].name);
        for (std::size_t i = 1; i < expr.args.size(); ++i) collect_references(expr.args[i], out);
        return;
      }
      break;
    default:
      break;
  }
  for (const auto& a : expr.args) collect_references(a, out);
}

inline References references_of(const Expression& expr) {
  References r;
  collect_references(expr, r);
  return r;
}

namespace detail {

inline int precedence(const Expression& e) {
  switch (e.kind) {
    case Expression::Kind::Binary:
      switch (e.op) {
        case '+':
        case '-':
          return 1;
        case '*':
        case '/':
          return 2;
        default:
          return 4;  // ^
      }
    case Expression::Kind::Negate:
      return 3;
    default:
      return 5;
  }
}

inline bool is_negative_literal(const Expression& e) {
  return e.kind == Expression::Kind::Literal && std::signbit(e.value);
}

// `power_operand` marks positions adjacent to ^, where a leading minus would
// otherwise rebind.
inline void print(const Expression& e, std::string& out, bool power_operand) {
  switch (e.kind) {
    case Expression::Kind::Literal: {
      const bool wrap = power_operand && std::signbit(e.value);
      if (wrap) out += '(';
      out += format_number(e.value);
      if (wrap) out += ')';
      return;
    }
    case Expression::Kind::Variable:
      out += e.name;
      return;
    case Expression::Kind::Call:
      out += e.name;
      out += '(';
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += ", ";
        print(e.args[i], out, false);
      }
      out += ')';
      return;
    case Expression::Kind::Negate: {
      if (power_operand) out += '(';
      out += '-';
      const Expression& operand = e.args[0];
      // A bare literal after '-' would be read back as a negative literal.
      const bool wrap = operand.kind == Expression::Kind::Literal || precedence(operand) < 3;
      if (wrap) out += '(';
      print(operand, out, false);
      if (wrap) out += ')';
      if (power_operand) out += ')';
      return;
    }
    case Expression::Kind::Binary: {
      const int p = precedence(e);
      const bool pow = e.op == '^';
      const Expression& lhs = e.args[0];
      const Expression& rhs = e.args[1];
      const bool wrap_l = precedence(lhs) < p;
      const bool wrap_r = precedence(rhs) <= p;
      if (wrap_l) out += '(';
      print(lhs, out, pow && !wrap_l);
      if (wrap_l) out += ')';
      out += ' ';
      out += e.op;
      out += ' ';
      if (wrap_r) out += '(';
      print(rhs, out, pow && !wrap_r);
      if (wrap_r) out += ')';
      return;
    }
  }
}

}  // namespace detail

/// Canonical text form; parses back to a structurally identical tree.
inline std::string to_string(const Expression& expr) {
  std::string out;
  detail::print(expr, out, false);
  return out;
}

}  // namespace limits_sd
