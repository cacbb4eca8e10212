#pragma once

// Line-oriented model text format:
//
//   model "<name>" version "<semver>"
//   const <id> = <number> [unit "<text>"] [sector "<text>"]
//   table <id> (<expr>) = [(<num>,<num>), ...] [sector "<text>"]
//   aux <id> = <expr> [sector "<text>"]
//   stock <id> init <expr> inflow <expr> outflow <expr> [sector "<text>"]
//   smooth <id> input <expr> time <expr> [init <expr>] [sector "<text>"]
//   delay3 <id> input <expr> time <expr> [sector "<text>"]
//
// `#` starts a comment. Comment lines before the first declaration are kept
// as header comments; all others are dropped.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "limits_sd/errors.hpp"
#include "limits_sd/expression.hpp"
#include "limits_sd/model_spec.hpp"
#include "limits_sd/number_format.hpp"

namespace limits_sd {

struct ModelHeader {
  std::string name;
  std::string version;
  std::vector<std::string> comments;  // text after '#', verbatim
  std::size_t line = 0;               // 0 when the document has no model line
};

/// Parsed but not yet validated document.
struct ModelDocument {
  ModelHeader header;
  std::vector<Element> declarations;  // in source order, each with its line
};

namespace detail {

enum class Tok { Ident, Number, String, LParen, RParen, LBracket, RBracket, Comma, Equals, Plus, Minus, Star, Slash, Caret, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double number = 0.0;
  std::size_t col = 1;
};

inline constexpr std::size_t kMaxNesting = 200;

class LineParser {
public:
  LineParser(std::string_view line, std::size_t line_no) : line_no_(line_no) { lex(line); }

  bool at_end() const { return peek().kind == Tok::End; }
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  bool peek_keyword(std::string_view kw) const {
    return peek().kind == Tok::Ident && peek().text == kw;
  }

  [[noreturn]] void fail(std::string expected) const {
    throw SyntaxError(line_no_, peek().col, std::move(expected));
  }

  Token take() {
    Token t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }

  void expect(Tok kind, const char* what) {
    if (peek().kind != kind) fail(what);
    take();
  }

  void expect_keyword(std::string_view kw) {
    if (!peek_keyword(kw)) fail("'" + std::string(kw) + "'");
    take();
  }

  std::string identifier(const char* what) {
    if (peek().kind != Tok::Ident) fail(what);
    return take().text;
  }

  std::string string_literal(const char* what) {
    if (peek().kind != Tok::String) fail(what);
    return take().text;
  }

  double signed_number() {
    bool negative = false;
    if (peek().kind == Tok::Minus || peek().kind == Tok::Plus) negative = take().kind == Tok::Minus;
    if (peek().kind != Tok::Number) fail("number");
    const double v = take().number;
    return negative ? -v : v;
  }

  Expression expression() { return parse_sum(0); }

  std::size_t line() const { return line_no_; }

private:
  void lex(std::string_view s) {
    std::size_t i = 0;
    auto push = [&](Tok k, std::size_t col, std::string text = {}) {
      Token t;
      t.kind = k;
      t.col = col;
      t.text = std::move(text);
      toks_.push_back(std::move(t));
    };
    while (i < s.size()) {
      const char c = s[i];
      const std::size_t col = i + 1;
      if (c == ' ' || c == '\t' || c == '\r') {
        ++i;
      } else if (c == '#') {
        break;
      } else if ((c >= 'a' && c <= 'z') || c == '_') {
        std::size_t j = i;
        while (j < s.size() && ((s[j] >= 'a' && s[j] <= 'z') || s[j] == '_' || (s[j] >= '0' && s[j] <= '9'))) ++j;
        push(Tok::Ident, col, std::string(s.substr(i, j - i)));
        i = j;
      } else if ((c >= '0' && c <= '9') || c == '.') {
        std::size_t j = i;
        auto digits = [&] {
          std::size_t start = j;
          while (j < s.size() && s[j] >= '0' && s[j] <= '9') ++j;
          return j - start;
        };
        std::size_t n = digits();
        if (j < s.size() && s[j] == '.') {
          ++j;
          n += digits();
        }
        if (n == 0) throw SyntaxError(line_no_, col, "digit");
        if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
          ++j;
          if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
          if (digits() == 0) throw SyntaxError(line_no_, j + 1, "exponent digits");
        }
        auto v = parse_number(s.substr(i, j - i));
        if (!v || !std::isfinite(*v)) throw SyntaxError(line_no_, col, "finite number");
        push(Tok::Number, col, std::string(s.substr(i, j - i)));
        toks_.back().number = *v;
        i = j;
      } else if (c == '"') {
        std::string text;
        std::size_t j = i + 1;
        bool closed = false;
        while (j < s.size()) {
          if (s[j] == '\\' && j + 1 < s.size() && (s[j + 1] == '"' || s[j + 1] == '\\')) {
            text += s[j + 1];
            j += 2;
          } else if (s[j] == '"') {
            closed = true;
            ++j;
            break;
          } else {
            text += s[j++];
          }
        }
        if (!closed) throw SyntaxError(line_no_, j + 1, "closing '\"'");
        push(Tok::String, col, std::move(text));
        i = j;
      } else {
        Tok k;
        switch (c) {
          case '(': k = Tok::LParen; break;
          case ')': k = Tok::RParen; break;
          case '[': k = Tok::LBracket; break;
          case ']': k = Tok::RBracket; break;
          case ',': k = Tok::Comma; break;
          case '=': k = Tok::Equals; break;
          case '+': k = Tok::Plus; break;
          case '-': k = Tok::Minus; break;
          case '*': k = Tok::Star; break;
          case '/': k = Tok::Slash; break;
          case '^': k = Tok::Caret; break;
          default: throw SyntaxError(line_no_, col, "valid character");
        }
        push(k, col);
        ++i;
      }
    }
    push(Tok::End, s.size() + 1);
  }

  void enter(std::size_t depth) const {
    if (depth > kMaxNesting) fail("shallower nesting");
  }

  Expression parse_sum(std::size_t depth) {
    enter(depth);
    Expression lhs = parse_product(depth);
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      const char op = take().kind == Tok::Plus ? '+' : '-';
      lhs = Expression::binary(op, std::move(lhs), parse_product(depth));
    }
    return lhs;
  }

  Expression parse_product(std::size_t depth) {
    Expression lhs = parse_unary(depth);
    while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
      const char op = take().kind == Tok::Star ? '*' : '/';
      lhs = Expression::binary(op, std::move(lhs), parse_unary(depth));
    }
    return lhs;
  }

  Expression parse_unary(std::size_t depth) {
    enter(depth);
    if (peek().kind == Tok::Minus) {
      // "-2" is a negative literal unless it is the base of a power.
      if (peek(1).kind == Tok::Number && peek(2).kind != Tok::Caret) {
        take();
        return Expression::literal(-take().number);
      }
      take();
      return Expression::negate(parse_unary(depth + 1));
    }
    return parse_power(depth);
  }

  Expression parse_power(std::size_t depth) {
    Expression lhs = parse_primary(depth);
    while (peek().kind == Tok::Caret) {
      take();
      lhs = Expression::binary('^', std::move(lhs), parse_primary(depth));
    }
    return lhs;
  }

  Expression parse_primary(std::size_t depth) {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Number:
        return Expression::literal(take().number);
      case Tok::LParen: {
        take();
        Expression inner = parse_sum(depth + 1);
        expect(Tok::RParen, "')'");
        return inner;
      }
      case Tok::Ident: {
        const std::size_t col = t.col;
        std::string name = take().text;
        if (peek().kind != Tok::LParen) return Expression::variable(std::move(name));
        const BuiltinInfo* b = find_builtin(name);
        if (!b) throw SyntaxError(line_no_, col, "known function name instead of '" + name + "'");
        take();
        std::vector<Expression> args;
        if (peek().kind != Tok::RParen) {
          args.push_back(parse_sum(depth + 1));
          while (peek().kind == Tok::Comma) {
            take();
            args.push_back(parse_sum(depth + 1));
          }
        }
        expect(Tok::RParen, "')' or ','");
        if (args.size() != b->arity) {
          throw SyntaxError(line_no_, col, std::to_string(b->arity) + " arguments to " + name);
        }
        if (name == "lookup" && args[0].kind != Expression::Kind::Variable) {
          throw SyntaxError(line_no_, col, "table name as first argument of lookup");
        }
        return Expression::call(std::move(name), std::move(args));
      }
      default:
        fail("expression");
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::size_t line_no_;
};

inline std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string element_name(LineParser& p) {
  const std::size_t col = p.peek().col;
  std::string name = p.identifier("element name");
  if (is_reserved_name(name)) throw SyntaxError(p.line(), col, "non-reserved element name");
  return name;
}

inline std::string trailing_sector(LineParser& p) {
  std::string sector;
  if (p.peek_keyword("sector")) {
    p.take();
    sector = p.string_literal("sector string");
  }
  if (!p.at_end()) p.fail("end of line");
  return sector;
}

inline Element parse_declaration(LineParser& p, const std::string& keyword) {
  Element e;
  e.line = p.line();
  e.name = element_name(p);
  if (keyword == "const") {
    p.expect(Tok::Equals, "'='");
    ConstantDef c;
    c.value = p.signed_number();
    if (p.peek_keyword("unit")) {
      p.take();
      c.unit = p.string_literal("unit string");
    }
    e.def = std::move(c);
  } else if (keyword == "table") {
    p.expect(Tok::LParen, "'('");
    Expression input = p.expression();
    p.expect(Tok::RParen, "')'");
    p.expect(Tok::Equals, "'='");
    p.expect(Tok::LBracket, "'['");
    std::vector<Knot> knots;
    const std::size_t knots_col = p.peek().col;
    do {
      p.expect(Tok::LParen, "'('");
      Knot k;
      k.x = p.signed_number();
      p.expect(Tok::Comma, "','");
      k.y = p.signed_number();
      p.expect(Tok::RParen, "')'");
      knots.push_back(k);
    } while (p.peek().kind == Tok::Comma && (p.take(), true));
    p.expect(Tok::RBracket, "']'");
    try {
      e.def = TableDef{std::move(input), TableFunction(std::move(knots))};
    } catch (const InvalidElement& err) {
      throw SyntaxError(p.line(), knots_col, std::string("valid knots (") + err.what() + ")");
    }
  } else if (keyword == "aux") {
    p.expect(Tok::Equals, "'='");
    e.def = AuxiliaryDef{p.expression()};
  } else if (keyword == "stock") {
    StockDef s;
    p.expect_keyword("init");
    s.initial = p.expression();
    p.expect_keyword("inflow");
    s.inflow = p.expression();
    p.expect_keyword("outflow");
    s.outflow = p.expression();
    e.def = std::move(s);
  } else if (keyword == "smooth") {
    SmoothDef s;
    p.expect_keyword("input");
    s.input = p.expression();
    p.expect_keyword("time");
    s.averaging_time = p.expression();
    if (p.peek_keyword("init")) {
      p.take();
      s.initial = p.expression();
    }
    e.def = std::move(s);
  } else {
    Delay3Def d;
    p.expect_keyword("input");
    d.input = p.expression();
    p.expect_keyword("time");
    d.delay_time = p.expression();
    e.def = std::move(d);
  }
  e.sector = trailing_sector(p);
  return e;
}

}  // namespace detail

/// Parses model text into an unvalidated document. Throws SyntaxError.
inline ModelDocument parse_model_document(std::string_view text) {
  ModelDocument doc;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    detail::LineParser p(line, line_no);
    if (p.at_end()) {
      const auto first = line.find_first_not_of(" \t");
      if (first != std::string_view::npos && line[first] == '#' && doc.declarations.empty()) {
        doc.header.comments.emplace_back(line.substr(first + 1));
      }
      continue;
    }
    if (p.peek().kind != detail::Tok::Ident) p.fail("declaration keyword");
    const std::string keyword = p.peek().text;
    if (keyword == "model") {
      if (doc.header.line != 0) p.fail("single model header");
      if (!doc.declarations.empty()) p.fail("model header before declarations");
      p.take();
      doc.header.name = p.string_literal("model name string");
      p.expect_keyword("version");
      doc.header.version = p.string_literal("version string");
      if (!p.at_end()) p.fail("end of line");
      doc.header.line = line_no;
      continue;
    }
    if (keyword != "const" && keyword != "table" && keyword != "aux" && keyword != "stock" &&
        keyword != "smooth" && keyword != "delay3") {
      p.fail("declaration keyword (model, const, table, aux, stock, smooth, delay3)");
    }
    p.take();
    doc.declarations.push_back(detail::parse_declaration(p, keyword));
  }
  return doc;
}

/// Builds and validates a ModelSpec from a parsed document.
inline ModelSpec build_model(const ModelDocument& doc) {
  ModelSpec spec;
  spec.metadata.name = doc.header.name;
  spec.metadata.version = doc.header.version;
  spec.metadata.comments = doc.header.comments;
  for (const Element& e : doc.declarations) spec.add(e);
  try {
    return build_dependency_graph(std::move(spec));
  } catch (const AlgebraicLoop& loop) {
    std::string detail;
    for (const auto& n : loop.cycle()) {
      std::size_t line = 0;
      for (const Element& e : doc.declarations) {
        if (e.name == n) line = e.line;
      }
      detail += n + " (line " + std::to_string(line) + ") -> ";
    }
    detail += loop.cycle().front();
    throw AlgebraicLoop(loop.cycle(), detail);
  }
}

/// Parses and validates model text.
inline ModelSpec parse_model_text(std::string_view text) { return build_model(parse_model_document(text)); }

/// Parses a single expression. Throws SyntaxError.
inline Expression parse_expression(std::string_view text) {
  if (text.find('\n') != std::string_view::npos) throw SyntaxError(1, text.find('\n') + 1, "single line");
  detail::LineParser p(text, 1);
  Expression e = p.expression();
  if (!p.at_end()) p.fail("end of expression");
  return e;
}

/// Canonical text for one element, without trailing newline.
inline std::string serialize_element(const Element& e) {
  std::string out(kind_keyword(e.kind()));
  out += ' ';
  out += e.name;
  switch (e.kind()) {
    case ElementKind::Constant: {
      const auto& c = e.as<ConstantDef>();
      out += " = " + format_number(c.value);
      if (!c.unit.empty()) out += " unit " + detail::quote(c.unit);
      break;
    }
    case ElementKind::Table: {
      const auto& t = e.as<TableDef>();
      out += " (" + to_string(t.input) + ") = [";
      const auto& knots = t.table.knots();
      for (std::size_t i = 0; i < knots.size(); ++i) {
        if (i) out += ',';
        out += '(' + format_number(knots[i].x) + ',' + format_number(knots[i].y) + ')';
      }
      out += ']';
      break;
    }
    case ElementKind::Auxiliary:
      out += " = " + to_string(e.as<AuxiliaryDef>().expr);
      break;
    case ElementKind::Stock: {
      const auto& s = e.as<StockDef>();
      out += " init " + to_string(s.initial) + " inflow " + to_string(s.inflow) + " outflow " +
             to_string(s.outflow);
      break;
    }
    case ElementKind::Smooth: {
      const auto& s = e.as<SmoothDef>();
      out += " input " + to_string(s.input) + " time " + to_string(s.averaging_time);
      if (s.initial) out += " init " + to_string(*s.initial);
      break;
    }
    case ElementKind::Delay3: {
      const auto& d = e.as<Delay3Def>();
      out += " input " + to_string(d.input) + " time " + to_string(d.delay_time);
      break;
    }
  }
  if (!e.sector.empty()) out += " sector " + detail::quote(e.sector);
  return out;
}

/// Canonical document: model line, header comments, then one declaration per
/// line ordered by (sector, name).
inline std::string serialize_model(const ModelSpec& spec) {
  std::string out = "model " + detail::quote(spec.metadata.name) + " version " +
                    detail::quote(spec.metadata.version) + "\n";
  for (const auto& c : spec.metadata.comments) out += "#" + c + "\n";
  std::vector<const Element*> ordered;
  ordered.reserve(spec.size());
  for (const auto& [name, e] : spec.elements()) ordered.push_back(&e);
  std::stable_sort(ordered.begin(), ordered.end(), [](const Element* a, const Element* b) {
    return std::tie(a->sector, a->name) < std::tie(b->sector, b->name);
  });
  for (const Element* e : ordered) out += serialize_element(*e) + "\n";
  return out;
}

}  // namespace limits_sd
