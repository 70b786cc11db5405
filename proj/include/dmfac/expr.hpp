#pragma once

// Tiny arithmetic-expression language used to describe agent dynamics f(y,u),
// leader trajectories y0(k) and attack signals chi(k) in scenario files.
//
// Grammar (ASCII, whitespace-insensitive):
//   expr   := term  (('+'|'-') term)*
//   term   := unary (('*'|'/') unary)*
//   unary  := '-' unary | power
//   power  := atom ['^' unary]            // right-associative, binds above unary
//   atom   := number | 'pi' | 'y' | 'u' | 'k'
//           | ('neg'|'abs'|'sin'|'cos') '(' expr ')' | '(' expr ')'
//
// The exponent of '^' must fold to a constant at parse time so that dynamics
// stay single-valued on negative bases (y^2 means an integer power, not a
// data-dependent pow). Evaluation treats division by zero and any non-finite
// intermediate as errors rather than letting NaN/inf leak into a simulation.

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "dmfac/errors.hpp"

namespace dmfac {

// Parse or evaluation failure; `pos` is a byte offset into the original text
// (evaluation errors point at the operator that produced the bad value).
class ExprError : public ValidationError {
 public:
  ExprError(const std::string& msg, std::size_t pos)
      : ValidationError(msg + " at offset " + std::to_string(pos)), pos_(pos) {}

  std::size_t pos() const { return pos_; }

 private:
  std::size_t pos_;
};

namespace detail {
class ExprParser;
}

class Expr {
 public:
  enum class Kind {
    kNumber, kVarY, kVarU, kVarK,
    kNeg, kAbs, kSin, kCos,
    kAdd, kSub, kMul, kDiv, kPow,
  };

  struct Node {
    Kind kind;
    double value = 0.0;  // kNumber payload; for kPow, the folded exponent
    int a = -1;          // child indices into nodes()
    int b = -1;
    std::size_t src = 0;  // source offset, for eval error reporting
  };

  const std::vector<Node>& nodes() const { return nodes_; }
  int root() const { return root_; }

  double eval(double y, double u, double k) const {
    return eval_node(root_, y, u, k);
  }

  std::string fmt() const {
    std::string out;
    fmt_node(root_, out);
    return out;
  }

 private:
  friend class detail::ExprParser;

  double eval_node(int idx, double y, double u, double k) const {
    const Node& n = nodes_[static_cast<std::size_t>(idx)];
    switch (n.kind) {
      case Kind::kNumber: return n.value;
      case Kind::kVarY: return y;
      case Kind::kVarU: return u;
      case Kind::kVarK: return k;
      case Kind::kNeg: return check(-eval_node(n.a, y, u, k), n.src);
      case Kind::kAbs: return std::fabs(eval_node(n.a, y, u, k));
      case Kind::kSin: return std::sin(eval_node(n.a, y, u, k));
      case Kind::kCos: return std::cos(eval_node(n.a, y, u, k));
      case Kind::kAdd:
        return check(eval_node(n.a, y, u, k) + eval_node(n.b, y, u, k), n.src);
      case Kind::kSub:
        return check(eval_node(n.a, y, u, k) - eval_node(n.b, y, u, k), n.src);
      case Kind::kMul:
        return check(eval_node(n.a, y, u, k) * eval_node(n.b, y, u, k), n.src);
      case Kind::kDiv: {
        double denom = eval_node(n.b, y, u, k);
        if (denom == 0.0) throw ExprError("division by zero", n.src);
        return check(eval_node(n.a, y, u, k) / denom, n.src);
      }
      case Kind::kPow: {
        double base = eval_node(n.a, y, u, k);
        double expo = n.value;
        if (base < 0.0 && expo != std::floor(expo))
          throw ExprError("non-integer power of negative base", n.src);
        return check(std::pow(base, expo), n.src);
      }
    }
    throw ExprError("corrupt expression node", n.src);  // unreachable
  }

  static double check(double v, std::size_t src) {
    if (!std::isfinite(v)) throw ExprError("non-finite value", src);
    return v;
  }

  void fmt_node(int idx, std::string& out) const {
    const Node& n = nodes_[static_cast<std::size_t>(idx)];
    auto binary = [&](const char* op) {
      out += '(';
      fmt_node(n.a, out);
      out += ' ';
      out += op;
      out += ' ';
      fmt_node(n.b, out);
      out += ')';
    };
    auto call = [&](const char* name) {
      out += name;
      out += '(';
      fmt_node(n.a, out);
      out += ')';
    };
    switch (n.kind) {
      case Kind::kNumber: out += fmt_number(n.value); return;
      case Kind::kVarY: out += 'y'; return;
      case Kind::kVarU: out += 'u'; return;
      case Kind::kVarK: out += 'k'; return;
      case Kind::kNeg:
        out += "(-";
        fmt_node(n.a, out);
        out += ')';
        return;
      case Kind::kAbs: call("abs"); return;
      case Kind::kSin: call("sin"); return;
      case Kind::kCos: call("cos"); return;
      case Kind::kAdd: binary("+"); return;
      case Kind::kSub: binary("-"); return;
      case Kind::kMul: binary("*"); return;
      case Kind::kDiv: binary("/"); return;
      case Kind::kPow:
        out += '(';
        fmt_node(n.a, out);
        out += " ^ ";
        out += fmt_number(n.value);
        out += ')';
        return;
    }
  }

  // Shortest decimal that round-trips; keeps "0.5" as 0.5 and "2" as 2.
  static std::string fmt_number(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, end);
  }

  std::vector<Node> nodes_;
  int root_ = -1;
};

namespace detail {

class ExprParser {
 public:
  explicit ExprParser(std::string_view text) : text_(text) {}

  Expr parse() {
    Expr e;
    e.root_ = parse_sum(e);
    skip_ws();
    if (pos_ != text_.size())
      throw ExprError("unexpected trailing input", pos_);
    if (e.root_ < 0) throw ExprError("empty expression", 0);
    return e;
  }

 private:
  using Kind = Expr::Kind;

  int parse_sum(Expr& e) {
    int lhs = parse_term(e);
    for (;;) {
      skip_ws();
      std::size_t at = pos_;
      if (accept('+')) lhs = add_binary(e, Kind::kAdd, lhs, parse_term(e), at);
      else if (accept('-')) lhs = add_binary(e, Kind::kSub, lhs, parse_term(e), at);
      else return lhs;
    }
  }

  int parse_term(Expr& e) {
    int lhs = parse_unary(e);
    for (;;) {
      skip_ws();
      std::size_t at = pos_;
      if (accept('*')) lhs = add_binary(e, Kind::kMul, lhs, parse_unary(e), at);
      else if (accept('/')) lhs = add_binary(e, Kind::kDiv, lhs, parse_unary(e), at);
      else return lhs;
    }
  }

  int parse_unary(Expr& e) {
    skip_ws();
    std::size_t at = pos_;
    if (accept('-')) return add_unary(e, Kind::kNeg, parse_unary(e), at);
    return parse_power(e);
  }

  int parse_power(Expr& e) {
    int base = parse_atom(e);
    skip_ws();
    std::size_t at = pos_;
    if (!accept('^')) return base;
    int expo = parse_unary(e);  // right-assoc: a^b^c == a^(b^c)
    Expr::Node n;
    n.kind = Kind::kPow;
    n.a = base;
    n.value = fold_constant(e, expo, at);
    n.src = at;
    return push(e, n);
  }

  int parse_atom(Expr& e) {
    skip_ws();
    std::size_t at = pos_;
    if (pos_ >= text_.size()) throw ExprError("unexpected end of input", at);
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      int inner = parse_sum(e);
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
      return parse_number(e, at);
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
      return parse_name(e, at);
    throw ExprError("syntax error", at);
  }

  int parse_number(Expr& e, std::size_t at) {
    double value = 0.0;
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr == begin)
      throw ExprError("malformed number", at);
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    Expr::Node n;
    n.kind = Kind::kNumber;
    n.value = value;
    n.src = at;
    return push(e, n);
  }

  int parse_name(Expr& e, std::size_t at) {
    std::size_t end = pos_;
    while (end < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[end])) ||
            text_[end] == '_'))
      ++end;
    std::string_view name = text_.substr(pos_, end - pos_);
    pos_ = end;

    Expr::Node n;
    n.src = at;
    if (name == "y") { n.kind = Kind::kVarY; return push(e, n); }
    if (name == "u") { n.kind = Kind::kVarU; return push(e, n); }
    if (name == "k") { n.kind = Kind::kVarK; return push(e, n); }
    if (name == "pi") {
      n.kind = Kind::kNumber;
      n.value = std::numbers::pi;
      return push(e, n);
    }
    Kind fn;
    if (name == "neg") fn = Kind::kNeg;
    else if (name == "abs") fn = Kind::kAbs;
    else if (name == "sin") fn = Kind::kSin;
    else if (name == "cos") fn = Kind::kCos;
    else
      throw ExprError("unknown identifier '" + std::string(name) + "'", at);
    skip_ws();
    expect('(');
    int arg = parse_sum(e);
    expect(')');
    n.kind = fn;
    n.a = arg;
    return push(e, n);
  }

  // '^' exponents must be data-independent; fold the subtree now (so "y^2"
  // stores 2.0) and reject anything referencing y, u or k.
  double fold_constant(const Expr& e, int idx, std::size_t at) {
    if (!is_constant(e, idx))
      throw ExprError("exponent must be constant", at);
    return e.eval_node(idx, 0.0, 0.0, 0.0);
  }

  static bool is_constant(const Expr& e, int idx) {
    const Expr::Node& n = e.nodes()[static_cast<std::size_t>(idx)];
    switch (n.kind) {
      case Kind::kVarY:
      case Kind::kVarU:
      case Kind::kVarK:
        return false;
      default:
        break;
    }
    if (n.a >= 0 && !is_constant(e, n.a)) return false;
    if (n.b >= 0 && !is_constant(e, n.b)) return false;
    return true;
  }

  int add_binary(Expr& e, Kind kind, int a, int b, std::size_t at) {
    Expr::Node n;
    n.kind = kind;
    n.a = a;
    n.b = b;
    n.src = at;
    return push(e, n);
  }

  int add_unary(Expr& e, Kind kind, int a, std::size_t at) {
    Expr::Node n;
    n.kind = kind;
    n.a = a;
    n.src = at;
    return push(e, n);
  }

  static int push(Expr& e, const Expr::Node& n) {
    e.nodes_.push_back(n);
    return static_cast<int>(e.nodes_.size()) - 1;
  }

  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  bool accept(char c) {
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    skip_ws();
    if (!accept(c))
      throw ExprError(std::string("expected '") + c + "'", pos_);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Expr parse_expr(std::string_view text) {
  return detail::ExprParser(text).parse();
}

inline double eval(const Expr& e, double y, double u, double k) {
  return e.eval(y, u, k);
}

inline std::string fmt(const Expr& e) { return e.fmt(); }

}  // namespace dmfac
