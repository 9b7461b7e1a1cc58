#pragma once

// Coin-angle field theta(j,p): a small arithmetic language over the physical
// coordinates t = eps*j and x = eps*p.

#include "dqwgeom/core.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace dqwgeom {

struct ExprNode {
  enum class Kind { Number, VarT, VarX, Neg, Add, Sub, Mul, Div, Pow, Call };

  Kind kind = Kind::Number;
  double value = 0.0;
  std::string func;  // Call only
  std::vector<std::unique_ptr<ExprNode>> children;

  ExprNode() = default;
  ExprNode(const ExprNode& o) : kind(o.kind), value(o.value), func(o.func) {
    children.reserve(o.children.size());
    for (const auto& c : o.children) children.push_back(std::make_unique<ExprNode>(*c));
  }
  ExprNode& operator=(const ExprNode& o) {
    if (this != &o) *this = ExprNode(o);
    return *this;
  }
  ExprNode(ExprNode&&) noexcept = default;
  ExprNode& operator=(ExprNode&&) noexcept = default;

  friend bool operator==(const ExprNode& a, const ExprNode& b) {
    if (a.kind != b.kind || a.func != b.func || a.children.size() != b.children.size()) return false;
    if (a.kind == Kind::Number && a.value != b.value) return false;
    for (std::size_t i = 0; i < a.children.size(); ++i)
      if (!(*a.children[i] == *b.children[i])) return false;
    return true;
  }
};

/// Syntax error with the byte offset where parsing stopped and what would have been accepted.
class ParseError : public ConfigError {
 public:
  ParseError(std::size_t offset, std::set<std::string> expected, const std::string& what)
      : ConfigError(what), offset_(offset), expected_(std::move(expected)) {}
  std::size_t offset() const { return offset_; }
  const std::set<std::string>& expected() const { return expected_; }

 private:
  std::size_t offset_;
  std::set<std::string> expected_;
};

namespace detail {

inline const std::set<std::string>& known_functions() {
  static const std::set<std::string> fns{"sin",  "cos",  "tan",    "exp",    "log",    "sinh",
                                         "cosh", "tanh", "arccos", "arcsin", "arctan", "sqrt",
                                         "abs"};
  return fns;
}

inline const std::set<std::string>& operand_start() {
  static const std::set<std::string> s{"number", "'t'", "'x'", "function", "'('", "'-'"};
  return s;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  ExprNode parse() {
    ExprNode e = expr();
    skip_ws();
    if (pos_ != src_.size()) fail({"'+'", "'-'", "'*'", "'/'", "'^'", "end of input"});
    return e;
  }

 private:
  using Node = std::unique_ptr<ExprNode>;

  static Node make(ExprNode::Kind k) {
    auto n = std::make_unique<ExprNode>();
    n->kind = k;
    return n;
  }
  static Node binary(ExprNode::Kind k, Node lhs, Node rhs) {
    auto n = make(k);
    n->children.push_back(std::move(lhs));
    n->children.push_back(std::move(rhs));
    return n;
  }

  [[noreturn]] void fail(std::set<std::string> expected) const {
    std::string found = pos_ < src_.size() ? "'" + std::string(1, src_[pos_]) + "'" : "end of input";
    std::string list;
    for (const auto& e : expected) list += (list.empty() ? "" : ", ") + e;
    throw ParseError(pos_, std::move(expected),
                     "parse error at offset " + std::to_string(pos_) + ": found " + found +
                         ", expected one of {" + list + "}");
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  ExprNode expr() { return std::move(*expr_node()); }

  Node expr_node() {
    Node lhs = term();
    for (;;) {
      if (accept('+')) lhs = binary(ExprNode::Kind::Add, std::move(lhs), term());
      else if (accept('-')) lhs = binary(ExprNode::Kind::Sub, std::move(lhs), term());
      else return lhs;
    }
  }

  Node term() {
    Node lhs = factor();
    for (;;) {
      if (accept('*')) lhs = binary(ExprNode::Kind::Mul, std::move(lhs), factor());
      else if (accept('/')) lhs = binary(ExprNode::Kind::Div, std::move(lhs), factor());
      else return lhs;
    }
  }

  // '^' binds tighter than unary minus: -x^2 == -(x^2), 2^-1 == 2^(-1).
  Node factor() {
    if (accept('-')) {
      auto n = make(ExprNode::Kind::Neg);
      n->children.push_back(factor());
      return n;
    }
    Node b = base();
    if (accept('^')) return binary(ExprNode::Kind::Pow, std::move(b), factor());
    return b;
  }

  Node base() {
    skip_ws();
    if (pos_ >= src_.size()) fail(operand_start());
    const char ch = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') return number();
    if (ch == '(') {
      ++pos_;
      Node inner = expr_node();
      if (!accept(')')) fail({"')'", "'+'", "'-'", "'*'", "'/'", "'^'"});
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') return identifier();
    fail(operand_start());
  }

  Node number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t q = pos_ + 1;
      if (q < src_.size() && (src_[q] == '+' || src_[q] == '-')) ++q;
      if (q < src_.size() && std::isdigit(static_cast<unsigned char>(src_[q]))) {
        pos_ = q;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
    }
    const std::string text(src_.substr(start, pos_ - start));
    if (text == ".") {
      pos_ = start;
      fail({"number"});
    }
    auto n = make(ExprNode::Kind::Number);
    n->value = std::strtod(text.c_str(), nullptr);
    return n;
  }

  Node identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string name(src_.substr(start, pos_ - start));
    if (name == "t") return make(ExprNode::Kind::VarT);
    if (name == "x") return make(ExprNode::Kind::VarX);
    if (!known_functions().count(name)) {
      throw ParseError(start, {"'t'", "'x'", "function"},
                       "unknown identifier '" + name + "' at offset " + std::to_string(start));
    }
    if (!accept('(')) fail({"'('"});
    auto n = make(ExprNode::Kind::Call);
    n->func = name;
    n->children.push_back(expr_node());
    while (accept(',')) n->children.push_back(expr_node());
    if (!accept(')')) fail({"')'", "','"});
    if (n->children.size() != 1) {
      throw ParseError(start, {"1 argument"},
                       "arity mismatch: '" + name + "' takes 1 argument, got " +
                           std::to_string(n->children.size()));
    }
    return n;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

inline bool uses(const ExprNode& n, ExprNode::Kind k) {
  if (n.kind == k) return true;
  for (const auto& c : n.children)
    if (uses(*c, k)) return true;
  return false;
}

inline std::string fmt_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Evaluates the tree at (t, x). Domain violations throw NumericError carrying `where`.
inline double eval_expr(const ExprNode& n, double t, double x, const std::string& where = {}) {
  using K = ExprNode::Kind;
  auto domain = [&](const std::string& msg) -> NumericError {
    return NumericError("domain error: " + msg + (where.empty() ? "" : " at " + where));
  };
  auto arg = [&](std::size_t i) { return eval_expr(*n.children[i], t, x, where); };
  double v = 0.0;
  switch (n.kind) {
    case K::Number: return n.value;
    case K::VarT: return t;
    case K::VarX: return x;
    case K::Neg: return -arg(0);
    case K::Add: v = arg(0) + arg(1); break;
    case K::Sub: v = arg(0) - arg(1); break;
    case K::Mul: v = arg(0) * arg(1); break;
    case K::Div: {
      const double d = arg(1);
      if (d == 0.0) throw domain("division by zero");
      v = arg(0) / d;
      break;
    }
    case K::Pow: v = std::pow(arg(0), arg(1)); break;
    case K::Call: {
      const double a = arg(0);
      const std::string& f = n.func;
      if (f == "sin") v = std::sin(a);
      else if (f == "cos") v = std::cos(a);
      else if (f == "tan") v = std::tan(a);
      else if (f == "exp") v = std::exp(a);
      else if (f == "sinh") v = std::sinh(a);
      else if (f == "cosh") v = std::cosh(a);
      else if (f == "tanh") v = std::tanh(a);
      else if (f == "arctan") v = std::atan(a);
      else if (f == "abs") v = std::abs(a);
      else if (f == "log") {
        if (!(a > 0.0)) throw domain("log argument " + detail::fmt_number(a) + " <= 0");
        v = std::log(a);
      } else if (f == "sqrt") {
        if (a < 0.0) throw domain("sqrt argument " + detail::fmt_number(a) + " < 0");
        v = std::sqrt(a);
      } else if (f == "arccos" || f == "arcsin") {
        if (a < -1.0 || a > 1.0)
          throw domain(f + " argument " + detail::fmt_number(a) + " outside [-1, 1]");
        v = f == "arccos" ? std::acos(a) : std::asin(a);
      } else {
        throw domain("unknown function '" + f + "'");
      }
      break;
    }
  }
  if (!std::isfinite(v)) throw domain("non-finite result");
  return v;
}

/// Fully parenthesised rendering; parsing it back yields an identical tree.
inline std::string to_string(const ExprNode& n) {
  using K = ExprNode::Kind;
  auto bin = [&](const char* op) {
    return "(" + to_string(*n.children[0]) + " " + op + " " + to_string(*n.children[1]) + ")";
  };
  switch (n.kind) {
    case K::Number: {
      const std::string s = detail::fmt_number(std::abs(n.value));
      return n.value < 0 || std::signbit(n.value) ? "(-" + s + ")" : s;
    }
    case K::VarT: return "t";
    case K::VarX: return "x";
    case K::Neg: return "(-" + to_string(*n.children[0]) + ")";
    case K::Add: return bin("+");
    case K::Sub: return bin("-");
    case K::Mul: return bin("*");
    case K::Div: return bin("/");
    case K::Pow: return bin("^");
    case K::Call: return n.func + "(" + to_string(*n.children[0]) + ")";
  }
  return {};
}

struct ThetaSpec {
  enum class Kind { Constant, TimeProfile, Full };
  Kind kind = Kind::Constant;
  double value = 0.0;  // Constant
  std::optional<ExprNode> tree;
  std::string source;
};

inline ExprNode parse_expr(std::string_view src) { return detail::Parser(src).parse(); }

inline ThetaSpec parse_theta(std::string_view src) {
  ThetaSpec spec;
  spec.source = std::string(src);
  ExprNode tree = parse_expr(src);
  if (detail::uses(tree, ExprNode::Kind::VarX)) {
    spec.kind = ThetaSpec::Kind::Full;
  } else if (detail::uses(tree, ExprNode::Kind::VarT)) {
    spec.kind = ThetaSpec::Kind::TimeProfile;
  } else {
    spec.kind = ThetaSpec::Kind::Constant;
    spec.value = eval_expr(tree, 0.0, 0.0, "constant expression");
  }
  spec.tree = std::move(tree);
  return spec;
}

inline ThetaSpec constant_theta(double value) {
  ThetaSpec spec;
  spec.kind = ThetaSpec::Kind::Constant;
  spec.value = value;
  spec.source = detail::fmt_number(value);
  return spec;
}

/// Evaluates at t = eps*j, x = eps*wrap(p). A time profile never reads x.
inline double eval_theta(const ThetaSpec& spec, const Lattice& lat, int j, int p) {
  if (spec.kind == ThetaSpec::Kind::Constant) return spec.value;
  const double t = lat.eps * j;
  const double x = spec.kind == ThetaSpec::Kind::Full ? lat.eps * wrap_p(p, lat.P) : 0.0;
  return eval_expr(*spec.tree, t, x, site_str(j, p));
}

/// Samples theta on every stored slice.
inline ScalarField sample_theta(const ThetaSpec& spec, const Lattice& lat) {
  ScalarField out(lat);
  for (int j = 0; j < lat.J; ++j)
    for (int p = 0; p < lat.P; ++p) out.at(j, p) = eval_theta(spec, lat, j, p);
  return out;
}

}  // namespace dqwgeom
