#include "ralm/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>

#include "ralm/error.hpp"

namespace ralm::expr {

Expr::Expr(std::vector<Node> nodes, int var_count)
    : nodes_(std::move(nodes)), var_count_(var_count) {}

bool Expr::same_structure(const Expr& other) const {
  if (var_count_ != other.var_count_ || nodes_.size() != other.nodes_.size()) return false;
  // Parallel walk from both roots; node layouts may differ.
  std::vector<std::pair<int, int>> stack;
  if (!nodes_.empty()) stack.emplace_back(root(), other.root());
  while (!stack.empty()) {
    const auto [a, b] = stack.back();
    stack.pop_back();
    if ((a < 0) != (b < 0)) return false;
    if (a < 0) continue;
    const Node& x = nodes_[a];
    const Node& y = other.nodes_[b];
    if (x.op != y.op) return false;
    if (x.op == Op::Const && x.value != y.value) return false;
    if ((x.op == Op::Var || x.op == Op::Pow) && x.index != y.index) return false;
    stack.emplace_back(x.lhs, y.lhs);
    stack.emplace_back(x.rhs, y.rhs);
  }
  return true;
}

namespace {

class Parser {
 public:
  Parser(std::string_view text, std::span<const std::string> names) : text_(text), names_(names) {}

  Expr run() {
    if (names_.empty()) throw ParseError("no variable names declared", 0);
    skip_ws();
    parse_sum();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError("unexpected trailing input", pos_);
    return Expr(std::move(nodes_), static_cast<int>(names_.size()));
  }

 private:
  int add(Node n) {
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  int parse_sum() {
    int lhs = parse_product();
    while (true) {
      const char c = peek();
      if (c != '+' && c != '-') return lhs;
      const std::size_t at = pos_++;
      const int rhs = parse_product();
      lhs = add({c == '+' ? Op::Add : Op::Sub, 0.0, 0, lhs, rhs, at});
    }
  }

  int parse_product() {
    int lhs = parse_unary();
    while (true) {
      const char c = peek();
      if (c != '*' && c != '/') return lhs;
      const std::size_t at = pos_++;
      const int rhs = parse_unary();
      lhs = add({c == '*' ? Op::Mul : Op::Div, 0.0, 0, lhs, rhs, at});
    }
  }

  int parse_unary() {
    if (peek() == '-') {
      const std::size_t at = pos_++;
      const int operand = parse_unary();
      return add({Op::Neg, 0.0, 0, operand, -1, at});
    }
    return parse_power();
  }

  int parse_power() {
    int base = parse_primary();
    while (peek() == '^') {
      const std::size_t at = pos_++;
      skip_ws();
      const std::size_t start = pos_;
      bool negative = false;
      if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
        negative = text_[pos_] == '-';
        ++pos_;
      }
      const std::size_t digits = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      const bool fractional =
          pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E');
      if (pos_ == digits || fractional) throw ParseError("non-integer exponent", start);
      int value = 0;
      const auto [ptr, ec] = std::from_chars(text_.data() + digits, text_.data() + pos_, value);
      if (ec != std::errc{}) throw ParseError("exponent out of range", start);
      base = add({Op::Pow, 0.0, negative ? -value : value, base, -1, at});
    }
    return base;
  }

  int parse_primary() {
    const char c = peek();
    const std::size_t at = pos_;
    if (c == '(') {
      ++pos_;
      const int inner = parse_sum();
      if (peek() != ')') throw ParseError("expected ')'", pos_);
      ++pos_;
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        ++pos_;
      }
      const std::string_view name = text_.substr(at, pos_ - at);
      if (peek() == '(') {
        const std::optional<Op> fn = function(name);
        if (!fn) throw ParseError("unknown function '" + std::string(name) + "'", at);
        ++pos_;
        const int arg = parse_sum();
        if (peek() != ')') throw ParseError("expected ')'", pos_);
        ++pos_;
        return add({*fn, 0.0, 0, arg, -1, at});
      }
      for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i] == name) return add({Op::Var, 0.0, static_cast<int>(i), -1, -1, at});
      }
      throw ParseError("unknown identifier '" + std::string(name) + "'", at);
    }
    throw ParseError("expected expression", pos_);
  }

  int parse_number() {
    const std::size_t at = pos_;
    auto digits = [this] {
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      const std::size_t exp_digits = pos_;
      digits();
      if (pos_ == exp_digits) pos_ = save;
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text_.data() + at, text_.data() + pos_, value);
    if (ec != std::errc{} || ptr != text_.data() + pos_) {
      throw ParseError("malformed number", at);
    }
    return add({Op::Const, value, 0, -1, -1, at});
  }

  static std::optional<Op> function(std::string_view name) {
    if (name == "exp") return Op::Exp;
    if (name == "sin") return Op::Sin;
    if (name == "cos") return Op::Cos;
    if (name == "sqrt") return Op::Sqrt;
    return std::nullopt;
  }

  std::string_view text_;
  std::span<const std::string> names_;
  std::size_t pos_ = 0;
  std::vector<Node> nodes_;
};

int precedence(const Node& n) {
  switch (n.op) {
    case Op::Add:
    case Op::Sub:
      return 1;
    case Op::Mul:
    case Op::Div:
      return 2;
    case Op::Neg:
      return 3;
    case Op::Pow:
      return 4;
    case Op::Const:
      return n.value < 0.0 ? 0 : 5;
    default:
      return 5;
  }
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string print_node(const Expr& e, int id, std::span<const std::string> names) {
  const Node& n = e.nodes()[id];
  auto child = [&](int c, int min_prec) {
    std::string s = print_node(e, c, names);
    if (precedence(e.nodes()[c]) < min_prec) s = "(" + s + ")";
    return s;
  };
  switch (n.op) {
    case Op::Var:
      return names[n.index];
    case Op::Const:
      return format_number(n.value);
    case Op::Add:
      return child(n.lhs, 1) + " + " + child(n.rhs, 2);
    case Op::Sub:
      return child(n.lhs, 1) + " - " + child(n.rhs, 2);
    case Op::Mul:
      return child(n.lhs, 2) + "*" + child(n.rhs, 3);
    case Op::Div:
      return child(n.lhs, 2) + "/" + child(n.rhs, 3);
    case Op::Neg:
      return "-" + child(n.lhs, 3);
    case Op::Pow:
      return child(n.lhs, 4) + "^" + std::to_string(n.index);
    case Op::Exp:
      return "exp(" + print_node(e, n.lhs, names) + ")";
    case Op::Sin:
      return "sin(" + print_node(e, n.lhs, names) + ")";
    case Op::Cos:
      return "cos(" + print_node(e, n.lhs, names) + ")";
    case Op::Sqrt:
      return "sqrt(" + print_node(e, n.lhs, names) + ")";
  }
  return {};
}

std::string structure_node(const Expr& e, int id) {
  const Node& n = e.nodes()[id];
  auto un = [&](const char* name) { return std::string(name) + "(" + structure_node(e, n.lhs) + ")"; };
  auto bin = [&](const char* name) {
    return std::string(name) + "(" + structure_node(e, n.lhs) + ", " + structure_node(e, n.rhs) +
           ")";
  };
  switch (n.op) {
    case Op::Var:
      return "Var " + std::to_string(n.index);
    case Op::Const:
      return "Const " + format_number(n.value);
    case Op::Add:
      return bin("Add");
    case Op::Sub:
      return bin("Sub");
    case Op::Mul:
      return bin("Mul");
    case Op::Div:
      return bin("Div");
    case Op::Pow:
      return "Pow(" + structure_node(e, n.lhs) + ", " + std::to_string(n.index) + ")";
    case Op::Neg:
      return un("Neg");
    case Op::Exp:
      return un("Exp");
    case Op::Sin:
      return un("Sin");
    case Op::Cos:
      return un("Cos");
    case Op::Sqrt:
      return un("Sqrt");
  }
  return {};
}

struct Dual {
  double v = 0.0;
  double d = 0.0;
};

Dual mul(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }

Dual divide(Dual a, Dual b, std::size_t offset) {
  if (b.v == 0.0) throw DomainError("division by zero", offset);
  return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
}

// One forward sweep seeding d(x_seed) = 1; seed < 0 computes values only.
double sweep(const Expr& e, const Eigen::VectorXd& x, int seed, std::vector<Dual>& work,
             double* derivative) {
  const auto& nodes = e.nodes();
  work.assign(nodes.size(), Dual{});
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node& n = nodes[i];
    const Dual a = n.lhs >= 0 ? work[n.lhs] : Dual{};
    const Dual b = n.rhs >= 0 ? work[n.rhs] : Dual{};
    Dual r;
    switch (n.op) {
      case Op::Var:
        r = {x(n.index), n.index == seed ? 1.0 : 0.0};
        break;
      case Op::Const:
        r = {n.value, 0.0};
        break;
      case Op::Add:
        r = {a.v + b.v, a.d + b.d};
        break;
      case Op::Sub:
        r = {a.v - b.v, a.d - b.d};
        break;
      case Op::Mul:
        r = mul(a, b);
        break;
      case Op::Div:
        r = divide(a, b, n.offset);
        break;
      case Op::Neg:
        r = {-a.v, -a.d};
        break;
      case Op::Pow: {
        Dual p{1.0, 0.0};
        for (int k = 0; k < std::abs(n.index); ++k) p = mul(p, a);
        r = n.index < 0 ? divide(Dual{1.0, 0.0}, p, n.offset) : p;
        break;
      }
      case Op::Exp: {
        const double ev = std::exp(a.v);
        r = {ev, ev * a.d};
        break;
      }
      case Op::Sin:
        r = {std::sin(a.v), std::cos(a.v) * a.d};
        break;
      case Op::Cos:
        r = {std::cos(a.v), -std::sin(a.v) * a.d};
        break;
      case Op::Sqrt: {
        if (a.v < 0.0) throw DomainError("square root of a negative number", n.offset);
        const double s = std::sqrt(a.v);
        if (s == 0.0 && a.d != 0.0) {
          throw DomainError("square root is not differentiable at zero", n.offset);
        }
        r = {s, s == 0.0 ? 0.0 : a.d / (2.0 * s)};
        break;
      }
    }
    work[i] = r;
  }
  if (derivative != nullptr) *derivative = work.back().d;
  return work.back().v;
}

void check_point(const Expr& e, const Eigen::VectorXd& x) {
  if (x.size() != e.var_count()) {
    throw DimensionError("expression expects " + std::to_string(e.var_count()) +
                         " variables, got " + std::to_string(x.size()));
  }
  if (e.empty()) throw Error("evaluating an empty expression");
}

}  // namespace

Expr parse(std::string_view text, std::span<const std::string> var_names) {
  return Parser(text, var_names).run();
}

std::string print(const Expr& e, std::span<const std::string> var_names) {
  if (e.empty()) return {};
  return print_node(e, e.root(), var_names);
}

std::string structure(const Expr& e) {
  if (e.empty()) return {};
  return structure_node(e, e.root());
}

double eval(const Expr& e, const Eigen::VectorXd& point) {
  check_point(e, point);
  std::vector<Dual> work;
  return sweep(e, point, -1, work, nullptr);
}

ValueGrad eval_grad(const Expr& e, const Eigen::VectorXd& point) {
  check_point(e, point);
  std::vector<Dual> work;
  ValueGrad out;
  out.gradient = Eigen::VectorXd::Zero(e.var_count());
  if (e.var_count() == 0) {
    out.value = sweep(e, point, -1, work, nullptr);
    return out;
  }
  for (int k = 0; k < e.var_count(); ++k) {
    double d = 0.0;
    out.value = sweep(e, point, k, work, &d);
    out.gradient(k) = d;
  }
  return out;
}

}  // namespace ralm::expr
