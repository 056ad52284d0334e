#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace ralm::expr {

enum class Op { Var, Const, Add, Sub, Mul, Div, Pow, Neg, Exp, Sin, Cos, Sqrt };

struct Node {
  Op op = Op::Const;
  double value = 0.0;  // Const
  int index = 0;       // Var: variable index; Pow: integer exponent
  int lhs = -1;        // first child (unary operand)
  int rhs = -1;        // second child
  std::size_t offset = 0;  // byte offset of the node in its source text
};

/**
 * An immutable expression tree over `var_count` ambient coordinates. Nodes are
 * stored in post-order, so every child precedes its parent and the root is the
 * last node.
 */
class Expr {
 public:
  Expr() = default;
  Expr(std::vector<Node> nodes, int var_count);

  const std::vector<Node>& nodes() const { return nodes_; }
  int var_count() const { return var_count_; }
  int root() const { return static_cast<int>(nodes_.size()) - 1; }
  bool empty() const { return nodes_.empty(); }

  /// Structural equality (offsets ignored).
  bool same_structure(const Expr& other) const;

 private:
  std::vector<Node> nodes_;
  int var_count_ = 0;
};

/**
 * Parses infix text. Precedence from tightest: `^` (integer literal exponent),
 * unary minus, `*` `/`, `+` `-`. Calls: exp, sin, cos, sqrt. Identifiers bind
 * to `var_names` by position. Throws ParseError with a byte offset.
 */
Expr parse(std::string_view text, std::span<const std::string> var_names);

/// Infix text that parses back to the same tree.
std::string print(const Expr& e, std::span<const std::string> var_names);

/// Constructor-style dump, e.g. `Add(Var 0, Pow(Var 1, 2))`.
std::string structure(const Expr& e);

struct ValueGrad {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

double eval(const Expr& e, const Eigen::VectorXd& point);

/// Value and exact gradient by forward-mode dual numbers, one sweep per
/// variable. Throws DomainError at the offending node.
ValueGrad eval_grad(const Expr& e, const Eigen::VectorXd& point);

}  // namespace ralm::expr
