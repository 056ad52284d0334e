#pragma once

#include <string>
#include <vector>

#include "ralm/expr.hpp"
#include "ralm/manifold.hpp"

namespace ralm {

/// min f(q) over the manifold subject to h(q) = 0 and g(q) <= 0.
struct Problem {
  std::string name;
  Manifold manifold = Manifold::euclidean(1);
  std::vector<std::string> var_names;
  expr::Expr objective;
  std::vector<expr::Expr> equalities;
  std::vector<expr::Expr> inequalities;

  int num_equalities() const { return static_cast<int>(equalities.size()); }
  int num_inequalities() const { return static_cast<int>(inequalities.size()); }

  /// Throws PreconditionError unless every expression is over the manifold's
  /// ambient variables.
  void validate() const;
};

/// Parses the expression strings and validates the result.
Problem make_problem(std::string name, Manifold manifold, std::vector<std::string> var_names,
                     const std::string& objective, const std::vector<std::string>& equalities,
                     const std::vector<std::string>& inequalities);

/// Lagrange multiplier pair (lambda for h, mu >= 0 for g).
struct Multipliers {
  Vec lambda;
  Vec mu;

  static Multipliers zeros(const Problem& prob);
};

struct ConstraintValues {
  Vec h;
  Vec g;
};

struct ValueTangent {
  double value = 0.0;
  Tangent gradient;
};

/// Everything first-order at one point: values plus Riemannian gradients.
struct FirstOrder {
  Point point;
  double f = 0.0;
  Tangent grad_f;
  Vec h;
  Vec g;
  std::vector<Tangent> grad_h;
  std::vector<Tangent> grad_g;
};

FirstOrder evaluate(const Problem& prob, const Point& p);

ConstraintValues constraint_values(const Problem& prob, const Point& p);

/// 0-based indices j with |g_j(p)| <= tol_act.
std::vector<int> active_set(const Problem& prob, const Point& p, double tol_act = 1e-6);

/// Tangent projection of the ambient gradient.
Tangent riemannian_gradient(const expr::Expr& e, const Manifold& manifold, const Point& p);

/// grad f + sum lambda_i grad h_i + sum mu_j grad g_j.
Tangent lagrangian_gradient(const Problem& prob, const Point& p, const Multipliers& mult);
Tangent lagrangian_gradient(const FirstOrder& fo, const Multipliers& mult);

/**
 * Powell-Hestenes-Rockafellar augmented Lagrangian
 *
 *   f + (rho/2) (||h + lambda/rho||^2 + ||[g + mu/rho]_+||^2)
 *
 * and its gradient grad f + sum (lambda_i + rho h_i) grad h_i
 *                         + sum [mu_j + rho g_j]_+ grad g_j.
 */
ValueTangent aug_lagrangian(const Problem& prob, const Point& p, const Multipliers& mult_bar,
                            double rho);

/// 0.5 ||h||^2 + 0.5 ||g_+||^2 and its Riemannian gradient.
ValueTangent infeasibility(const Problem& prob, const Point& p);
ValueTangent infeasibility(const FirstOrder& fo);

/// max(||h||_inf, max_j [g_j]_+).
double max_violation(const ConstraintValues& cv);

}  // namespace ralm
