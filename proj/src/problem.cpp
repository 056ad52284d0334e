#include "ralm/problem.hpp"

#include <algorithm>
#include <cmath>

#include "ralm/error.hpp"

namespace ralm {

void Problem::validate() const {
  const int n = manifold.ambient_dim();
  if (static_cast<int>(var_names.size()) != n) {
    throw PreconditionError("problem '" + name + "': " + std::to_string(var_names.size()) +
                            " variable names for ambient dimension " + std::to_string(n));
  }
  auto check = [&](const expr::Expr& e, const std::string& what) {
    if (e.empty()) throw PreconditionError("problem '" + name + "': empty " + what);
    if (e.var_count() != n) {
      throw PreconditionError("problem '" + name + "': " + what + " uses " +
                              std::to_string(e.var_count()) + " variables, expected " +
                              std::to_string(n));
    }
  };
  check(objective, "objective");
  for (const auto& e : equalities) check(e, "equality");
  for (const auto& e : inequalities) check(e, "inequality");
}

Problem make_problem(std::string name, Manifold manifold, std::vector<std::string> var_names,
                     const std::string& objective, const std::vector<std::string>& equalities,
                     const std::vector<std::string>& inequalities) {
  Problem prob;
  prob.name = std::move(name);
  prob.manifold = std::move(manifold);
  prob.var_names = std::move(var_names);
  prob.objective = expr::parse(objective, prob.var_names);
  for (const auto& s : equalities) prob.equalities.push_back(expr::parse(s, prob.var_names));
  for (const auto& s : inequalities) prob.inequalities.push_back(expr::parse(s, prob.var_names));
  prob.validate();
  return prob;
}

Multipliers Multipliers::zeros(const Problem& prob) {
  return {Vec::Zero(prob.num_equalities()), Vec::Zero(prob.num_inequalities())};
}

Tangent riemannian_gradient(const expr::Expr& e, const Manifold& manifold, const Point& p) {
  const expr::ValueGrad vg = expr::eval_grad(e, p.coords);
  return manifold.project_tangent(p, vg.gradient);
}

FirstOrder evaluate(const Problem& prob, const Point& p) {
  const Manifold& M = prob.manifold;
  FirstOrder fo;
  fo.point = p;
  const expr::ValueGrad f = expr::eval_grad(prob.objective, p.coords);
  fo.f = f.value;
  fo.grad_f = M.project_tangent(p, f.gradient);
  fo.h.resize(prob.num_equalities());
  fo.g.resize(prob.num_inequalities());
  for (int i = 0; i < prob.num_equalities(); ++i) {
    const expr::ValueGrad vg = expr::eval_grad(prob.equalities[i], p.coords);
    fo.h(i) = vg.value;
    fo.grad_h.push_back(M.project_tangent(p, vg.gradient));
  }
  for (int j = 0; j < prob.num_inequalities(); ++j) {
    const expr::ValueGrad vg = expr::eval_grad(prob.inequalities[j], p.coords);
    fo.g(j) = vg.value;
    fo.grad_g.push_back(M.project_tangent(p, vg.gradient));
  }
  return fo;
}

ConstraintValues constraint_values(const Problem& prob, const Point& p) {
  ConstraintValues cv;
  cv.h.resize(prob.num_equalities());
  cv.g.resize(prob.num_inequalities());
  for (int i = 0; i < prob.num_equalities(); ++i) cv.h(i) = expr::eval(prob.equalities[i], p.coords);
  for (int j = 0; j < prob.num_inequalities(); ++j) {
    cv.g(j) = expr::eval(prob.inequalities[j], p.coords);
  }
  return cv;
}

std::vector<int> active_set(const Problem& prob, const Point& p, double tol_act) {
  const ConstraintValues cv = constraint_values(prob, p);
  std::vector<int> out;
  for (int j = 0; j < cv.g.size(); ++j) {
    if (std::abs(cv.g(j)) <= tol_act) out.push_back(j);
  }
  return out;
}

Tangent lagrangian_gradient(const FirstOrder& fo, const Multipliers& mult) {
  if (mult.lambda.size() != static_cast<Eigen::Index>(fo.grad_h.size()) ||
      mult.mu.size() != static_cast<Eigen::Index>(fo.grad_g.size())) {
    throw DimensionError("lagrangian_gradient: multiplier dimensions do not match the problem");
  }
  Tangent out = fo.grad_f;
  for (std::size_t i = 0; i < fo.grad_h.size(); ++i) {
    out.vec += mult.lambda(static_cast<Eigen::Index>(i)) * fo.grad_h[i].vec;
  }
  for (std::size_t j = 0; j < fo.grad_g.size(); ++j) {
    out.vec += mult.mu(static_cast<Eigen::Index>(j)) * fo.grad_g[j].vec;
  }
  return out;
}

Tangent lagrangian_gradient(const Problem& prob, const Point& p, const Multipliers& mult) {
  return lagrangian_gradient(evaluate(prob, p), mult);
}

ValueTangent aug_lagrangian(const Problem& prob, const Point& p, const Multipliers& mult_bar,
                            double rho) {
  if (!(rho > 0.0)) throw PreconditionError("aug_lagrangian: rho must be positive");
  const FirstOrder fo = evaluate(prob, p);
  if (mult_bar.lambda.size() != fo.h.size() || mult_bar.mu.size() != fo.g.size()) {
    throw DimensionError("aug_lagrangian: multiplier dimensions do not match the problem");
  }
  ValueTangent out{fo.f, fo.grad_f};
  double penalty = 0.0;
  for (Eigen::Index i = 0; i < fo.h.size(); ++i) {
    const double shifted = fo.h(i) + mult_bar.lambda(i) / rho;
    penalty += shifted * shifted;
    out.gradient.vec += (mult_bar.lambda(i) + rho * fo.h(i)) * fo.grad_h[i].vec;
  }
  for (Eigen::Index j = 0; j < fo.g.size(); ++j) {
    const double shifted = std::max(0.0, fo.g(j) + mult_bar.mu(j) / rho);
    penalty += shifted * shifted;
    out.gradient.vec += std::max(0.0, mult_bar.mu(j) + rho * fo.g(j)) * fo.grad_g[j].vec;
  }
  out.value += 0.5 * rho * penalty;
  return out;
}

ValueTangent infeasibility(const FirstOrder& fo) {
  ValueTangent out{0.0, Tangent{fo.point, Vec::Zero(fo.point.coords.size())}};
  for (Eigen::Index i = 0; i < fo.h.size(); ++i) {
    out.value += 0.5 * fo.h(i) * fo.h(i);
    out.gradient.vec += fo.h(i) * fo.grad_h[i].vec;
  }
  for (Eigen::Index j = 0; j < fo.g.size(); ++j) {
    const double plus = std::max(0.0, fo.g(j));
    out.value += 0.5 * plus * plus;
    out.gradient.vec += plus * fo.grad_g[j].vec;
  }
  return out;
}

ValueTangent infeasibility(const Problem& prob, const Point& p) {
  return infeasibility(evaluate(prob, p));
}

double max_violation(const ConstraintValues& cv) {
  double v = 0.0;
  if (cv.h.size() > 0) v = cv.h.lpNorm<Eigen::Infinity>();
  for (Eigen::Index j = 0; j < cv.g.size(); ++j) v = std::max(v, cv.g(j));
  return v;
}

}  // namespace ralm
