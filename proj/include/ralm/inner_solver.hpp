#pragma once

#include <functional>
#include <string>

#include "ralm/manifold.hpp"
#include "ralm/problem.hpp"

namespace ralm {

struct InnerConfig {
  double grad_tol = 1e-6;
  int max_iters = 10000;
  double armijo_c = 1e-4;
  double backtrack_factor = 0.5;
  double initial_step = 1.0;
  double step_floor = 1e-14;
  /// Start each line search from the Barzilai-Borwein step (clamped to
  /// [step_floor, 1e12]) instead of initial_step. The Armijo test is unchanged.
  bool bb_step = true;

  void validate() const;
};

enum class InnerStatus { Converged, IterLimit, StepFloor, DomainFailure };

std::string to_string(InnerStatus s);

struct InnerResult {
  Point point;
  double value = 0.0;
  double grad_norm = 0.0;
  InnerStatus status = InnerStatus::IterLimit;
  int iterations = 0;
  /// Message of the DomainError that stopped the solve, if any.
  std::string error;
};

/// Value and Riemannian gradient at a point.
using Objective = std::function<ValueTangent(const Point&)>;

/**
 * Riemannian gradient descent p <- exp_p(-t grad) with Armijo backtracking:
 * phi(exp(-t g)) <= phi(p) - c t ||g||^2. Objective values never increase.
 */
InnerResult minimize(const Objective& objective, const Manifold& manifold, const Point& start,
                     const InnerConfig& cfg);

}  // namespace ralm
