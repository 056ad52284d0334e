#include "ralm/inner_solver.hpp"

#include <algorithm>
#include <cmath>

#include "ralm/error.hpp"

namespace ralm {

namespace {

constexpr double kMaxStep = 1e12;

}  // namespace

void InnerConfig::validate() const {
  if (!(grad_tol >= 0.0)) throw PreconditionError("inner: grad_tol must be >= 0");
  if (max_iters < 0) throw PreconditionError("inner: max_iters must be >= 0");
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw PreconditionError("inner: armijo_c not in (0,1)");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
    throw PreconditionError("inner: backtrack_factor not in (0,1)");
  }
  if (!(initial_step > 0.0)) throw PreconditionError("inner: initial_step must be > 0");
  if (!(step_floor > 0.0)) throw PreconditionError("inner: step_floor must be > 0");
}

std::string to_string(InnerStatus s) {
  switch (s) {
    case InnerStatus::Converged:
      return "Converged";
    case InnerStatus::IterLimit:
      return "IterLimit";
    case InnerStatus::StepFloor:
      return "StepFloor";
    case InnerStatus::DomainFailure:
      return "DomainFailure";
  }
  return "?";
}

InnerResult minimize(const Objective& objective, const Manifold& manifold, const Point& start,
                     const InnerConfig& cfg) {
  cfg.validate();
  if (!manifold.contains(start.coords, 1e-8)) {
    throw PreconditionError("inner: start point is not on the manifold");
  }
  InnerResult res;
  res.point = start;
  ValueTangent cur;
  try {
    cur = objective(start);
  } catch (const DomainError& e) {
    res.status = InnerStatus::DomainFailure;
    res.error = e.what();
    res.value = std::nan("");
    res.grad_norm = std::nan("");
    return res;
  }
  res.value = cur.value;
  res.grad_norm = cur.gradient.norm();

  double step = cfg.initial_step;
  Vec prev_coords;
  Vec prev_grad;
  for (int it = 0;; ++it) {
    res.iterations = it;
    if (res.grad_norm <= cfg.grad_tol) {
      res.status = InnerStatus::Converged;
      return res;
    }
    if (!std::isfinite(res.grad_norm)) {
      res.status = InnerStatus::DomainFailure;
      res.error = "non-finite gradient";
      return res;
    }
    if (it >= cfg.max_iters) {
      res.status = InnerStatus::IterLimit;
      return res;
    }

    if (cfg.bb_step && prev_grad.size() > 0) {
      // Tangent-space differences, approximated in ambient coordinates.
      const Vec s = manifold.project_tangent(res.point, res.point.coords - prev_coords).vec;
      const Vec y = cur.gradient.vec - manifold.project_tangent(res.point, prev_grad).vec;
      const double sy = s.dot(y);
      step = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, cfg.step_floor, kMaxStep)
                      : cfg.initial_step;
    } else {
      step = cfg.initial_step;
    }

    const double g2 = res.grad_norm * res.grad_norm;
    bool accepted = false;
    Point trial;
    ValueTangent next;
    while (step >= cfg.step_floor) {
      trial = manifold.exp(Tangent{res.point, -step * cur.gradient.vec});
      try {
        next = objective(trial);
        if (std::isfinite(next.value) && next.value <= res.value - cfg.armijo_c * step * g2) {
          accepted = true;
          break;
        }
      } catch (const DomainError& e) {
        res.error = e.what();
      }
      step *= cfg.backtrack_factor;
    }
    if (!accepted) {
      res.status = res.error.empty() ? InnerStatus::StepFloor : InnerStatus::DomainFailure;
      return res;
    }
    res.error.clear();
    prev_coords = res.point.coords;
    prev_grad = cur.gradient.vec;
    res.point = trial;
    cur = next;
    res.value = cur.value;
    res.grad_norm = cur.gradient.norm();
  }
}

}  // namespace ralm
