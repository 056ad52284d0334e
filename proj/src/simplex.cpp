#include "ralm/simplex.hpp"

#include <limits>
#include <vector>

#include "ralm/error.hpp"

namespace ralm::linalg {

namespace {

// Dense tableau over the rows of A x = b. Column `cols` holds the right-hand
// side; `cost` holds reduced costs and `value` the current objective.
struct Tableau {
  Eigen::MatrixXd t;
  Eigen::VectorXd cost;
  double value = 0.0;
  std::vector<int> basis;
  int cols = 0;

  int rows() const { return static_cast<int>(t.rows()); }
  double rhs(int i) const { return t(i, cols); }

  void pivot(int r, int c) {
    t.row(r) /= t(r, c);
    for (int i = 0; i < rows(); ++i) {
      if (i != r && t(i, c) != 0.0) t.row(i) -= t(i, c) * t.row(r);
    }
    const double d = cost(c);
    if (d != 0.0) {
      cost -= d * t.row(r).head(cols).transpose();
      value += d * rhs(r);
    }
    basis[r] = c;
  }

  // Bland's rule. `allowed` limits the entering columns. Returns false when
  // the problem is unbounded in the entering direction.
  bool run(const SimplexOptions& opt, int allowed, int& iterations) {
    while (true) {
      int enter = -1;
      for (int j = 0; j < allowed; ++j) {
        if (cost(j) < -opt.pivot_tol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      if (++iterations > opt.max_iterations) {
        throw SimplexError("simplex iteration guard exceeded");
      }
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < rows(); ++i) {
        const double a = t(i, enter);
        if (a <= opt.pivot_tol) continue;
        const double ratio = rhs(i) / a;
        if (ratio < best - 1e-15 ||
            (ratio <= best + 1e-15 && leave >= 0 && basis[i] < basis[leave])) {
          best = std::min(best, ratio);
          leave = i;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
  }
};

LpSolution solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd* c,
                 const SimplexOptions& opt) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  if (b.size() != m || (c != nullptr && c->size() != n)) {
    throw DimensionError("simplex: inconsistent problem dimensions");
  }

  Tableau tab;
  tab.cols = n + m;
  tab.t = Eigen::MatrixXd::Zero(m, n + m + 1);
  tab.basis.resize(m);
  for (int i = 0; i < m; ++i) {
    const double sign = b(i) < 0.0 ? -1.0 : 1.0;
    tab.t.row(i).head(n) = sign * A.row(i);
    tab.t(i, n + i) = 1.0;
    tab.t(i, n + m) = sign * b(i);
    tab.basis[i] = n + i;
  }

  // Phase one: minimize the sum of artificials.
  tab.cost = Eigen::VectorXd::Zero(n + m);
  for (int i = 0; i < m; ++i) {
    tab.cost.head(n) -= tab.t.row(i).head(n).transpose();
    tab.value += tab.rhs(i);
  }
  LpSolution out;
  tab.run(opt, n, out.iterations);
  out.infeasibility = tab.value;
  if (out.infeasibility > opt.feas_tol) {
    out.status = LpStatus::Infeasible;
    out.x = Eigen::VectorXd::Zero(n);
    return out;
  }

  // Drive remaining artificials out of the basis; drop redundant rows.
  std::vector<int> keep;
  for (int i = 0; i < m; ++i) {
    if (tab.basis[i] < n) {
      keep.push_back(i);
      continue;
    }
    int col = -1;
    for (int j = 0; j < n; ++j) {
      if (std::abs(tab.t(i, j)) > opt.pivot_tol) {
        col = j;
        break;
      }
    }
    if (col >= 0) {
      tab.pivot(i, col);
      keep.push_back(i);
    }
  }

  Tableau two;
  two.cols = n;
  two.t.resize(static_cast<Eigen::Index>(keep.size()), n + 1);
  two.basis.resize(keep.size());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    two.t.row(static_cast<Eigen::Index>(r)).head(n) = tab.t.row(keep[r]).head(n);
    two.t(static_cast<Eigen::Index>(r), n) = tab.rhs(keep[r]);
    two.basis[r] = tab.basis[keep[r]];
  }
  two.cost = c != nullptr ? *c : Eigen::VectorXd::Zero(n);
  two.value = 0.0;
  for (int r = 0; r < two.rows(); ++r) {
    const double cb = two.cost(two.basis[r]);
    if (cb == 0.0) continue;
    two.cost -= cb * two.t.row(r).head(n).transpose();
    two.value += cb * two.rhs(r);
  }

  const bool bounded = two.run(opt, n, out.iterations);
  out.x = Eigen::VectorXd::Zero(n);
  for (int r = 0; r < two.rows(); ++r) out.x(two.basis[r]) = std::max(0.0, two.rhs(r));
  out.status = bounded ? LpStatus::Optimal : LpStatus::Unbounded;
  out.objective = c != nullptr ? c->dot(out.x) : 0.0;
  return out;
}

}  // namespace

LpSolution simplex_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                         const Eigen::VectorXd& c, const SimplexOptions& options) {
  return solve(A, b, &c, options);
}

LpSolution simplex_feasible(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                            const SimplexOptions& options) {
  return solve(A, b, nullptr, options);
}

}  // namespace ralm::linalg
