#include "ralm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "ralm/error.hpp"
#include "ralm/simplex.hpp"

namespace ralm::linalg {

void VectorFamily::add_free(Vec v, int index) {
  free_sign.push_back(std::move(v));
  free_index.push_back(index);
}

void VectorFamily::add_sign(Vec v, int index) {
  sign_constrained.push_back(std::move(v));
  sign_index.push_back(index);
}

int VectorFamily::dim() const {
  int d = -1;
  auto check = [&d](const std::vector<Vec>& vs) {
    for (const Vec& v : vs) {
      if (d < 0) d = static_cast<int>(v.size());
      if (v.size() != d) throw DimensionError("vector family: dimension mismatch");
    }
  };
  check(free_sign);
  check(sign_constrained);
  return std::max(d, 0);
}

std::vector<Vec> VectorFamily::all() const {
  std::vector<Vec> out(free_sign);
  out.insert(out.end(), sign_constrained.begin(), sign_constrained.end());
  return out;
}

Eigen::MatrixXd as_columns(std::span<const Vec> vectors) {
  if (vectors.empty()) return {};
  const Eigen::Index n = vectors.front().size();
  Eigen::MatrixXd m(n, static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t k = 0; k < vectors.size(); ++k) {
    if (vectors[k].size() != n) throw DimensionError("dimension mismatch among vectors");
    m.col(static_cast<Eigen::Index>(k)) = vectors[k];
  }
  return m;
}

int numerical_rank(std::span<const Vec> vectors, double tol_rank) {
  if (vectors.empty()) return 0;
  const Eigen::MatrixXd m = as_columns(vectors);
  if (m.rows() == 0) return 0;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sigma = svd.singularValues();
  const double smax = sigma.size() > 0 ? sigma(0) : 0.0;
  if (!(smax > 0.0)) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > tol_rank * smax) ++rank;
  }
  return rank;
}

namespace {

DependenceCertificate finish(const VectorFamily& family, Vec alpha, Vec beta) {
  DependenceCertificate cert;
  double scale = 0.0;
  if (alpha.size() > 0) scale = std::max(scale, alpha.cwiseAbs().maxCoeff());
  if (beta.size() > 0) scale = std::max(scale, beta.cwiseAbs().maxCoeff());
  if (scale > 0.0) {
    alpha /= scale;
    beta /= scale;
  }
  Vec combo = Vec::Zero(family.dim());
  for (Eigen::Index i = 0; i < alpha.size(); ++i) combo += alpha(i) * family.free_sign[i];
  for (Eigen::Index j = 0; j < beta.size(); ++j) combo += beta(j) * family.sign_constrained[j];
  cert.alpha = std::move(alpha);
  cert.beta = std::move(beta);
  cert.norm_witness = scale > 0.0 ? 1.0 : 0.0;
  cert.residual = combo.norm();
  return cert;
}

std::optional<DependenceCertificate> lp_dependence(const std::vector<Vec>& v,
                                                   const std::vector<Vec>& w, int n, double tol,
                                                   double perturb) {
  const int s = static_cast<int>(v.size());
  const int m = static_cast<int>(w.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + 1, 2 * s + m);
  for (int i = 0; i < s; ++i) {
    A.col(i).head(n) = v[i];
    A.col(s + i).head(n) = -v[i];
  }
  for (int j = 0; j < m; ++j) {
    A.col(2 * s + j).head(n) = w[j];
    A(n, 2 * s + j) = 1.0 + perturb * (j + 1);
  }
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
  b(n) = 1.0;
  SimplexOptions opt;
  opt.feas_tol = tol;
  const LpSolution sol = simplex_feasible(A, b, opt);
  if (sol.status == LpStatus::Infeasible) return std::nullopt;
  DependenceCertificate raw;
  raw.alpha = sol.x.head(s) - sol.x.segment(s, s);
  raw.beta = sol.x.tail(m);
  return raw;
}

}  // namespace

std::optional<DependenceCertificate> positive_linear_dependence(const VectorFamily& family,
                                                                double tol) {
  const int n = family.dim();
  const int s = static_cast<int>(family.free_sign.size());
  const int m = static_cast<int>(family.sign_constrained.size());
  if (s + m == 0) return std::nullopt;

  // A zero vector is dependent on its own.
  for (int i = 0; i < s; ++i) {
    if (family.free_sign[i].norm() <= tol) {
      Vec alpha = Vec::Zero(s);
      alpha(i) = 1.0;
      return finish(family, alpha, Vec::Zero(m));
    }
  }
  for (int j = 0; j < m; ++j) {
    if (family.sign_constrained[j].norm() <= tol) {
      Vec beta = Vec::Zero(m);
      beta(j) = 1.0;
      return finish(family, Vec::Zero(s), beta);
    }
  }

  std::vector<Vec> v(s), w(m);
  for (int i = 0; i < s; ++i) v[i] = family.free_sign[i].normalized();
  for (int j = 0; j < m; ++j) w[j] = family.sign_constrained[j].normalized();

  if (s > 0) {
    const Eigen::MatrixXd V = as_columns(v);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(V, Eigen::ComputeFullV);
    const auto& sigma = svd.singularValues();
    const bool deficient = s > n || sigma(sigma.size() - 1) <= tol;
    if (deficient) {
      Vec alpha = svd.matrixV().col(s - 1);
      for (int i = 0; i < s; ++i) alpha(i) /= family.free_sign[i].norm();
      return finish(family, alpha, Vec::Zero(m));
    }
  }
  if (m == 0) return std::nullopt;

  std::optional<DependenceCertificate> raw;
  try {
    raw = lp_dependence(v, w, n, tol, 0.0);
  } catch (const SimplexError&) {
    raw = lp_dependence(v, w, n, tol, 1e-7);
  }
  if (!raw) return std::nullopt;
  for (int i = 0; i < s; ++i) raw->alpha(i) /= family.free_sign[i].norm();
  for (int j = 0; j < m; ++j) raw->beta(j) /= family.sign_constrained[j].norm();
  return finish(family, raw->alpha, raw->beta);
}

CaratheodoryResult caratheodory_reduce(std::span<const Vec> u, std::span<const Vec> v,
                                       const Vec& alpha, const Vec& beta, const Vec& x,
                                       double tol) {
  const auto s = static_cast<Eigen::Index>(u.size());
  const auto m = static_cast<Eigen::Index>(v.size());
  if (alpha.size() != s || beta.size() != m) {
    throw DimensionError("caratheodory_reduce: coefficient count mismatch");
  }
  for (const Vec& vec : u) {
    if (vec.size() != x.size()) throw DimensionError("caratheodory_reduce: dimension mismatch");
  }
  for (const Vec& vec : v) {
    if (vec.size() != x.size()) throw DimensionError("caratheodory_reduce: dimension mismatch");
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    if (beta(j) == 0.0) throw PreconditionError("caratheodory_reduce: beta has a zero entry");
  }
  if (numerical_rank(u, 1e-8) != static_cast<int>(s)) {
    throw PreconditionError("caratheodory_reduce: u is linearly dependent");
  }

  Vec recon = Vec::Zero(x.size());
  double scale = x.norm();
  for (Eigen::Index i = 0; i < s; ++i) {
    recon += alpha(i) * u[i];
    scale = std::max(scale, std::abs(alpha(i)) * u[i].norm());
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    recon += beta(j) * v[j];
    scale = std::max(scale, std::abs(beta(j)) * v[j].norm());
  }
  if ((recon - x).norm() > tol * std::max(1.0, scale)) {
    throw PreconditionError("caratheodory_reduce: x is not reconstructed by the inputs");
  }

  std::vector<int> active(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) active[j] = j;
  Vec a = alpha;
  Vec b = beta;

  auto family = [&]() {
    std::vector<Vec> cols(u.begin(), u.end());
    for (int j : active) cols.push_back(v[j]);
    return cols;
  };

  while (true) {
    const std::vector<Vec> cols = family();
    if (numerical_rank(cols, 1e-8) == static_cast<int>(cols.size())) break;

    const Eigen::MatrixXd M = as_columns(cols);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
    Vec z = svd.matrixV().col(M.cols() - 1);

    // Shift along z until the first v-coefficient hits zero.
    auto pick = [&](const Vec& dir, double& t_best) {
      int best = -1;
      t_best = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < active.size(); ++k) {
        const double bk = b(active[k]);
        const double zk = dir(s + static_cast<Eigen::Index>(k));
        if (zk == 0.0 || (zk > 0.0) != (bk > 0.0)) continue;
        const double t = bk / zk;
        if (t < t_best) {
          t_best = t;
          best = static_cast<int>(k);
        }
      }
      return best;
    };
    double t_pos = 0.0;
    double t_neg = 0.0;
    const int k_pos = pick(z, t_pos);
    const int k_neg = pick(-z, t_neg);
    int k = k_pos;
    double t = t_pos;
    if (k_pos < 0 || (k_neg >= 0 && t_neg < t_pos)) {
      z = -z;
      k = k_neg;
      t = t_neg;
    }
    if (k < 0) throw PreconditionError("caratheodory_reduce: null vector misses every v");

    for (Eigen::Index i = 0; i < s; ++i) a(i) -= t * z(i);
    for (std::size_t q = 0; q < active.size(); ++q) {
      b(active[q]) -= t * z(s + static_cast<Eigen::Index>(q));
    }
    const int removed = active[static_cast<std::size_t>(k)];
    std::vector<int> next;
    for (int j : active) {
      if (j == removed) continue;
      // Ties can zero several coefficients at once.
      if (std::abs(b(j)) <= 1e-14 * std::abs(beta(j))) continue;
      next.push_back(j);
    }
    active = std::move(next);
  }

  CaratheodoryResult out;
  out.subset = active;
  out.alpha = a;
  out.beta.resize(static_cast<Eigen::Index>(active.size()));
  for (std::size_t q = 0; q < active.size(); ++q) {
    out.beta(static_cast<Eigen::Index>(q)) = b(active[q]);
  }

  // Least-squares polish on the final independent family; keep it only if
  // the sign pattern survives.
  const std::vector<Vec> cols = family();
  if (!cols.empty()) {
    const Eigen::MatrixXd M = as_columns(cols);
    const Vec c = M.colPivHouseholderQr().solve(x);
    bool signs_ok = true;
    for (std::size_t q = 0; q < active.size(); ++q) {
      const double cq = c(s + static_cast<Eigen::Index>(q));
      if (cq * beta(active[q]) <= 0.0) signs_ok = false;
    }
    Vec current(M.cols());
    current << out.alpha, out.beta;
    if (signs_ok && (M * c - x).norm() <= (M * current - x).norm()) {
      out.alpha = c.head(s);
      out.beta = c.tail(static_cast<Eigen::Index>(active.size()));
    }
  }
  return out;
}

std::vector<int> select_basis_subset(std::span<const Vec> vectors, double tol_rank) {
  std::vector<int> keep;
  std::vector<Vec> kept;
  for (std::size_t k = 0; k < vectors.size(); ++k) {
    kept.push_back(vectors[k]);
    if (numerical_rank(kept, tol_rank) == static_cast<int>(kept.size())) {
      keep.push_back(static_cast<int>(k));
    } else {
      kept.pop_back();
    }
  }
  return keep;
}

}  // namespace ralm::linalg
