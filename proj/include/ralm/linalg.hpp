#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace ralm::linalg {

using Vec = Eigen::VectorXd;

/// Two multisets of vectors: `free_sign` (V, coefficients of any sign) and
/// `sign_constrained` (W, nonnegative coefficients). Each vector remembers the
/// constraint it came from.
struct VectorFamily {
  std::vector<Vec> free_sign;
  std::vector<Vec> sign_constrained;
  std::vector<int> free_index;
  std::vector<int> sign_index;

  void add_free(Vec v, int index = -1);
  void add_sign(Vec v, int index = -1);

  std::size_t size() const { return free_sign.size() + sign_constrained.size(); }
  bool empty() const { return size() == 0; }
  /// Common dimension; 0 for an empty family. Throws DimensionError on mismatch.
  int dim() const;
  /// All vectors, free-sign first.
  std::vector<Vec> all() const;
};

/// (alpha, beta) with beta >= 0 and sum alpha_i v_i + sum beta_j w_j ~ 0.
struct DependenceCertificate {
  Vec alpha;
  Vec beta;
  /// ||(alpha, beta)||_inf
  double norm_witness = 0.0;
  /// ||sum alpha_i v_i + sum beta_j w_j||_2
  double residual = 0.0;
};

/// Columns are the given vectors. Throws DimensionError on mismatch.
Eigen::MatrixXd as_columns(std::span<const Vec> vectors);

/// Number of singular values above tol_rank * sigma_max.
int numerical_rank(std::span<const Vec> vectors, double tol_rank = 1e-8);

/**
 * Decides positive-linear dependence of (V, W).
 *
 * V is tested for linear dependence by rank first. Otherwise a phase-one LP
 * looks for beta >= 0 with sum(beta) = 1 and free alpha = alpha+ - alpha-
 * such that the combination vanishes; vectors are scaled to unit length
 * beforehand and the certificate is mapped back to the original scaling.
 * Returns nullopt when the pair is positive-linearly independent.
 */
std::optional<DependenceCertificate> positive_linear_dependence(const VectorFamily& family,
                                                                double tol = 1e-9);

struct CaratheodoryResult {
  /// Surviving indices into `v`, increasing.
  std::vector<int> subset;
  Vec alpha;
  /// Coefficients aligned with `subset`.
  Vec beta;
};

/**
 * Rewrites x = sum alpha_i u_i + sum beta_j v_j over a subset J of the v's such
 * that the new coefficients keep the sign of the old ones and
 * {u_i} U {v_j : j in J} is linearly independent.
 *
 * Each round finds a null combination of the current family and shifts along
 * it until the first v-coefficient reaches zero (smallest shift wins, lowest
 * index on ties).
 */
CaratheodoryResult caratheodory_reduce(std::span<const Vec> u, std::span<const Vec> v,
                                       const Vec& alpha, const Vec& beta, const Vec& x,
                                       double tol = 1e-9);

/// Greedy in index order: keeps a vector iff it raises the numerical rank of
/// the vectors kept so far. Returned indices are 0-based and increasing.
std::vector<int> select_basis_subset(std::span<const Vec> vectors, double tol_rank = 1e-8);

}  // namespace ralm::linalg
