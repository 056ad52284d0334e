#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace ralm {

using Vec = Eigen::VectorXd;

/// A location on a manifold in ambient coordinates.
struct Point {
  Vec coords;
};

/// A tangent vector at `base`, in ambient coordinates.
struct Tangent {
  Point base;
  Vec vec;

  double norm() const { return vec.norm(); }
};

/**
 * Euclidean space, the unit sphere, or a product of those, all embedded in
 * their ambient coordinates. Immutable after construction.
 */
class Manifold {
 public:
  enum class Kind { Euclidean, Sphere, Product };

  static Manifold euclidean(int n);
  /// Unit sphere in R^ambient_dim (intrinsic dimension ambient_dim - 1).
  static Manifold sphere(int ambient_dim);
  static Manifold product(std::vector<Manifold> factors);
  /// Parses `euclidean:<n>`, `sphere:<ambient_dim>` or `product:[<spec>,...]`.
  static Manifold parse(std::string_view spec);

  Kind kind() const { return kind_; }
  int ambient_dim() const { return ambient_dim_; }
  int intrinsic_dim() const;
  /// Lower bound on the injectivity radius; +inf for Euclidean space.
  double injectivity_radius() const;
  const std::vector<Manifold>& factors() const { return factors_; }
  std::string to_string() const;

  /// Builds a point, renormalizing sphere blocks. Throws ManifoldError for a
  /// zero sphere block or a dimension mismatch.
  Point make_point(const Vec& coords) const;
  /// True when `coords` satisfies the manifold invariant within `tol`.
  bool contains(const Vec& coords, double tol = 1e-10) const;

  double inner(const Tangent& u, const Tangent& v) const;
  Point exp(const Tangent& v) const;
  /// Inverse of exp inside the injectivity radius. Throws ManifoldError for
  /// antipodal points on a sphere.
  Tangent log(const Point& p, const Point& q) const;
  double dist(const Point& p, const Point& q) const;
  Tangent project_tangent(const Point& p, const Vec& ambient) const;
  Tangent zero_tangent(const Point& p) const;

  /// `count` points exp_p(r u) with u uniform on the unit tangent sphere and
  /// r uniform in (0, eps). Deterministic for a given seed.
  std::vector<Point> sample_ball(const Point& p, double eps, int count,
                                 std::uint64_t seed) const;

 private:
  Manifold(Kind kind, int ambient_dim, std::vector<Manifold> factors = {});

  // Each of these works on one factor block.
  Vec block_exp(const Vec& p, const Vec& v) const;
  Vec block_log(const Vec& p, const Vec& q) const;
  double block_dist(const Vec& p, const Vec& q) const;
  Vec block_project(const Vec& p, const Vec& a) const;

  Kind kind_;
  int ambient_dim_;
  std::vector<Manifold> factors_;
};

}  // namespace ralm
