#include "ralm/manifold.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "ralm/error.hpp"

namespace ralm {

namespace {

constexpr double kSeriesCutoff = 1e-8;
constexpr double kAntipodalCutoff = 1e-8;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

int parse_dim(std::string_view text, std::string_view spec) {
  text = trim(text);
  int n = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ManifoldError("bad dimension in manifold spec '" + std::string(spec) + "'");
  }
  return n;
}

}  // namespace

Manifold::Manifold(Kind kind, int ambient_dim, std::vector<Manifold> factors)
    : kind_(kind), ambient_dim_(ambient_dim), factors_(std::move(factors)) {}

Manifold Manifold::euclidean(int n) {
  if (n < 1) throw ManifoldError("euclidean dimension must be >= 1");
  return Manifold(Kind::Euclidean, n);
}

Manifold Manifold::sphere(int ambient_dim) {
  if (ambient_dim < 2) throw ManifoldError("sphere ambient dimension must be >= 2");
  return Manifold(Kind::Sphere, ambient_dim);
}

Manifold Manifold::product(std::vector<Manifold> factors) {
  if (factors.empty()) throw ManifoldError("product needs at least one factor");
  int n = 0;
  for (const Manifold& f : factors) n += f.ambient_dim();
  return Manifold(Kind::Product, n, std::move(factors));
}

Manifold Manifold::parse(std::string_view spec) {
  const std::string_view s = trim(spec);
  const auto colon = s.find(':');
  if (colon == std::string_view::npos) {
    throw ManifoldError("manifold spec '" + std::string(spec) + "' lacks ':'");
  }
  const std::string_view kind = trim(s.substr(0, colon));
  const std::string_view rest = trim(s.substr(colon + 1));
  if (kind == "euclidean") return euclidean(parse_dim(rest, spec));
  if (kind == "sphere") return sphere(parse_dim(rest, spec));
  if (kind != "product") {
    throw ManifoldError("unknown manifold kind '" + std::string(kind) + "'");
  }
  if (rest.size() < 2 || rest.front() != '[' || rest.back() != ']') {
    throw ManifoldError("product spec must be bracketed: '" + std::string(spec) + "'");
  }
  const std::string_view body = rest.substr(1, rest.size() - 2);
  std::vector<Manifold> factors;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= body.size(); ++i) {
    if (i == body.size() || (body[i] == ',' && depth == 0)) {
      factors.push_back(parse(body.substr(start, i - start)));
      start = i + 1;
    } else if (body[i] == '[') {
      ++depth;
    } else if (body[i] == ']') {
      --depth;
    }
  }
  return product(std::move(factors));
}

int Manifold::intrinsic_dim() const {
  switch (kind_) {
    case Kind::Euclidean:
      return ambient_dim_;
    case Kind::Sphere:
      return ambient_dim_ - 1;
    case Kind::Product: {
      int n = 0;
      for (const Manifold& f : factors_) n += f.intrinsic_dim();
      return n;
    }
  }
  return 0;
}

double Manifold::injectivity_radius() const {
  switch (kind_) {
    case Kind::Euclidean:
      return std::numeric_limits<double>::infinity();
    case Kind::Sphere:
      return std::numbers::pi;
    case Kind::Product: {
      double r = std::numeric_limits<double>::infinity();
      for (const Manifold& f : factors_) r = std::min(r, f.injectivity_radius());
      return r;
    }
  }
  return 0.0;
}

std::string Manifold::to_string() const {
  switch (kind_) {
    case Kind::Euclidean:
      return "euclidean:" + std::to_string(ambient_dim_);
    case Kind::Sphere:
      return "sphere:" + std::to_string(ambient_dim_);
    case Kind::Product: {
      std::string out = "product:[";
      for (std::size_t i = 0; i < factors_.size(); ++i) {
        if (i > 0) out += ",";
        out += factors_[i].to_string();
      }
      return out + "]";
    }
  }
  return {};
}

Point Manifold::make_point(const Vec& coords) const {
  if (coords.size() != ambient_dim_) {
    throw ManifoldError("point has " + std::to_string(coords.size()) + " coordinates, expected " +
                        std::to_string(ambient_dim_));
  }
  switch (kind_) {
    case Kind::Euclidean:
      return Point{coords};
    case Kind::Sphere: {
      const double n = coords.norm();
      if (!(n > 0.0) || !std::isfinite(n)) throw ManifoldError("cannot normalize point onto sphere");
      return Point{coords / n};
    }
    case Kind::Product: {
      Vec out(ambient_dim_);
      Eigen::Index off = 0;
      for (const Manifold& f : factors_) {
        out.segment(off, f.ambient_dim()) = f.make_point(coords.segment(off, f.ambient_dim())).coords;
        off += f.ambient_dim();
      }
      return Point{out};
    }
  }
  return Point{coords};
}

bool Manifold::contains(const Vec& coords, double tol) const {
  if (coords.size() != ambient_dim_ || !coords.allFinite()) return false;
  switch (kind_) {
    case Kind::Euclidean:
      return true;
    case Kind::Sphere:
      return std::abs(coords.norm() - 1.0) <= tol;
    case Kind::Product: {
      Eigen::Index off = 0;
      for (const Manifold& f : factors_) {
        if (!f.contains(coords.segment(off, f.ambient_dim()), tol)) return false;
        off += f.ambient_dim();
      }
      return true;
    }
  }
  return false;
}

double Manifold::inner(const Tangent& u, const Tangent& v) const {
  if (u.vec.size() != ambient_dim_ || v.vec.size() != ambient_dim_ ||
      u.base.coords.size() != ambient_dim_ || v.base.coords.size() != ambient_dim_) {
    throw ManifoldError("inner: dimension mismatch");
  }
  if ((u.base.coords - v.base.coords).lpNorm<Eigen::Infinity>() > 1e-10) {
    throw ManifoldError("inner: tangent vectors live at different base points");
  }
  return u.vec.dot(v.vec);
}

Vec Manifold::block_exp(const Vec& p, const Vec& v) const {
  switch (kind_) {
    case Kind::Euclidean:
      return p + v;
    case Kind::Sphere: {
      const double t = v.norm();
      if (t < kSeriesCutoff) return (p + v).normalized();
      return (std::cos(t) * p + (std::sin(t) / t) * v).normalized();
    }
    case Kind::Product: {
      Vec out(ambient_dim_);
      Eigen::Index off = 0;
      for (const Manifold& f : factors_) {
        const auto n = f.ambient_dim();
        out.segment(off, n) = f.block_exp(p.segment(off, n), v.segment(off, n));
        off += n;
      }
      return out;
    }
  }
  return p;
}

Vec Manifold::block_log(const Vec& p, const Vec& q) const {
  switch (kind_) {
    case Kind::Euclidean:
      return q - p;
    case Kind::Sphere: {
      const double c = std::clamp(p.dot(q), -1.0, 1.0);
      if (c <= -1.0 + kAntipodalCutoff) throw ManifoldError("log: antipodal points on the sphere");
      const Vec w = q - c * p;
      const double nw = w.norm();
      if (nw == 0.0) return Vec::Zero(p.size());
      const double theta = std::atan2(nw, c);
      return (theta / nw) * w;
    }
    case Kind::Product: {
      Vec out(ambient_dim_);
      Eigen::Index off = 0;
      for (const Manifold& f : factors_) {
        const auto n = f.ambient_dim();
        out.segment(off, n) = f.block_log(p.segment(off, n), q.segment(off, n));
        off += n;
      }
      return out;
    }
  }
  return q - p;
}

double Manifold::block_dist(const Vec& p, const Vec& q) const {
  switch (kind_) {
    case Kind::Euclidean:
      return (p - q).norm();
    case Kind::Sphere: {
      const double c = std::clamp(p.dot(q), -1.0, 1.0);
      return std::atan2((q - c * p).norm(), c);
    }
    case Kind::Product: {
      double sq = 0.0;
      Eigen::Index off = 0;
      for (const Manifold& f : factors_) {
        const auto n = f.ambient_dim();
        const double d = f.block_dist(p.segment(off, n), q.segment(off, n));
        sq += d * d;
        off += n;
      }
      return std::sqrt(sq);
    }
  }
  return 0.0;
}

Vec Manifold::block_project(const Vec& p, const Vec& a) const {
  switch (kind_) {
    case Kind::Euclidean:
      return a;
    case Kind::Sphere:
      return a - p.dot(a) * p;
    case Kind::Product: {
      Vec out(ambient_dim_);
      Eigen::Index off = 0;
      for (const Manifold& f : factors_) {
        const auto n = f.ambient_dim();
        out.segment(off, n) = f.block_project(p.segment(off, n), a.segment(off, n));
        off += n;
      }
      return out;
    }
  }
  return a;
}

Point Manifold::exp(const Tangent& v) const {
  if (v.vec.size() != ambient_dim_) throw ManifoldError("exp: dimension mismatch");
  return Point{block_exp(v.base.coords, v.vec)};
}

Tangent Manifold::log(const Point& p, const Point& q) const {
  if (p.coords.size() != ambient_dim_ || q.coords.size() != ambient_dim_) {
    throw ManifoldError("log: dimension mismatch");
  }
  return Tangent{p, block_log(p.coords, q.coords)};
}

double Manifold::dist(const Point& p, const Point& q) const {
  if (p.coords.size() != ambient_dim_ || q.coords.size() != ambient_dim_) {
    throw ManifoldError("dist: dimension mismatch");
  }
  return block_dist(p.coords, q.coords);
}

Tangent Manifold::project_tangent(const Point& p, const Vec& ambient) const {
  if (p.coords.size() != ambient_dim_ || ambient.size() != ambient_dim_) {
    throw ManifoldError("project_tangent: dimension mismatch");
  }
  return Tangent{p, block_project(p.coords, ambient)};
}

Tangent Manifold::zero_tangent(const Point& p) const {
  return Tangent{p, Vec::Zero(ambient_dim_)};
}

std::vector<Point> Manifold::sample_ball(const Point& p, double eps, int count,
                                         std::uint64_t seed) const {
  if (!(eps > 0.0) || !(eps < injectivity_radius())) {
    throw ManifoldError("sample_ball: eps must lie in (0, injectivity radius)");
  }
  if (count < 0) throw ManifoldError("sample_ball: negative sample count");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> radius(0.0, eps);

  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(count));
  while (static_cast<int>(out.size()) < count) {
    Vec g(ambient_dim_);
    for (Eigen::Index i = 0; i < ambient_dim_; ++i) g(i) = gauss(rng);
    const Vec u = block_project(p.coords, g);
    const double nu = u.norm();
    const double r = radius(rng);
    if (nu < 1e-12 || r <= 0.0) continue;
    out.push_back(Point{block_exp(p.coords, (r / nu) * u)});
  }
  return out;
}

}  // namespace ralm
