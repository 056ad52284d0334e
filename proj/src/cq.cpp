#include "ralm/cq.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/SVD>

#include "ralm/error.hpp"
#include "ralm/simplex.hpp"

namespace ralm::cq {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds:
      return "Holds";
    case Verdict::Fails:
      return "Fails";
    case Verdict::EvidenceHolds:
      return "EvidenceHolds";
    case Verdict::EvidenceFails:
      return "EvidenceFails";
  }
  return "?";
}

const std::vector<Condition>& all_conditions() {
  static const std::vector<Condition> all = {Condition::LICQ,  Condition::MFCQ, Condition::CRCQ,
                                             Condition::RCRCQ, Condition::CPLD, Condition::RCPLD,
                                             Condition::CRSC,  Condition::QN};
  return all;
}

std::string to_string(Condition c) {
  switch (c) {
    case Condition::LICQ:
      return "LICQ";
    case Condition::MFCQ:
      return "MFCQ";
    case Condition::CRCQ:
      return "CRCQ";
    case Condition::RCRCQ:
      return "RCRCQ";
    case Condition::CPLD:
      return "CPLD";
    case Condition::RCPLD:
      return "RCPLD";
    case Condition::CRSC:
      return "CRSC";
    case Condition::QN:
      return "QN";
  }
  return "?";
}

Condition condition_from_string(const std::string& name) {
  for (Condition c : all_conditions()) {
    if (to_string(c) == name) return c;
  }
  throw PreconditionError("unknown condition '" + name + "'");
}

const ConditionReport& CqReport::get(Condition c) const {
  for (const auto& e : entries) {
    if (e.condition == c) return e;
  }
  throw PreconditionError("report has no entry for " + to_string(c));
}

namespace {

struct Grads {
  Point point;
  Vec h;
  Vec g;
  std::vector<Vec> gh;
  std::vector<Vec> gg;
};

Grads grads_at(const Problem& prob, const Point& q, double zero_tol) {
  const FirstOrder fo = evaluate(prob, q);
  Grads out{q, fo.h, fo.g, {}, {}};
  const auto clean = [&](const Tangent& t) {
    return t.norm() <= zero_tol ? Vec(Vec::Zero(t.vec.size())) : t.vec;
  };
  for (const Tangent& t : fo.grad_h) out.gh.push_back(clean(t));
  for (const Tangent& t : fo.grad_g) out.gg.push_back(clean(t));
  return out;
}

std::vector<int> all_equalities(const Problem& prob) {
  std::vector<int> I(static_cast<std::size_t>(prob.num_equalities()));
  for (int i = 0; i < prob.num_equalities(); ++i) I[static_cast<std::size_t>(i)] = i;
  return I;
}

std::vector<Vec> pick(const Grads& d, const std::vector<int>& I, const std::vector<int>& J) {
  std::vector<Vec> out;
  out.reserve(I.size() + J.size());
  for (int i : I) out.push_back(d.gh[static_cast<std::size_t>(i)]);
  for (int j : J) out.push_back(d.gg[static_cast<std::size_t>(j)]);
  return out;
}

linalg::VectorFamily family_of(const Grads& d, const std::vector<int>& I,
                               const std::vector<int>& J) {
  linalg::VectorFamily fam;
  for (int i : I) fam.add_free(d.gh[static_cast<std::size_t>(i)], i);
  for (int j : J) fam.add_sign(d.gg[static_cast<std::size_t>(j)], j);
  return fam;
}

int rank_of(const Grads& d, const std::vector<int>& I, const std::vector<int>& J, double tol) {
  const std::vector<Vec> vs = pick(d, I, J);
  return linalg::numerical_rank(vs, tol);
}

/// A full-rank family is never reported as positively dependent, whatever the
/// LP says near its threshold.
std::optional<linalg::DependenceCertificate> positive_dependence(const Grads& d,
                                                                 const std::vector<int>& I,
                                                                 const std::vector<int>& J,
                                                                 const CqConfig& cfg) {
  if (I.empty() && J.empty()) return std::nullopt;
  if (rank_of(d, I, J, cfg.tol_rank) == static_cast<int>(I.size() + J.size())) return std::nullopt;
  return linalg::positive_linear_dependence(family_of(d, I, J), cfg.tol_lp);
}

struct Subset {
  std::vector<int> I;
  std::vector<int> J;
};

/// Every I' subset of `I` (or I itself when `fixed_I`) paired with every J'
/// subset of `J`.
std::vector<Subset> subsets(const std::vector<int>& I, const std::vector<int>& J, bool fixed_I) {
  const std::size_t bi = fixed_I ? 0 : I.size();
  const std::size_t bits = bi + J.size();
  std::vector<Subset> out;
  out.reserve(std::size_t{1} << bits);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << bits); ++mask) {
    Subset s;
    if (fixed_I) {
      s.I = I;
    } else {
      for (std::size_t b = 0; b < bi; ++b) {
        if (mask >> b & 1U) s.I.push_back(I[b]);
      }
    }
    for (std::size_t b = 0; b < J.size(); ++b) {
      if (mask >> (bi + b) & 1U) s.J.push_back(J[b]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

class Context {
 public:
  Context(const Problem& prob, const Point& p, const CqConfig& cfg)
      : prob_(prob), cfg_(cfg), at_p_(grads_at(prob, p, cfg.zero_tol)) {
    for (int j = 0; j < prob.num_inequalities(); ++j) {
      if (std::abs(at_p_.g(j)) <= cfg.tol_act) active_.push_back(j);
    }
  }

  const Problem& prob() const { return prob_; }
  const CqConfig& cfg() const { return cfg_; }
  const Grads& at_p() const { return at_p_; }
  const std::vector<int>& active() const { return active_; }

  void guard() const {
    const int bits = prob_.num_equalities() + static_cast<int>(active_.size());
    if (bits > cfg_.max_subset_bits) {
      throw PreconditionError("subset enumeration over " + std::to_string(bits) +
                              " constraints exceeds the limit of " +
                              std::to_string(cfg_.max_subset_bits));
    }
  }

  void require_feasible() const {
    const double v = max_violation(ConstraintValues{at_p_.h, at_p_.g});
    if (v > cfg_.tol_act) {
      throw PreconditionError("point violates the constraints by " + std::to_string(v));
    }
  }

  const std::vector<Grads>& samples() {
    if (!samples_) {
      if (cfg_.samples < 1) throw PreconditionError("need at least one sample");
      std::vector<Grads> out;
      for (const Point& q :
           prob_.manifold.sample_ball(at_p_.point, cfg_.eps, cfg_.samples, cfg_.seed)) {
        out.push_back(grads_at(prob_, q, cfg_.zero_tol));
      }
      samples_ = std::move(out);
    }
    return *samples_;
  }

  const std::vector<int>& j_minus() {
    if (!j_minus_) j_minus_ = compute_j_minus();
    return *j_minus_;
  }

  ConditionReport base(Condition c, bool sampled) {
    ConditionReport r;
    r.condition = c;
    if (sampled) {
      r.sample_count = cfg_.samples;
      r.eps = cfg_.eps;
      r.seed = cfg_.seed;
    }
    return r;
  }

 private:
  std::vector<int> compute_j_minus() const {
    const int n = prob_.manifold.ambient_dim();
    std::vector<Vec> cols;
    auto add = [&](const Vec& v, double sign) {
      const double nv = v.norm();
      if (nv > 0.0) cols.push_back(sign * v / nv);
    };
    for (const Vec& v : at_p_.gh) {
      add(v, 1.0);
      add(v, -1.0);
    }
    for (int j : active_) add(at_p_.gg[static_cast<std::size_t>(j)], 1.0);
    Eigen::MatrixXd A(n, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) A.col(static_cast<Eigen::Index>(c)) = cols[c];

    linalg::SimplexOptions opt;
    opt.feas_tol = cfg_.tol_lp;
    std::vector<int> out;
    for (int j : active_) {
      const Vec& gj = at_p_.gg[static_cast<std::size_t>(j)];
      const double nj = gj.norm();
      if (nj == 0.0) {
        out.push_back(j);
        continue;
      }
      if (cols.empty()) continue;
      const Vec b = -gj / nj;
      if (linalg::simplex_feasible(A, b, opt).status == linalg::LpStatus::Optimal) out.push_back(j);
    }
    return out;
  }

  const Problem& prob_;
  CqConfig cfg_;
  Grads at_p_;
  std::vector<int> active_;
  std::optional<std::vector<Grads>> samples_;
  std::optional<std::vector<int>> j_minus_;
};

void fail_at(ConditionReport& r, const Subset& s, const Grads& q, int rank_p, int rank_q,
             std::string note) {
  r.verdict = Verdict::EvidenceFails;
  r.witness.I = s.I;
  r.witness.J = s.J;
  r.witness.sample = q.point.coords;
  r.witness.rank_at_p = rank_p;
  r.witness.rank_at_q = rank_q;
  r.witness.note = std::move(note);
}

/// Rank of each family must match its rank at p on every sample.
bool rank_constancy(Context& ctx, const std::vector<Subset>& fams, ConditionReport& r) {
  const double tol = ctx.cfg().tol_rank;
  std::vector<int> rank_p;
  rank_p.reserve(fams.size());
  for (const Subset& s : fams) rank_p.push_back(rank_of(ctx.at_p(), s.I, s.J, tol));
  for (const Grads& q : ctx.samples()) {
    for (std::size_t f = 0; f < fams.size(); ++f) {
      const int rq = rank_of(q, fams[f].I, fams[f].J, tol);
      if (rq != rank_p[f]) {
        fail_at(r, fams[f], q, rank_p[f], rq, "rank changes near p");
        return false;
      }
    }
  }
  return true;
}

/// Families dependent at p (positively, or linearly when `positive` is false)
/// must stay linearly dependent on every sample.
bool dependence_persists(Context& ctx, const std::vector<Subset>& fams, bool positive,
                         ConditionReport& r) {
  const double tol = ctx.cfg().tol_rank;
  std::vector<std::size_t> dependent;
  std::vector<int> rank_p(fams.size(), -1);
  for (std::size_t f = 0; f < fams.size(); ++f) {
    const Subset& s = fams[f];
    const int size = static_cast<int>(s.I.size() + s.J.size());
    if (size == 0) continue;
    rank_p[f] = rank_of(ctx.at_p(), s.I, s.J, tol);
    const bool dep = positive ? positive_dependence(ctx.at_p(), s.I, s.J, ctx.cfg()).has_value()
                              : rank_p[f] < size;
    if (dep) dependent.push_back(f);
  }
  for (const Grads& q : ctx.samples()) {
    for (std::size_t f : dependent) {
      const Subset& s = fams[f];
      const int rq = rank_of(q, s.I, s.J, tol);
      if (rq == static_cast<int>(s.I.size() + s.J.size())) {
        fail_at(r, s, q, rank_p[f], rq, "dependent family becomes independent near p");
        if (positive) r.witness.certificate = positive_dependence(ctx.at_p(), s.I, s.J, ctx.cfg());
        return false;
      }
    }
  }
  return true;
}

ConditionReport licq(Context& ctx) {
  ConditionReport r = ctx.base(Condition::LICQ, false);
  const std::vector<int> I = all_equalities(ctx.prob());
  const int size = static_cast<int>(I.size() + ctx.active().size());
  const int rank = rank_of(ctx.at_p(), I, ctx.active(), ctx.cfg().tol_rank);
  r.witness.rank_at_p = rank;
  r.verdict = rank == size ? Verdict::Holds : Verdict::Fails;
  if (r.verdict == Verdict::Fails) {
    r.witness.I = I;
    r.witness.J = ctx.active();
    r.witness.note = "rank " + std::to_string(rank) + " < " + std::to_string(size);
  }
  return r;
}

ConditionReport mfcq(Context& ctx) {
  ConditionReport r = ctx.base(Condition::MFCQ, false);
  const std::vector<int> I = all_equalities(ctx.prob());
  r.witness.rank_at_p = rank_of(ctx.at_p(), I, ctx.active(), ctx.cfg().tol_rank);
  auto cert = positive_dependence(ctx.at_p(), I, ctx.active(), ctx.cfg());
  if (!cert) {
    r.verdict = Verdict::Holds;
    return r;
  }
  r.verdict = Verdict::Fails;
  // Report only the vectors that carry weight.
  const double cut = 1e-9 * cert->norm_witness;
  for (std::size_t i = 0; i < I.size(); ++i) {
    if (std::abs(cert->alpha(static_cast<Eigen::Index>(i))) > cut) r.witness.I.push_back(I[i]);
  }
  for (std::size_t j = 0; j < ctx.active().size(); ++j) {
    if (cert->beta(static_cast<Eigen::Index>(j)) > cut) r.witness.J.push_back(ctx.active()[j]);
  }
  r.witness.certificate = std::move(cert);
  r.witness.note = "positive-linearly dependent active gradients";
  return r;
}

ConditionReport neighborhood(Context& ctx, Condition which) {
  ctx.guard();
  ConditionReport r = ctx.base(which, true);
  r.verdict = Verdict::EvidenceHolds;
  const std::vector<int> all_I = all_equalities(ctx.prob());
  const auto& A = ctx.active();
  switch (which) {
    case Condition::CRCQ:
      rank_constancy(ctx, subsets(all_I, A, false), r);
      break;
    case Condition::RCRCQ:
      rank_constancy(ctx, subsets(all_I, A, true), r);
      break;
    case Condition::CPLD:
      dependence_persists(ctx, subsets(all_I, A, false), true, r);
      break;
    case Condition::RCPLD: {
      if (!rank_constancy(ctx, {Subset{all_I, {}}}, r)) break;
      const std::vector<Vec> eq = pick(ctx.at_p(), all_I, {});
      const std::vector<int> K = linalg::select_basis_subset(eq, ctx.cfg().tol_rank);
      dependence_persists(ctx, subsets(K, A, true), true, r);
      break;
    }
    case Condition::CRSC:
      rank_constancy(ctx, {Subset{all_I, ctx.j_minus()}}, r);
      break;
    default:
      throw PreconditionError(to_string(which) + " is not a neighborhood condition");
  }
  return r;
}

ConditionReport rcrcq_basis(Context& ctx) {
  ctx.guard();
  ConditionReport r = ctx.base(Condition::RCRCQ, true);
  r.verdict = Verdict::EvidenceHolds;
  const std::vector<int> all_I = all_equalities(ctx.prob());
  if (!rank_constancy(ctx, {Subset{all_I, {}}}, r)) return r;
  const std::vector<Vec> eq = pick(ctx.at_p(), all_I, {});
  const std::vector<int> K = linalg::select_basis_subset(eq, ctx.cfg().tol_rank);
  dependence_persists(ctx, subsets(K, ctx.active(), true), false, r);
  return r;
}

struct Column {
  int constraint;
  int sign;  // +1 / -1 for equalities, 0 for inequalities
  Vec v;
};

std::vector<Multipliers> vertices(Context& ctx) {
  ctx.guard();
  const Problem& prob = ctx.prob();
  const Grads& d = ctx.at_p();
  std::vector<Column> cols;
  for (int i = 0; i < prob.num_equalities(); ++i) {
    cols.push_back({i, 1, d.gh[static_cast<std::size_t>(i)]});
    cols.push_back({i, -1, -d.gh[static_cast<std::size_t>(i)]});
  }
  for (int j : ctx.active()) cols.push_back({j, 0, d.gg[static_cast<std::size_t>(j)]});

  const int n = prob.manifold.ambient_dim();
  const std::size_t max_support = std::min(cols.size(), static_cast<std::size_t>(n + 1));
  std::vector<Multipliers> out;
  std::vector<std::size_t> support;

  auto try_support = [&]() {
    const auto k = static_cast<Eigen::Index>(support.size());
    Eigen::MatrixXd B(n + 1, k);
    for (Eigen::Index c = 0; c < k; ++c) {
      B.col(c).head(n) = cols[support[static_cast<std::size_t>(c)]].v;
      B(n, c) = 1.0;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& sv = svd.singularValues();
    if (sv(k - 1) <= ctx.cfg().tol_rank * sv(0)) return;
    Vec e = Vec::Zero(n + 1);
    e(n) = 1.0;
    const Vec x = svd.solve(e);
    if ((B * x - e).norm() > 1e-9 || (x.array() <= 1e-12).any()) return;
    Multipliers m = Multipliers::zeros(prob);
    for (Eigen::Index c = 0; c < k; ++c) {
      const Column& col = cols[support[static_cast<std::size_t>(c)]];
      if (col.sign == 0) {
        m.mu(col.constraint) += x(c);
      } else {
        m.lambda(col.constraint) += col.sign * x(c);
      }
    }
    for (const Multipliers& o : out) {
      const double diff = std::max((o.lambda - m.lambda).lpNorm<Eigen::Infinity>(),
                                   (o.mu - m.mu).lpNorm<Eigen::Infinity>());
      if (diff <= 1e-9) return;
    }
    out.push_back(std::move(m));
  };

  std::function<void(std::size_t)> grow = [&](std::size_t from) {
    if (!support.empty()) try_support();
    if (support.size() == max_support) return;
    for (std::size_t c = from; c < cols.size(); ++c) {
      // lambda_i^+ and lambda_i^- never share a support.
      if (cols[c].sign == -1 && !support.empty() && support.back() + 1 == c &&
          cols[support.back()].sign == 1) {
        continue;
      }
      support.push_back(c);
      grow(c + 1);
      support.pop_back();
    }
  };
  grow(0);
  return out;
}

bool sign_pattern(const Multipliers& m, const ConstraintValues& cv) {
  for (Eigen::Index i = 0; i < m.lambda.size(); ++i) {
    if (m.lambda(i) != 0.0 && !(m.lambda(i) * cv.h(i) > 0.0)) return false;
  }
  for (Eigen::Index j = 0; j < m.mu.size(); ++j) {
    if (m.mu(j) > 0.0 && !(m.mu(j) * cv.g(j) > 0.0)) return false;
  }
  return true;
}

ConditionReport qn(Context& ctx) {
  ctx.require_feasible();
  ConditionReport r = ctx.base(Condition::QN, true);
  r.verdict = Verdict::EvidenceHolds;
  const std::vector<Multipliers> cand = vertices(ctx);
  if (cand.empty()) return r;

  const Problem& prob = ctx.prob();
  const CqConfig& cfg = ctx.cfg();
  constexpr int kRadii = 3;
  std::vector<std::vector<ConstraintValues>> values(kRadii);
  std::vector<std::vector<Point>> points(kRadii);
  for (int idx = 0; idx < kRadii; ++idx) {
    if (idx == 0) {
      for (const Grads& q : ctx.samples()) {
        points[0].push_back(q.point);
        values[0].push_back(ConstraintValues{q.h, q.g});
      }
      continue;
    }
    const double radius = cfg.eps / std::pow(4.0, idx);
    points[static_cast<std::size_t>(idx)] = prob.manifold.sample_ball(
        ctx.at_p().point, radius, cfg.samples, cfg.seed + static_cast<std::uint64_t>(idx));
    for (const Point& q : points[static_cast<std::size_t>(idx)]) {
      values[static_cast<std::size_t>(idx)].push_back(constraint_values(prob, q));
    }
  }

  for (const Multipliers& m : cand) {
    std::optional<Vec> last_hit;
    bool every_radius = true;
    for (int idx = 0; idx < kRadii && every_radius; ++idx) {
      const auto& vals = values[static_cast<std::size_t>(idx)];
      bool hit = false;
      for (std::size_t s = 0; s < vals.size(); ++s) {
        if (sign_pattern(m, vals[s])) {
          hit = true;
          last_hit = points[static_cast<std::size_t>(idx)][s].coords;
          break;
        }
      }
      every_radius = hit;
    }
    if (every_radius) {
      r.verdict = Verdict::EvidenceFails;
      r.witness.lambda = m.lambda;
      r.witness.mu = m.mu;
      r.witness.sample = last_hit;
      r.witness.note = "null multiplier sign pattern reproduced at radii eps, eps/4, eps/16";
      for (Eigen::Index i = 0; i < m.lambda.size(); ++i) {
        if (m.lambda(i) != 0.0) r.witness.I.push_back(static_cast<int>(i));
      }
      for (Eigen::Index j = 0; j < m.mu.size(); ++j) {
        if (m.mu(j) > 0.0) r.witness.J.push_back(static_cast<int>(j));
      }
      return r;
    }
  }
  return r;
}

ConditionReport dispatch(Context& ctx, Condition which) {
  switch (which) {
    case Condition::LICQ:
      return licq(ctx);
    case Condition::MFCQ:
      return mfcq(ctx);
    case Condition::QN:
      return qn(ctx);
    default:
      return neighborhood(ctx, which);
  }
}

}  // namespace

linalg::VectorFamily gradient_family(const Problem& prob, const Point& p, const std::vector<int>& I,
                                     const std::vector<int>& J, const CqConfig& cfg) {
  const Grads d = grads_at(prob, p, cfg.zero_tol);
  for (int i : I) {
    if (i < 0 || i >= prob.num_equalities()) {
      throw PreconditionError("equality index " + std::to_string(i) + " out of range");
    }
  }
  for (int j : J) {
    if (j < 0 || j >= prob.num_inequalities()) {
      throw PreconditionError("inequality index " + std::to_string(j) + " out of range");
    }
    if (std::abs(d.g(j)) > cfg.tol_act) {
      throw PreconditionError("inequality " + std::to_string(j) + " is not active");
    }
  }
  return family_of(d, I, J);
}

ConditionReport check_licq(const Problem& prob, const Point& p, const CqConfig& cfg) {
  Context ctx(prob, p, cfg);
  return licq(ctx);
}

ConditionReport check_mfcq(const Problem& prob, const Point& p, const CqConfig& cfg) {
  Context ctx(prob, p, cfg);
  return mfcq(ctx);
}

ConditionReport check_neighborhood_cq(const Problem& prob, const Point& p, Condition which,
                                      const CqConfig& cfg) {
  Context ctx(prob, p, cfg);
  return neighborhood(ctx, which);
}

ConditionReport check_rcrcq_basis_form(const Problem& prob, const Point& p, const CqConfig& cfg) {
  Context ctx(prob, p, cfg);
  return rcrcq_basis(ctx);
}

std::vector<int> j_minus(const Problem& prob, const Point& p, const CqConfig& cfg) {
  Context ctx(prob, p, cfg);
  ctx.require_feasible();
  return ctx.j_minus();
}

std::vector<Multipliers> null_multiplier_vertices(const Problem& prob, const Point& p,
                                                  const CqConfig& cfg) {
  Context ctx(prob, p, cfg);
  return vertices(ctx);
}

ConditionReport qn_evidence(const Problem& prob, const Point& p, const CqConfig& cfg) {
  Context ctx(prob, p, cfg);
  return qn(ctx);
}

ConditionReport check(const Problem& prob, const Point& p, Condition which, const CqConfig& cfg) {
  Context ctx(prob, p, cfg);
  return dispatch(ctx, which);
}

CqReport certify(const Problem& prob, const Point& p, const CqConfig& cfg) {
  Context ctx(prob, p, cfg);
  ctx.require_feasible();
  CqReport rep;
  rep.point = p;
  rep.active = ctx.active();
  rep.j_minus = ctx.j_minus();
  for (Condition c : all_conditions()) rep.entries.push_back(dispatch(ctx, c));
  return rep;
}

KktResidual kkt_residual(const Problem& prob, const Point& p, const Multipliers& mult) {
  if ((mult.mu.array() < 0.0).any()) throw PreconditionError("kkt_residual: negative mu");
  const FirstOrder fo = evaluate(prob, p);
  KktResidual r;
  r.stationarity = lagrangian_gradient(fo, mult).norm();
  r.feasibility = max_violation(ConstraintValues{fo.h, fo.g});
  for (Eigen::Index j = 0; j < fo.g.size(); ++j) {
    r.complementarity = std::max(r.complementarity, std::min(mult.mu(j), std::abs(fo.g(j))));
  }
  return r;
}

SeqOptReport analyze_sequence(const Problem& prob, const alm::Trace& trace, const Point& limit,
                              const SeqConfig& cfg) {
  if (trace.empty()) throw PreconditionError("analyze_sequence: empty trace");
  SeqOptReport rep;
  const int n = static_cast<int>(trace.size());
  rep.length = n;
  rep.window_start = n - std::max(1, (n + 2) / 3);

  std::vector<FirstOrder> fos;
  fos.reserve(trace.size());
  for (const alm::IterationRecord& rec : trace) {
    fos.push_back(evaluate(prob, rec.point));
    const FirstOrder& fo = fos.back();
    const double grad = lagrangian_gradient(fo, Multipliers{rec.lambda, rec.mu}).norm();
    double dual = 0.0;
    if (rec.lambda.size() > 0) dual = rec.lambda.lpNorm<Eigen::Infinity>();
    if (rec.mu.size() > 0) dual = std::max(dual, rec.mu.lpNorm<Eigen::Infinity>());
    const double gamma = std::max(1.0, dual);
    rep.grad_norms.push_back(grad);
    rep.gamma.push_back(gamma);
    rep.scaled_grad_norms.push_back(grad / gamma);
    rep.dual_sup = std::max(rep.dual_sup, dual);
  }

  const ConstraintValues at_limit = constraint_values(prob, limit);
  rep.limit_feasibility = max_violation(at_limit);
  rep.limit_distance = prob.manifold.dist(limit, trace.back().point);
  if (rep.limit_distance > cfg.limit_radius) {
    rep.warnings.push_back("limit point is " + std::to_string(rep.limit_distance) +
                           " away from the last iterate");
  }

  for (int k = rep.window_start; k < n; ++k) {
    const Vec& mu = trace[static_cast<std::size_t>(k)].mu;
    for (Eigen::Index j = 0; j < at_limit.g.size(); ++j) {
      if (std::abs(at_limit.g(j)) > cfg.tol_act && mu(j) > cfg.tol) rep.complementarity_ok = false;
    }
  }

  const bool feasible_limit = rep.limit_feasibility <= cfg.tol;
  rep.akkt = rep.grad_norms.back() <= cfg.tol && rep.complementarity_ok && feasible_limit;
  rep.dual_bounded = rep.dual_sup < cfg.dual_cap;
  rep.sign_checks_applied = !rep.dual_bounded;

  if (rep.sign_checks_applied) {
    auto check_index = [&](bool equality, Eigen::Index idx) {
      double min_ratio = std::numeric_limits<double>::infinity();
      for (int k = rep.window_start; k < n; ++k) {
        const auto& rec = trace[static_cast<std::size_t>(k)];
        const double m = equality ? std::abs(rec.lambda(idx)) : rec.mu(idx);
        min_ratio = std::min(min_ratio, m / rep.gamma[static_cast<std::size_t>(k)]);
      }
      if (!(min_ratio >= cfg.tol)) return;
      for (int k = rep.window_start; k < n; ++k) {
        const auto& rec = trace[static_cast<std::size_t>(k)];
        const FirstOrder& fo = fos[static_cast<std::size_t>(k)];
        const double prod = equality ? rec.lambda(idx) * fo.h(idx) : rec.mu(idx) * fo.g(idx);
        if (!(prod > 0.0)) {
          rep.sign_violations.push_back(
              {rec.k, static_cast<int>(idx), equality ? "equality" : "inequality"});
        }
      }
    };
    for (Eigen::Index i = 0; i < prob.num_equalities(); ++i) check_index(true, i);
    for (Eigen::Index j = 0; j < prob.num_inequalities(); ++j) check_index(false, j);
  }

  const bool signs_ok = rep.sign_violations.empty();
  rep.pakkt = rep.akkt && signs_ok;
  rep.scaled_pakkt =
      rep.scaled_grad_norms.back() <= cfg.tol && rep.complementarity_ok && feasible_limit && signs_ok;
  return rep;
}

}  // namespace ralm::cq
