#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ralm/alm.hpp"
#include "ralm/linalg.hpp"
#include "ralm/problem.hpp"

namespace ralm::cq {

enum class Verdict { Holds, Fails, EvidenceHolds, EvidenceFails };
enum class Condition { LICQ, MFCQ, CRCQ, RCRCQ, CPLD, RCPLD, CRSC, QN };

std::string to_string(Verdict v);
std::string to_string(Condition c);
/// Throws PreconditionError for an unknown name.
Condition condition_from_string(const std::string& name);
const std::vector<Condition>& all_conditions();

/// Holds or EvidenceHolds.
inline bool holds(Verdict v) { return v == Verdict::Holds || v == Verdict::EvidenceHolds; }

struct CqConfig {
  double tol_act = 1e-6;
  double tol_rank = 1e-8;
  double tol_lp = 1e-9;
  /// Sampling radius for the neighborhood conditions.
  double eps = 1e-2;
  int samples = 64;
  std::uint64_t seed = 0;
  /// Riemannian gradients below this norm are treated as exactly zero.
  double zero_tol = 1e-12;
  /// Largest s + |A(p)| for which subsets are enumerated.
  int max_subset_bits = 20;
};

struct Witness {
  /// 0-based equality / inequality indices of the offending family.
  std::vector<int> I;
  std::vector<int> J;
  std::optional<linalg::DependenceCertificate> certificate;
  /// Sample point where a neighborhood test broke.
  std::optional<Vec> sample;
  int rank_at_p = -1;
  int rank_at_q = -1;
  /// QN: the null multiplier pair whose sign pattern was reproduced.
  std::optional<Vec> lambda;
  std::optional<Vec> mu;
  std::string note;
};

struct ConditionReport {
  Condition condition = Condition::LICQ;
  Verdict verdict = Verdict::Holds;
  Witness witness;
  int sample_count = 0;
  double eps = 0.0;
  std::uint64_t seed = 0;
};

struct CqReport {
  Point point;
  std::vector<int> active;
  std::vector<int> j_minus;
  std::vector<ConditionReport> entries;

  const ConditionReport& get(Condition c) const;
  Verdict verdict(Condition c) const { return get(c).verdict; }
};

/// A(p, I, J): equality gradients as free-sign vectors, inequality gradients as
/// sign-constrained ones. Throws PreconditionError if J is not active.
linalg::VectorFamily gradient_family(const Problem& prob, const Point& p, const std::vector<int>& I,
                                     const std::vector<int>& J, const CqConfig& cfg = {});

ConditionReport check_licq(const Problem& prob, const Point& p, const CqConfig& cfg = {});
ConditionReport check_mfcq(const Problem& prob, const Point& p, const CqConfig& cfg = {});

/// CRCQ, RCRCQ, CPLD, RCPLD or CRSC with the neighborhood replaced by
/// cfg.samples points of the geodesic ball of radius cfg.eps.
ConditionReport check_neighborhood_cq(const Problem& prob, const Point& p, Condition which,
                                      const CqConfig& cfg = {});

/// Equivalent basis form of RCRCQ: constant rank of all equality gradients,
/// and linear dependence of A(p, K, J) persisting on the samples. K comes from
/// select_basis_subset.
ConditionReport check_rcrcq_basis_form(const Problem& prob, const Point& p,
                                       const CqConfig& cfg = {});

/// { j in A(p) : -grad g_j(p) lies in the polar of the linearized cone }, 0-based.
std::vector<int> j_minus(const Problem& prob, const Point& p, const CqConfig& cfg = {});

/// Vertices of { (lambda, mu) : null combination, mu >= 0, ||(lambda, mu)||_1 = 1 }
/// over the active constraints. mu is indexed like the inequalities.
std::vector<Multipliers> null_multiplier_vertices(const Problem& prob, const Point& p,
                                                  const CqConfig& cfg = {});

/// Quasinormality: a vertex violates QN when some sample reproduces its sign
/// pattern at each radius eps, eps/4, eps/16.
ConditionReport qn_evidence(const Problem& prob, const Point& p, const CqConfig& cfg = {});

ConditionReport check(const Problem& prob, const Point& p, Condition which,
                      const CqConfig& cfg = {});

/// Every condition at p, sharing one sample set.
CqReport certify(const Problem& prob, const Point& p, const CqConfig& cfg = {});

struct KktResidual {
  double stationarity = 0.0;
  double feasibility = 0.0;
  double complementarity = 0.0;
};

/// (||grad L||, max(||h||_inf, max [g]_+), max_j min(mu_j, |g_j|)).
KktResidual kkt_residual(const Problem& prob, const Point& p, const Multipliers& mult);

struct SeqConfig {
  double tol = 1e-5;
  /// Activity threshold at the limit point.
  double tol_act = 1e-4;
  double dual_cap = 1e8;
  /// Warn when the limit is farther than this from the last iterate.
  double limit_radius = 1e-3;
};

struct SignViolation {
  int k = 0;
  int index = 0;
  std::string kind;  // "equality" or "inequality"
};

struct SeqOptReport {
  int length = 0;
  /// First trace position (0-based) of the trailing window.
  int window_start = 0;
  std::vector<double> grad_norms;
  std::vector<double> gamma;
  std::vector<double> scaled_grad_norms;
  double limit_feasibility = 0.0;
  double limit_distance = 0.0;
  bool complementarity_ok = true;
  bool akkt = false;
  /// Sign checks only apply when the duals look unbounded.
  bool sign_checks_applied = false;
  std::vector<SignViolation> sign_violations;
  bool pakkt = false;
  bool scaled_pakkt = false;
  bool dual_bounded = true;
  double dual_sup = 0.0;
  std::vector<std::string> warnings;
};

SeqOptReport analyze_sequence(const Problem& prob, const alm::Trace& trace, const Point& limit,
                              const SeqConfig& cfg = {});

}  // namespace ralm::cq
