#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "ralm/alm.hpp"
#include "ralm/cq.hpp"
#include "ralm/error.hpp"
#include "ralm/format.hpp"
#include "ralm/problem_file.hpp"

using namespace ralm;
using namespace ralm::cq;

namespace {

Vec v3(double a, double b, double c) { return (Vec(3) << a, b, c).finished(); }

const Manifold kS2 = Manifold::sphere(3);
const std::vector<std::string> kXyz{"x", "y", "z"};

Point north() { return kS2.make_point(v3(0, 0, 1)); }

Problem builtin(const std::string& name) { return load_problem(name).problem; }

std::string linear_text(const Vec& a, const std::vector<std::string>& names) {
  std::string s = "0";
  for (int i = 0; i < a.size(); ++i) s += " + " + fmt17(a(i)) + " * " + names[i];
  return s;
}

/// Linear constraints on R^n through the origin; the gradients are exactly
/// the coefficient vectors.
Problem linear_problem(const std::vector<Vec>& eq, const std::vector<Vec>& ineq, int n) {
  const std::vector<std::string> names(kXyz.begin(), kXyz.begin() + n);
  std::vector<std::string> es, is;
  for (const Vec& v : eq) es.push_back(linear_text(v, names));
  for (const Vec& v : ineq) is.push_back(linear_text(v, names));
  return make_problem("linear", Manifold::euclidean(n), names, "0", es, is);
}

void check_chain(const CqReport& r) {
  auto h = [&](Condition c) { return holds(r.verdict(c)); };
  if (h(Condition::LICQ)) {
    CHECK(h(Condition::MFCQ));
    CHECK(h(Condition::CRCQ));
  }
  if (h(Condition::MFCQ)) CHECK(h(Condition::CPLD));
  if (h(Condition::CRCQ)) {
    CHECK(h(Condition::RCRCQ));
    CHECK(h(Condition::CPLD));
  }
  if (h(Condition::CPLD)) CHECK(h(Condition::RCPLD));
  if (h(Condition::RCRCQ)) CHECK(h(Condition::RCPLD));
}

}  // namespace

TEST_CASE("names round trip") {
  for (Condition c : all_conditions()) CHECK(condition_from_string(to_string(c)) == c);
  CHECK_THROWS_AS(condition_from_string("ACQ"), PreconditionError);
  CHECK(holds(Verdict::EvidenceHolds));
  CHECK_FALSE(holds(Verdict::EvidenceFails));
}

TEST_CASE("gradient_family") {
  const Problem p = builtin("paper-cpld-sphere");
  const auto fam = gradient_family(p, north(), {}, {2, 3});
  REQUIRE(fam.sign_constrained.size() == 2);
  CHECK((fam.sign_constrained[0] - v3(1, 1, 0)).norm() == 0.0);
  CHECK((fam.sign_constrained[1] - v3(-1, -1, 0)).norm() == 0.0);
  CHECK(fam.sign_index == std::vector<int>{2, 3});
  CHECK(gradient_family(p, north(), {}, {}).empty());

  const Problem q = builtin("paper-qn-sphere");
  std::mt19937_64 rng(1);
  const Point x = kS2.make_point(v3(0.05, -0.03, 1));
  const auto f2 = gradient_family(q, x, {1}, {});
  CHECK((f2.free_sign[0] - riemannian_gradient(q.equalities[1], kS2, x).vec).norm() == 0.0);

  const Problem eq = builtin("equator-lp");
  CHECK_THROWS_AS(gradient_family(eq, north(), {}, {0}), PreconditionError);
}

TEST_CASE("LICQ and MFCQ examples") {
  const Point p = north();
  CHECK(check_licq(builtin("paper-cpld-sphere"), p).verdict == Verdict::Fails);
  const ConditionReport mf = check_mfcq(builtin("paper-cpld-sphere"), p);
  CHECK(mf.verdict == Verdict::Fails);
  REQUIRE(mf.witness.certificate);
  const Vec& beta = mf.witness.certificate->beta;
  // The witness lives on g3 and g4.
  CHECK(mf.witness.J == std::vector<int>{2, 3});
  REQUIRE(beta.size() == 4);
  CHECK(beta(0) == 0.0);
  CHECK(beta(1) == 0.0);
  CHECK(beta(2) > 0.0);
  CHECK(beta(2) == doctest::Approx(beta(3)));

  const Problem one = make_problem("one", kS2, kXyz, "z", {}, {"x"});
  CHECK(check_licq(one, p).verdict == Verdict::Holds);
  const Problem dup = make_problem("dup", kS2, kXyz, "z", {}, {"x", "x"});
  CHECK(check_licq(dup, p).verdict == Verdict::Fails);
  CHECK(check_mfcq(dup, p).verdict == Verdict::Holds);

  CHECK(check_mfcq(builtin("paper-mfcq-sphere"), p).verdict == Verdict::Holds);
  CHECK(check_mfcq(builtin("unconstrained-sphere"), p).verdict == Verdict::Holds);
  CHECK(check_licq(builtin("unconstrained-sphere"), p).verdict == Verdict::Holds);
}

TEST_CASE("neighborhood conditions on the CPLD fixture") {
  CqConfig cfg;
  cfg.eps = 0.1;
  const Problem p = builtin("paper-cpld-sphere");
  const ConditionReport crcq = check_neighborhood_cq(p, north(), Condition::CRCQ, cfg);
  CHECK(crcq.verdict == Verdict::EvidenceFails);
  CHECK(crcq.sample_count == 64);
  CHECK(crcq.eps == 0.1);
  CHECK(crcq.witness.sample);
  CHECK(crcq.witness.rank_at_p < crcq.witness.rank_at_q);
  CHECK(check_neighborhood_cq(p, north(), Condition::CPLD, cfg).verdict == Verdict::EvidenceHolds);
  CHECK_THROWS_AS(check_neighborhood_cq(p, north(), Condition::MFCQ, cfg), PreconditionError);
}

TEST_CASE("neighborhood conditions on the CRSC fixture") {
  const Problem p = builtin("paper-crsc-sphere");
  CHECK(check_neighborhood_cq(p, north(), Condition::RCPLD).verdict == Verdict::EvidenceFails);
  const ConditionReport crsc = check_neighborhood_cq(p, north(), Condition::CRSC);
  CHECK(crsc.verdict == Verdict::EvidenceHolds);
  CHECK(j_minus(p, north()) == std::vector<int>{0, 1, 2, 3});
  // Rank 2 on every sample.
  for (const Point& q : kS2.sample_ball(north(), 1e-2, 64, 0)) {
    std::vector<Vec> gs;
    for (const auto& g : p.inequalities) gs.push_back(riemannian_gradient(g, kS2, q).vec);
    CHECK(linalg::numerical_rank(gs) == 2);
  }
}

TEST_CASE("unconstrained problems satisfy everything") {
  const CqReport r = certify(builtin("unconstrained-sphere"), north());
  for (const ConditionReport& c : r.entries) CHECK(holds(c.verdict));
  CHECK(r.verdict(Condition::LICQ) == Verdict::Holds);
  CHECK(r.verdict(Condition::CRCQ) == Verdict::EvidenceHolds);
  CHECK(r.verdict(Condition::QN) == Verdict::EvidenceHolds);
}

TEST_CASE("point conditions never report evidence, sampled ones always do") {
  for (const std::string& name : list_builtins()) {
    const ProblemFile pf = load_problem(name);
    if (!pf.reference_point) continue;
    const CqReport r = certify(pf.problem, kS2.make_point(*pf.reference_point));
    for (const ConditionReport& c : r.entries) {
      const bool sampled = c.condition != Condition::LICQ && c.condition != Condition::MFCQ;
      const bool evidence = c.verdict == Verdict::EvidenceHolds || c.verdict == Verdict::EvidenceFails;
      CHECK(sampled == evidence);
    }
  }
}

TEST_CASE("j_minus") {
  // Oracle: -grad g_j in the cone of the active gradients.
  const Problem p = builtin("paper-cpld-sphere");
  std::vector<Vec> cols;
  for (const auto& g : p.inequalities) cols.push_back(riemannian_gradient(g, kS2, north()).vec);
  std::vector<int> expect;
  for (int j = 0; j < 4; ++j)
    if (oracle::in_cone(cols, -cols[j])) expect.push_back(j);
  CHECK(expect == std::vector<int>{2, 3});
  CHECK(j_minus(p, north()) == expect);

  const Problem single = make_problem("single", kS2, kXyz, "z", {}, {"x"});
  CHECK(j_minus(single, north()).empty());
}

TEST_CASE("j_minus is monotone under duplication") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<Vec> ineq;
    const int m = 1 + trial % 4;
    for (int j = 0; j < m; ++j) ineq.push_back(oracle::random_unit(rng, 2));
    const Problem base = linear_problem({}, ineq, 2);
    const Point o = Manifold::euclidean(2).make_point(Vec::Zero(2));
    const std::vector<int> before = j_minus(base, o);
    for (int d = 0; d < m; ++d) {
      std::vector<Vec> more = ineq;
      more.push_back(ineq[static_cast<std::size_t>(d)]);
      const std::vector<int> after = j_minus(linear_problem({}, more, 2), o);
      for (int j : before) CHECK(std::find(after.begin(), after.end(), j) != after.end());
    }
  }
}

TEST_CASE("MFCQ agrees with a brute-force grid") {
  std::mt19937_64 rng(8);
  int checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const int n = 1 + trial % 3;
    const int s = static_cast<int>(rng() % 3);
    const int m = 1 + static_cast<int>(rng() % (4 - s));
    std::vector<Vec> eq, ineq;
    for (int i = 0; i < s; ++i) eq.push_back(oracle::random_unit(rng, n));
    for (int j = 0; j < m; ++j) ineq.push_back(oracle::random_unit(rng, n));
    const double g = oracle::grid_min_residual(eq, ineq);
    bool dependent;
    if (g < 1e-8) {
      dependent = true;
    } else if (g >= 0.25) {
      dependent = false;
    } else {
      continue;
    }
    ++checked;
    const Problem p = linear_problem(eq, ineq, n);
    const Verdict v = check_mfcq(p, Manifold::euclidean(n).make_point(Vec::Zero(n))).verdict;
    CHECK(v == (dependent ? Verdict::Fails : Verdict::Holds));
  }
  CHECK(checked >= 100);
}

TEST_CASE("RCRCQ basis form agrees with the definition") {
  for (const std::string& name : list_builtins()) {
    const ProblemFile pf = load_problem(name);
    if (!pf.reference_point) continue;
    const Point p = kS2.make_point(*pf.reference_point);
    CAPTURE(name);
    CHECK(holds(check_neighborhood_cq(pf.problem, p, Condition::RCRCQ).verdict) ==
          holds(check_rcrcq_basis_form(pf.problem, p).verdict));
  }
}

TEST_CASE("quasinormality") {
  CHECK(qn_evidence(builtin("paper-qn-sphere"), north()).verdict == Verdict::EvidenceHolds);

  const Problem split = builtin("paper-split-equality");
  const auto verts = null_multiplier_vertices(split, north());
  REQUIRE(verts.size() == 1);
  CHECK(verts[0].mu(0) == doctest::Approx(0.5));
  CHECK(verts[0].mu(1) == doctest::Approx(0.5));
  CHECK(qn_evidence(split, north()).verdict == Verdict::EvidenceHolds);

  CHECK(qn_evidence(builtin("unconstrained-sphere"), north()).verdict == Verdict::EvidenceHolds);

  // g = (x, -x + 1e6 y^2): x > 0 and 1e6 y^2 > x hold together arbitrarily close to p.
  const Problem bad = make_problem("bad", kS2, kXyz, "z", {}, {"x", "-x + 1000000*y^2"});
  const ConditionReport r = qn_evidence(bad, north());
  CHECK(r.verdict == Verdict::EvidenceFails);
  REQUIRE(r.witness.mu);
  CHECK(r.witness.sample);
}

TEST_CASE("null multiplier vertices are null combinations") {
  for (const std::string& name : list_builtins()) {
    const ProblemFile pf = load_problem(name);
    if (!pf.reference_point) continue;
    const Point p = kS2.make_point(*pf.reference_point);
    const FirstOrder fo = evaluate(pf.problem, p);
    for (const Multipliers& m : null_multiplier_vertices(pf.problem, p)) {
      Vec comb = Vec::Zero(3);
      for (int i = 0; i < m.lambda.size(); ++i) comb += m.lambda(i) * fo.grad_h[i].vec;
      for (int j = 0; j < m.mu.size(); ++j) comb += m.mu(j) * fo.grad_g[j].vec;
      CHECK(comb.norm() <= 1e-9);
      CHECK(m.lambda.lpNorm<1>() + m.mu.lpNorm<1>() == doctest::Approx(1.0));
      CHECK((m.mu.array() >= 0.0).all());
    }
  }
}

TEST_CASE("fixture verdicts") {
  SUBCASE("cpld") {
    const CqReport r = certify(builtin("paper-cpld-sphere"), north());
    CHECK(r.active == std::vector<int>{0, 1, 2, 3});
    CHECK(r.j_minus == std::vector<int>{2, 3});
    CHECK(r.verdict(Condition::LICQ) == Verdict::Fails);
    CHECK(r.verdict(Condition::MFCQ) == Verdict::Fails);
    CHECK(r.verdict(Condition::CRCQ) == Verdict::EvidenceFails);
    CHECK(r.verdict(Condition::CPLD) == Verdict::EvidenceHolds);
  }
  SUBCASE("split") {
    const CqReport r = certify(builtin("paper-split-equality"), north());
    CHECK(r.verdict(Condition::MFCQ) == Verdict::Fails);
    CHECK(r.verdict(Condition::CRCQ) == Verdict::EvidenceHolds);
    CHECK(r.verdict(Condition::QN) == Verdict::EvidenceHolds);
  }
  SUBCASE("mfcq") {
    const CqReport r = certify(builtin("paper-mfcq-sphere"), north());
    CHECK(r.verdict(Condition::MFCQ) == Verdict::Holds);
    CHECK(r.verdict(Condition::CRCQ) == Verdict::EvidenceFails);
  }
  SUBCASE("qn") {
    const CqReport r = certify(builtin("paper-qn-sphere"), north());
    CHECK(r.verdict(Condition::QN) == Verdict::EvidenceHolds);
    CHECK(r.verdict(Condition::RCPLD) == Verdict::EvidenceFails);
    CHECK(r.verdict(Condition::CRSC) == Verdict::EvidenceFails);
  }
}

TEST_CASE("implication chain on the fixtures") {
  for (const std::string& name : list_builtins()) {
    const ProblemFile pf = load_problem(name);
    if (!pf.reference_point) continue;
    CAPTURE(name);
    check_chain(certify(pf.problem, kS2.make_point(*pf.reference_point)));
  }
}

TEST_CASE("certify rejects infeasible points and huge families") {
  const Problem p = builtin("equator-lp");
  CHECK_THROWS_AS(certify(p, kS2.make_point(v3(0, 0, -1))), PreconditionError);
  std::vector<std::string> many(21, "x");
  const Problem big = make_problem("big", kS2, kXyz, "z", {}, many);
  CHECK_THROWS_AS(check_neighborhood_cq(big, north(), Condition::CRCQ), PreconditionError);
  CHECK_NOTHROW(check_licq(big, north()));
}

TEST_CASE("kkt_residual") {
  const Problem eq = builtin("equator-lp");
  Multipliers one = Multipliers::zeros(eq);
  one.mu(0) = 1.0;
  const KktResidual r = kkt_residual(eq, kS2.make_point(v3(1, 0, 0)), one);
  CHECK(r.stationarity <= 1e-12);
  CHECK(r.feasibility <= 1e-12);
  CHECK(r.complementarity <= 1e-12);

  const Problem un = builtin("unconstrained-sphere");
  const Point q = kS2.make_point(v3(0, 0.6, 0.8));
  const KktResidual z = kkt_residual(un, q, Multipliers::zeros(un));
  CHECK(z.stationarity == doctest::Approx(riemannian_gradient(un.objective, kS2, q).norm()));
  CHECK(z.feasibility == 0.0);
  CHECK(z.complementarity == 0.0);

  CHECK(kkt_residual(eq, kS2.make_point(v3(0, 0, -1)), one).feasibility > 0.0);
  one.mu(0) = -1;
  CHECK_THROWS_AS(kkt_residual(eq, north(), one), PreconditionError);
}

TEST_CASE("analyze_sequence") {
  SUBCASE("equator") {
    const ProblemFile pf = load_problem("equator-lp");
    const alm::RunResult run = alm::run(pf.problem, alm::AlmConfig{}, start_point(pf));
    const SeqOptReport r = analyze_sequence(pf.problem, run.trace, run.trace.back().point);
    CHECK(r.akkt);
    CHECK(r.dual_bounded);
    CHECK_FALSE(r.sign_checks_applied);
    CHECK(r.sign_violations.empty());
    CHECK(r.pakkt);
    CHECK(r.scaled_pakkt);
    CHECK(r.grad_norms.size() == run.trace.size());
    CHECK(r.gamma.size() == run.trace.size());
    CHECK(r.warnings.empty());
  }
  SUBCASE("split equality") {
    const ProblemFile pf = load_problem("paper-split-equality");
    const alm::RunResult run = alm::run(pf.problem, alm::AlmConfig{}, start_point(pf));
    const SeqOptReport r = analyze_sequence(pf.problem, run.trace, run.trace.back().point);
    CHECK(r.akkt);
    CHECK(r.pakkt);
    CHECK(r.sign_violations.empty());
  }
  SUBCASE("single exact record") {
    const ProblemFile pf = load_problem("equator-lp");
    alm::IterationRecord rec;
    rec.k = 1;
    rec.point = kS2.make_point(v3(1, 0, 0));
    rec.lambda = Vec(0);
    rec.mu = Vec::Ones(1);
    const SeqOptReport r = analyze_sequence(pf.problem, {rec}, rec.point);
    CHECK(r.length == 1);
    CHECK(r.window_start == 0);
    CHECK(r.akkt);
  }
  SUBCASE("unbounded duals trigger sign checks") {
    const ProblemFile pf = load_problem("paper-split-equality");
    alm::Trace t;
    for (int k = 1; k <= 6; ++k) {
      alm::IterationRecord rec;
      rec.k = k;
      const double x = std::pow(10.0, -k);
      rec.point = kS2.make_point(v3(x, 0, 1));
      rec.lambda = Vec(0);
      rec.mu = (Vec(2) << std::pow(10.0, 3 * k), std::pow(10.0, 3 * k) - 1).finished();
      t.push_back(rec);
    }
    SeqConfig cfg;
    cfg.dual_cap = 1e8;
    const SeqOptReport r = analyze_sequence(pf.problem, t, kS2.make_point(v3(0, 0, 1)), cfg);
    CHECK_FALSE(r.dual_bounded);
    CHECK(r.sign_checks_applied);
    // g2 = -x < 0 with a dominant mu2: every tail record violates the sign test.
    CHECK_FALSE(r.sign_violations.empty());
    for (const SignViolation& v : r.sign_violations) CHECK(v.index == 1);
    CHECK_FALSE(r.pakkt);
  }
  SUBCASE("distant limit warns") {
    const ProblemFile pf = load_problem("equator-lp");
    const alm::RunResult run = alm::run(pf.problem, alm::AlmConfig{}, start_point(pf));
    const SeqOptReport r = analyze_sequence(pf.problem, run.trace, kS2.make_point(v3(0, 1, 0)));
    CHECK_FALSE(r.warnings.empty());
  }
  CHECK_THROWS_AS(analyze_sequence(builtin("equator-lp"), {}, north()), PreconditionError);
}
