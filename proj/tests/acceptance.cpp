// Acceptance run: one PASS/FAIL line per criterion. Exit status is the number
// of failed criteria.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "ralm/alm.hpp"
#include "ralm/cli.hpp"
#include "ralm/cq.hpp"
#include "ralm/format.hpp"
#include "ralm/problem_file.hpp"

using namespace ralm;
namespace fs = std::filesystem;

namespace {

const Manifold kS2 = Manifold::sphere(3);
const std::vector<std::string> kXyz{"x", "y", "z"};

Vec v3(double a, double b, double c) { return (Vec(3) << a, b, c).finished(); }

Point north() { return kS2.make_point(v3(0, 0, 1)); }

/// Collects failure messages for one criterion.
struct Check {
  std::vector<std::string> failures;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

int failed = 0;

void criterion(int id, const std::string& title, const std::function<std::string(Check&)>& body) {
  Check c;
  std::string detail;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    detail = body(c);
  } catch (const std::exception& e) {
    c.failures.push_back(std::string("exception: ") + e.what());
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = c.failures.empty();
  failed += ok ? 0 : 1;
  std::printf("[%s] %d. %s (%.3f s)%s%s\n", ok ? "PASS" : "FAIL", id, title.c_str(), secs,
              detail.empty() ? "" : ": ", detail.c_str());
  for (std::size_t i = 0; i < c.failures.size() && i < 10; ++i) {
    std::printf("       - %s\n", c.failures[i].c_str());
  }
  if (c.failures.size() > 10) std::printf("       - ... %zu more\n", c.failures.size() - 10);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string verdict_of(const cq::CqReport& r, cq::Condition c) {
  return cq::to_string(r.verdict(c));
}

void expect_verdict(Check& chk, const cq::CqReport& r, cq::Condition c, cq::Verdict want) {
  chk.expect(r.verdict(c) == want, cq::to_string(c) + " is " + verdict_of(r, c) + ", expected " +
                                       cq::to_string(want));
}

/// Implication chain at Evidence grade. Returns the violated arrows.
std::vector<std::string> chain_violations(const cq::CqReport& r) {
  using cq::Condition;
  auto h = [&](Condition c) { return cq::holds(r.verdict(c)); };
  const std::vector<std::pair<Condition, Condition>> arrows = {
      {Condition::LICQ, Condition::MFCQ},   {Condition::MFCQ, Condition::CPLD},
      {Condition::CPLD, Condition::RCPLD},  {Condition::LICQ, Condition::CRCQ},
      {Condition::CRCQ, Condition::RCRCQ},  {Condition::CRCQ, Condition::CPLD},
      {Condition::RCRCQ, Condition::RCPLD},
  };
  std::vector<std::string> out;
  for (const auto& [a, b] : arrows) {
    if (h(a) && !h(b)) out.push_back(cq::to_string(a) + " => " + cq::to_string(b));
  }
  return out;
}

std::string random_poly(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> coef(-1, 1);
  static const char* terms[] = {"x", "y", "x^2", "y^2", "x*y"};
  std::string s;
  for (const char* t : terms) {
    const int c = coef(rng);
    if (c == 0) continue;
    s += (c > 0 ? (s.empty() ? "" : " + ") : (s.empty() ? "-" : " - "));
    s += t;
  }
  return s.empty() ? "x^2 + y^2" : s;
}

std::string linalg_oracle(Check& chk) {
  std::mt19937_64 rng(2024);
  int families = 0, constructed = 0, resampled = 0;
  while (families < 500) {
    const int n = 1 + static_cast<int>(rng() % 3);
    const int size = 1 + static_cast<int>(rng() % 4);
    const int s = static_cast<int>(rng() % (size + 1));
    linalg::VectorFamily fam;
    bool expect_dependent;
    if (families % 2 == 0) {
      // Constructed: a grid coefficient vector c with sum |c| = 1 and a last
      // vector chosen so that the combination vanishes exactly.
      std::vector<int> units(static_cast<std::size_t>(size), 0);
      int left = 20;
      for (int i = 0; i < size; ++i) {
        const int take = i == size - 1 ? left : static_cast<int>(rng() % (left + 1));
        const bool free = i < s;
        const int sign = free && (rng() & 1U) ? -1 : 1;
        units[static_cast<std::size_t>(i)] = sign * take;
        left -= take;
      }
      int pivot = -1;
      for (int i = size - 1; i >= 0; --i) {
        if (units[static_cast<std::size_t>(i)] != 0) {
          pivot = i;
          break;
        }
      }
      std::vector<Vec> vs(static_cast<std::size_t>(size));
      Vec acc = Vec::Zero(n);
      for (int i = 0; i < size; ++i) {
        if (i == pivot) continue;
        vs[static_cast<std::size_t>(i)] = oracle::random_vec(rng, n);
        acc += (0.05 * units[static_cast<std::size_t>(i)]) * vs[static_cast<std::size_t>(i)];
      }
      vs[static_cast<std::size_t>(pivot)] = -acc / (0.05 * units[static_cast<std::size_t>(pivot)]);
      for (int i = 0; i < size; ++i) {
        if (i < s) fam.add_free(vs[static_cast<std::size_t>(i)]);
        else fam.add_sign(vs[static_cast<std::size_t>(i)]);
      }
      const double g = oracle::grid_min_residual(fam.free_sign, fam.sign_constrained);
      chk.expect(g < 1e-8, "grid oracle missed a constructed dependence");
      expect_dependent = true;
      ++constructed;
    } else {
      for (int i = 0; i < size; ++i) {
        if (i < s) fam.add_free(oracle::random_unit(rng, n));
        else fam.add_sign(oracle::random_unit(rng, n));
      }
      // Unit vectors make the residual 1-Lipschitz in the l1 coefficients, and
      // every coefficient vector is within l1 distance 0.05 * size of the grid.
      const double g = oracle::grid_min_residual(fam.free_sign, fam.sign_constrained);
      if (g < 1e-8) {
        expect_dependent = true;
      } else if (g > 0.05 * size + 0.05) {
        expect_dependent = false;
      } else {
        ++resampled;
        continue;
      }
    }
    ++families;
    const bool got = linalg::positive_linear_dependence(fam).has_value();
    chk.expect(got == expect_dependent, "family " + std::to_string(families) + " (dim " +
                                            std::to_string(n) + ", size " + std::to_string(size) +
                                            "): LP says " + (got ? "dependent" : "independent"));
  }

  // Caratheodory postconditions.
  int reductions = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 2 + trial % 3;
    const int su = static_cast<int>(rng() % std::min(3, n));
    const int m = 1 + static_cast<int>(rng() % 5);
    std::vector<Vec> u, v;
    do {
      u.clear();
      for (int i = 0; i < su; ++i) u.push_back(oracle::random_vec(rng, n));
    } while (linalg::numerical_rank(u) < su);
    for (int j = 0; j < m; ++j) {
      if (j > 0 && rng() % 3 == 0) v.push_back(v[rng() % v.size()] * (rng() % 2 ? 2.0 : -1.0));
      else v.push_back(oracle::random_vec(rng, n));
    }
    const Vec alpha = oracle::random_vec(rng, su, -2, 2);
    Vec beta = oracle::random_vec(rng, m, 0.1, 2);
    for (int j = 0; j < m; ++j)
      if (rng() % 2) beta(j) = -beta(j);
    Vec x = Vec::Zero(n);
    for (int i = 0; i < su; ++i) x += alpha(i) * u[static_cast<std::size_t>(i)];
    for (int j = 0; j < m; ++j) x += beta(j) * v[static_cast<std::size_t>(j)];

    const linalg::CaratheodoryResult r = linalg::caratheodory_reduce(u, v, alpha, beta, x);
    ++reductions;
    Vec recon = Vec::Zero(n);
    for (int i = 0; i < su; ++i) recon += r.alpha(i) * u[static_cast<std::size_t>(i)];
    std::vector<Vec> fam = u;
    bool signs = true, inside = true;
    int prev = -1;
    for (std::size_t k = 0; k < r.subset.size(); ++k) {
      const int j = r.subset[k];
      inside = inside && j > prev && j < m;
      prev = j;
      if (!inside) break;
      recon += r.beta(static_cast<Eigen::Index>(k)) * v[static_cast<std::size_t>(j)];
      signs = signs && r.beta(static_cast<Eigen::Index>(k)) * beta(j) > 0.0;
      fam.push_back(v[static_cast<std::size_t>(j)]);
    }
    const std::string tag = "decomposition " + std::to_string(trial);
    chk.expect(inside, tag + ": subset out of range");
    chk.expect((recon - x).norm() <= 1e-8 * std::max(1.0, x.norm()), tag + ": x not reproduced");
    chk.expect(signs, tag + ": coefficient sign flipped");
    chk.expect(linalg::numerical_rank(fam) == static_cast<int>(fam.size()),
               tag + ": reduced family is dependent");
  }

  // Finite-difference checks.
  const Problem mixed = make_problem("mixed", kS2, kXyz, "x*y + exp(z) - cos(x*z)",
                                     {"x^2 - y*z", "sin(x + z)"},
                                     {"x + y^2 - 0.1", "cos(y) - z", "x*z", "sqrt(2 + x*y)"});
  std::vector<const expr::Expr*> exprs{&mixed.objective};
  for (const auto& e : mixed.equalities) exprs.push_back(&e);
  for (const auto& e : mixed.inequalities) exprs.push_back(&e);
  std::vector<Problem> fixtures;
  for (const auto& [name, text] : builtin_sources())
    fixtures.push_back(parse_problem_file(text, name).problem);
  for (const Problem& p : fixtures) {
    exprs.push_back(&p.objective);
    for (const auto& e : p.equalities) exprs.push_back(&e);
    for (const auto& e : p.inequalities) exprs.push_back(&e);
  }

  double worst_ad = 0, worst_rg = 0, worst_al = 0, worst_inf = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const expr::Expr& e = *exprs[static_cast<std::size_t>(trial) % exprs.size()];
    const Vec x = oracle::random_vec(rng, 3, -1.5, 1.5);
    const auto vg = expr::eval_grad(e, x);
    for (int i = 0; i < 3; ++i) {
      const double fd = oracle::partial_fd([&](const Vec& y) { return expr::eval(e, y); }, x, i);
      worst_ad = std::max(worst_ad, std::abs(fd - vg.gradient(i)) / std::max(1.0, std::abs(fd)));
    }
  }
  for (int trial = 0; trial < 100; ++trial) {
    const expr::Expr& e = *exprs[static_cast<std::size_t>(trial * 7) % exprs.size()];
    const Point p = oracle::random_point(kS2, rng);
    const Tangent u = oracle::random_tangent(kS2, p, rng);
    const double fd = oracle::geodesic_fd([&](const Point& q) { return expr::eval(e, q.coords); },
                                          kS2, p, u.vec);
    const double an = kS2.inner(riemannian_gradient(e, kS2, p), u);
    worst_rg = std::max(worst_rg, std::abs(fd - an) / std::max(1.0, std::abs(fd)));
  }
  for (int trial = 0; trial < 100; ++trial) {
    const Point p = oracle::random_point(kS2, rng);
    const Tangent u = oracle::random_tangent(kS2, p, rng);
    const Multipliers mb{oracle::random_vec(rng, 2, -2, 2), oracle::random_vec(rng, 4, 0, 2)};
    const double rho = 0.5 + trial % 10;
    const double fd = oracle::geodesic_fd(
        [&](const Point& q) { return aug_lagrangian(mixed, q, mb, rho).value; }, kS2, p, u.vec);
    const double an = kS2.inner(aug_lagrangian(mixed, p, mb, rho).gradient, u);
    worst_al = std::max(worst_al, std::abs(fd - an) / std::max(1.0, std::abs(fd)));
  }
  for (int trial = 0; trial < 100; ++trial) {
    const Point p = oracle::random_point(kS2, rng);
    const Tangent u = oracle::random_tangent(kS2, p, rng);
    const double fd = oracle::geodesic_fd(
        [&](const Point& q) { return infeasibility(mixed, q).value; }, kS2, p, u.vec);
    const double an = kS2.inner(infeasibility(mixed, p).gradient, u);
    worst_inf = std::max(worst_inf, std::abs(fd - an) / std::max(1.0, std::abs(fd)));
  }
  chk.expect(worst_ad <= 1e-5, "AD gradient error " + fmt17(worst_ad));
  chk.expect(worst_rg <= 1e-5, "Riemannian gradient error " + fmt17(worst_rg));
  chk.expect(worst_al <= 1e-5, "AL gradient error " + fmt17(worst_al));
  chk.expect(worst_inf <= 1e-5, "infeasibility gradient error " + fmt17(worst_inf));

  char buf[256];
  std::snprintf(buf, sizeof buf,
                "%d families (%d constructed, %d ambiguous resampled), %d reductions, worst FD "
                "errors %.1e/%.1e/%.1e/%.1e",
                families, constructed, resampled, reductions, worst_ad, worst_rg, worst_al,
                worst_inf);
  return buf;
}

}  // namespace

int main() {
  cq::CqConfig cqcfg;
  cqcfg.eps = 1e-2;
  cqcfg.samples = 64;
  cqcfg.seed = 0;

  criterion(1, "paper-cpld-sphere: MFCQ Fails, LICQ Fails, CRCQ EvidenceFails, CPLD EvidenceHolds",
            [&](Check& c) {
              const auto t0 = std::chrono::steady_clock::now();
              const cq::CqReport r = cq::certify(load_problem("paper-cpld-sphere").problem,
                                                 north(), cqcfg);
              const double t = seconds_since(t0);
              expect_verdict(c, r, cq::Condition::MFCQ, cq::Verdict::Fails);
              expect_verdict(c, r, cq::Condition::LICQ, cq::Verdict::Fails);
              expect_verdict(c, r, cq::Condition::CRCQ, cq::Verdict::EvidenceFails);
              expect_verdict(c, r, cq::Condition::CPLD, cq::Verdict::EvidenceHolds);
              c.expect(t < 1.0, "runtime " + fmt17(t) + " s");
              return std::string();
            });

  criterion(2, "paper-crsc-sphere: RCPLD EvidenceFails, CRSC EvidenceHolds, J_-(p) = {1,2,3,4}",
            [&](Check& c) {
              const auto t0 = std::chrono::steady_clock::now();
              const cq::CqReport r = cq::certify(load_problem("paper-crsc-sphere").problem,
                                                 north(), cqcfg);
              const double t = seconds_since(t0);
              expect_verdict(c, r, cq::Condition::RCPLD, cq::Verdict::EvidenceFails);
              expect_verdict(c, r, cq::Condition::CRSC, cq::Verdict::EvidenceHolds);
              c.expect(r.j_minus == std::vector<int>{0, 1, 2, 3}, "J_- differs");
              c.expect(t < 1.0, "runtime " + fmt17(t) + " s");
              return std::string();
            });

  criterion(3, "paper-split-equality: MFCQ Fails, CRCQ EvidenceHolds, QN EvidenceHolds",
            [&](Check& c) {
              const auto t0 = std::chrono::steady_clock::now();
              const cq::CqReport r = cq::certify(load_problem("paper-split-equality").problem,
                                                 north(), cqcfg);
              const double t = seconds_since(t0);
              expect_verdict(c, r, cq::Condition::MFCQ, cq::Verdict::Fails);
              expect_verdict(c, r, cq::Condition::CRCQ, cq::Verdict::EvidenceHolds);
              expect_verdict(c, r, cq::Condition::QN, cq::Verdict::EvidenceHolds);
              c.expect(t < 1.0, "runtime " + fmt17(t) + " s");
              return std::string();
            });

  criterion(4, "equator-lp converges to the analytic KKT point", [&](Check& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const Problem p = load_problem("equator-lp").problem;
    const alm::RunResult r =
        alm::run(p, alm::AlmConfig{}, kS2.make_point(v3(1 / std::sqrt(2.0), 0, 1 / std::sqrt(2.0))));
    const double t = seconds_since(t0);
    const alm::IterationRecord& last = r.trace.back();
    const cq::KktResidual res = cq::kkt_residual(p, last.point, Multipliers{last.lambda, last.mu});
    c.expect(r.verdict == alm::Verdict::KktApprox, "verdict " + alm::to_string(r.verdict));
    c.expect(res.stationarity <= 1e-6, "stationarity " + fmt17(res.stationarity));
    c.expect(res.feasibility <= 1e-6, "feasibility " + fmt17(res.feasibility));
    c.expect(res.complementarity <= 1e-6, "complementarity " + fmt17(res.complementarity));
    c.expect(std::abs(last.mu(0) - 1.0) <= 1e-4, "mu " + fmt17(last.mu(0)));
    c.expect(r.trace.size() <= 50, std::to_string(r.trace.size()) + " outer iterations");
    c.expect(t < 5.0, "runtime " + fmt17(t) + " s");
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu outer iterations, mu = %.12g, z = %.3g", r.trace.size(),
                  last.mu(0), last.point.coords(2));
    return std::string(buf);
  });

  criterion(5, "infeasible-height stops InfeasibleStationary at (0,0,1)", [&](Check& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const ProblemFile pf = load_problem("infeasible-height");
    const alm::RunResult r = alm::run(pf.problem, alm::AlmConfig{}, start_point(pf));
    const double t = seconds_since(t0);
    const double d = (r.trace.back().point.coords - v3(0, 0, 1)).norm();
    c.expect(r.verdict == alm::Verdict::InfeasibleStationary, "verdict " + alm::to_string(r.verdict));
    c.expect(d <= 1e-6, "distance to (0,0,1) " + fmt17(d));
    c.expect(t < 5.0, "runtime " + fmt17(t) + " s");
    char buf[96];
    std::snprintf(buf, sizeof buf, "%zu outer iterations, distance %.2e", r.trace.size(), d);
    return std::string(buf);
  });

  criterion(6, "AKKT reported on every builtin reaching KktApprox", [&](Check& c) {
    int n = 0;
    for (const std::string& name : list_builtins()) {
      const ProblemFile pf = load_problem(name);
      alm::AlmConfig cfg;
      pf.solver.apply(cfg);
      const alm::RunResult r = alm::run(pf.problem, cfg, start_point(pf));
      if (r.verdict != alm::Verdict::KktApprox) continue;
      ++n;
      cq::SeqConfig sc;
      sc.tol = 1e-5;
      const cq::SeqOptReport rep =
          cq::analyze_sequence(pf.problem, r.trace, r.trace.back().point, sc);
      c.expect(rep.akkt, name + ": AKKT not satisfied");
    }
    c.expect(n >= 5, "only " + std::to_string(n) + " fixtures converged");
    return std::to_string(n) + " fixtures";
  });

  criterion(7, "implication chain over the fixtures and 20 random sphere problems", [&](Check& c) {
    int checked = 0;
    for (const std::string& name : list_builtins()) {
      const ProblemFile pf = load_problem(name);
      if (!pf.reference_point) continue;
      const cq::CqReport r =
          cq::certify(pf.problem, pf.problem.manifold.make_point(*pf.reference_point), cqcfg);
      for (const std::string& v : chain_violations(r)) c.expect(false, name + ": " + v);
      ++checked;
    }
    std::mt19937_64 rng(7);
    for (int i = 0; i < 20; ++i) {
      std::vector<std::string> eq, ineq;
      const int m = 2 + static_cast<int>(rng() % 3);
      for (int j = 0; j < m; ++j) ineq.push_back(random_poly(rng));
      if (rng() % 3 == 0) eq.push_back(random_poly(rng));
      const Problem p = make_problem("random-" + std::to_string(i), kS2, kXyz, "z", eq, ineq);
      const cq::CqReport r = cq::certify(p, north(), cqcfg);
      for (const std::string& v : chain_violations(r)) c.expect(false, p.name + ": " + v);
      ++checked;
    }
    return std::to_string(checked) + " problems";
  });

  criterion(8, "oracle equivalence (LP vs grid, Caratheodory, finite differences)", linalg_oracle);

  criterion(9, "bounded duals where QN holds", [&](Check& c) {
    int n = 0;
    double worst = 0.0;
    for (const std::string& name : list_builtins()) {
      const ProblemFile pf = load_problem(name);
      if (!pf.reference_point) continue;
      const Point ref = pf.problem.manifold.make_point(*pf.reference_point);
      if (cq::qn_evidence(pf.problem, ref, cqcfg).verdict != cq::Verdict::EvidenceHolds) continue;
      alm::AlmConfig cfg;
      pf.solver.apply(cfg);
      const alm::RunResult r = alm::run(pf.problem, cfg, start_point(pf));
      if (r.verdict != alm::Verdict::KktApprox) continue;
      ++n;
      const cq::SeqOptReport rep = cq::analyze_sequence(pf.problem, r.trace, r.trace.back().point);
      worst = std::max(worst, rep.dual_sup);
      c.expect(rep.dual_sup <= 1e4, name + ": sup |(lambda, mu)| = " + fmt17(rep.dual_sup));
      c.expect(rep.dual_bounded, name + ": dual_bounded is false");
    }
    c.expect(n >= 3, "only " + std::to_string(n) + " fixtures qualified");
    char buf[96];
    std::snprintf(buf, sizeof buf, "%d fixtures, largest dual sup %.6g", n, worst);
    return std::string(buf);
  });

  criterion(10, "identical solve runs write byte-identical traces", [&](Check& c) {
    const fs::path dir = fs::temp_directory_path() / "ralm-acceptance-determinism";
    fs::remove_all(dir);
    int n = 0;
    for (const std::string& name : list_builtins()) {
      std::string first;
      for (int run = 0; run < 2; ++run) {
        std::ostringstream out, err;
        cli::run({"solve", "--problem", name, "--out", dir.string()}, out, err);
        std::ifstream in(dir / (name + ".trace.csv"), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        if (run == 0) first = ss.str();
        else c.expect(!first.empty() && first == ss.str(), name + ": traces differ");
      }
      ++n;
    }
    fs::remove_all(dir);
    return std::to_string(n) + " fixtures";
  });

  std::printf("%d of 10 criteria failed\n", failed);
  return failed;
}
