#include "ralm/alm.hpp"

#include <algorithm>
#include <istream>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ralm/error.hpp"
#include "ralm/format.hpp"

namespace ralm::alm {

EpsSchedule EpsSchedule::geometric(double initial, double factor) {
  EpsSchedule s;
  s.kind = Kind::Geometric;
  s.initial = initial;
  s.factor = factor;
  return s;
}

EpsSchedule EpsSchedule::fixed(std::vector<double> values) {
  EpsSchedule s;
  s.kind = Kind::Fixed;
  s.values = std::move(values);
  return s;
}

double EpsSchedule::at(int k, double floor) const {
  if (k < 1) throw PreconditionError("eps schedule index must be >= 1");
  if (kind == Kind::Fixed) {
    if (values.empty()) throw PreconditionError("fixed eps schedule is empty");
    return values[std::min<std::size_t>(static_cast<std::size_t>(k - 1), values.size() - 1)];
  }
  return std::max(initial * std::pow(factor, k - 1), floor);
}

void AlmConfig::validate() const {
  if (!(tau >= 0.0 && tau < 1.0)) throw PreconditionError("alm: tau must lie in [0,1)");
  if (!(gamma > 1.0)) throw PreconditionError("alm: gamma must be > 1");
  if (!(lambda_min <= lambda_max)) throw PreconditionError("alm: lambda_min > lambda_max");
  if (!(mu_max > 0.0)) throw PreconditionError("alm: mu_max must be > 0");
  if (!(rho1 > 0.0)) throw PreconditionError("alm: rho1 must be > 0");
  if (max_outer < 1) throw PreconditionError("alm: max_outer must be >= 1");
  if (!(kkt_tol >= 0.0) || !(feas_tol >= 0.0)) throw PreconditionError("alm: negative tolerance");
  if (eps_schedule.kind == EpsSchedule::Kind::Geometric) {
    if (!(eps_schedule.initial > 0.0)) throw PreconditionError("alm: eps0 must be > 0");
    if (!(eps_schedule.factor > 0.0 && eps_schedule.factor < 1.0)) {
      throw PreconditionError("alm: eps factor must lie in (0,1)");
    }
  } else {
    if (eps_schedule.values.empty()) throw PreconditionError("alm: fixed eps schedule is empty");
    for (double v : eps_schedule.values) {
      if (!(v >= 0.0)) throw PreconditionError("alm: fixed eps entries must be >= 0");
    }
  }
  inner.validate();
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::KktApprox:
      return "KktApprox";
    case Verdict::InfeasibleStationary:
      return "InfeasibleStationary";
    case Verdict::InnerFailure:
      return "InnerFailure";
    case Verdict::IterLimit:
      return "IterLimit";
  }
  return "?";
}

Multipliers update_multipliers(const Multipliers& mult_bar, double rho, const Vec& h,
                               const Vec& g) {
  if (!(rho > 0.0)) throw PreconditionError("update_multipliers: rho must be > 0");
  if (h.size() != mult_bar.lambda.size() || g.size() != mult_bar.mu.size()) {
    throw DimensionError("update_multipliers: dimension mismatch");
  }
  Multipliers out;
  out.lambda = mult_bar.lambda + rho * h;
  out.mu = (mult_bar.mu + rho * g).cwiseMax(0.0);
  return out;
}

double penalty_update(std::pair<double, double> prev, std::pair<double, double> curr, double rho,
                      double tau, double gamma, int k) {
  if (k < 1) throw PreconditionError("penalty_update: k must be >= 1");
  if (k == 1) return rho;
  const double lhs = std::max(curr.first, curr.second);
  const double rhs = tau * std::max(prev.first, prev.second);
  return lhs <= rhs ? rho : gamma * rho;
}

Multipliers safeguard(const Multipliers& mult, const AlmConfig& cfg) {
  Multipliers out;
  out.lambda = mult.lambda.cwiseMax(cfg.lambda_min).cwiseMin(cfg.lambda_max);
  out.mu = mult.mu.cwiseMax(0.0).cwiseMin(cfg.mu_max);
  // Turn -0.0 into +0.0.
  for (Eigen::Index j = 0; j < out.mu.size(); ++j) out.mu(j) += 0.0;
  for (Eigen::Index i = 0; i < out.lambda.size(); ++i) out.lambda(i) += 0.0;
  return out;
}

RunResult run(const Problem& prob, const AlmConfig& cfg, const Point& start,
              const Multipliers& seed) {
  cfg.validate();
  if (seed.lambda.size() != prob.num_equalities() || seed.mu.size() != prob.num_inequalities()) {
    throw DimensionError("alm: seed multipliers do not match the problem");
  }
  if ((seed.lambda.array() < cfg.lambda_min).any() || (seed.lambda.array() > cfg.lambda_max).any() ||
      (seed.mu.array() < 0.0).any() || (seed.mu.array() > cfg.mu_max).any()) {
    throw PreconditionError("alm: seed multipliers lie outside the safeguard boxes");
  }
  if (!prob.manifold.contains(start.coords, 1e-8)) {
    throw PreconditionError("alm: start point is not on the manifold");
  }

  RunResult result;
  Multipliers bar = seed;
  double rho = cfg.rho1;
  Point p = start;
  std::pair<double, double> prev{0.0, 0.0};

  for (int k = 1; k <= cfg.max_outer; ++k) {
    InnerConfig icfg = cfg.inner;
    icfg.grad_tol = cfg.eps(k);
    const Objective phi = [&](const Point& q) { return aug_lagrangian(prob, q, bar, rho); };
    const InnerResult inner = minimize(phi, prob.manifold, p, icfg);
    p = inner.point;

    IterationRecord rec;
    rec.k = k;
    rec.point = p;
    rec.lambda_bar = bar.lambda;
    rec.mu_bar = bar.mu;
    rec.rho = rho;
    rec.eps = icfg.grad_tol;
    rec.inner_status = inner.status;
    rec.inner_iterations = inner.iterations;
    rec.al_grad_norm = inner.grad_norm;

    if (inner.status != InnerStatus::Converged) {
      // Keep the record shape complete even though the step failed.
      rec.lambda = bar.lambda;
      rec.mu = bar.mu;
      rec.V = Vec::Zero(bar.mu.size());
      try {
        rec.h_norm = constraint_values(prob, p).h.norm();
      } catch (const DomainError&) {
        rec.h_norm = std::nan("");
      }
      result.trace.push_back(std::move(rec));
      result.verdict = Verdict::InnerFailure;
      return result;
    }

    const FirstOrder fo = evaluate(prob, p);
    const Multipliers mult = update_multipliers(bar, rho, fo.h, fo.g);
    const Vec V = (mult.mu - bar.mu) / rho;
    rec.lambda = mult.lambda;
    rec.mu = mult.mu;
    rec.V = V;
    rec.h_norm = fo.h.norm();
    result.trace.push_back(rec);

    const ConstraintValues cv{fo.h, fo.g};
    result.stationarity = lagrangian_gradient(fo, mult).norm();
    result.violation = max_violation(cv);
    result.complementarity = 0.0;
    for (Eigen::Index j = 0; j < fo.g.size(); ++j) {
      result.complementarity = std::max(result.complementarity, std::min(mult.mu(j), -fo.g(j)));
    }
    result.infeasibility_grad_norm = infeasibility(fo).gradient.norm();

    if (result.stationarity <= cfg.kkt_tol && result.violation <= cfg.feas_tol &&
        result.complementarity <= cfg.kkt_tol) {
      result.verdict = Verdict::KktApprox;
      return result;
    }
    if (result.violation > cfg.feas_tol && result.infeasibility_grad_norm <= cfg.kkt_tol) {
      result.verdict = Verdict::InfeasibleStationary;
      return result;
    }

    const std::pair<double, double> curr{rec.h_norm, V.norm()};
    rho = penalty_update(prev, curr, rho, cfg.tau, cfg.gamma, k);
    prev = curr;
    bar = safeguard(mult, cfg);
  }
  result.verdict = Verdict::IterLimit;
  return result;
}

RunResult run(const Problem& prob, const AlmConfig& cfg, const Point& start) {
  return run(prob, cfg, start, Multipliers::zeros(prob));
}

const std::vector<std::string>& trace_columns() {
  static const std::vector<std::string> cols = {
      "k",      "point", "lambda", "mu",     "lambda_bar",   "mu_bar",           "rho",
      "eps",    "V",     "h_norm", "inner_status", "inner_iterations", "al_grad_norm"};
  return cols;
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
  const auto& cols = trace_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const IterationRecord& r : trace) {
    out << r.k << ',' << join_vec(r.point.coords) << ',' << join_vec(r.lambda) << ','
        << join_vec(r.mu) << ',' << join_vec(r.lambda_bar) << ',' << join_vec(r.mu_bar) << ','
        << fmt17(r.rho) << ',' << fmt17(r.eps) << ',' << join_vec(r.V) << ',' << fmt17(r.h_norm)
        << ',' << to_string(r.inner_status) << ',' << r.inner_iterations << ','
        << fmt17(r.al_grad_norm) << '\n';
  }
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

InnerStatus inner_status_from(const std::string& s) {
  for (InnerStatus st : {InnerStatus::Converged, InnerStatus::IterLimit, InnerStatus::StepFloor,
                         InnerStatus::DomainFailure}) {
    if (to_string(st) == s) return st;
  }
  throw std::invalid_argument("unknown inner status '" + s + "'");
}

}  // namespace

Trace read_trace_csv(std::istream& in, const Problem& prob) {
  const auto& cols = trace_columns();
  std::string line;
  if (!std::getline(in, line)) throw TraceError("trace is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (split_fields(line) != cols) throw TraceError("trace header does not match the expected columns");

  const Eigen::Index n = prob.manifold.ambient_dim();
  const Eigen::Index s = prob.num_equalities();
  const Eigen::Index m = prob.num_inequalities();
  Trace trace;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> f = split_fields(line);
    const std::string at = "trace row " + std::to_string(row) + ": ";
    if (f.size() != cols.size()) {
      throw TraceError(at + std::to_string(f.size()) + " columns, expected " +
                       std::to_string(cols.size()));
    }
    IterationRecord r;
    try {
      auto vec = [&](const std::string& text, Eigen::Index len, const char* what) {
        Vec v = split_vec(text);
        if (v.size() != len) {
          throw TraceError(at + what + " has " + std::to_string(v.size()) + " entries, expected " +
                           std::to_string(len));
        }
        return v;
      };
      r.k = static_cast<int>(parse_double(f[0]));
      r.point = Point{vec(f[1], n, "point")};
      r.lambda = vec(f[2], s, "lambda");
      r.mu = vec(f[3], m, "mu");
      r.lambda_bar = vec(f[4], s, "lambda_bar");
      r.mu_bar = vec(f[5], m, "mu_bar");
      r.rho = parse_double(f[6]);
      r.eps = parse_double(f[7]);
      r.V = vec(f[8], m, "V");
      r.h_norm = parse_double(f[9]);
      r.inner_status = inner_status_from(f[10]);
      r.inner_iterations = static_cast<int>(parse_double(f[11]));
      r.al_grad_norm = parse_double(f[12]);
    } catch (const std::invalid_argument& e) {
      throw TraceError(at + e.what());
    }
    trace.push_back(std::move(r));
  }
  if (trace.empty()) throw TraceError("trace has no rows");
  return trace;
}

std::string trace_csv(const Trace& trace) {
  std::ostringstream os;
  write_trace_csv(os, trace);
  return os.str();
}

}  // namespace ralm::alm
