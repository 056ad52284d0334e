#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ralm/error.hpp"
#include "ralm/inner_solver.hpp"
#include "ralm/problem.hpp"

namespace ralm::alm {

/// eps_k = max(initial * factor^(k-1), floor) or a fixed list whose last entry
/// repeats.
struct EpsSchedule {
  enum class Kind { Geometric, Fixed };
  Kind kind = Kind::Geometric;
  double initial = 1e-1;
  double factor = 0.5;
  std::vector<double> values;

  static EpsSchedule geometric(double initial, double factor);
  static EpsSchedule fixed(std::vector<double> values);

  /// k is 1-based. `floor` applies to the geometric form only.
  double at(int k, double floor) const;
};

struct AlmConfig {
  double tau = 0.5;
  double gamma = 10.0;
  double lambda_min = -1e6;
  double lambda_max = 1e6;
  double mu_max = 1e6;
  double rho1 = 1.0;
  EpsSchedule eps_schedule;
  int max_outer = 200;
  double kkt_tol = 1e-6;
  double feas_tol = 1e-6;
  InnerConfig inner;

  void validate() const;
  double eps(int k) const { return eps_schedule.at(k, kkt_tol / 10.0); }
};

struct IterationRecord {
  int k = 0;
  Point point;
  Vec lambda;
  Vec mu;
  Vec lambda_bar;
  Vec mu_bar;
  double rho = 0.0;
  double eps = 0.0;
  Vec V;
  double h_norm = 0.0;
  InnerStatus inner_status = InnerStatus::Converged;
  int inner_iterations = 0;
  double al_grad_norm = 0.0;
};

using Trace = std::vector<IterationRecord>;

enum class Verdict { KktApprox, InfeasibleStationary, InnerFailure, IterLimit };

std::string to_string(Verdict v);

struct RunResult {
  Trace trace;
  Verdict verdict = Verdict::IterLimit;
  /// ||grad L(p, lambda, mu)|| at the last iterate.
  double stationarity = 0.0;
  double violation = 0.0;
  double complementarity = 0.0;
  double infeasibility_grad_norm = 0.0;
};

/// lambda = lambda_bar + rho h, mu = [mu_bar + rho g]_+.
Multipliers update_multipliers(const Multipliers& mult_bar, double rho, const Vec& h,
                               const Vec& g);

/// rho_{k+1}: unchanged when k = 1 or max(||h_k||, ||V_k||) <= tau max(||h_{k-1}||, ||V_{k-1}||),
/// multiplied by gamma otherwise. Arguments are (||h||, ||V||) pairs.
double penalty_update(std::pair<double, double> prev, std::pair<double, double> curr, double rho,
                      double tau, double gamma, int k);

/// Projection onto [lambda_min, lambda_max]^s x [0, mu_max]^m.
Multipliers safeguard(const Multipliers& mult, const AlmConfig& cfg);

/// The safeguarded augmented Lagrangian loop. Each inner solve warm-starts from
/// the previous iterate.
RunResult run(const Problem& prob, const AlmConfig& cfg, const Point& start,
              const Multipliers& seed);
RunResult run(const Problem& prob, const AlmConfig& cfg, const Point& start);

/// CSV with a header row; vectors are ';'-joined, numbers use 17 significant
/// digits.
void write_trace_csv(std::ostream& out, const Trace& trace);
std::string trace_csv(const Trace& trace);

/// Column names of the trace CSV.
const std::vector<std::string>& trace_columns();

/// The CSV does not match the expected layout or the problem's dimensions.
class TraceError : public Error {
 public:
  using Error::Error;
};

/// Inverse of write_trace_csv. Points are taken verbatim (no renormalization).
/// Throws TraceError on a malformed header, a short or long row, or vector
/// lengths that disagree with `prob`.
Trace read_trace_csv(std::istream& in, const Problem& prob);

}  // namespace ralm::alm
