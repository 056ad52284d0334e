#include "ralm/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "ralm/alm.hpp"
#include "ralm/cq.hpp"
#include "ralm/format.hpp"
#include "ralm/problem_file.hpp"
#include "ralm/report.hpp"

namespace ralm::cli {

namespace {

struct Flags {
  std::string problem;
  std::string out = ".";
  std::string trace;
  std::string point;
  std::optional<double> kkt_tol, feas_tol, rho1, tau, gamma, eps0, cq_eps;
  std::optional<int> max_outer, cq_samples;
  std::optional<std::uint64_t> seed;
};

class Usage : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

alm::AlmConfig solver_config(const ProblemFile& pf, const Flags& f) {
  alm::AlmConfig cfg;
  pf.solver.apply(cfg);
  if (f.kkt_tol) cfg.kkt_tol = *f.kkt_tol;
  if (f.feas_tol) cfg.feas_tol = *f.feas_tol;
  if (f.rho1) cfg.rho1 = *f.rho1;
  if (f.tau) cfg.tau = *f.tau;
  if (f.gamma) cfg.gamma = *f.gamma;
  if (f.eps0) {
    cfg.eps_schedule = alm::EpsSchedule::geometric(*f.eps0, cfg.eps_schedule.kind ==
                                                                    alm::EpsSchedule::Kind::Geometric
                                                                ? cfg.eps_schedule.factor
                                                                : 0.5);
  }
  if (f.max_outer) cfg.max_outer = *f.max_outer;
  try {
    cfg.validate();
  } catch (const PreconditionError& e) {
    throw Usage(e.what());
  }
  return cfg;
}

cq::CqConfig cq_config(const Flags& f) {
  cq::CqConfig cfg;
  if (f.cq_eps) cfg.eps = *f.cq_eps;
  if (f.cq_samples) cfg.samples = *f.cq_samples;
  if (f.seed) cfg.seed = *f.seed;
  if (!(cfg.eps > 0.0)) throw Usage("--cq-eps must be positive");
  if (cfg.samples < 1) throw Usage("--cq-samples must be >= 1");
  return cfg;
}

ProblemFile require_problem(const Flags& f) {
  if (f.problem.empty()) throw Usage("--problem is required");
  return load_problem(f.problem);
}

int verdict_exit(alm::Verdict v) {
  switch (v) {
    case alm::Verdict::KktApprox:
      return kOk;
    case alm::Verdict::InfeasibleStationary:
      return kInfeasibleStationary;
    default:
      return kSolverFailure;
  }
}

std::string write_trace(const ProblemFile& pf, const Flags& f, const alm::Trace& trace) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(f.out, ec);
  const fs::path path = fs::path(f.out) / (pf.problem.name + ".trace.csv");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw LoadError("cannot write '" + path.string() + "'");
  alm::write_trace_csv(os, trace);
  return path.string();
}

int cmd_solve(const Flags& f, std::ostream& out) {
  const ProblemFile pf = require_problem(f);
  const alm::AlmConfig cfg = solver_config(pf, f);
  const alm::RunResult res = alm::run(pf.problem, cfg, start_point(pf));
  const std::string path = write_trace(pf, f, res.trace);
  out << report::solve_summary(pf.problem, res, path).dump(2) << '\n';
  return verdict_exit(res.verdict);
}

int cmd_certify(const Flags& f, std::ostream& out, std::ostream& err) {
  const ProblemFile pf = require_problem(f);
  const cq::CqConfig cfg = cq_config(f);
  const Manifold& M = pf.problem.manifold;
  Point p;
  if (f.point == "solve-first" || (f.point.empty() && !pf.reference_point)) {
    const alm::RunResult res = alm::run(pf.problem, solver_config(pf, f), start_point(pf));
    if (res.verdict != alm::Verdict::KktApprox) {
      err << "error: solve-first ended with " << alm::to_string(res.verdict) << '\n';
      return kSolverFailure;
    }
    p = res.trace.back().point;
  } else if (!f.point.empty()) {
    Vec coords;
    try {
      coords = split_vec(f.point, ',');
    } catch (const std::invalid_argument& e) {
      throw Usage(std::string("--point: ") + e.what());
    }
    if (coords.size() != M.ambient_dim()) {
      throw Usage("--point needs " + std::to_string(M.ambient_dim()) + " coordinates");
    }
    p = M.make_point(coords);
  } else {
    p = M.make_point(*pf.reference_point);
  }
  const double viol = max_violation(constraint_values(pf.problem, p));
  if (viol > cfg.tol_act) {
    err << "error: point violates the constraints by " << fmt17(viol) << '\n';
    return kInfeasiblePoint;
  }
  const cq::CqReport rep = cq::certify(pf.problem, p, cfg);
  out << report::cq_report(pf.problem, rep).dump(2) << '\n';
  return kOk;
}

int cmd_analyze(const Flags& f, std::ostream& out, std::ostream& err) {
  const ProblemFile pf = require_problem(f);
  if (f.trace.empty()) throw Usage("--trace is required");
  std::ifstream in(f.trace, std::ios::binary);
  if (!in) {
    err << "error: cannot read '" << f.trace << "'\n";
    return kTraceMismatch;
  }
  alm::Trace trace;
  try {
    trace = alm::read_trace_csv(in, pf.problem);
  } catch (const alm::TraceError& e) {
    err << "error: " << e.what() << '\n';
    return kTraceMismatch;
  }
  Point limit = trace.back().point;
  if (!f.point.empty()) {
    try {
      limit = pf.problem.manifold.make_point(split_vec(f.point, ','));
    } catch (const std::exception& e) {
      throw Usage(std::string("--point: ") + e.what());
    }
  }
  const cq::SeqOptReport rep = cq::analyze_sequence(pf.problem, trace, limit);
  const alm::IterationRecord& last = trace.back();
  const cq::KktResidual res =
      cq::kkt_residual(pf.problem, last.point, Multipliers{last.lambda, last.mu});
  report::Json j = report::seq_report(rep, res);
  j["problem"] = pf.problem.name;
  out << j.dump(2) << '\n';
  return kOk;
}

int cmd_list(std::ostream& out) {
  for (const std::string& name : list_builtins()) {
    const ProblemFile pf = load_problem(name);
    out << name << '\t' << pf.problem.manifold.to_string() << "\ts=" << pf.problem.num_equalities()
        << "\tm=" << pf.problem.num_inequalities() << '\n';
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Safeguarded augmented Lagrangian solver and constraint-qualification diagnostics",
               "ralm"};
  app.require_subcommand(1);
  Flags f;
  app.add_option("--problem", f.problem, "Problem file path or builtin name");
  app.add_option("--out", f.out, "Directory for trace CSV files");
  app.add_option("--trace", f.trace, "Trace CSV to analyze");
  app.add_option("--point", f.point, "Point as x,y,z or 'solve-first'");
  app.add_option("--kkt-tol", f.kkt_tol);
  app.add_option("--feas-tol", f.feas_tol);
  app.add_option("--rho1", f.rho1);
  app.add_option("--tau", f.tau);
  app.add_option("--gamma", f.gamma);
  app.add_option("--eps0", f.eps0);
  app.add_option("--max-outer", f.max_outer);
  app.add_option("--cq-eps", f.cq_eps);
  app.add_option("--cq-samples", f.cq_samples);
  app.add_option("--seed", f.seed);
  CLI::App* solve = app.add_subcommand("solve", "Run the augmented Lagrangian method");
  CLI::App* certify = app.add_subcommand("certify", "Check constraint qualifications at a point");
  CLI::App* analyze = app.add_subcommand("analyze", "Sequential optimality report for a trace");
  CLI::App* list = app.add_subcommand("list-problems", "List builtin problems");
  for (CLI::App* sub : {solve, certify, analyze, list}) sub->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kUsage;
  }

  try {
    if (solve->parsed()) return cmd_solve(f, out);
    if (certify->parsed()) return cmd_certify(f, out, err);
    if (analyze->parsed()) return cmd_analyze(f, out, err);
    return cmd_list(out);
  } catch (const Usage& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kLoadError;
  }
}

}  // namespace ralm::cli
