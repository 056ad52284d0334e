#include "ralm/report.hpp"

namespace ralm::report {

Json indices(const std::vector<int>& zero_based) {
  Json out = Json::array();
  for (int i : zero_based) out.push_back(i + 1);
  return out;
}

Json vec(const Vec& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

namespace {

Json witness(const cq::Witness& w) {
  Json out = Json::object();
  if (w.certificate) {
    out["alpha"] = vec(w.certificate->alpha);
    out["beta"] = vec(w.certificate->beta);
    out["residual"] = w.certificate->residual;
  }
  if (w.lambda) out["lambda"] = vec(*w.lambda);
  if (w.mu) out["mu"] = vec(*w.mu);
  if (!w.I.empty() || !w.J.empty()) {
    out["equalities"] = indices(w.I);
    out["inequalities"] = indices(w.J);
  }
  if (w.sample) out["sample"] = vec(*w.sample);
  if (w.rank_at_p >= 0) out["rank_at_p"] = w.rank_at_p;
  if (w.rank_at_q >= 0) out["rank_at_q"] = w.rank_at_q;
  if (!w.note.empty()) out["note"] = w.note;
  return out;
}

}  // namespace

Json cq_report(const Problem& prob, const cq::CqReport& rep) {
  Json out;
  out["problem"] = prob.name;
  out["point"] = vec(rep.point.coords);
  out["active"] = indices(rep.active);
  out["j_minus"] = indices(rep.j_minus);
  Json conds = Json::array();
  for (const cq::ConditionReport& c : rep.entries) {
    Json e;
    e["condition"] = cq::to_string(c.condition);
    e["verdict"] = cq::to_string(c.verdict);
    e["witness"] = witness(c.witness);
    if (c.sample_count > 0) {
      e["eps"] = c.eps;
      e["samples"] = c.sample_count;
      e["seed"] = c.seed;
    }
    conds.push_back(std::move(e));
  }
  out["conditions"] = std::move(conds);
  return out;
}

Json seq_report(const cq::SeqOptReport& rep, const cq::KktResidual& last) {
  Json out;
  out["length"] = rep.length;
  out["window_start"] = rep.window_start + 1;
  out["limit_feasibility"] = rep.limit_feasibility;
  out["limit_distance"] = rep.limit_distance;
  out["akkt"] = {{"satisfied", rep.akkt},
                 {"grad_norms", rep.grad_norms},
                 {"complementarity_ok", rep.complementarity_ok}};
  Json viol = Json::array();
  for (const cq::SignViolation& v : rep.sign_violations) {
    viol.push_back({{"k", v.k}, {"index", v.index + 1}, {"kind", v.kind}});
  }
  out["pakkt"] = {{"satisfied", rep.pakkt},
                  {"gamma_k", rep.gamma},
                  {"sign_checks_applied", rep.sign_checks_applied},
                  {"sign_condition_violations", viol}};
  out["scaled_pakkt"] = {{"satisfied", rep.scaled_pakkt},
                         {"scaled_grad_norms", rep.scaled_grad_norms},
                         {"sign_checks_applied", rep.sign_checks_applied},
                         {"sign_condition_violations", viol}};
  out["dual_bounded"] = rep.dual_bounded;
  out["dual_sup"] = rep.dual_sup;
  out["residuals"] = {{"stationarity", last.stationarity},
                      {"feasibility", last.feasibility},
                      {"complementarity", last.complementarity}};
  out["warnings"] = rep.warnings;
  return out;
}

Json solve_summary(const Problem& prob, const alm::RunResult& res, const std::string& trace_path) {
  Json out;
  out["problem"] = prob.name;
  out["verdict"] = alm::to_string(res.verdict);
  out["outer_iterations"] = res.trace.size();
  if (!res.trace.empty()) {
    const alm::IterationRecord& last = res.trace.back();
    out["point"] = vec(last.point.coords);
    out["lambda"] = vec(last.lambda);
    out["mu"] = vec(last.mu);
    out["rho"] = last.rho;
    out["inner_status"] = to_string(last.inner_status);
  }
  out["residuals"] = {{"stationarity", res.stationarity},
                      {"feasibility", res.violation},
                      {"complementarity", res.complementarity},
                      {"infeasibility_gradient", res.infeasibility_grad_norm}};
  out["trace"] = trace_path;
  return out;
}

}  // namespace ralm::report
