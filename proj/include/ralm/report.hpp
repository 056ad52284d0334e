#pragma once

#include <json.hpp>

#include "ralm/alm.hpp"
#include "ralm/cq.hpp"
#include "ralm/problem.hpp"

namespace ralm::report {

using Json = nlohmann::ordered_json;

/// Constraint indices in reports are 1-based.
Json indices(const std::vector<int>& zero_based);
Json vec(const Vec& v);

Json cq_report(const Problem& prob, const cq::CqReport& rep);
Json seq_report(const cq::SeqOptReport& rep, const cq::KktResidual& last);
Json solve_summary(const Problem& prob, const alm::RunResult& res, const std::string& trace_path);

}  // namespace ralm::report
