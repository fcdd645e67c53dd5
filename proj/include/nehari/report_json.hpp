#pragma once

#include <json.hpp>

#include "nehari/oracle.hpp"

namespace nehari {

/// Scenario metadata attached to serialized reports.
struct ReportMeta {
  std::string case_id;
  std::string f_expr;
  std::string theta_expr;
  double a = 1.0;
  std::string corrector;
};

inline nlohmann::json report_json(const DerivativeReport& rep, const ReportMeta& meta,
                                  const ProblemSpec& spec) {
  nlohmann::json j;
  j["report_version"] = 1;
  j["source"] = "shapederiv";
  j["problem"] = {
      {"kind", spec.kind == ProblemKind::eigenvalue ? "eigenvalue" : "lane_emden"},
      {"p", spec.p},
      {"q", spec.q},
      {"level", spec.level},
  };
  j["scenario"] = {
      {"case", meta.case_id}, {"f", meta.f_expr},           {"theta", meta.theta_expr},
      {"a", meta.a},          {"corrector", meta.corrector},
  };
  j["first_order"] = rep.first_order;
  j["second_order"] = rep.second_order;
  j["q_u"] = rep.q_u;
  j["q_v"] = rep.q_v;
  j["vv0"] = rep.vv0;
  j["gamma_star"] = rep.gamma_star;
  j["uu0"] = rep.uu0;
  j["uv0"] = rep.uv0;
  j["fast_path"] = to_string(rep.fast_path);
  j["degenerate_corrector"] = rep.degenerate_corrector;
  j["fd_jacobian"] = rep.fd_jacobian;
  j["terms"] = rep.terms;
  return j;
}

/// Finite-difference oracle results in the same shape, for diffing against
/// assembled reports.
inline nlohmann::json oracle_report_json(const FdDerivatives& fd, double step,
                                         const ReportMeta& meta, const ProblemSpec& spec) {
  nlohmann::json j;
  j["report_version"] = 1;
  j["source"] = "fd_oracle";
  j["problem"] = {
      {"kind", spec.kind == ProblemKind::eigenvalue ? "eigenvalue" : "lane_emden"},
      {"p", spec.p},
      {"q", spec.q},
      {"level", spec.level},
  };
  j["scenario"] = {
      {"case", meta.case_id}, {"f", meta.f_expr},           {"theta", meta.theta_expr},
      {"a", meta.a},          {"corrector", meta.corrector},
  };
  j["first_order"] = fd.d1;
  j["second_order"] = fd.d2;
  j["terms"] = {{"fd_step", step}};
  return j;
}

}  // namespace nehari
