#include "maxlab/report.hpp"

#include <fstream>

namespace maxlab {

ojson to_json(const CheckReport& rep) {
  ojson j;
  j["check_name"] = rep.check_name;
  j["points_tested"] = rep.points_tested;
  j["ties_excluded"] = rep.ties_excluded;
  j["max_violation"] = rep.max_violation;
  j["violation_quantiles"] = {{"q50", rep.q50}, {"q90", rep.q90}, {"q99", rep.q99},
                              {"q100", rep.q100}};
  j["tolerance_used"] = rep.tolerance_used;
  j["pass"] = rep.pass;
  ojson stats = ojson::object();
  for (const auto& [k, v] : rep.stats) stats[k] = v;
  j["stats"] = stats;
  return j;
}

ojson to_json(const StabilityEntry& st) {
  ojson j;
  j["name"] = st.name;
  j["metric_h"] = st.metric_h;
  j["metric_h2"] = st.metric_h2;
  j["criterion"] = st.criterion;
  j["pass"] = st.pass;
  return j;
}

ojson to_json(const SuiteResult& res) {
  ojson j;
  j["checks"] = ojson::array();
  for (const auto& r : res.reports) j["checks"].push_back(to_json(r));
  j["stability"] = ojson::array();
  for (const auto& s : res.stability) j["stability"].push_back(to_json(s));
  j["pass"] = res.pass;
  return j;
}

ojson to_json(const ContinuityRun& run) {
  ojson j;
  j["operator"] = to_string(run.params.kind);
  j["alpha"] = run.params.alpha;
  j["sequence"] = to_string(run.kind);
  j["j_values"] = run.j_values;
  j["w11_gap"] = run.w11_gap;
  j["e_j"] = run.e_j;
  j["modulus_gap"] = run.modulus_gap;
  j["tail_j"] = run.tail_j;
  j["deltas"] = run.deltas;
  j["delta_curve"] = run.delta_curve;
  j["triangle"] = ojson::array();
  for (const auto& row : run.triangle) {
    ojson r;
    r["j"] = row.j;
    r["delta"] = row.delta;
    r["term1"] = row.term1;
    r["term2"] = row.term2;
    r["term3"] = row.term3;
    r["direct"] = row.direct;
    j["triangle"].push_back(r);
  }
  j["small_radius"] = ojson::array();
  for (const auto& row : run.small_radius) {
    ojson r;
    r["delta"] = row.delta;
    r["measure_E"] = row.measure_E;
    r["measure_D"] = row.measure_D;
    j["small_radius"].push_back(r);
  }
  j["tau_floor"] = run.tau_floor;
  j["lambda0"] = run.lambda0;
  j["min_K_maximal"] = run.min_K_maximal;
  j["tau_ineq_used"] = run.tau_ineq_used;
  j["c_emp"] = run.c_emp;
  ojson asserts = ojson::array();
  for (const auto& [name, ok] : continuity_assertions(run)) {
    ojson a;
    a["name"] = name;
    a["pass"] = ok;
    asserts.push_back(a);
  }
  j["assertions"] = asserts;
  return j;
}

std::string report_string(const ojson& config, const ojson& payload) {
  ojson root;
  root["version"] = kVersion;
  root["config"] = config;
  root["report"] = payload;
  return root.dump(2) + "\n";
}

void write_report(const std::string& path, const ojson& config, const ojson& payload) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) fail(errc::io_failure, "cannot write: " + path);
  os << report_string(config, payload);
  if (!os) fail(errc::io_failure, "write failed: " + path);
}

void write_continuity_csv(const ContinuityRun& run, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) fail(errc::io_failure, "cannot write: " + path);
  os << "j,w11_gap,e_j,modulus_gap,tail_j\n";
  os.precision(17);
  for (std::size_t i = 0; i < run.j_values.size(); ++i)
    os << run.j_values[i] << ',' << run.w11_gap[i] << ',' << run.e_j[i] << ','
       << run.modulus_gap[i] << ',' << run.tail_j[i] << '\n';
  if (!os) fail(errc::io_failure, "write failed: " + path);
}

}  // namespace maxlab
