#include "maxlab/corpus.hpp"

#include <algorithm>
#include <cmath>

namespace maxlab {

Domain corpus_domain(int d, double h, double half_side) {
  auto n = static_cast<std::int64_t>(std::llround(2.0 * half_side / h)) + 1;
  return make_domain(d, n, h, -half_side);
}

GridFunction corpus_function(const std::string& name, int d, double h, double half_side) {
  Domain dom = corpus_domain(d, h, half_side);
  ShapeParams p;
  TestFunctionKind kind = test_function_kind_from_name(name);
  switch (kind) {
    case TestFunctionKind::triangle:
      break;
    case TestFunctionKind::indicator_ball:
      p.radius = 1.0;
      break;
    case TestFunctionKind::gaussian_bump:
      p.sigma = 0.25;
      break;
    case TestFunctionKind::two_bumps:
      p.sigma = 0.2;
      p.separation = 1.0;
      break;
  }
  return make_test_function(kind, dom, p);
}

const std::vector<std::string>& corpus_smooth_names() {
  static const std::vector<std::string> names = {"gaussian_bump", "two_bumps"};
  return names;
}

const std::vector<std::string>& all_check_names() {
  static const std::vector<std::string> names = {
      "kinnunen",  "refined_ks", "luiro",      "poincare",
      "sobolev_ratio", "weak_type",  "delta_bound", "scaling"};
  return names;
}

namespace {

bool selected(const SuiteConfig& cfg, const std::string& check) {
  if (cfg.checks.empty()) return true;
  return std::find(cfg.checks.begin(), cfg.checks.end(), check) != cfg.checks.end();
}

std::string tag(const std::string& check, const std::string& fn, double alpha) {
  return check + "/" + fn + "/alpha=" + std::to_string(alpha);
}

double pos(double v) { return std::max(v, 0.0); }

}  // namespace

SuiteResult run_verify_suite(const SuiteConfig& cfg) {
  SuiteResult out;
  VerifyOptions vopts;
  vopts.kind = cfg.kind;
  vopts.workers = cfg.workers;

  auto push_report = [&](CheckReport rep, const std::string& fn, double alpha, double h) {
    rep.check_name += "/" + fn + "/alpha=" + std::to_string(alpha) + "/h=" + std::to_string(h);
    out.reports.push_back(std::move(rep));
    return out.reports.back();
  };

  // In d=1 the suite scans linear radius grids: exhaustive radii are cheap
  // there and keep the radius-search error at the h scale, which the
  // refined-KS slack needs. The geometric grid stays in d=2, where the
  // (d-alpha) margin dominates the radius-step error.
  auto suite_rgrid = [&](const GridFunction& f) {
    return cfg.dim == 1 ? make_linear_radius_grid(f.domain.h, required_max_radius(f))
                        : make_rgrid_for(f);
  };

  for (const std::string& fn : cfg.functions) {
    GridFunction f = corpus_function(fn, cfg.dim, cfg.h);
    GridFunction f2 = corpus_function(fn, cfg.dim, cfg.h / 2.0);
    RadiusGrid rg = suite_rgrid(f);
    RadiusGrid rg2 = suite_rgrid(f2);

    for (double alpha : cfg.alphas) {
      if (selected(cfg, "kinnunen")) {
        CheckReport a = push_report(check_kinnunen(f, alpha, rg, vopts), fn, alpha, cfg.h);
        CheckReport b = push_report(check_kinnunen(f2, alpha, rg2, vopts), fn, alpha, cfg.h / 2);
        StabilityEntry st;
        st.name = tag("kinnunen_q99_growth", fn, alpha);
        // Violation = the amount the q99 slack exceeds the per-resolution
        // tolerance; raw slacks sit on a radius-quantization plateau that
        // saturates upward under refinement (see the q99 fields themselves).
        st.metric_h = pos(a.q99 - a.tolerance_used);
        st.metric_h2 = pos(b.q99 - b.tolerance_used);
        st.criterion = "beyond-tolerance q99 violation does not grow >10% under h-halving";
        st.pass = st.metric_h2 <= 1.1 * st.metric_h + 1e-12;
        out.stability.push_back(st);
      }
      if (selected(cfg, "refined_ks")) {
        CheckReport a =
            push_report(check_refined_ks(f, alpha, cfg.delta, rg, vopts), fn, alpha, cfg.h);
        CheckReport b =
            push_report(check_refined_ks(f2, alpha, cfg.delta, rg2, vopts), fn, alpha, cfg.h / 2);
        StabilityEntry st;
        st.name = tag("refined_ks_q99_growth", fn, alpha);
        st.metric_h = pos(a.q99 - a.tolerance_used);
        st.metric_h2 = pos(b.q99 - b.tolerance_used);
        st.criterion = "beyond-tolerance q99 violation does not grow >10% under h-halving";
        st.pass = st.metric_h2 <= 1.1 * st.metric_h + 1e-12;
        out.stability.push_back(st);
        StabilityEntry ch;
        ch.name = tag("refined_ks_chain", fn, alpha);
        ch.metric_h = a.stat("chain_max_violation");
        ch.metric_h2 = b.stat("chain_max_violation");
        ch.criterion = "chain slack <= 1e-12 at both resolutions";
        ch.pass = ch.metric_h <= 1e-12 && ch.metric_h2 <= 1e-12;
        out.stability.push_back(ch);
      }
      if (selected(cfg, "luiro")) {
        CheckReport a = push_report(check_luiro(f, alpha, 0.0, rg, vopts), fn, alpha, cfg.h);
        CheckReport b = push_report(check_luiro(f2, alpha, 0.0, rg2, vopts), fn, alpha, cfg.h / 2);
        StabilityEntry st;
        st.name = tag("luiro_q90_shrink", fn, alpha);
        st.metric_h = a.q90;
        st.metric_h2 = b.q90;
        st.criterion = "q90(h) >= 1.3 q90(h/2), vacuous below the float noise floor";
        // In d=1 the discrete identity holds to machine precision at every
        // resolution; a shrink factor is meaningless below that floor.
        st.pass = st.metric_h >= 1.3 * st.metric_h2 || st.metric_h2 <= 1e-12;
        out.stability.push_back(st);
      }
      if (selected(cfg, "poincare")) {
        CheckReport a =
            push_report(check_poincare(f, alpha, cfg.poincare_c, rg, vopts), fn, alpha, cfg.h);
        CheckReport b = push_report(check_poincare(f2, alpha, cfg.poincare_c, rg2, vopts), fn,
                                    alpha, cfg.h / 2);
        StabilityEntry st;
        st.name = tag("poincare_ratio_stability", fn, alpha);
        st.metric_h = a.stat("ratio_max");
        st.metric_h2 = b.stat("ratio_max");
        st.criterion = "ratio(h/2) <= 1.5 ratio(h)";
        st.pass = st.metric_h2 <= 1.5 * st.metric_h;
        out.stability.push_back(st);
      }
      if (selected(cfg, "delta_bound")) {
        push_report(check_delta_gradient_bound(f, alpha, cfg.delta, rg, vopts), fn, alpha, cfg.h);
        push_report(check_delta_gradient_bound(f2, alpha, cfg.delta, rg2, vopts), fn, alpha,
                    cfg.h / 2);
      }
      if (selected(cfg, "sobolev_ratio")) {
        double rho = check_sobolev_ratio(f, alpha, rg, vopts);
        double rho_scaled = check_sobolev_ratio(gf_scale(f, 2.0), alpha, rg, vopts);
        StabilityEntry st;
        st.name = tag("sobolev_ratio_homogeneity", fn, alpha);
        st.metric_h = rho;
        st.metric_h2 = rho_scaled;
        st.criterion = "rho(2f) == rho(f) +- 1e-12, both finite";
        st.pass = std::isfinite(rho) && std::isfinite(rho_scaled) &&
                  std::abs(rho_scaled - rho) <= 1e-12 * std::max(1.0, std::abs(rho));
        out.stability.push_back(st);
      }
      if (selected(cfg, "scaling")) {
        push_report(check_scaling_covariance(f, alpha, rg, vopts), fn, alpha, cfg.h);
      }
    }
  }

  if (selected(cfg, "weak_type")) {
    // The weak-type constant is probed on the unit-ball indicator over the
    // smaller box [-2,2]^d at two resolutions.
    for (double alpha : cfg.alphas) {
      GridFunction g = corpus_function("indicator_ball", cfg.dim, cfg.h, 2.0);
      GridFunction g2 = corpus_function("indicator_ball", cfg.dim, cfg.h / 2.0, 2.0);
      VerifyOptions w = vopts;
      CheckReport a = push_report(check_weak_type(g, alpha, make_rgrid_for(g), w), "indicator_ball",
                                  alpha, cfg.h);
      CheckReport b = push_report(check_weak_type(g2, alpha, make_rgrid_for(g2), w),
                                  "indicator_ball", alpha, cfg.h / 2);
      StabilityEntry st;
      st.name = tag("weak_type_stability", "indicator_ball", alpha);
      st.metric_h = a.stat("W");
      st.metric_h2 = b.stat("W");
      st.criterion = "W stable within 1.3x under h-halving";
      double lo = std::min(st.metric_h, st.metric_h2), hi = std::max(st.metric_h, st.metric_h2);
      st.pass = lo > 0.0 && hi <= 1.3 * lo;
      out.stability.push_back(st);
    }
  }

  out.pass = true;
  for (const auto& r : out.reports) out.pass = out.pass && r.pass;
  for (const auto& s : out.stability) out.pass = out.pass && s.pass;
  return out;
}

}  // namespace maxlab
