// maxlab command line: compute maximal fields, verify the inequality suite,
// run the continuity experiment, and benchmark the ball-average engines.
//
// Exit codes: 0 success / all checks pass, 1 a check failed, 2 I/O error,
// 3 precondition violation.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>

#include "maxlab/corpus.hpp"
#include "maxlab/oracle.hpp"
#include "maxlab/parallel.hpp"
#include "maxlab/report.hpp"

namespace {

using namespace maxlab;

struct CommonFlags {
  std::string op = "centered";
  double alpha = 0.5;
  std::vector<double> deltas;
  std::string input, out, report;
  std::vector<double> k_box;
  std::string seq = "additive_bump";
  std::string j_list = "1,2,4,8,16,32";
  int workers = 0;
  std::uint64_t seed = 20240801;
  int fine_factor = 4;
  std::string fn = "gaussian_bump";
  int dim = 2;
  double h = 1.0 / 128;
  std::vector<std::string> checks;
};

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  return out;
}

ojson config_json(const std::string& subcommand, const CommonFlags& fl, int workers) {
  ojson c;
  c["subcommand"] = subcommand;
  c["op"] = fl.op;
  c["alpha"] = fl.alpha;
  c["deltas"] = fl.deltas;
  c["input"] = fl.input;
  c["out"] = fl.out;
  c["report"] = fl.report;
  c["k_box"] = fl.k_box;
  c["seq"] = fl.seq;
  c["j_list"] = fl.j_list;
  c["workers"] = workers;
  c["seed"] = fl.seed;
  c["fine_factor"] = fl.fine_factor;
  c["fn"] = fl.fn;
  c["dim"] = fl.dim;
  c["h"] = fl.h;
  c["checks"] = fl.checks;
  return c;
}

GridFunction load_or_make(const CommonFlags& fl) {
  if (!fl.input.empty()) return read_grid(fl.input);
  return corpus_function(fl.fn, fl.dim, fl.h);
}

RegionMask region_from_kbox(const GridFunction& f, const std::vector<double>& kb) {
  require(kb.size() == static_cast<std::size_t>(2 * f.domain.d), errc::bad_argument,
          "--k-box needs 2*d comma-separated values: low corner then high corner");
  Coord lo{}, hi{};
  for (int a = 0; a < f.domain.d; ++a) {
    lo[a] = kb[static_cast<std::size_t>(a)];
    hi[a] = kb[static_cast<std::size_t>(f.domain.d + a)];
  }
  return box_mask_physical(f.domain, lo, hi);
}

int cmd_compute(const CommonFlags& fl) {
  int workers = resolve_workers(fl.workers);
  GridFunction f = load_or_make(fl);
  FracParams params{fl.alpha, fl.deltas.empty() ? 0.0 : fl.deltas.front(),
                    operator_kind_from_name(fl.op)};
  RadiusGrid rg = make_rgrid_for(f);
  ComputeOptions opts;
  opts.workers = workers;
  MaximalField field = compute_maximal(f, params, rg, opts);

  require(!fl.out.empty(), errc::bad_argument, "--out is required");
  write_grid(field.values, fl.out);
  write_good_ball_sidecar(field, fl.out + ".balls");

  double vmax = 0.0, vmin = std::numeric_limits<double>::infinity();
  for (double v : field.values.values) {
    vmax = std::max(vmax, v);
    vmin = std::min(vmin, v);
  }
  ojson payload;
  payload["points"] = field.values.domain.size();
  payload["value_min"] = vmin;
  payload["value_max"] = vmax;
  payload["radius_count"] = rg.radii.size();
  payload["out"] = fl.out;
  payload["sidecar"] = fl.out + ".balls";
  write_report(fl.report.empty() ? fl.out + ".json" : fl.report,
               config_json("compute", fl, workers), payload);
  return 0;
}

int cmd_verify(const CommonFlags& fl) {
  int workers = resolve_workers(fl.workers);
  if (!fl.input.empty()) {
    GridFunction f = read_grid(fl.input);
    RadiusGrid rg = make_rgrid_for(f);
    VerifyOptions vopts;
    vopts.kind = operator_kind_from_name(fl.op);
    vopts.workers = workers;
    if (!fl.k_box.empty()) vopts.region = region_from_kbox(f, fl.k_box);
    std::vector<std::string> checks = fl.checks.empty()
                                          ? std::vector<std::string>{"kinnunen"}
                                          : fl.checks;
    std::vector<CheckReport> reports;
    for (const auto& c : checks) {
      if (c == "kinnunen") reports.push_back(check_kinnunen(f, fl.alpha, rg, vopts));
      else if (c == "refined_ks")
        reports.push_back(check_refined_ks(
            f, fl.alpha, fl.deltas.empty() ? 0.0 : fl.deltas.front(), rg, vopts));
      else if (c == "luiro")
        reports.push_back(
            check_luiro(f, fl.alpha, fl.deltas.empty() ? 0.0 : fl.deltas.front(), rg, vopts));
      else if (c == "poincare") reports.push_back(check_poincare(f, fl.alpha, 2.0, rg, vopts));
      else if (c == "weak_type") reports.push_back(check_weak_type(f, fl.alpha, rg, vopts));
      else if (c == "delta_bound")
        reports.push_back(check_delta_gradient_bound(
            f, fl.alpha, fl.deltas.empty() ? 0.25 : fl.deltas.front(), rg, vopts));
      else if (c == "scaling")
        reports.push_back(check_scaling_covariance(f, fl.alpha, rg, vopts));
      else if (c == "sobolev_ratio") {
        double rho = check_sobolev_ratio(f, fl.alpha, rg, vopts);
        CheckReport rep;
        rep.check_name = "sobolev_ratio";
        rep.points_tested = f.domain.size();
        rep.pass = std::isfinite(rho) && rho > 0.0;
        rep.stats = {{"rho", rho}};
        reports.push_back(rep);
      } else {
        fail(errc::bad_argument, "unknown check: " + c);
      }
    }
    ojson payload;
    payload["checks"] = ojson::array();
    bool pass = true;
    for (const auto& r : reports) {
      payload["checks"].push_back(to_json(r));
      pass = pass && r.pass;
    }
    payload["pass"] = pass;
    if (!fl.report.empty()) write_report(fl.report, config_json("verify", fl, workers), payload);
    for (const auto& r : reports)
      std::printf("%-60s %s\n", r.check_name.c_str(), r.pass ? "PASS" : "FAIL");
    return pass ? 0 : 1;
  }

  SuiteConfig cfg;
  cfg.dim = fl.dim;
  cfg.h = fl.h;
  cfg.kind = operator_kind_from_name(fl.op);
  cfg.workers = workers;
  if (!fl.checks.empty()) cfg.checks = fl.checks;
  if (!fl.deltas.empty()) cfg.delta = fl.deltas.front();
  SuiteResult res = run_verify_suite(cfg);
  if (!fl.report.empty())
    write_report(fl.report, config_json("verify", fl, workers), to_json(res));
  for (const auto& r : res.reports)
    std::printf("%-72s %s\n", r.check_name.c_str(), r.pass ? "PASS" : "FAIL");
  for (const auto& s : res.stability)
    std::printf("%-72s %s\n", s.name.c_str(), s.pass ? "PASS" : "FAIL");
  return res.pass ? 0 : 1;
}

int cmd_continuity(const CommonFlags& fl) {
  int workers = resolve_workers(fl.workers);
  GridFunction f = load_or_make(fl);
  ContinuityConfig cfg;
  cfg.alpha = fl.alpha;
  cfg.kind = operator_kind_from_name(fl.op);
  cfg.seq.kind = sequence_kind_from_name(fl.seq);
  cfg.seq.j_values = parse_int_list(fl.j_list);
  cfg.workers = workers;
  if (!fl.deltas.empty()) {
    cfg.deltas = fl.deltas;
    std::sort(cfg.deltas.rbegin(), cfg.deltas.rend());
  }
  if (!fl.k_box.empty()) cfg.K = region_from_kbox(f, fl.k_box);
  if (fl.input.empty()) {
    std::string name = fl.fn;
    int dim = fl.dim;
    cfg.maker = [name, dim](double h) { return corpus_function(name, dim, h); };
  }
  ContinuityRun run = run_continuity(f, cfg);
  if (!fl.report.empty())
    write_report(fl.report, config_json("continuity", fl, workers), to_json(run));
  if (!fl.out.empty()) write_continuity_csv(run, fl.out);
  bool pass = true;
  for (const auto& [name, ok] : continuity_assertions(run)) {
    std::printf("%-48s %s\n", name.c_str(), ok ? "PASS" : "FAIL");
    pass = pass && ok;
  }
  return pass ? 0 : 1;
}

int cmd_bench(const CommonFlags& fl, std::int64_t n_side, std::int64_t queries, double radius) {
  int workers = resolve_workers(fl.workers);
  Domain dom = make_domain(2, n_side, 2.0 / static_cast<double>(n_side), -1.0);
  GridFunction f = make_zero(dom);
  std::mt19937_64 rng(fl.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (auto& v : f.values) v = uni(rng);

  std::vector<BallSpec> balls;
  std::uniform_int_distribution<std::int64_t> pick(0, dom.size() - 1);
  for (std::int64_t i = 0; i < queries; ++i)
    balls.push_back({dom.point(dom.unflat(pick(rng))), radius});

  using clock = std::chrono::steady_clock;
  std::vector<double> absv(f.values.size());
  for (std::size_t i = 0; i < absv.size(); ++i) absv[i] = std::abs(f.values[i]);

  auto t0 = clock::now();
  double acc_naive = 0.0;
  for (const auto& b : balls) {
    BallSum s = ball_sum_raw(dom, absv, nullptr, b.center, b.radius);
    acc_naive += s.sum / static_cast<double>(s.count);
  }
  auto t1 = clock::now();
  LineSumTable table(dom, absv);
  double acc_fast = 0.0;
  for (const auto& b : balls) {
    BallSum s = ball_sum_raw(dom, absv, &table, b.center, b.radius);
    acc_fast += s.sum / static_cast<double>(s.count);
  }
  auto t2 = clock::now();
  require(acc_naive == acc_fast, errc::bad_argument, "engines disagree");

  FracParams params{0.5, 0.0, OperatorKind::centered};
  RadiusGrid rg = make_rgrid_for(f);
  ComputeOptions opts;
  opts.workers = workers;
  auto t3 = clock::now();
  MaximalField field = compute_maximal(f, params, rg, opts);
  auto t4 = clock::now();

  auto ms = [](auto a, auto b) {
    return std::chrono::duration_cast<std::chrono::microseconds>(b - a).count() / 1000.0;
  };
  double naive_ms = ms(t0, t1), fast_ms = ms(t1, t2), pruned_ms = ms(t3, t4);

  std::string path = fl.out.empty() ? "bench.csv" : fl.out;
  std::ofstream os(path, std::ios::trunc);
  if (!os) fail(errc::io_failure, "cannot write: " + path);
  os << "engine,queries,milliseconds\n";
  os << "ball_avg_naive," << queries << ',' << naive_ms << '\n';
  os << "ball_avg_accelerated," << queries << ',' << fast_ms << '\n';
  os << "maximal_pruned," << field.values.domain.size() << ',' << pruned_ms << '\n';
  std::printf("naive %.1f ms, accelerated %.1f ms (%.1fx), pruned maximal %.1f ms\n", naive_ms,
              fast_ms, naive_ms / std::max(1e-9, fast_ms), pruned_ms);
  return fast_ms < naive_ms ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fractional maximal function laboratory"};
  app.require_subcommand(1);
  CommonFlags fl;
  std::int64_t bench_n = 256, bench_queries = 10000;
  double bench_radius = 0.25;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--op", fl.op, "centered|noncentered");
    sub->add_option("--alpha", fl.alpha, "fractional order, 0 < alpha < d");
    sub->add_option("--delta", fl.deltas, "truncation radius (repeatable)");
    sub->add_option("--input", fl.input, "input grid (MFG1 or CSV)");
    sub->add_option("--out", fl.out, "output path");
    sub->add_option("--report", fl.report, "JSON report path");
    sub->add_option("--k-box", fl.k_box, "region box: d low coords then d high coords");
    sub->add_option("--seq", fl.seq, "additive_bump|mollify|translate");
    sub->add_option("--j-list", fl.j_list, "comma-separated j values");
    sub->add_option("--workers", fl.workers, "worker count (default MAXLAB_WORKERS or 1)");
    sub->add_option("--seed", fl.seed, "seed for randomized selections");
    sub->add_option("--fine-factor", fl.fine_factor, "oracle lattice refinement");
    sub->add_option("--fn", fl.fn, "corpus function when no --input is given");
    sub->add_option("--dim", fl.dim, "dimension for corpus runs");
    sub->add_option("--spacing", fl.h, "grid spacing for corpus runs");
    sub->add_option("--check", fl.checks, "check name (repeatable)");
  };

  CLI::App* compute = app.add_subcommand("compute", "compute a maximal field");
  add_common(compute);
  CLI::App* verify = app.add_subcommand("verify", "run the inequality checks");
  add_common(verify);
  CLI::App* continuity = app.add_subcommand("continuity", "run the continuity experiment");
  add_common(continuity);
  CLI::App* bench = app.add_subcommand("bench", "time the ball-average engines");
  add_common(bench);
  bench->add_option("--n", bench_n, "grid side");
  bench->add_option("--queries", bench_queries, "query count");
  bench->add_option("--radius", bench_radius, "query radius");

  CLI11_PARSE(app, argc, argv);

  try {
    if (compute->parsed()) return cmd_compute(fl);
    if (verify->parsed()) return cmd_verify(fl);
    if (continuity->parsed()) return cmd_continuity(fl);
    if (bench->parsed()) return cmd_bench(fl, bench_n, bench_queries, bench_radius);
  } catch (const maxlab::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return maxlab::error::is_io(e.code()) ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
