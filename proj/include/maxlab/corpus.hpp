#pragma once

#include <functional>
#include <string>
#include <vector>

#include "maxlab/continuity.hpp"
#include "maxlab/verify.hpp"

namespace maxlab {

// Standard desk-scale box [-4, 4]^d at spacing h (dims 8/h + 1, dyadic).
Domain corpus_domain(int d, double h, double half_side = 4.0);

// Named reference inputs on the corpus box: triangle (d=1), indicator_ball,
// gaussian_bump (sigma 0.25), two_bumps (sigma 0.2, centers +-0.5).
GridFunction corpus_function(const std::string& name, int d, double h, double half_side = 4.0);

const std::vector<std::string>& corpus_smooth_names();

// ---------------------------------------------------------------------------
// Two-resolution verification suite over the smooth corpus.
// ---------------------------------------------------------------------------

struct SuiteConfig {
  int dim = 2;
  double h = 1.0 / 128;
  std::vector<double> alphas = {0.25, 0.5, 0.75};
  std::vector<std::string> functions = {"gaussian_bump", "two_bumps"};
  std::vector<std::string> checks = {};  // empty = all
  OperatorKind kind = OperatorKind::centered;
  double delta = 0.25;
  double poincare_c = 2.0;
  int workers = 1;
};

struct StabilityEntry {
  std::string name;  // "<check>/<function>/alpha=<a>"
  double metric_h = 0.0;
  double metric_h2 = 0.0;
  std::string criterion;
  bool pass = false;
};

struct SuiteResult {
  std::vector<CheckReport> reports;
  std::vector<StabilityEntry> stability;
  bool pass = false;
};

SuiteResult run_verify_suite(const SuiteConfig& cfg);

const std::vector<std::string>& all_check_names();

}  // namespace maxlab
