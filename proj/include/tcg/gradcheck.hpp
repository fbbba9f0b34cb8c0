#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace tcg {

struct GradcheckConfig {
  std::size_t configs = 1000;
  std::size_t max_nodes = 6;
  std::size_t hidden = 16;
  double lambda = 10.0;
  double logit_step = 1e-4;
  double param_step = 1e-5;
  // Relative error is |a - b| / max(|a|, |b|, floor).
  double rel_floor = 1e-3;
  double tolerance = 1e-6;
  std::size_t case_instances = 200;
  std::uint64_t seed = 0;
};

// Verdict for one row of the case analysis. `grad_pos` / `grad_neg` hold the
// expected approximate derivative; the arrows say whether each magnitude is
// above (up) or below (down) one half.
struct CaseRow {
  int row = 0;
  std::string sign;
  std::string suppression;
  std::string target;
  std::string grad_pos;
  std::string grad_neg;
  std::string arrows;
  std::size_t instances = 0;
  std::size_t failures = 0;
  std::string first_failure;
};

struct GradcheckReport {
  double max_rel_err_logits = 0.0;      // sfs_backward vs central differences
  double max_rel_err_parameters = 0.0;  // end-to-end edge loss
  std::size_t configs = 0;
  std::size_t nonzero_suppressed = 0;   // suppressed coordinates with a non-zero gradient
  std::size_t resampled = 0;            // instances redrawn near a ReLU kink
  std::vector<CaseRow> cases;
  double tolerance = 0.0;

  double max_rel_err() const;
  bool cases_pass() const;
  bool pass() const;
};

// Runs the three checks. Deterministic in cfg.seed.
GradcheckReport run_gradcheck(const GradcheckConfig& cfg);

std::string format_gradcheck(const GradcheckReport& report);

// "lambda=10 exp(-lambda)=4.5e-05" lines for the given values.
std::string format_lambda_table(const std::vector<double>& lambdas);

}  // namespace tcg
