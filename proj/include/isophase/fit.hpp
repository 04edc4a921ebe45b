// Damped least-squares fit of the 2n imaginary S-matrix pole positions to a
// tabulated phase-shift dataset.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "isophase/chain.hpp"
#include "isophase/constants.hpp"

namespace isophase {

struct PhaseShiftDataset {
  struct Row {
    double e_lab;      // MeV
    double delta_deg;  // degrees
    double weight = 1.0;
  };
  std::vector<Row> rows;

  // E strictly increasing, finite values, weights positive.
  void check() const;

  // CSV/TSV with columns E_lab_MeV, delta_deg[, weight]; '#' comments.
  static PhaseShiftDataset load(const std::string& path);
};

struct FitOptions {
  int max_starts = 200;
  int max_iterations = 500;
  double seed_min = 0.02;  // fm^-1, log-spaced seed magnitudes
  double seed_max = 6.0;
  Constants constants{};
  // Explicit starting points tried before the generated multi-start ladder.
  std::vector<PoleSet> seeds;
};

struct FitResult {
  int n = 0;
  PoleSet poles;                  // sorted: a ascending, b ascending
  double rss = 0.0;               // degrees^2
  std::vector<double> residuals;  // model - data, degrees
  int iterations = 0;
  bool converged = false;
  int starts_tried = 0;
};

// Minimizes sum w_i (delta_model(k_i) - delta_i)^2 over n a-poles and n
// b-poles, multi-start over sign patterns and log-spaced magnitudes,
// b > 0 kept by log-parameterization.  Returns the best local minimum.
// The phase fixes only the union of the poles; the split of the positive
// ones between the blocks is reported canonically (negatives in a, then the
// even-ranked positives from the top join a, interleaved below b partners).
FitResult fit_poles(const PhaseShiftDataset& data, int n, const FitOptions& options = {});

// Fits n = 1..n_max and reports rss per n; per-n failures are recorded in
// the result rather than aborting the scan.
std::vector<FitResult> model_scan(const PhaseShiftDataset& data, int n_max,
                                  const FitOptions& options = {});

// Model and analytic Jacobian at one momentum, degrees; shared with tests.
double fit_model_delta_deg(const PoleSet& poles, double k);
void fit_model_jacobian(const PoleSet& poles, double k, std::vector<double>& row);

}  // namespace isophase
