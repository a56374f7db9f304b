#pragma once

#include <string>
#include <vector>

#include "qsm/entropies.hpp"
#include "qsm/random.hpp"

namespace qsm {

// Random block measurement on a d_A-dimensional register: a Haar unitary U
// followed by projections onto N = ceil(d_A / L) fixed orthogonal subspaces,
// each mapped isometrically into a fresh L-dimensional output register. When
// L does not divide d_A the last block has dimension L' = d_A - (N-1)L and
// its map covers only the first L' output coordinates.
struct BlockMeasurement {
  int d_a = 0;
  int block_size = 0;     // L
  int n_blocks = 0;       // N
  int residual_size = 0;  // L' (== L when the division is exact)
  Mat unitary;            // U, d_A x d_A
  std::vector<Mat> projectors;  // P_j = Q_j U, each L x d_A
  uint64_t seed = 0;

  bool exact_division() const { return residual_size == block_size; }
  double completeness_error() const;  // || sum P_j^dagger P_j - id ||_max
};

BlockMeasurement build_measurement(int d_a, int block_size, Rng& rng);

struct MeasurementOutcome {
  double probability = 0.0;
  DensityOperator state;  // on (A1, R...), normalized when probability > kProbFloor
};

// Measurement statistics of rho on the factor `a_label`; outputs live on a
// fresh factor labeled `out_label` of dimension L.
std::vector<MeasurementOutcome> decoupling_trial(const DensityOperator& rho_ar,
                                                 const std::string& a_label,
                                                 const BlockMeasurement& m,
                                                 const std::string& out_label = "A1");

// Monte Carlo estimate of the average over Haar unitaries of
//   || (d_A / L) w_{A1 R} - tau_{A1} (x) rho_R ||_1
// for a single fixed block (w = (P (x) id) rho (P (x) id)^dagger), compared
// against the bounds 2^{-1/2 (H(rho_AR | sigma_R) - log2 L)} for H = H_2 and
// H = H_min.
struct DecouplingReport {
  int d_a = 0;
  int block_size = 0;
  int n_blocks = 0;
  int samples = 0;
  double mean = 0.0;
  double stderr_ = 0.0;
  double bound_h2 = 0.0;
  double bound_hmin = 0.0;
  double margin = 0.0;  // bound_h2 - mean; negative beyond tolerance is a failure
  bool exact_division = true;
  bool support_ok = true;
  Mat mean_state;  // empirical average of w_{A1 R}
};

DecouplingReport estimate_decoupling(const DensityOperator& rho_ar, const std::string& a_label,
                                     const DensityOperator& sigma_r, int block_size, int samples,
                                     const Rng& rng);

}  // namespace qsm
