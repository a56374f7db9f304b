#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qsm/entropies.hpp"

namespace qsm {

// Half-trace-distance ball around a state.
struct SmoothingBall {
  DensityOperator center;
  double epsilon = 0.0;

  double distance(const DensityOperator& cand) const;  // (1/2)||cand - center||_1
  bool contains(const DensityOperator& cand, double slack = 1e-9) const;
};

// Smooth min-entropy relative to a fixed sigma:
//   sup over states rho_bar with (1/2)||rho_bar - rho||_1 <= eps of
//   H_min(rho_bar | sigma).
// One SDP: minimize lambda over {rho_bar = rho + P - Q, P,Q >= 0,
// tr(P+Q) <= 2 eps, tr rho_bar = 1, lambda (id (x) sigma) >= rho_bar}.
// Smoothing ranges over normalized states only. sigma may be singular; the
// problem is solved on id (x) supp(sigma), which requires
// supp(rho_B) inside supp(sigma).
EntropyValue h_min_smooth_rel(const DensityOperator& rho, const DensityOperator& sigma,
                              double eps, const SdpOptions& opts = {});

// Conditional version: sigma is absorbed into the matrix variable Y = lambda
// sigma, giving the joint SDP
//   minimize tr Y  s.t.  id (x) Y >= rho_bar, ball and state constraints.
EntropyValue h_min_smooth_cond(const DensityOperator& rho, const std::vector<std::string>& cond,
                               double eps, const SdpOptions& opts = {});

// Independent oracle: bisection over lambda with a phase-1 feasibility SDP
// (minimize t with lambda (id (x) sigma) - rho_bar + t id >= 0).
double h_min_smooth_rel_bisect(const DensityOperator& rho, const DensityOperator& sigma,
                               double eps, double tol = 1e-7);

// Spectral-truncation heuristic for the smooth max-entropy: discard the
// smallest eigenvalues of rho with total weight <= eps, renormalize, evaluate
// h_max_rel. Returns an upper bound on the true infimum.
struct SmoothMaxResult {
  double upper_bits = 0.0;
  std::string note = "heuristic";
  int discarded = 0;
};
SmoothMaxResult h_max_smooth_rel(const DensityOperator& rho, const DensityOperator& sigma,
                                 double eps);

struct ConvergencePoint {
  int n = 0;
  double eps = 0.0;
  double value_bits_per_copy = 0.0;
  double target_bits = 0.0;  // S(A|R), the limit of the normalized series
  double gap = 0.0;
};

// Normalized smooth min-entropy series h_min_smooth(rho_AR^(x n) | R^n)/n for
// n = 1..n_max. Refuses (d_A d_R)^n_max > 256.
std::vector<ConvergencePoint> convergence_series(const PureState& psi_abr,
                                                 const std::vector<std::string>& a_labels,
                                                 const std::vector<std::string>& b_labels,
                                                 const std::vector<std::string>& r_labels,
                                                 double eps, int n_max,
                                                 const SdpOptions& opts = {});

}  // namespace qsm
