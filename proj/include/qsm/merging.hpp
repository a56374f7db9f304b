#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qsm/decoupling.hpp"
#include "qsm/smoothing.hpp"

namespace qsm {

// Entanglement budget for one merging run: Phi_K is consumed, Phi_L returned,
// both ranks powers of two; the cost log2 K - log2 L is the minimal integer
// number of bits at or above the entropic target.
struct CostPlan {
  enum class Mode { nonsmooth, smooth, corollary };
  Mode mode = Mode::nonsmooth;
  double eps = 0.0;
  double eps_prime = 0.0;  // smoothing radius actually used by the mode
  double target_bits = 0.0;
  long k = 1;
  long l = 1;
  double cost_bits = 0.0;   // log2 K - log2 L
  double guarantee = 0.0;   // promised trace-norm error bound
};

std::string to_string(CostPlan::Mode m);

CostPlan plan_cost(const DensityOperator& rho_ar, const std::vector<std::string>& r_labels,
                   double eps, CostPlan::Mode mode, const SdpOptions& opts = {});

// Isometry relating two purifications of (nearly) the same state on the
// `fixed` factors, acting on the complement. Returned as V with
// F((id (x) V) source, target) = F(source_fixed_marginal, target_fixed_marginal).
// When dim(source complement) exceeds dim(target complement) the map is a
// partial isometry defined on a subspace containing the source support
// (V^dagger V is then a projector rather than the identity).
struct UhlmannResult {
  Mat isometry;              // dim(target complement) x dim(source complement)
  double fidelity = 0.0;     // achieved, equals the marginal fidelity
};

UhlmannResult uhlmann_isometry(const PureState& source, const PureState& target,
                               const std::vector<std::string>& fixed);

// Bob-side decoder for one outcome, kept in factored form: the full map is
// target_frame * source_frame^dagger, an isometry from the subspace spanned
// by source_frame into the target space. Both frames have orthonormal
// columns.
struct FactoredIsometry {
  Mat source_frame;  // dim(B B0) x k
  Mat target_frame;  // dim(B1 B' B J) x k
  bool trivial = false;  // zero-probability outcome, no decoder applied
};

struct MergeTask {
  PureState psi;  // pure state on A,B,R factors
  std::vector<std::string> a_labels;
  std::vector<std::string> b_labels;
  std::vector<std::string> r_labels;
  long k = 1;
  long l = 1;
  double eps_design = 0.0;
  uint64_t seed = 0;

  void validate() const;
};

// Full record of one protocol run. The final state lives on fused registers
// (A1, B1, B', B, R); the junk register absorbed by Bob's decoder is traced
// out before the error is evaluated.
struct MergeOutcome {
  std::vector<double> probabilities;
  std::vector<DensityOperator> post_states;  // rho^j on (A1, R)
  std::vector<FactoredIsometry> isometries;
  DensityOperator final_state;
  DensityOperator target_state;
  double error = 0.0;            // || rho_final - Phi_L (x) psi_BB'R ||_1
  double condition_value = 0.0;  // sum_j p_j || rho^j_A1R - tau (x) rho_R ||_1
  double cost_bits = 0.0;
};

MergeOutcome run_protocol(const MergeTask& task);

// sum_j p_j || rho^j_{A1 R} - tau_{A1} (x) rho_R ||_1 for externally produced
// outcomes (tau is maximally mixed of dimension L).
double merging_condition(const std::vector<MeasurementOutcome>& outcomes,
                         const DensityOperator& rho_r, int l);

// Entanglement-cost lower bound for zero-error merging,
// -H_min(rho_AR | rho_R); internally cross-checked against H_max(rho_AB | B)
// within 1e-6 via the purification duality.
double zero_error_bound(const PureState& psi, const std::vector<std::string>& a_labels,
                        const std::vector<std::string>& b_labels,
                        const std::vector<std::string>& r_labels);

// Cost lower bound at error eps: -H_min^{sqrt(eps)}(rho_AR | R). For
// sqrt(eps) >= 1 the ball covers all states and the bound degenerates to
// -log2 d_A.
double eps_error_bound(const PureState& psi, const std::vector<std::string>& a_labels,
                       const std::vector<std::string>& b_labels,
                       const std::vector<std::string>& r_labels, double eps,
                       const SdpOptions& opts = {});

// Min-entropy monotonicity under a local operation on A with recorded
// outcomes: returns (before, after) = (H_min(rho_AR|sigma_R),
// H_min(rho'_ARX | sigma_R (x) rho_X)).
std::pair<double, double> monotonicity_witness(const DensityOperator& rho_ar,
                                               const std::vector<std::string>& a_labels,
                                               const DensityOperator& sigma_r,
                                               const KrausChannel& channel_on_a);

}  // namespace qsm
