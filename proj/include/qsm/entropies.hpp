#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qsm/common.hpp"
#include "qsm/ops.hpp"
#include "qsm/sdp.hpp"

namespace qsm {

// All entropies are in bits (base-2 logarithms).

enum class EntropyMethod { closed_form, eigen, sdp };

std::string to_string(EntropyMethod m);

struct EntropyValue {
  double bits = 0.0;
  std::optional<Mat> witness;  // optimizing sigma_B (or X) when one exists
  EntropyMethod method = EntropyMethod::closed_form;
  double gap = 0.0;  // SDP duality gap when method == sdp
  bool unbounded = false;
  std::string note;

  static EntropyValue unbounded_below(std::string diagnostic) {
    EntropyValue v;
    v.bits = -std::numeric_limits<double>::infinity();
    v.unbounded = true;
    v.note = std::move(diagnostic);
    return v;
  }
};

double h_min(const DensityOperator& rho);  // -log2 lambda_max
double h_max(const DensityOperator& rho);  // log2 rank (global cutoff)

// Min-entropy of rho relative to sigma; sigma's layout labels name the
// conditioned-on factors. Computed on the eigenvalue route
// -log2 lambda_max((id (x) sigma^-1/2) rho (id (x) sigma^-1/2)) with the
// generalized inverse. Returns an unbounded value when supp(rho_B) is not
// inside supp(sigma).
EntropyValue h_min_rel(const DensityOperator& rho, const DensityOperator& sigma);

// Independent route for cross-checks: bisection on lambda with the PSD
// feasibility test lambda * (id (x) sigma) - rho >= 0 evaluated by min
// eigenvalue. Never touches the eigenvalue formula above.
double h_min_rel_bisect(const DensityOperator& rho, const DensityOperator& sigma,
                        double tol = 1e-9);

// Conditional min-entropy via the SDP
//   minimize tr X  s.t.  id_A (x) X >= rho, X >= 0,
// with value -log2(tr X*) and witness sigma_B = X*/tr X*.
EntropyValue h_min_cond(const DensityOperator& rho, const std::vector<std::string>& cond,
                        const SdpOptions& opts = {});

// log2 tr((id (x) sigma) rho^0).
double h_max_rel(const DensityOperator& rho, const DensityOperator& sigma);

// Closed form: the supremum over density sigma_B of a linear functional sits
// at an extreme point, so the value is log2 lambda_max(tr_A(rho^0)).
double h_max_cond(const DensityOperator& rho, const std::vector<std::string>& cond);

// Collision entropy -log2 tr(((id (x) sigma^-1/4) rho (id (x) sigma^-1/4))^2).
EntropyValue h2_rel(const DensityOperator& rho, const DensityOperator& sigma);

double von_neumann(const DensityOperator& rho);
double cond_von_neumann(const DensityOperator& rho, const std::vector<std::string>& cond);

// |H_min(rho_AR|rho_R) + H_max(rho_AB|B)| for a tripartite pure state; the
// two sides are computed on unrelated code paths.
double duality_gap(const PureState& psi, const std::vector<std::string>& a_labels,
                   const std::vector<std::string>& b_labels,
                   const std::vector<std::string>& r_labels);

// Shared helper: (id (x) op_on_cond) rho (id (x) op_on_cond) with op acting on
// the conditioning factors.
Mat conjugate_on_cond(const DensityOperator& rho, const Mat& op_on_cond,
                      const std::vector<std::string>& cond);

// supp(tr_complement(rho)) inside supp(sigma)?
bool support_contained(const DensityOperator& rho, const DensityOperator& sigma);

}  // namespace qsm
