#pragma once

#include <string>
#include <vector>

#include "qsm/common.hpp"
#include "qsm/layout.hpp"
#include "qsm/state.hpp"

namespace qsm {

// ---------------------------------------------------------------------------
// Tensor plumbing. All functions respect the row-major composite index
// convention of SystemLayout (leftmost factor most significant).
// ---------------------------------------------------------------------------

PureState tensor(const PureState& x, const PureState& y);
DensityOperator tensor(const DensityOperator& x, const DensityOperator& y);

// Reorder factors so they appear in the order given by `order` (a permutation
// of all labels).
PureState permute_factors(const PureState& psi, const std::vector<std::string>& order);
DensityOperator permute_factors(const DensityOperator& rho, const std::vector<std::string>& order);

// Reduced operator on the kept factors (original relative order).
DensityOperator partial_trace(const DensityOperator& rho, const std::vector<std::string>& keep);

// Reduced operator of a pure state on `keep`; equivalent to
// partial_trace(from_pure(psi), keep) but avoids forming the full density matrix.
DensityOperator reduced_density(const PureState& psi, const std::vector<std::string>& keep);

// Lift an operator acting on `labels` (matrix indexed by those factors, in the
// order listed) to the full space: op acts on the listed factors, identity on
// the rest.
Mat embed_operator(const Mat& op, const SystemLayout& full, const std::vector<std::string>& labels);

// Apply a (possibly rectangular) operator to the listed factors of a pure
// state. The listed factors are replaced by `out_factors`; the result layout
// is out_factors followed by the untouched factors in original order.
PureState apply_to_factors(const Mat& op, const PureState& psi,
                           const std::vector<std::string>& labels,
                           const std::vector<Factor>& out_factors);

// View a pure state as a (dim(row_labels) x dim(rest)) matrix, rows indexed by
// `row_labels` in the order given, columns by the remaining factors in
// original order.
Mat as_matrix(const PureState& psi, const std::vector<std::string>& row_labels);

// ---------------------------------------------------------------------------
// Metrics and spectral functions
// ---------------------------------------------------------------------------

double trace_norm(const Mat& m);
double hs_norm(const Mat& m);
double trace_distance(const DensityOperator& a, const DensityOperator& b);  // (1/2)||a-b||_1

// Squared convention: F = ||rho^{1/2} sigma^{1/2}||_1^2, in [0, 1].
double fidelity(const DensityOperator& rho, const DensityOperator& sigma);

// Eigenvalues above cutoff raised to `power` (-1/2 or -1/4), the rest mapped
// to zero. `cutoff` < 0 means the global relative cutoff.
Mat pinv_power(const Mat& psd, double power, double cutoff = -1.0);

// Projector onto the support (eigenvalues above the relative cutoff).
Mat support_projector(const Mat& psd, double cutoff = -1.0);

// Numerical rank with the global relative cutoff.
int support_rank(const Mat& psd, double cutoff = -1.0);

Mat sqrt_psd(const Mat& psd);

// ---------------------------------------------------------------------------
// Structured states and decompositions
// ---------------------------------------------------------------------------

// (1/sqrt(k)) sum_i |ii> on two fresh k-dimensional factors.
PureState max_entangled(int k, const std::string& label_a, const std::string& label_b);

SchmidtForm schmidt(const PureState& psi, const std::vector<std::string>& left);

// Purification on layout (original factors..., new_label). The ancilla
// dimension equals the full dimension of rho (not its rank); the construction
// uses the eigenbasis of rho with eigenvalues in descending order.
PureState purify(const DensityOperator& rho, const std::string& new_label);

DensityOperator apply_channel(const KrausChannel& ch, const DensityOperator& rho);

}  // namespace qsm
