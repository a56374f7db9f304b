#pragma once

#include <string>
#include <vector>

#include "qsm/common.hpp"

namespace qsm {

// Dense Hermitian-block semidefinite programming in standard primal form:
//
//   minimize    sum_b tr(C_b X_b)
//   subject to  sum_b tr(A_{i,b} X_b) = rhs_i   for i = 1..m
//               X_b >= 0 (Hermitian PSD)
//
// Constraint matrices are stored as sparse Hermitian entry lists; every
// in-scope problem couples blocks entrywise, so entry lists keep the Schur
// complement assembly cheap.

struct SdpTerm {
  int block = 0;
  int row = 0;
  int col = 0;
  cxd value;
};

struct SdpConstraint {
  std::vector<SdpTerm> terms;  // closed under (row,col,v) -> (col,row,conj v)
  double rhs = 0.0;
};

struct SdpProblem {
  std::vector<int> block_dims;
  std::vector<Mat> objective;  // Hermitian C_b per block
  std::vector<SdpConstraint> constraints;

  int n_blocks() const { return static_cast<int>(block_dims.size()); }
  int n_constraints() const { return static_cast<int>(constraints.size()); }
  int total_dim() const;
  void validate() const;
};

// Helper for assembling Hermitian constraints. add() inserts an entry and its
// transpose-conjugate partner (a lone diagonal entry must be real).
class ConstraintBuilder {
 public:
  ConstraintBuilder& add(int block, int row, int col, cxd value);
  ConstraintBuilder& add_diag(int block, int row, double value);
  SdpConstraint done(double rhs);

 private:
  std::vector<SdpTerm> terms_;
};

enum class SdpStatus { optimal, max_iterations, infeasible };

std::string to_string(SdpStatus s);

struct SdpSolution {
  std::vector<Mat> primal;  // X_b
  RVec dual;                // y
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double gap = 0.0;  // primal_obj - dual_obj, reported as computed
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  SdpStatus status = SdpStatus::max_iterations;
  int iterations = 0;
};

struct SdpOptions {
  double tol = 1e-8;
  int max_iter = 200;
};

// Primal-dual interior point method with Nesterov-Todd scaling and a
// Mehrotra-style predictor-corrector. The caller guarantees strict
// feasibility (the entropy builders always include slack structure).
SdpSolution solve(const SdpProblem& p, const SdpOptions& opts = {});

// Recomputed feasibility/optimality residuals, independent of the solver
// internals.
struct CertifyReport {
  double primal_eq_residual = 0.0;   // max_i |tr(A_i X) - rhs_i|
  double primal_min_eig = 0.0;       // min eigenvalue over primal blocks
  double dual_slack_min_eig = 0.0;   // min eigenvalue of C - sum y_i A_i
  double gap = 0.0;                  // tr(C X) - rhs . y
  double complementarity = 0.0;      // |sum_b tr(X_b Z_b)|
};

CertifyReport certify(const SdpSolution& s, const SdpProblem& p);

// Evaluates tr(A_i X) from the entry list.
double constraint_value(const SdpConstraint& c, const std::vector<Mat>& x);

std::string problem_to_json(const SdpProblem& p);
SdpProblem problem_from_json(const std::string& text);
std::string solution_to_json(const SdpSolution& s);

}  // namespace qsm
