#pragma once

#include <optional>
#include <vector>

#include "qsm/common.hpp"
#include "qsm/layout.hpp"

namespace qsm {

// Complex state vector over a SystemLayout. Unit Euclidean norm.
struct PureState {
  SystemLayout layout;
  Vec vector;

  PureState() = default;
  PureState(SystemLayout l, Vec v) : layout(std::move(l)), vector(std::move(v)) {}

  int dim() const { return static_cast<int>(vector.size()); }
  void validate() const;  // throws ValidationError naming the violated invariant
};

// Hermitian PSD matrix with unit trace over a SystemLayout.
struct DensityOperator {
  SystemLayout layout;
  Mat matrix;

  DensityOperator() = default;
  DensityOperator(SystemLayout l, Mat m) : layout(std::move(l)), matrix(std::move(m)) {}

  int dim() const { return static_cast<int>(matrix.rows()); }
  void validate() const;

  static DensityOperator from_pure(const PureState& psi);
};

// Result of a Schmidt decomposition across a bipartition. `coefficients` are
// the squared singular values, descending, summing to one; the state is
// sum_i sqrt(coefficients[i]) |left_i> |right_i>.
struct SchmidtForm {
  RVec coefficients;
  Mat left_basis;   // columns are the left vectors
  Mat right_basis;  // columns are the right vectors
  int rank = 0;

  SystemLayout left_layout;
  SystemLayout right_layout;
};

// CPTP map in Kraus form. Construction checks the completeness relation
// sum_k E_k^dagger E_k = id.
class KrausChannel {
 public:
  KrausChannel(std::vector<Mat> operators);

  const std::vector<Mat>& operators() const { return ops_; }
  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }
  double completeness_error() const;

  static KrausChannel isometry(const Mat& v);

 private:
  std::vector<Mat> ops_;
  int in_dim_ = 0;
  int out_dim_ = 0;
};

}  // namespace qsm
