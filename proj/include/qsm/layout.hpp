#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include "qsm/common.hpp"

namespace qsm {

struct Factor {
  std::string label;
  int dim = 1;
};

// Ordered list of labeled tensor factors. The flat index convention is
// row-major: for factors (F1,...,Fk) the flat index of the multi-index
// (i1,...,ik) is i1*(d2*...*dk) + i2*(d3*...*dk) + ... + ik, i.e. the
// leftmost factor is the most significant digit. This matches the usual
// Kronecker-product ordering, so tensor(x, y) is the plain Kronecker product.
class SystemLayout {
 public:
  SystemLayout() = default;
  explicit SystemLayout(std::vector<Factor> factors);
  SystemLayout(std::initializer_list<Factor> factors)
      : SystemLayout(std::vector<Factor>(factors)) {}

  int total_dim() const { return total_dim_; }
  int n_factors() const { return static_cast<int>(factors_.size()); }
  const Factor& factor(int i) const { return factors_.at(i); }
  const std::vector<Factor>& factors() const { return factors_; }

  bool has(const std::string& label) const;
  int index_of(const std::string& label) const;  // throws LayoutError if absent
  std::vector<int> indices_of(const std::vector<std::string>& labels) const;

  // Factor positions not listed in `labels`, in original order.
  std::vector<int> complement_of(const std::vector<std::string>& labels) const;

  std::vector<std::string> labels() const;
  std::vector<std::string> complement_labels(const std::vector<std::string>& labels) const;

  // Sub-layout of the given factor positions, in the order given.
  SystemLayout select(const std::vector<int>& positions) const;
  // Sub-layout of the given labels, keeping their original relative order.
  SystemLayout subset(const std::vector<std::string>& labels) const;

  // Concatenation; throws LayoutError on label collision.
  SystemLayout concat(const SystemLayout& other) const;

  int dim_of(const std::vector<std::string>& labels) const;

  bool operator==(const SystemLayout& other) const;
  bool operator!=(const SystemLayout& other) const { return !(*this == other); }

  std::string to_string() const;

 private:
  std::vector<Factor> factors_;
  int total_dim_ = 1;
};

// Index bookkeeping for a dimension list (no labels). `strides[k]` is the
// weight of factor k in the flat index.
std::vector<long> make_strides(const std::vector<int>& dims);

}  // namespace qsm
