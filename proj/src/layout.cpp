#include "qsm/layout.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace qsm {

SystemLayout::SystemLayout(std::vector<Factor> factors) : factors_(std::move(factors)) {
  std::set<std::string> seen;
  total_dim_ = 1;
  for (const auto& f : factors_) {
    if (f.label.empty()) throw LayoutError("layout: empty factor label");
    if (f.dim < 1) throw LayoutError("layout: factor '" + f.label + "' has dim < 1");
    if (!seen.insert(f.label).second)
      throw LayoutError("layout: duplicate factor label '" + f.label + "'");
    if (total_dim_ > (1 << 20) / f.dim)
      throw LayoutError("layout: total dimension too large");
    total_dim_ *= f.dim;
  }
}

bool SystemLayout::has(const std::string& label) const {
  for (const auto& f : factors_)
    if (f.label == label) return true;
  return false;
}

int SystemLayout::index_of(const std::string& label) const {
  for (int i = 0; i < n_factors(); ++i)
    if (factors_[i].label == label) return i;
  throw LayoutError("layout: unknown factor label '" + label + "'");
}

std::vector<int> SystemLayout::indices_of(const std::vector<std::string>& labels) const {
  std::vector<int> out;
  out.reserve(labels.size());
  std::set<std::string> seen;
  for (const auto& l : labels) {
    if (!seen.insert(l).second) throw LayoutError("layout: repeated label '" + l + "' in selection");
    out.push_back(index_of(l));
  }
  return out;
}

std::vector<int> SystemLayout::complement_of(const std::vector<std::string>& labels) const {
  std::set<int> chosen;
  for (int i : indices_of(labels)) chosen.insert(i);
  std::vector<int> out;
  for (int i = 0; i < n_factors(); ++i)
    if (!chosen.count(i)) out.push_back(i);
  return out;
}

std::vector<std::string> SystemLayout::labels() const {
  std::vector<std::string> out;
  out.reserve(factors_.size());
  for (const auto& f : factors_) out.push_back(f.label);
  return out;
}

std::vector<std::string> SystemLayout::complement_labels(
    const std::vector<std::string>& labels) const {
  std::vector<std::string> out;
  for (int i : complement_of(labels)) out.push_back(factors_[i].label);
  return out;
}

SystemLayout SystemLayout::select(const std::vector<int>& positions) const {
  std::vector<Factor> fs;
  fs.reserve(positions.size());
  for (int p : positions) fs.push_back(factors_.at(p));
  return SystemLayout(std::move(fs));
}

SystemLayout SystemLayout::subset(const std::vector<std::string>& labels) const {
  std::vector<int> pos = indices_of(labels);
  std::sort(pos.begin(), pos.end());
  return select(pos);
}

SystemLayout SystemLayout::concat(const SystemLayout& other) const {
  std::vector<Factor> fs = factors_;
  for (const auto& f : other.factors_) {
    if (has(f.label))
      throw LayoutError("layout: label collision on '" + f.label + "' in tensor product");
    fs.push_back(f);
  }
  return SystemLayout(std::move(fs));
}

int SystemLayout::dim_of(const std::vector<std::string>& labels) const {
  int d = 1;
  for (int i : indices_of(labels)) d *= factors_[i].dim;
  return d;
}

bool SystemLayout::operator==(const SystemLayout& other) const {
  if (factors_.size() != other.factors_.size()) return false;
  for (size_t i = 0; i < factors_.size(); ++i)
    if (factors_[i].label != other.factors_[i].label || factors_[i].dim != other.factors_[i].dim)
      return false;
  return true;
}

std::string SystemLayout::to_string() const {
  std::ostringstream os;
  os << "[";
  for (int i = 0; i < n_factors(); ++i) {
    if (i) os << ",";
    os << factors_[i].label << ":" << factors_[i].dim;
  }
  os << "]";
  return os.str();
}

std::vector<long> make_strides(const std::vector<int>& dims) {
  std::vector<long> s(dims.size(), 1);
  for (int k = static_cast<int>(dims.size()) - 2; k >= 0; --k)
    s[k] = s[k + 1] * dims[k + 1];
  return s;
}

}  // namespace qsm
