#include "qsm/ops.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace qsm {

namespace {

std::vector<int> dims_of(const SystemLayout& l) {
  std::vector<int> d(l.n_factors());
  for (int i = 0; i < l.n_factors(); ++i) d[i] = l.factor(i).dim;
  return d;
}

// Flat-index offsets of every multi-index over the factors at `positions`
// (taken in the order given), i.e. offsets[s] = sum_k idx_k * stride[positions[k]].
std::vector<long> subindex_offsets(const std::vector<int>& dims, const std::vector<long>& strides,
                                   const std::vector<int>& positions) {
  long count = 1;
  for (int p : positions) count *= dims[p];
  std::vector<long> offsets(std::max<long>(count, 1), 0);
  std::vector<int> idx(positions.size(), 0);
  long cur = 0;
  for (long s = 0; s < count; ++s) {
    offsets[s] = cur;
    for (int k = static_cast<int>(positions.size()) - 1; k >= 0; --k) {
      ++idx[k];
      cur += strides[positions[k]];
      if (idx[k] < dims[positions[k]]) break;
      cur -= static_cast<long>(idx[k]) * strides[positions[k]];
      idx[k] = 0;
    }
  }
  return offsets;
}

// t[old_flat] = new_flat for the factor reordering that puts old factor
// perm[k] at new position k.
std::vector<long> permutation_remap(const std::vector<int>& old_dims, const std::vector<int>& perm) {
  const int n = static_cast<int>(old_dims.size());
  std::vector<int> new_dims(n);
  for (int k = 0; k < n; ++k) new_dims[k] = old_dims[perm[k]];
  std::vector<long> new_strides = make_strides(new_dims);
  std::vector<long> w(n);
  for (int k = 0; k < n; ++k) w[perm[k]] = new_strides[k];
  long total = 1;
  for (int d : old_dims) total *= d;
  std::vector<long> t(total);
  std::vector<int> idx(n, 0);
  long cur = 0;
  for (long i = 0; i < total; ++i) {
    t[i] = cur;
    for (int k = n - 1; k >= 0; --k) {
      ++idx[k];
      cur += w[k];
      if (idx[k] < old_dims[k]) break;
      cur -= static_cast<long>(idx[k]) * w[k];
      idx[k] = 0;
    }
  }
  return t;
}

std::vector<int> permutation_for(const SystemLayout& layout, const std::vector<std::string>& order) {
  if (static_cast<int>(order.size()) != layout.n_factors())
    throw LayoutError("permute: order must list every factor exactly once");
  return layout.indices_of(order);
}

Eigen::SelfAdjointEigenSolver<Mat> eig_herm(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(m));
  if (es.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
  return es;
}

Mat spectral_map(const Mat& psd, const std::function<double(double)>& f, double cutoff) {
  auto es = eig_herm(psd);
  const RVec& ev = es.eigenvalues();
  double lmax = std::max(ev.maxCoeff(), 0.0);
  double cut = cutoff >= 0.0 ? cutoff : kSupportCutoff * std::max(lmax, 1e-300);
  RVec mapped = RVec::Zero(ev.size());
  for (int i = 0; i < ev.size(); ++i)
    if (ev(i) > cut) mapped(i) = f(ev(i));
  return es.eigenvectors() * mapped.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

// ---------------------------------------------------------------------------
// State types
// ---------------------------------------------------------------------------

void PureState::validate() const {
  if (layout.total_dim() != dim())
    throw ValidationError("pure state: dimension mismatch with layout " + layout.to_string());
  double n = vector.norm();
  if (std::abs(n - 1.0) > kNormTol)
    throw ValidationError("pure state: norm deviates from 1 by " + std::to_string(std::abs(n - 1.0)));
}

void DensityOperator::validate() const {
  if (matrix.rows() != matrix.cols())
    throw ValidationError("density operator: matrix not square");
  if (layout.total_dim() != dim())
    throw ValidationError("density operator: dimension mismatch with layout " + layout.to_string());
  double h = herm_deviation(matrix);
  if (h > kHermTol)
    throw ValidationError("density operator: hermiticity violated by " + std::to_string(h));
  double tr = std::abs(matrix.trace().real() - 1.0) + std::abs(matrix.trace().imag());
  if (tr > kTraceTol)
    throw ValidationError("density operator: trace deviates from 1 by " + std::to_string(tr));
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(matrix), Eigen::EigenvaluesOnly);
  double lmin = es.eigenvalues().minCoeff();
  if (lmin < -kPsdTol)
    throw ValidationError("density operator: positivity violated, min eigenvalue " +
                          std::to_string(lmin));
}

DensityOperator DensityOperator::from_pure(const PureState& psi) {
  return DensityOperator(psi.layout, psi.vector * psi.vector.adjoint());
}

KrausChannel::KrausChannel(std::vector<Mat> operators) : ops_(std::move(operators)) {
  if (ops_.empty()) throw ValidationError("channel: no Kraus operators");
  out_dim_ = static_cast<int>(ops_[0].rows());
  in_dim_ = static_cast<int>(ops_[0].cols());
  for (const auto& e : ops_)
    if (e.rows() != out_dim_ || e.cols() != in_dim_)
      throw ValidationError("channel: inconsistent Kraus operator shapes");
  double err = completeness_error();
  if (err > kHermTol)
    throw ValidationError("channel: completeness relation violated by " + std::to_string(err));
}

double KrausChannel::completeness_error() const {
  Mat acc = Mat::Zero(in_dim_, in_dim_);
  for (const auto& e : ops_) acc += e.adjoint() * e;
  return (acc - Mat::Identity(in_dim_, in_dim_)).cwiseAbs().maxCoeff();
}

KrausChannel KrausChannel::isometry(const Mat& v) { return KrausChannel({v}); }

// ---------------------------------------------------------------------------
// Tensor plumbing
// ---------------------------------------------------------------------------

PureState tensor(const PureState& x, const PureState& y) {
  SystemLayout l = x.layout.concat(y.layout);
  Vec v(x.dim() * y.dim());
  for (int i = 0; i < x.dim(); ++i)
    v.segment(static_cast<long>(i) * y.dim(), y.dim()) = x.vector(i) * y.vector;
  return PureState(std::move(l), std::move(v));
}

DensityOperator tensor(const DensityOperator& x, const DensityOperator& y) {
  SystemLayout l = x.layout.concat(y.layout);
  const int dx = x.dim(), dy = y.dim();
  Mat m(dx * dy, dx * dy);
  for (int i = 0; i < dx; ++i)
    for (int j = 0; j < dx; ++j)
      m.block(static_cast<long>(i) * dy, static_cast<long>(j) * dy, dy, dy) =
          x.matrix(i, j) * y.matrix;
  return DensityOperator(std::move(l), std::move(m));
}

PureState permute_factors(const PureState& psi, const std::vector<std::string>& order) {
  std::vector<int> perm = permutation_for(psi.layout, order);
  std::vector<long> remap = permutation_remap(dims_of(psi.layout), perm);
  Vec v(psi.dim());
  for (long i = 0; i < psi.dim(); ++i) v(remap[i]) = psi.vector(i);
  return PureState(psi.layout.select(perm), std::move(v));
}

DensityOperator permute_factors(const DensityOperator& rho, const std::vector<std::string>& order) {
  std::vector<int> perm = permutation_for(rho.layout, order);
  std::vector<long> remap = permutation_remap(dims_of(rho.layout), perm);
  Mat m(rho.dim(), rho.dim());
  for (long i = 0; i < rho.dim(); ++i)
    for (long j = 0; j < rho.dim(); ++j) m(remap[i], remap[j]) = rho.matrix(i, j);
  return DensityOperator(rho.layout.select(perm), std::move(m));
}

DensityOperator partial_trace(const DensityOperator& rho, const std::vector<std::string>& keep) {
  if (keep.empty()) throw LayoutError("partial_trace: empty keep set");
  std::vector<int> kp = rho.layout.indices_of(keep);
  std::sort(kp.begin(), kp.end());
  std::vector<int> tp = rho.layout.complement_of(keep);
  std::vector<int> dims = dims_of(rho.layout);
  std::vector<long> strides = make_strides(dims);
  std::vector<long> ko = subindex_offsets(dims, strides, kp);
  std::vector<long> to = subindex_offsets(dims, strides, tp);
  const long dk = static_cast<long>(ko.size());
  Mat out = Mat::Zero(dk, dk);
  for (long t = 0; t < static_cast<long>(to.size()); ++t) {
    const long off = to[t];
    for (long i = 0; i < dk; ++i)
      for (long j = 0; j < dk; ++j) out(i, j) += rho.matrix(ko[i] + off, ko[j] + off);
  }
  return DensityOperator(rho.layout.select(kp), std::move(out));
}

Mat as_matrix(const PureState& psi, const std::vector<std::string>& row_labels) {
  std::vector<std::string> order = row_labels;
  for (const auto& l : psi.layout.complement_labels(row_labels)) order.push_back(l);
  PureState p = permute_factors(psi, order);
  const int dr = psi.layout.dim_of(row_labels);
  const int dc = psi.dim() / dr;
  return Eigen::Map<const Eigen::Matrix<cxd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      p.vector.data(), dr, dc);
}

DensityOperator reduced_density(const PureState& psi, const std::vector<std::string>& keep) {
  if (keep.empty()) throw LayoutError("reduced_density: empty keep set");
  std::vector<int> kp = psi.layout.indices_of(keep);
  std::sort(kp.begin(), kp.end());
  SystemLayout kept = psi.layout.select(kp);
  Mat m = as_matrix(psi, kept.labels());
  return DensityOperator(std::move(kept), hermitize(m * m.adjoint()));
}

Mat embed_operator(const Mat& op, const SystemLayout& full, const std::vector<std::string>& labels) {
  std::vector<int> sp = full.indices_of(labels);
  if (op.rows() != op.cols() || op.rows() != full.dim_of(labels))
    throw LayoutError("embed_operator: operator dimension does not match selected factors");
  std::vector<int> rp = full.complement_of(labels);
  std::vector<int> dims = dims_of(full);
  std::vector<long> strides = make_strides(dims);
  std::vector<long> so = subindex_offsets(dims, strides, sp);
  std::vector<long> ro = subindex_offsets(dims, strides, rp);
  Mat out = Mat::Zero(full.total_dim(), full.total_dim());
  for (long s = 0; s < static_cast<long>(so.size()); ++s)
    for (long t = 0; t < static_cast<long>(so.size()); ++t) {
      const cxd v = op(s, t);
      if (v == cxd(0.0, 0.0)) continue;
      for (long r = 0; r < static_cast<long>(ro.size()); ++r)
        out(so[s] + ro[r], so[t] + ro[r]) = v;
    }
  return out;
}

PureState apply_to_factors(const Mat& op, const PureState& psi,
                           const std::vector<std::string>& labels,
                           const std::vector<Factor>& out_factors) {
  const int din = psi.layout.dim_of(labels);
  if (op.cols() != din)
    throw LayoutError("apply_to_factors: operator input dimension mismatch");
  int dout = 1;
  for (const auto& f : out_factors) dout *= f.dim;
  if (op.rows() != dout)
    throw LayoutError("apply_to_factors: operator output dimension mismatch");
  Mat m = as_matrix(psi, labels);  // din x drest
  Mat res = op * m;                // dout x drest
  std::vector<Factor> fs = out_factors;
  for (const auto& l : psi.layout.complement_labels(labels)) {
    int i = psi.layout.index_of(l);
    fs.push_back(psi.layout.factor(i));
  }
  Vec v(res.size());
  const long drest = res.cols();
  for (long i = 0; i < res.rows(); ++i)
    for (long j = 0; j < drest; ++j) v(i * drest + j) = res(i, j);
  return PureState(SystemLayout(std::move(fs)), std::move(v));
}

// ---------------------------------------------------------------------------
// Metrics and spectral functions
// ---------------------------------------------------------------------------

double trace_norm(const Mat& m) {
  if (m.rows() != m.cols()) {
    Eigen::BDCSVD<Mat> svd(m);
    return svd.singularValues().sum();
  }
  if (herm_deviation(m) <= 1e-9 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
  }
  Eigen::BDCSVD<Mat> svd(m);
  return svd.singularValues().sum();
}

double hs_norm(const Mat& m) { return m.norm(); }

double trace_distance(const DensityOperator& a, const DensityOperator& b) {
  if (a.layout != b.layout)
    throw LayoutError("trace_distance: layout mismatch");
  return 0.5 * trace_norm(a.matrix - b.matrix);
}

double fidelity(const DensityOperator& rho, const DensityOperator& sigma) {
  if (rho.layout.total_dim() != sigma.layout.total_dim() || rho.layout != sigma.layout)
    throw LayoutError("fidelity: layout mismatch");
  Mat sr = sqrt_psd(rho.matrix);
  Mat t = hermitize(sr * sigma.matrix * sr);
  Eigen::SelfAdjointEigenSolver<Mat> es(t, Eigen::EigenvaluesOnly);
  double acc = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    acc += std::sqrt(std::max(es.eigenvalues()(i), 0.0));
  double f = acc * acc;
  return std::clamp(f, 0.0, 1.0);
}

Mat pinv_power(const Mat& psd, double power, double cutoff) {
  if (power != -0.5 && power != -0.25)
    throw ValidationError("pinv_power: power must be -1/2 or -1/4");
  return spectral_map(psd, [power](double x) { return std::pow(x, power); }, cutoff);
}

Mat support_projector(const Mat& psd, double cutoff) {
  return spectral_map(psd, [](double) { return 1.0; }, cutoff);
}

int support_rank(const Mat& psd, double cutoff) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(psd), Eigen::EigenvaluesOnly);
  const RVec& ev = es.eigenvalues();
  double lmax = std::max(ev.maxCoeff(), 0.0);
  double cut = cutoff >= 0.0 ? cutoff : kSupportCutoff * std::max(lmax, 1e-300);
  int r = 0;
  for (int i = 0; i < ev.size(); ++i)
    if (ev(i) > cut) ++r;
  return r;
}

Mat sqrt_psd(const Mat& psd) {
  return spectral_map(psd, [](double x) { return std::sqrt(x); }, 0.0);
}

// ---------------------------------------------------------------------------
// Structured states and decompositions
// ---------------------------------------------------------------------------

PureState max_entangled(int k, const std::string& label_a, const std::string& label_b) {
  if (k < 1) throw ValidationError("max_entangled: rank must be >= 1");
  SystemLayout l({Factor{label_a, k}, Factor{label_b, k}});
  Vec v = Vec::Zero(static_cast<long>(k) * k);
  const double a = 1.0 / std::sqrt(static_cast<double>(k));
  for (int i = 0; i < k; ++i) v(static_cast<long>(i) * k + i) = a;
  return PureState(std::move(l), std::move(v));
}

SchmidtForm schmidt(const PureState& psi, const std::vector<std::string>& left) {
  if (left.empty() || left.size() >= static_cast<size_t>(psi.layout.n_factors()))
    throw LayoutError("schmidt: left set must be a proper nonempty subset of the factors");
  std::vector<int> lp = psi.layout.indices_of(left);
  std::sort(lp.begin(), lp.end());
  SystemLayout ll = psi.layout.select(lp);
  SystemLayout rl = psi.layout.select(psi.layout.complement_of(left));
  Mat m = as_matrix(psi, ll.labels());
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SchmidtForm out;
  const RVec& s = svd.singularValues();
  out.coefficients = s.array().square();
  out.left_basis = svd.matrixU();
  out.right_basis = svd.matrixV().conjugate();
  double top = out.coefficients.size() ? out.coefficients(0) : 0.0;
  out.rank = 0;
  for (int i = 0; i < out.coefficients.size(); ++i)
    if (out.coefficients(i) > kSupportCutoff * std::max(top, 1e-300)) ++out.rank;
  out.left_layout = std::move(ll);
  out.right_layout = std::move(rl);
  return out;
}

PureState purify(const DensityOperator& rho, const std::string& new_label) {
  auto es = eig_herm(rho.matrix);
  const int d = rho.dim();
  // SelfAdjointEigenSolver sorts ascending; we want descending.
  Vec v = Vec::Zero(static_cast<long>(d) * d);
  for (int k = 0; k < d; ++k) {
    const int src = d - 1 - k;
    double lam = std::max(es.eigenvalues()(src), 0.0);
    if (lam <= 0.0) continue;
    const double c = std::sqrt(lam);
    for (int a = 0; a < d; ++a) v(static_cast<long>(a) * d + k) = c * es.eigenvectors()(a, src);
  }
  SystemLayout l = rho.layout.concat(SystemLayout({Factor{new_label, d}}));
  return PureState(std::move(l), std::move(v));
}

DensityOperator apply_channel(const KrausChannel& ch, const DensityOperator& rho) {
  if (ch.in_dim() != rho.dim())
    throw LayoutError("apply_channel: input dimension mismatch");
  Mat acc = Mat::Zero(ch.out_dim(), ch.out_dim());
  for (const auto& e : ch.operators()) acc += e * rho.matrix * e.adjoint();
  SystemLayout l = ch.out_dim() == rho.dim() ? rho.layout
                                             : SystemLayout({Factor{"out", ch.out_dim()}});
  return DensityOperator(std::move(l), hermitize(acc));
}

}  // namespace qsm
