#include "qsm/random.hpp"

#include <Eigen/QR>
#include <cmath>

#include "qsm/ops.hpp"

namespace qsm {

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Rng::Rng(uint64_t seed) : root_(seed), engine_(splitmix64(seed)) {}

Rng Rng::child(uint64_t index) const {
  return Rng(splitmix64(root_ ^ (0xa076'1d64'78bd'642fULL + index)));
}

double Rng::uniform() {
  // 53-bit mantissa from the top bits.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

cxd Rng::cnormal() {
  double re = normal();
  double im = normal();
  return cxd(re, im);
}

Mat haar_unitary(int dim, Rng& rng) {
  if (dim < 1) throw ValidationError("haar_unitary: dim must be >= 1");
  Mat g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = rng.cnormal();
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ() * Mat::Identity(dim, dim);
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    cxd d = r(j, j);
    double a = std::abs(d);
    cxd phase = a > 0.0 ? d / a : cxd(1.0, 0.0);
    q.col(j) *= phase;
  }
  return q;
}

PureState haar_state(const SystemLayout& layout, Rng& rng) {
  Vec v(layout.total_dim());
  for (int i = 0; i < v.size(); ++i) v(i) = rng.cnormal();
  v /= v.norm();
  return PureState(layout, std::move(v));
}

DensityOperator random_density(const SystemLayout& layout, Rng& rng, int rank) {
  const int d = layout.total_dim();
  if (rank <= 0 || rank > d) rank = d;
  Mat g(d, rank);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < rank; ++j) g(i, j) = rng.cnormal();
  Mat m = g * g.adjoint();
  m /= m.trace().real();
  return DensityOperator(layout, hermitize(m));
}

KrausChannel random_channel(int in_dim, int out_dim, int n_kraus, Rng& rng) {
  std::vector<Mat> raw;
  raw.reserve(n_kraus);
  Mat acc = Mat::Zero(in_dim, in_dim);
  for (int k = 0; k < n_kraus; ++k) {
    Mat g(out_dim, in_dim);
    for (int i = 0; i < out_dim; ++i)
      for (int j = 0; j < in_dim; ++j) g(i, j) = rng.cnormal();
    raw.push_back(g);
    acc += g.adjoint() * g;
  }
  Mat norm = pinv_power(acc, -0.5);
  std::vector<Mat> ops;
  ops.reserve(n_kraus);
  for (const auto& g : raw) ops.push_back(g * norm);
  return KrausChannel(std::move(ops));
}

}  // namespace qsm
