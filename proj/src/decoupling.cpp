#include "qsm/decoupling.hpp"

#include <cmath>

namespace qsm {

double BlockMeasurement::completeness_error() const {
  Mat acc = Mat::Zero(d_a, d_a);
  for (const auto& p : projectors) acc += p.adjoint() * p;
  return (acc - Mat::Identity(d_a, d_a)).cwiseAbs().maxCoeff();
}

BlockMeasurement build_measurement(int d_a, int block_size, Rng& rng) {
  if (d_a < 1 || block_size < 1 || block_size > d_a)
    throw ValidationError("block measurement: need 1 <= L <= d_A");
  BlockMeasurement m;
  m.d_a = d_a;
  m.block_size = block_size;
  m.n_blocks = (d_a + block_size - 1) / block_size;
  m.residual_size = d_a - (m.n_blocks - 1) * block_size;
  m.seed = rng.root_seed();
  m.unitary = haar_unitary(d_a, rng);
  m.projectors.reserve(m.n_blocks);
  for (int j = 0; j < m.n_blocks; ++j) {
    const int lo = j * block_size;
    const int len = j == m.n_blocks - 1 ? m.residual_size : block_size;
    Mat p = Mat::Zero(block_size, d_a);
    p.topRows(len) = m.unitary.middleRows(lo, len);
    m.projectors.push_back(std::move(p));
  }
  return m;
}

std::vector<MeasurementOutcome> decoupling_trial(const DensityOperator& rho_ar,
                                                 const std::string& a_label,
                                                 const BlockMeasurement& m,
                                                 const std::string& out_label) {
  const int pos = rho_ar.layout.index_of(a_label);
  if (rho_ar.layout.factor(pos).dim != m.d_a)
    throw LayoutError("decoupling_trial: factor dimension does not match measurement");

  // Work with the measured factor in front.
  std::vector<std::string> order{a_label};
  for (const auto& l : rho_ar.layout.complement_labels({a_label})) order.push_back(l);
  DensityOperator rho = permute_factors(rho_ar, order);
  const int d_rest = rho.dim() / m.d_a;

  std::vector<Factor> out_factors{Factor{out_label, m.block_size}};
  for (int i = 1; i < rho.layout.n_factors(); ++i) out_factors.push_back(rho.layout.factor(i));
  SystemLayout out_layout(out_factors);

  std::vector<MeasurementOutcome> out;
  out.reserve(m.n_blocks);
  double total = 0.0;
  for (const auto& pj : m.projectors) {
    // (P_j (x) id) rho (P_j (x) id)^dagger via the block structure of the
    // A-major ordering.
    Mat big = Mat::Zero(static_cast<long>(m.block_size) * d_rest,
                        static_cast<long>(m.block_size) * d_rest);
    for (int r = 0; r < m.block_size; ++r)
      for (int c = 0; c < m.block_size; ++c) {
        Mat acc = Mat::Zero(d_rest, d_rest);
        for (int u = 0; u < m.d_a; ++u) {
          if (pj(r, u) == cxd(0.0, 0.0)) continue;
          for (int v = 0; v < m.d_a; ++v) {
            const cxd w = pj(r, u) * std::conj(pj(c, v));
            if (w == cxd(0.0, 0.0)) continue;
            acc += w * rho.matrix.block(static_cast<long>(u) * d_rest,
                                        static_cast<long>(v) * d_rest, d_rest, d_rest);
          }
        }
        big.block(static_cast<long>(r) * d_rest, static_cast<long>(c) * d_rest, d_rest, d_rest) =
            acc;
      }
    MeasurementOutcome o;
    o.probability = big.trace().real();
    total += o.probability;
    if (o.probability > kProbFloor) {
      o.state = DensityOperator(out_layout, hermitize(big / o.probability));
    } else {
      o.probability = std::max(o.probability, 0.0);
      o.state = DensityOperator(out_layout, hermitize(big));  // unnormalized remnant
    }
    out.push_back(std::move(o));
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw NumericError("decoupling_trial: outcome probabilities sum to " + std::to_string(total));
  return out;
}

DecouplingReport estimate_decoupling(const DensityOperator& rho_ar, const std::string& a_label,
                                     const DensityOperator& sigma_r, int block_size, int samples,
                                     const Rng& rng) {
  DecouplingReport rep;
  rep.d_a = rho_ar.layout.factor(rho_ar.layout.index_of(a_label)).dim;
  rep.block_size = block_size;
  rep.n_blocks = (rep.d_a + block_size - 1) / block_size;
  rep.samples = samples;
  rep.exact_division = rep.d_a % block_size == 0;
  rep.support_ok = support_contained(rho_ar, sigma_r);

  EntropyValue h2 = h2_rel(rho_ar, sigma_r);
  EntropyValue hmin = h_min_rel(rho_ar, sigma_r);
  const double log2l = std::log2(static_cast<double>(block_size));
  rep.bound_h2 = std::pow(2.0, -0.5 * (h2.bits - log2l));
  rep.bound_hmin = std::pow(2.0, -0.5 * (hmin.bits - log2l));

  // Reference product state tau_{A1} (x) rho_R on the outcome layout.
  std::vector<std::string> r_labels = rho_ar.layout.complement_labels({a_label});
  DensityOperator rho_r = partial_trace(rho_ar, r_labels);
  DensityOperator tau(SystemLayout({Factor{"A1", block_size}}),
                      Mat::Identity(block_size, block_size) / block_size);
  DensityOperator reference = tensor(tau, rho_r);

  const double scale = static_cast<double>(rep.d_a) / block_size;
  double sum = 0.0, sum_sq = 0.0;
  Mat mean_state = Mat::Zero(reference.dim(), reference.dim());
  for (int s = 0; s < samples; ++s) {
    Rng stream = rng.child(static_cast<uint64_t>(s));
    BlockMeasurement m = build_measurement(rep.d_a, block_size, stream);
    // First block only; for exact division all blocks are identically
    // distributed under the Haar measure.
    std::vector<std::string> order{a_label};
    for (const auto& l : r_labels) order.push_back(l);
    DensityOperator rho = permute_factors(rho_ar, order);
    const int d_rest = rho.dim() / rep.d_a;
    const Mat& pj = m.projectors.front();
    Mat big = Mat::Zero(static_cast<long>(block_size) * d_rest,
                        static_cast<long>(block_size) * d_rest);
    for (int r = 0; r < block_size; ++r)
      for (int c = 0; c < block_size; ++c) {
        Mat acc = Mat::Zero(d_rest, d_rest);
        for (int u = 0; u < rep.d_a; ++u)
          for (int v = 0; v < rep.d_a; ++v) {
            const cxd w = pj(r, u) * std::conj(pj(c, v));
            if (w == cxd(0.0, 0.0)) continue;
            acc += w * rho.matrix.block(static_cast<long>(u) * d_rest,
                                        static_cast<long>(v) * d_rest, d_rest, d_rest);
          }
        big.block(static_cast<long>(r) * d_rest, static_cast<long>(c) * d_rest, d_rest, d_rest) =
            acc;
      }
    double value = trace_norm(scale * big - reference.matrix);
    sum += value;
    sum_sq += value * value;
    mean_state += big;
  }
  rep.mean = sum / samples;
  double var = std::max(0.0, sum_sq / samples - rep.mean * rep.mean);
  rep.stderr_ = std::sqrt(var / samples);
  rep.margin = rep.bound_h2 - rep.mean;
  rep.mean_state = mean_state / samples;
  return rep;
}

}  // namespace qsm
