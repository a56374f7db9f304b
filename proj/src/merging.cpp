#include "qsm/merging.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace qsm {

namespace {

long pow2(long e) { return 1L << e; }

// Orthonormal completion: returns a (rows x want) matrix whose first
// base.cols() columns are `base` and whose remaining columns extend it to an
// orthonormal family. Deterministic (Householder completion).
Mat complete_frame(const Mat& base, int want) {
  const int rows = static_cast<int>(base.rows());
  const int have = static_cast<int>(base.cols());
  if (want < have) throw NumericError("complete_frame: cannot shrink");
  if (want > rows) throw NumericError("complete_frame: not enough room to complete frame");
  if (want == have) return base;
  Eigen::HouseholderQR<Mat> qr(base);
  Mat q = qr.householderQ() * Mat::Identity(rows, want);
  // The first `have` columns equal base up to phases from the R diagonal.
  Mat r = qr.matrixQR().topLeftCorner(have, have).triangularView<Eigen::Upper>();
  for (int j = 0; j < have; ++j) {
    cxd d = r(j, j);
    double a = std::abs(d);
    q.col(j) *= a > 0.0 ? d / a : cxd(1.0, 0.0);
  }
  q.leftCols(have) = base;  // restore exactly
  return q;
}

}  // namespace

std::string to_string(CostPlan::Mode m) {
  switch (m) {
    case CostPlan::Mode::nonsmooth: return "nonsmooth";
    case CostPlan::Mode::smooth: return "smooth";
    case CostPlan::Mode::corollary: return "corollary";
  }
  return "unknown";
}

CostPlan plan_cost(const DensityOperator& rho_ar, const std::vector<std::string>& r_labels,
                   double eps, CostPlan::Mode mode, const SdpOptions& opts) {
  if (eps <= 0.0 || eps >= 1.0)
    throw ValidationError("plan_cost: eps must lie strictly inside (0, 1)");
  CostPlan plan;
  plan.mode = mode;
  plan.eps = eps;
  const double log_inv = std::log2(1.0 / eps);
  switch (mode) {
    case CostPlan::Mode::nonsmooth: {
      plan.eps_prime = 0.0;
      EntropyValue h = h_min_cond(rho_ar, r_labels, opts);
      plan.target_bits = -h.bits + 2.0 * log_inv;
      plan.guarantee = 2.0 * std::sqrt(2.0 * eps);
      break;
    }
    case CostPlan::Mode::smooth: {
      plan.eps_prime = eps;
      EntropyValue h = h_min_smooth_cond(rho_ar, r_labels, eps, opts);
      plan.target_bits = -h.bits + 2.0 * log_inv;
      plan.guarantee = 8.0 * std::sqrt(eps);
      break;
    }
    case CostPlan::Mode::corollary: {
      plan.eps_prime = eps * eps / 64.0;
      EntropyValue h = h_min_smooth_cond(rho_ar, r_labels, plan.eps_prime, opts);
      plan.target_bits = -h.bits + 4.0 * log_inv + 12.0;
      plan.guarantee = eps;
      break;
    }
  }
  // Minimal integer bits at or above the target (K, L powers of two). The
  // entropic target carries solver noise of order 1e-9, so integer-valued
  // targets are snapped rather than bumped a full bit.
  long c = static_cast<long>(std::ceil(plan.target_bits - 1e-7));
  if (std::abs(c) > 30)
    throw ValidationError("plan_cost: entanglement budget of " + std::to_string(c) +
                          " bits exceeds the simulation range");
  plan.k = pow2(std::max<long>(c, 0));
  plan.l = pow2(std::max<long>(-c, 0));
  plan.cost_bits = std::log2(static_cast<double>(plan.k)) -
                   std::log2(static_cast<double>(plan.l));
  return plan;
}

UhlmannResult uhlmann_isometry(const PureState& source, const PureState& target,
                               const std::vector<std::string>& fixed) {
  SystemLayout fs = source.layout.subset(fixed);
  SystemLayout ft = target.layout.subset(fixed);
  if (fs != ft)
    throw LayoutError("uhlmann: fixed factors of source and target do not match");
  Mat s_mat = as_matrix(source, fs.labels());  // dF x dP
  Mat t_mat = as_matrix(target, fs.labels());  // dF x dP'
  const int dp = static_cast<int>(s_mat.cols());
  const int dpp = static_cast<int>(t_mat.cols());
  const int df = static_cast<int>(s_mat.rows());

  // Orthonormal basis containing the source-side support.
  const int ks = std::min(dp, df);
  if (dpp < ks)
    throw LayoutError("uhlmann: target complement too small for the source rank");
  Eigen::HouseholderQR<Mat> qr(s_mat.transpose());
  Mat q_s = qr.householderQ() * Mat::Identity(dp, ks);

  // G_tilde = t^T conj(s) q_s; its singular value sum squares to the marginal
  // fidelity.
  Mat g = t_mat.transpose() * (s_mat.conjugate() * q_s);  // dP' x ks
  Eigen::JacobiSVD<Mat> svd(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
  UhlmannResult out;
  double ssum = svd.singularValues().sum();
  out.fidelity = std::clamp(ssum * ssum, 0.0, 1.0);
  if (dpp >= dp) {
    // Room for a full isometry: pair the leftover source directions with
    // fresh orthonormal target directions.
    Mat b_s = complete_frame(q_s * svd.matrixV(), dp);   // dp x dp unitary
    Mat b_t = complete_frame(svd.matrixU(), dp);         // dpp x dp frame
    out.isometry = b_t * b_s.adjoint();
  } else {
    out.isometry = svd.matrixU() * svd.matrixV().adjoint() * q_s.adjoint();
  }
  return out;
}

void MergeTask::validate() const {
  psi.validate();
  if (k < 1 || l < 1) throw ValidationError("merge task: K and L must be >= 1");
  auto check = [&](const std::vector<std::string>& ls) {
    for (const auto& l2 : ls) (void)psi.layout.index_of(l2);
  };
  check(a_labels);
  check(b_labels);
  check(r_labels);
  if (a_labels.empty() || r_labels.empty())
    throw ValidationError("merge task: A and R label sets must be nonempty");
}

MergeOutcome run_protocol(const MergeTask& task) {
  task.validate();
  Rng rng(task.seed);
  const long k_rank = task.k;
  const long l_rank = task.l;

  const int da = task.psi.layout.dim_of(task.a_labels);
  const int db = task.psi.layout.dim_of(task.b_labels.empty()
                                            ? std::vector<std::string>{}
                                            : task.b_labels);
  const int dr = task.psi.layout.dim_of(task.r_labels);
  const int dbb = db > 0 ? db : 1;

  // psi amplitudes in (A, B, R) grouped order.
  std::vector<std::string> abr = task.a_labels;
  abr.insert(abr.end(), task.b_labels.begin(), task.b_labels.end());
  abr.insert(abr.end(), task.r_labels.begin(), task.r_labels.end());
  PureState psi_g = permute_factors(task.psi, abr);

  // Starting state psi (x) Phi_K, Alice register (A, A0) in front, remainder
  // ordered (B, B0, R). Row index of psi_mat: (a, a0); column: (b, b0, r).
  const long d_alice = static_cast<long>(da) * k_rank;
  const long d_bob = static_cast<long>(dbb) * k_rank;
  const long d_rest = d_bob * dr;
  Mat psi_mat = Mat::Zero(d_alice, d_rest);
  const double phi_k_amp = 1.0 / std::sqrt(static_cast<double>(k_rank));
  for (int a = 0; a < da; ++a)
    for (int b = 0; b < dbb; ++b)
      for (int r = 0; r < dr; ++r) {
        const cxd amp = psi_g.vector((static_cast<long>(a) * dbb + b) * dr + r);
        if (amp == cxd(0.0, 0.0)) continue;
        for (long a0 = 0; a0 < k_rank; ++a0)
          psi_mat(static_cast<long>(a) * k_rank + a0,
                  (static_cast<long>(b) * k_rank + a0) * dr + r) = amp * phi_k_amp;
      }

  if (d_alice > 2048)
    throw ValidationError("run_protocol: Alice register dimension " + std::to_string(d_alice) +
                          " exceeds the simulation budget");
  BlockMeasurement meas = build_measurement(static_cast<int>(d_alice),
                                            static_cast<int>(l_rank), rng);

  // rho_R of the original state, factors in task order.
  DensityOperator rho_r = permute_factors(reduced_density(task.psi, task.r_labels),
                                          task.r_labels);

  // Target Phi_L (x) psi_BB'R (x) |0>_J as a (dF x dP') matrix, rows (a1, r),
  // columns (b1, b', b, j).
  const long d_target_core = l_rank * static_cast<long>(da) * dbb;
  const long d_junk = std::max<long>(1, (d_bob + d_target_core - 1) / d_target_core);
  const long dpp = d_target_core * d_junk;
  const long df = l_rank * static_cast<long>(dr);
  Mat t_mat = Mat::Zero(df, dpp);
  const double phi_l_amp = 1.0 / std::sqrt(static_cast<double>(l_rank));
  for (long a1 = 0; a1 < l_rank; ++a1)
    for (int bp = 0; bp < da; ++bp)
      for (int b = 0; b < dbb; ++b)
        for (int r = 0; r < dr; ++r) {
          const cxd amp = psi_g.vector((static_cast<long>(bp) * dbb + b) * dr + r);
          if (amp == cxd(0.0, 0.0)) continue;
          t_mat(a1 * dr + r, ((a1 * da + bp) * dbb + b) * d_junk + 0) = amp * phi_l_amp;
        }
  Eigen::HouseholderQR<Mat> t_qr(t_mat.transpose());
  const int kt = static_cast<int>(std::min<long>(dpp, df));
  Mat q_t = t_qr.householderQ() * Mat::Identity(dpp, kt);
  Mat r_t = t_qr.matrixQR().topLeftCorner(kt, df).triangularView<Eigen::Upper>();

  // Reference tau_{A1} (x) rho_R for the merging condition.
  Mat tau_rho = Mat::Zero(df, df);
  for (long a1 = 0; a1 < l_rank; ++a1)
    tau_rho.block(a1 * dr, a1 * dr, dr, dr) = rho_r.matrix / static_cast<double>(l_rank);

  SystemLayout a1r_layout({Factor{"A1", static_cast<int>(l_rank)}, Factor{"R", dr}});
  SystemLayout final_layout({Factor{"A1", static_cast<int>(l_rank)},
                             Factor{"B1", static_cast<int>(l_rank)}, Factor{"Bp", da},
                             Factor{"B", dbb}, Factor{"R", dr}});
  const long d_final = final_layout.total_dim();

  MergeOutcome out;
  out.cost_bits = std::log2(static_cast<double>(k_rank)) -
                  std::log2(static_cast<double>(l_rank));
  Mat final_acc = Mat::Zero(d_final, d_final);
  double condition = 0.0;

  for (const Mat& pj : meas.projectors) {
    // Unnormalized outcome (L x d_rest).
    Mat mj = pj * psi_mat;
    const double prob = mj.squaredNorm();
    out.probabilities.push_back(prob);
    if (prob <= kProbFloor) {
      out.post_states.push_back(DensityOperator(a1r_layout, Mat::Zero(df, df)));
      FactoredIsometry fi;
      fi.trivial = true;
      out.isometries.push_back(std::move(fi));
      continue;
    }
    mj /= std::sqrt(prob);

    // Source matrix s_mat with rows (a1, r) and columns (b, b0).
    Mat s_mat(df, d_bob);
    for (long a1 = 0; a1 < l_rank; ++a1)
      for (long bb = 0; bb < d_bob; ++bb)
        for (int r = 0; r < dr; ++r) s_mat(a1 * dr + r, bb) = mj(a1, bb * dr + r);

    // Outcome marginal on (A1, R) and its condition term.
    Mat rho_j = s_mat * s_mat.adjoint();
    out.post_states.push_back(DensityOperator(a1r_layout, hermitize(rho_j)));
    condition += prob * trace_norm(rho_j - tau_rho);

    // Uhlmann decoder in factored form.
    const int ks = static_cast<int>(std::min<long>(d_bob, df));
    Eigen::HouseholderQR<Mat> s_qr(s_mat.transpose());
    Mat q_s = s_qr.householderQ() * Mat::Identity(d_bob, ks);
    Mat r_s = s_qr.matrixQR().topLeftCorner(ks, df).triangularView<Eigen::Upper>();
    Mat core = r_t * r_s.adjoint();  // kt x ks
    Eigen::JacobiSVD<Mat> svd(core, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const int kc = static_cast<int>(svd.singularValues().size());
    // Source-side unitary (ks x ks) and target-side frame (dpp x ks).
    Mat v_full = svd.matrixV();  // ks x ks, unitary
    Mat tu = q_t * svd.matrixU();  // dpp x kt, first kc columns used
    Mat b_t = complete_frame(tu.leftCols(std::min(kc, ks)), ks);

    FactoredIsometry fi;
    fi.source_frame = q_s * v_full;  // d_bob x ks
    fi.target_frame = b_t;           // dpp x ks
    out.isometries.push_back(fi);

    // Applied state: out_mat = r_s^T conj(v_full) b_t^T, rows (a1, r),
    // columns (b1, b', b, j).
    Mat out_mat = r_s.transpose() * v_full.conjugate() * b_t.transpose();

    // Accumulate p_j * Tr_J |out><out| on (A1, B1, B', B, R).
    for (long jj = 0; jj < d_junk; ++jj) {
      Vec slice = Vec::Zero(d_final);
      for (long a1 = 0; a1 < l_rank; ++a1)
        for (int r = 0; r < dr; ++r) {
          const long row = a1 * dr + r;
          for (long col = 0; col < d_target_core; ++col) {
            const cxd amp = out_mat(row, col * d_junk + jj);
            if (amp == cxd(0.0, 0.0)) continue;
            slice((a1 * d_target_core + col) * dr + r) = amp;
          }
        }
      final_acc.noalias() += prob * (slice * slice.adjoint());
    }
  }

  out.condition_value = condition;
  out.final_state = DensityOperator(final_layout, hermitize(final_acc));

  // Comparison target Phi_L (x) psi_BB'R on the same fused layout.
  Vec target_vec = Vec::Zero(d_final);
  for (long a1 = 0; a1 < l_rank; ++a1)
    for (int bp = 0; bp < da; ++bp)
      for (int b = 0; b < dbb; ++b)
        for (int r = 0; r < dr; ++r) {
          const cxd amp = psi_g.vector((static_cast<long>(bp) * dbb + b) * dr + r);
          target_vec((a1 * d_target_core + (a1 * da + bp) * static_cast<long>(dbb) + b) * dr + r) =
              amp * phi_l_amp;
        }
  out.target_state = DensityOperator(final_layout, target_vec * target_vec.adjoint());
  out.error = trace_norm(out.final_state.matrix - out.target_state.matrix);
  return out;
}

double merging_condition(const std::vector<MeasurementOutcome>& outcomes,
                         const DensityOperator& rho_r, int l) {
  double acc = 0.0;
  DensityOperator tau(SystemLayout({Factor{"A1", l}}), Mat::Identity(l, l) / l);
  DensityOperator ref = tensor(tau, rho_r);
  for (const auto& o : outcomes) {
    if (o.probability <= kProbFloor) continue;
    DensityOperator aligned = permute_factors(ref, o.state.layout.labels());
    acc += o.probability * trace_norm(o.state.matrix - aligned.matrix);
  }
  return acc;
}

double zero_error_bound(const PureState& psi, const std::vector<std::string>& a_labels,
                        const std::vector<std::string>& b_labels,
                        const std::vector<std::string>& r_labels) {
  std::vector<std::string> ar = a_labels;
  ar.insert(ar.end(), r_labels.begin(), r_labels.end());
  std::vector<std::string> ab = a_labels;
  ab.insert(ab.end(), b_labels.begin(), b_labels.end());
  DensityOperator rho_ar = reduced_density(psi, ar);
  DensityOperator rho_r = reduced_density(psi, r_labels);
  double bound = -h_min_rel(rho_ar, rho_r).bits;
  DensityOperator rho_ab = reduced_density(psi, ab);
  double dual = h_max_cond(rho_ab, b_labels);
  if (std::abs(bound - dual) > 1e-6)
    throw NumericError("zero_error_bound: min/max-entropy duality cross-check failed, |" +
                       std::to_string(bound) + " - " + std::to_string(dual) + "| > 1e-6");
  return bound;
}

double eps_error_bound(const PureState& psi, const std::vector<std::string>& a_labels,
                       const std::vector<std::string>& b_labels,
                       const std::vector<std::string>& r_labels, double eps,
                       const SdpOptions& opts) {
  (void)b_labels;
  if (eps < 0.0) throw ValidationError("eps_error_bound: eps must be >= 0");
  std::vector<std::string> ar = a_labels;
  ar.insert(ar.end(), r_labels.begin(), r_labels.end());
  DensityOperator rho_ar = reduced_density(psi, ar);
  const double radius = std::sqrt(eps);
  const int da = psi.layout.dim_of(a_labels);
  if (radius >= 1.0) {
    // Ball covers the whole state space; the best smoothed state decouples A.
    return -std::log2(static_cast<double>(da));
  }
  EntropyValue h = h_min_smooth_cond(rho_ar, r_labels, radius, opts);
  return -h.bits;
}

std::pair<double, double> monotonicity_witness(const DensityOperator& rho_ar,
                                               const std::vector<std::string>& a_labels,
                                               const DensityOperator& sigma_r,
                                               const KrausChannel& channel_on_a) {
  const double before = h_min_rel(rho_ar, sigma_r).bits;

  const int da = rho_ar.layout.dim_of(a_labels);
  if (channel_on_a.in_dim() != da || channel_on_a.out_dim() != da)
    throw LayoutError("monotonicity_witness: channel must act on A with equal dims");
  const int d = rho_ar.dim();
  const int nx = static_cast<int>(channel_on_a.operators().size());

  Mat big = Mat::Zero(static_cast<long>(d) * nx, static_cast<long>(d) * nx);
  RVec px(nx);
  for (int x = 0; x < nx; ++x) {
    Mat e_full = embed_operator(channel_on_a.operators()[x], rho_ar.layout, a_labels);
    Mat block = e_full * rho_ar.matrix * e_full.adjoint();
    px(x) = block.trace().real();
    // interleaved layout (original factors..., X): entry ((i,x),(j,x))
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        big(static_cast<long>(i) * nx + x, static_cast<long>(j) * nx + x) = block(i, j);
  }
  SystemLayout lx = rho_ar.layout.concat(SystemLayout({Factor{"X", nx}}));
  DensityOperator rho_prime(lx, hermitize(big));

  Mat rho_x = Mat::Zero(nx, nx);
  for (int x = 0; x < nx; ++x) rho_x(x, x) = px(x);
  DensityOperator sigma_prime =
      tensor(sigma_r, DensityOperator(SystemLayout({Factor{"X", nx}}), rho_x));

  const double after = h_min_rel(rho_prime, sigma_prime).bits;
  return {before, after};
}

}  // namespace qsm
