#include "qsm/entropies.hpp"

#include <algorithm>
#include <cmath>

namespace qsm {

namespace {

double lambda_max(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double lambda_min(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

std::string to_string(EntropyMethod m) {
  switch (m) {
    case EntropyMethod::closed_form: return "closed-form";
    case EntropyMethod::eigen: return "eigen";
    case EntropyMethod::sdp: return "sdp";
  }
  return "unknown";
}

double h_min(const DensityOperator& rho) { return -std::log2(lambda_max(rho.matrix)); }

double h_max(const DensityOperator& rho) {
  return std::log2(static_cast<double>(support_rank(rho.matrix)));
}

Mat conjugate_on_cond(const DensityOperator& rho, const Mat& op_on_cond,
                      const std::vector<std::string>& cond) {
  Mat full = embed_operator(op_on_cond, rho.layout, cond);
  return hermitize(full * rho.matrix * full);
}

bool support_contained(const DensityOperator& rho, const DensityOperator& sigma) {
  DensityOperator marg = partial_trace(rho, sigma.layout.labels());
  Mat off = Mat::Identity(sigma.dim(), sigma.dim()) - support_projector(sigma.matrix);
  double leak = (off * marg.matrix * off).trace().real();
  return leak <= 1e-9 * std::max(1.0, lambda_max(marg.matrix));
}

EntropyValue h_min_rel(const DensityOperator& rho, const DensityOperator& sigma) {
  if (!support_contained(rho, sigma))
    return EntropyValue::unbounded_below("support of rho_B not contained in support of sigma_B");
  Mat inv_half = pinv_power(sigma.matrix, -0.5);
  Mat scaled = conjugate_on_cond(rho, inv_half, sigma.layout.labels());
  EntropyValue v;
  v.bits = -std::log2(lambda_max(scaled));
  v.method = EntropyMethod::eigen;
  return v;
}

double h_min_rel_bisect(const DensityOperator& rho, const DensityOperator& sigma, double tol) {
  Mat big = embed_operator(sigma.matrix, rho.layout, sigma.layout.labels());
  // lambda feasible iff lambda * big - rho >= 0; feasibility is monotone.
  double lo = 0.0;
  double hi = 1.0;
  auto feasible = [&](double lam) { return lambda_min(lam * big - rho.matrix) >= -1e-13; };
  while (!feasible(hi)) {
    hi *= 2.0;
    if (hi > 1e12) return -std::numeric_limits<double>::infinity();
  }
  while (hi - lo > tol * std::max(1.0, hi)) {
    double mid = 0.5 * (lo + hi);
    if (feasible(mid))
      hi = mid;
    else
      lo = mid;
  }
  return -std::log2(hi);
}

EntropyValue h_min_cond(const DensityOperator& rho, const std::vector<std::string>& cond,
                        const SdpOptions& opts) {
  const SystemLayout cond_layout = rho.layout.subset(cond);
  const int db = cond_layout.total_dim();
  const int d = rho.dim();
  const std::vector<int> cpos = rho.layout.indices_of(cond_layout.labels());

  // Blocks: 0 = X (on the conditioning factors), 1 = slack S with
  // id (x) X - S = rho.
  SdpProblem p;
  p.block_dims = {db, d};
  p.objective = {Mat::Identity(db, db), Mat::Zero(d, d)};

  // Map a full-space index to (cond part, rest part).
  std::vector<int> dims(rho.layout.n_factors());
  for (int i = 0; i < rho.layout.n_factors(); ++i) dims[i] = rho.layout.factor(i).dim;
  std::vector<long> strides = make_strides(dims);
  std::vector<int> cond_digit(d), rest_digit(d);
  {
    SystemLayout cl = cond_layout;
    std::vector<int> cdims;
    for (const auto& f : cl.factors()) cdims.push_back(f.dim);
    std::vector<long> cstr = make_strides(cdims);
    for (int i = 0; i < d; ++i) {
      long cidx = 0;
      int k = 0;
      for (int pos : cpos) {
        int digit = static_cast<int>((i / strides[pos]) % dims[pos]);
        cidx += digit * cstr[k++];
      }
      cond_digit[i] = static_cast<int>(cidx);
      // rest identity: encode full index minus cond contribution
      long r = i;
      for (int pos : cpos) {
        int digit = static_cast<int>((i / strides[pos]) % dims[pos]);
        r -= static_cast<long>(digit) * strides[pos];
      }
      rest_digit[i] = static_cast<int>(r);
    }
  }

  for (int r = 0; r < d; ++r) {
    for (int c = r; c < d; ++c) {
      const bool same_rest = rest_digit[r] == rest_digit[c];
      const cxd rv = rho.matrix(r, c);
      if (r == c) {
        ConstraintBuilder cb;
        cb.add_diag(0, cond_digit[r], 1.0);  // (id (x) X) diagonal
        cb.add_diag(1, r, -1.0);
        p.constraints.push_back(cb.done(rv.real()));
      } else {
        // real part
        {
          ConstraintBuilder cb;
          if (same_rest) cb.add(0, cond_digit[r], cond_digit[c], cxd(1.0, 0.0));
          cb.add(1, r, c, cxd(-1.0, 0.0));
          p.constraints.push_back(cb.done(2.0 * rv.real()));
        }
        // imaginary part
        {
          ConstraintBuilder cb;
          if (same_rest && cond_digit[r] != cond_digit[c])
            cb.add(0, cond_digit[r], cond_digit[c], cxd(0.0, 1.0));
          cb.add(1, r, c, cxd(0.0, -1.0));
          p.constraints.push_back(cb.done(2.0 * rv.imag()));
        }
      }
    }
  }

  SdpSolution s = solve(p, opts);
  EntropyValue v;
  v.method = EntropyMethod::sdp;
  v.gap = s.gap;
  double opt = s.primal[0].trace().real();
  v.bits = -std::log2(opt);
  v.witness = s.primal[0] / opt;
  if (s.status != SdpStatus::optimal)
    v.note = "sdp status: " + to_string(s.status) + " (best bound reported)";
  return v;
}

double h_max_rel(const DensityOperator& rho, const DensityOperator& sigma) {
  Mat proj = support_projector(rho.matrix);
  Mat big = embed_operator(sigma.matrix, rho.layout, sigma.layout.labels());
  return std::log2((big * proj).trace().real());
}

double h_max_cond(const DensityOperator& rho, const std::vector<std::string>& cond) {
  Mat proj = support_projector(rho.matrix);
  DensityOperator proj_op(rho.layout, proj);  // not a state; reuse the index plumbing
  DensityOperator reduced = partial_trace(proj_op, cond);
  return std::log2(lambda_max(reduced.matrix));
}

EntropyValue h2_rel(const DensityOperator& rho, const DensityOperator& sigma) {
  if (!support_contained(rho, sigma))
    return EntropyValue::unbounded_below("support of rho_B not contained in support of sigma_B");
  Mat inv_quarter = pinv_power(sigma.matrix, -0.25);
  Mat scaled = conjugate_on_cond(rho, inv_quarter, sigma.layout.labels());
  EntropyValue v;
  v.bits = -std::log2((scaled * scaled).trace().real());
  v.method = EntropyMethod::eigen;
  return v;
}

double von_neumann(const DensityOperator& rho) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(rho.matrix), Eigen::EigenvaluesOnly);
  const RVec& ev = es.eigenvalues();
  double lmax = std::max(ev.maxCoeff(), 0.0);
  double cut = kSupportCutoff * std::max(lmax, 1e-300);
  double s = 0.0;
  for (int i = 0; i < ev.size(); ++i)
    if (ev(i) > cut) s -= ev(i) * std::log2(ev(i));
  return s;
}

double cond_von_neumann(const DensityOperator& rho, const std::vector<std::string>& cond) {
  return von_neumann(rho) - von_neumann(partial_trace(rho, cond));
}

double duality_gap(const PureState& psi, const std::vector<std::string>& a_labels,
                   const std::vector<std::string>& b_labels,
                   const std::vector<std::string>& r_labels) {
  std::vector<std::string> ar = a_labels;
  ar.insert(ar.end(), r_labels.begin(), r_labels.end());
  std::vector<std::string> ab = a_labels;
  ab.insert(ab.end(), b_labels.begin(), b_labels.end());
  DensityOperator rho_ar = reduced_density(psi, ar);
  DensityOperator rho_r = reduced_density(psi, r_labels);
  DensityOperator rho_ab = reduced_density(psi, ab);
  EntropyValue hmin = h_min_rel(rho_ar, rho_r);
  double hmax = h_max_cond(rho_ab, b_labels);
  return std::abs(hmin.bits + hmax);
}

}  // namespace qsm
