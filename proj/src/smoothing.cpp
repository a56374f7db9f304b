#include "qsm/smoothing.hpp"

#include <algorithm>
#include <cmath>

namespace qsm {

namespace {

// The smooth SDPs are built on a bipartite (rest, cond) basis: rho permuted so
// the conditioning factors sit last, row index = a * dB + b.
struct Bipartite {
  DensityOperator rho;        // permuted
  std::vector<std::string> order;
  int da = 0;
  int db = 0;
};

Bipartite bipartite(const DensityOperator& rho, const std::vector<std::string>& cond) {
  Bipartite out;
  std::vector<std::string> rest = rho.layout.complement_labels(cond);
  std::vector<std::string> cond_in_order = rho.layout.subset(cond).labels();
  out.order = rest;
  out.order.insert(out.order.end(), cond_in_order.begin(), cond_in_order.end());
  out.rho = permute_factors(rho, out.order);
  out.db = rho.layout.dim_of(cond);
  out.da = rho.dim() / out.db;
  return out;
}

struct BallBlocks {
  int g = 0;      // rho_bar
  int p = 1;
  int q = 2;
  int aux = 3;    // Y (conditional) or lambda (relative)
  int s = 4;      // PSD slack for the operator inequality
  int slack = 5;  // scalar slack of the ball trace constraint
};

// Common constraint families for smoothing over the trace-distance ball:
//   (a) G - P + Q = rho           (d^2 equalities)
//   (c) tr G = 1
//   (d) tr P + tr Q + slack = 2 eps
void add_ball_constraints(SdpProblem& p, const Mat& rho, double eps, const BallBlocks& blk) {
  const int d = static_cast<int>(rho.rows());
  for (int r = 0; r < d; ++r) {
    for (int c = r; c < d; ++c) {
      const cxd rv = rho(r, c);
      if (r == c) {
        ConstraintBuilder cb;
        cb.add_diag(blk.g, r, 1.0).add_diag(blk.p, r, -1.0).add_diag(blk.q, r, 1.0);
        p.constraints.push_back(cb.done(rv.real()));
      } else {
        {
          ConstraintBuilder cb;
          cb.add(blk.g, r, c, cxd(1.0, 0.0))
              .add(blk.p, r, c, cxd(-1.0, 0.0))
              .add(blk.q, r, c, cxd(1.0, 0.0));
          p.constraints.push_back(cb.done(2.0 * rv.real()));
        }
        {
          ConstraintBuilder cb;
          cb.add(blk.g, r, c, cxd(0.0, 1.0))
              .add(blk.p, r, c, cxd(0.0, -1.0))
              .add(blk.q, r, c, cxd(0.0, 1.0));
          p.constraints.push_back(cb.done(2.0 * rv.imag()));
        }
      }
    }
  }
  {
    ConstraintBuilder cb;
    for (int k = 0; k < d; ++k) cb.add_diag(blk.g, k, 1.0);
    p.constraints.push_back(cb.done(1.0));
  }
  {
    ConstraintBuilder cb;
    for (int k = 0; k < d; ++k) cb.add_diag(blk.p, k, 1.0).add_diag(blk.q, k, 1.0);
    cb.add_diag(blk.slack, 0, 1.0);
    p.constraints.push_back(cb.done(2.0 * eps));
  }
}

DensityOperator witness_from(const Mat& g, const SystemLayout& permuted_layout,
                             const SystemLayout& original_layout) {
  DensityOperator w(permuted_layout, hermitize(g));
  return permute_factors(w, original_layout.labels());
}

}  // namespace

double SmoothingBall::distance(const DensityOperator& cand) const {
  return trace_distance(center, cand);
}

bool SmoothingBall::contains(const DensityOperator& cand, double slack) const {
  cand.validate();
  return distance(cand) <= epsilon + slack;
}

EntropyValue h_min_smooth_cond(const DensityOperator& rho, const std::vector<std::string>& cond,
                               double eps, const SdpOptions& opts) {
  if (eps < 0.0 || eps >= 1.0)
    throw ValidationError("smooth entropy: eps must lie in [0, 1)");
  if (eps == 0.0) {
    EntropyValue v = h_min_cond(rho, cond, opts);
    v.note = "eps = 0: reduced to the non-smooth conditional SDP";
    return v;
  }
  Bipartite bp = bipartite(rho, cond);
  const int d = bp.da * bp.db;
  BallBlocks blk;

  SdpProblem p;
  p.block_dims = {d, d, d, bp.db, d, 1};
  p.objective.assign(6, Mat());
  for (int i = 0; i < 6; ++i)
    p.objective[i] = Mat::Zero(p.block_dims[i], p.block_dims[i]);
  p.objective[blk.aux] = Mat::Identity(bp.db, bp.db);

  add_ball_constraints(p, bp.rho.matrix, eps, blk);

  // (b) G + S - id (x) Y = 0
  for (int r = 0; r < d; ++r) {
    const int ar = r / bp.db, br = r % bp.db;
    for (int c = r; c < d; ++c) {
      const int ac = c / bp.db, bc = c % bp.db;
      if (r == c) {
        ConstraintBuilder cb;
        cb.add_diag(blk.g, r, 1.0).add_diag(blk.s, r, 1.0).add_diag(blk.aux, br, -1.0);
        p.constraints.push_back(cb.done(0.0));
      } else {
        {
          ConstraintBuilder cb;
          cb.add(blk.g, r, c, cxd(1.0, 0.0)).add(blk.s, r, c, cxd(1.0, 0.0));
          if (ar == ac) cb.add(blk.aux, br, bc, cxd(-1.0, 0.0));
          p.constraints.push_back(cb.done(0.0));
        }
        {
          ConstraintBuilder cb;
          cb.add(blk.g, r, c, cxd(0.0, 1.0)).add(blk.s, r, c, cxd(0.0, 1.0));
          if (ar == ac) cb.add(blk.aux, br, bc, cxd(0.0, -1.0));
          p.constraints.push_back(cb.done(0.0));
        }
      }
    }
  }

  SdpSolution s = solve(p, opts);
  EntropyValue v;
  v.method = EntropyMethod::sdp;
  v.gap = s.gap;
  double opt = s.primal[blk.aux].trace().real();
  v.bits = -std::log2(opt);
  DensityOperator wit = witness_from(s.primal[blk.g], bp.rho.layout, rho.layout);
  SmoothingBall ball{rho, eps};
  double dist = ball.distance(wit);
  if (dist > eps + 1e-7)
    v.note = "ball revalidation: witness distance " + std::to_string(dist);
  if (s.status != SdpStatus::optimal)
    v.note += (v.note.empty() ? "" : "; ") + ("sdp status: " + to_string(s.status));
  v.witness = wit.matrix;
  return v;
}

namespace {

struct CompressedRel {
  Mat rho;    // on A (x) supp(sigma)
  Mat sigma;  // restricted, PD
  Mat v;      // dB x k isometry onto supp(sigma); identity when full rank
  int da = 0;
  int k = 0;
};

CompressedRel compress_rel(const Bipartite& bp, const DensityOperator& sigma) {
  CompressedRel out;
  out.da = bp.da;
  const int db = bp.db;
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(sigma.matrix));
  double lmax = std::max(es.eigenvalues().maxCoeff(), 0.0);
  double cut = kSupportCutoff * std::max(lmax, 1e-300);
  std::vector<int> keep;
  for (int i = 0; i < db; ++i)
    if (es.eigenvalues()(i) > cut) keep.push_back(i);
  out.k = static_cast<int>(keep.size());
  if (out.k == db) {
    out.v = Mat::Identity(db, db);
    out.sigma = sigma.matrix;
    out.rho = bp.rho.matrix;
    return out;
  }
  out.v = Mat(db, out.k);
  for (int j = 0; j < out.k; ++j) out.v.col(j) = es.eigenvectors().col(keep[j]);
  out.sigma = out.v.adjoint() * sigma.matrix * out.v;
  Mat lift = Mat::Zero(bp.da * db, bp.da * out.k);
  for (int a = 0; a < bp.da; ++a)
    lift.block(static_cast<long>(a) * db, static_cast<long>(a) * out.k, db, out.k) = out.v;
  out.rho = hermitize(lift.adjoint() * bp.rho.matrix * lift);
  return out;
}

SdpProblem build_rel_problem(const Mat& rho, const Mat& sigma, int da, int k, double eps,
                             double lambda_fixed, bool phase1) {
  // Blocks: G, P, Q, aux, S, slack. In the lambda-variable form, aux is the
  // scalar lambda and the operator constraint is G + S - lambda M = 0 with
  // M = id (x) sigma. In phase-1 form lambda is fixed and aux is the scalar t
  // with G + S - t id = lambda_fixed M.
  const int d = da * k;
  BallBlocks blk;
  SdpProblem p;
  p.block_dims = {d, d, d, 1, d, 1};
  p.objective.assign(6, Mat());
  for (int i = 0; i < 6; ++i) p.objective[i] = Mat::Zero(p.block_dims[i], p.block_dims[i]);
  p.objective[blk.aux] = Mat::Identity(1, 1);

  add_ball_constraints(p, rho, eps, blk);

  for (int r = 0; r < d; ++r) {
    const int ar = r / k, br = r % k;
    for (int c = r; c < d; ++c) {
      const int ac = c / k, bc = c % k;
      const cxd m = ar == ac ? sigma(br, bc) : cxd(0.0, 0.0);
      if (r == c) {
        ConstraintBuilder cb;
        cb.add_diag(blk.g, r, 1.0).add_diag(blk.s, r, 1.0);
        double rhs = 0.0;
        if (phase1) {
          cb.add_diag(blk.aux, 0, -1.0);  // -t on the diagonal
          rhs = lambda_fixed * m.real();
        } else {
          cb.add_diag(blk.aux, 0, -m.real());
        }
        p.constraints.push_back(cb.done(rhs));
      } else {
        {
          ConstraintBuilder cb;
          cb.add(blk.g, r, c, cxd(1.0, 0.0)).add(blk.s, r, c, cxd(1.0, 0.0));
          double rhs = 0.0;
          if (phase1)
            rhs = lambda_fixed * 2.0 * m.real();
          else if (m != cxd(0.0, 0.0))
            cb.add_diag(blk.aux, 0, -2.0 * m.real());
          p.constraints.push_back(cb.done(rhs));
        }
        {
          ConstraintBuilder cb;
          cb.add(blk.g, r, c, cxd(0.0, 1.0)).add(blk.s, r, c, cxd(0.0, 1.0));
          double rhs = 0.0;
          if (phase1)
            rhs = lambda_fixed * 2.0 * m.imag();
          else if (m != cxd(0.0, 0.0))
            cb.add_diag(blk.aux, 0, -2.0 * m.imag());
          p.constraints.push_back(cb.done(rhs));
        }
      }
    }
  }
  return p;
}

}  // namespace

EntropyValue h_min_smooth_rel(const DensityOperator& rho, const DensityOperator& sigma,
                              double eps, const SdpOptions& opts) {
  if (eps < 0.0 || eps >= 1.0)
    throw ValidationError("smooth entropy: eps must lie in [0, 1)");
  if (eps == 0.0) {
    EntropyValue v = h_min_rel(rho, sigma);
    v.note = "eps = 0: reduced to the non-smooth relative entropy";
    return v;
  }
  if (!support_contained(rho, sigma))
    return EntropyValue::unbounded_below("support of rho_B not contained in support of sigma_B");
  Bipartite bp = bipartite(rho, sigma.layout.labels());
  CompressedRel cr = compress_rel(bp, sigma);
  SdpProblem p = build_rel_problem(cr.rho, cr.sigma, cr.da, cr.k, eps, 0.0, false);
  SdpSolution s = solve(p, opts);
  EntropyValue v;
  v.method = EntropyMethod::sdp;
  v.gap = s.gap;
  double opt = s.primal[3](0, 0).real();
  v.bits = -std::log2(opt);
  if (s.status != SdpStatus::optimal)
    v.note = "sdp status: " + to_string(s.status);
  // Witness mapped back to the full conditioning space and original order.
  const int db = bp.db;
  Mat lift = Mat::Zero(bp.da * db, bp.da * cr.k);
  for (int a = 0; a < bp.da; ++a)
    lift.block(static_cast<long>(a) * db, static_cast<long>(a) * cr.k, db, cr.k) = cr.v;
  Mat g_full = lift * s.primal[0] * lift.adjoint();
  v.witness = witness_from(g_full, bp.rho.layout, rho.layout).matrix;
  return v;
}

double h_min_smooth_rel_bisect(const DensityOperator& rho, const DensityOperator& sigma,
                               double eps, double tol) {
  if (eps <= 0.0 || eps >= 1.0)
    throw ValidationError("smooth bisect: eps must lie in (0, 1)");
  if (!support_contained(rho, sigma))
    return -std::numeric_limits<double>::infinity();
  Bipartite bp = bipartite(rho, sigma.layout.labels());
  CompressedRel cr = compress_rel(bp, sigma);
  SdpOptions fopts;
  fopts.tol = std::min(1e-9, tol * 1e-2);
  auto feasible = [&](double lam) {
    SdpProblem p = build_rel_problem(cr.rho, cr.sigma, cr.da, cr.k, eps, lam, true);
    SdpSolution s = solve(p, fopts);
    return s.primal_obj <= std::max(1e-8, tol * 0.1);
  };
  double hi = 1.0;
  while (!feasible(hi)) {
    hi *= 2.0;
    if (hi > 1e9) throw NumericError("smooth bisect: no feasible lambda found");
  }
  double lo = 0.0;
  while (hi - lo > tol * std::max(1.0, hi)) {
    double mid = 0.5 * (lo + hi);
    if (feasible(mid))
      hi = mid;
    else
      lo = mid;
  }
  return -std::log2(hi);
}

SmoothMaxResult h_max_smooth_rel(const DensityOperator& rho, const DensityOperator& sigma,
                                 double eps) {
  if (eps < 0.0 || eps >= 1.0)
    throw ValidationError("smooth entropy: eps must lie in [0, 1)");
  SmoothMaxResult out;
  if (eps == 0.0) {
    out.upper_bits = h_max_rel(rho, sigma);
    out.note = "eps = 0: exact h_max_rel";
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(rho.matrix));
  const RVec& ev = es.eigenvalues();  // ascending
  const int d = rho.dim();
  double budget = eps;
  std::vector<bool> keep(d, true);
  for (int i = 0; i < d; ++i) {
    double lam = std::max(ev(i), 0.0);
    if (lam <= budget) {
      keep[i] = false;
      budget -= lam;
      ++out.discarded;
    } else {
      break;
    }
  }
  Mat trunc = Mat::Zero(d, d);
  double mass = 0.0;
  for (int i = 0; i < d; ++i) {
    if (!keep[i]) continue;
    double lam = std::max(ev(i), 0.0);
    trunc += lam * es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
    mass += lam;
  }
  if (mass <= 0.0) throw NumericError("smooth max: truncation removed all mass");
  DensityOperator rebuilt(rho.layout, hermitize(trunc / mass));
  out.upper_bits = h_max_rel(rebuilt, sigma);
  return out;
}

std::vector<ConvergencePoint> convergence_series(const PureState& psi_abr,
                                                 const std::vector<std::string>& a_labels,
                                                 const std::vector<std::string>& b_labels,
                                                 const std::vector<std::string>& r_labels,
                                                 double eps, int n_max, const SdpOptions& opts) {
  (void)b_labels;  // the series only involves the AR marginal
  std::vector<std::string> ar = a_labels;
  ar.insert(ar.end(), r_labels.begin(), r_labels.end());
  DensityOperator rho_ar = reduced_density(psi_abr, ar);
  double per_copy_dim = static_cast<double>(rho_ar.dim());
  if (n_max < 1) throw ValidationError("convergence series: n_max must be >= 1");
  if (std::pow(per_copy_dim, n_max) > 256.0 + 0.5)
    throw ValidationError("convergence series: (d_A d_R)^n_max exceeds 256");

  const double target = cond_von_neumann(rho_ar, r_labels);  // S(A|R)

  std::vector<ConvergencePoint> out;
  DensityOperator power;  // rho_ar^(x n) with relabeled factors
  std::vector<std::string> cond;
  for (int n = 1; n <= n_max; ++n) {
    DensityOperator copy = rho_ar;
    std::vector<Factor> renamed;
    for (const auto& f : copy.layout.factors())
      renamed.push_back(Factor{f.label + "#" + std::to_string(n), f.dim});
    copy.layout = SystemLayout(renamed);
    for (const auto& r : r_labels) cond.push_back(r + "#" + std::to_string(n));
    power = n == 1 ? copy : tensor(power, copy);
    EntropyValue v = h_min_smooth_cond(power, cond, eps, opts);
    ConvergencePoint pt;
    pt.n = n;
    pt.eps = eps;
    pt.value_bits_per_copy = v.bits / n;
    pt.target_bits = target;
    pt.gap = std::abs(pt.value_bits_per_copy - target);
    out.push_back(pt);
  }
  return out;
}

}  // namespace qsm
