#include "qsm/sdp.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <json.hpp>

namespace qsm {

int SdpProblem::total_dim() const {
  int n = 0;
  for (int d : block_dims) n += d;
  return n;
}

void SdpProblem::validate() const {
  if (block_dims.empty()) throw ValidationError("sdp: no blocks");
  for (int d : block_dims)
    if (d < 1) throw ValidationError("sdp: block dim < 1");
  if (static_cast<int>(objective.size()) != n_blocks())
    throw ValidationError("sdp: objective block count mismatch");
  for (int b = 0; b < n_blocks(); ++b) {
    if (objective[b].rows() != block_dims[b] || objective[b].cols() != block_dims[b])
      throw ValidationError("sdp: objective block dimension mismatch");
    if (herm_deviation(objective[b]) > 1e-9)
      throw ValidationError("sdp: objective block not Hermitian");
  }
  for (const auto& c : constraints) {
    // Hermitian closure: every entry must have its adjoint partner.
    for (const auto& t : c.terms) {
      if (t.block < 0 || t.block >= n_blocks())
        throw ValidationError("sdp: constraint references unknown block");
      if (t.row < 0 || t.row >= block_dims[t.block] || t.col < 0 || t.col >= block_dims[t.block])
        throw ValidationError("sdp: constraint entry out of range");
      bool found = false;
      for (const auto& u : c.terms)
        if (u.block == t.block && u.row == t.col && u.col == t.row &&
            std::abs(u.value - std::conj(t.value)) <= 1e-12 * (1.0 + std::abs(t.value))) {
          found = true;
          break;
        }
      if (!found) throw ValidationError("sdp: constraint matrix not Hermitian");
    }
  }
}

ConstraintBuilder& ConstraintBuilder::add(int block, int row, int col, cxd value) {
  if (value == cxd(0.0, 0.0)) return *this;
  if (row == col) {
    if (std::abs(value.imag()) > 1e-15)
      throw ValidationError("sdp: diagonal constraint entry must be real");
    terms_.push_back({block, row, col, value});
  } else {
    terms_.push_back({block, row, col, value});
    terms_.push_back({block, col, row, std::conj(value)});
  }
  return *this;
}

ConstraintBuilder& ConstraintBuilder::add_diag(int block, int row, double value) {
  return add(block, row, row, cxd(value, 0.0));
}

SdpConstraint ConstraintBuilder::done(double rhs) {
  SdpConstraint c;
  c.terms = std::move(terms_);
  c.rhs = rhs;
  terms_.clear();
  return c;
}

std::string to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::optimal: return "optimal";
    case SdpStatus::max_iterations: return "max-iterations";
    case SdpStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

double constraint_value(const SdpConstraint& c, const std::vector<Mat>& x) {
  cxd acc(0.0, 0.0);
  for (const auto& t : c.terms) acc += t.value * x[t.block](t.col, t.row);
  return acc.real();
}

namespace {

struct BlockEig {
  Mat vectors;
  RVec values;
};

BlockEig eig(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(m));
  if (es.info() != Eigen::Success) throw NumericError("sdp: eigendecomposition failed");
  return {es.eigenvectors(), es.eigenvalues()};
}

Mat power_of(const BlockEig& e, double p) {
  // Relative floor keeps near-singular iterates from poisoning the scaling.
  double lmax = std::max(e.values.maxCoeff(), 0.0);
  double floor_val = std::max(1e-14 * lmax, 1e-300);
  RVec v(e.values.size());
  for (int i = 0; i < v.size(); ++i) v(i) = std::pow(std::max(e.values(i), floor_val), p);
  return e.vectors * v.asDiagonal() * e.vectors.adjoint();
}

// Largest alpha in (0, 1] with M + alpha * D >= 0, via Cholesky of M and the
// smallest eigenvalue of L^-1 D L^-dagger. Round-off can push an almost
// singular iterate slightly indefinite; retry with a growing diagonal shift.
double max_step(const Mat& m, const Mat& d) {
  Eigen::LLT<Mat> llt(m);
  if (llt.info() != Eigen::Success) {
    double shift = std::max(1e-18, 1e-15 * std::abs(m.trace().real()) / m.rows());
    Mat reg = m;
    for (int k = 0; k < 8 && llt.info() != Eigen::Success; ++k) {
      reg.diagonal().array() += shift;
      shift *= 100.0;
      llt.compute(reg);
    }
    if (llt.info() != Eigen::Success) return 0.0;
  }
  Mat t = llt.matrixL().solve(d);
  Mat s = llt.matrixL().solve(t.adjoint()).adjoint();
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(s), Eigen::EigenvaluesOnly);
  double lmin = es.eigenvalues().minCoeff();
  if (lmin >= -1e-14) return 1.0;
  return std::min(1.0, -1.0 / lmin);
}

struct ConstraintIndex {
  // constraints touching each block, with term ranges per block
  std::vector<std::vector<int>> touching;                  // block -> constraint ids
  std::vector<std::vector<std::vector<SdpTerm>>> by_block; // block -> (local idx -> terms)
};

ConstraintIndex index_constraints(const SdpProblem& p) {
  ConstraintIndex ix;
  ix.touching.resize(p.n_blocks());
  ix.by_block.resize(p.n_blocks());
  for (int i = 0; i < p.n_constraints(); ++i) {
    std::vector<std::vector<SdpTerm>> per_block(p.n_blocks());
    for (const auto& t : p.constraints[i].terms) per_block[t.block].push_back(t);
    for (int b = 0; b < p.n_blocks(); ++b) {
      if (per_block[b].empty()) continue;
      ix.touching[b].push_back(i);
      ix.by_block[b].push_back(std::move(per_block[b]));
    }
  }
  return ix;
}

}  // namespace

SdpSolution solve(const SdpProblem& p, const SdpOptions& opts) {
  p.validate();
  const int nb = p.n_blocks();
  const int m = p.n_constraints();
  if (m > 40000)
    throw NumericError("sdp: " + std::to_string(m) +
                       " constraints exceeds the dense Schur complement budget");
  const double n_total = static_cast<double>(p.total_dim());

  ConstraintIndex cidx = index_constraints(p);

  RVec b(m);
  for (int i = 0; i < m; ++i) b(i) = p.constraints[i].rhs;
  const double b_norm = m > 0 ? b.cwiseAbs().maxCoeff() : 0.0;

  double a_norm = 0.0;
  std::vector<double> cons_norm(m, 0.0);
  for (int i = 0; i < m; ++i) {
    double s = 0.0;
    for (const auto& t : p.constraints[i].terms) s += std::norm(t.value);
    cons_norm[i] = std::sqrt(s);
    a_norm = std::max(a_norm, cons_norm[i]);
  }
  double c_norm = 0.0;
  for (const auto& c : p.objective) c_norm = std::max(c_norm, c.norm());

  // Infeasible start on the central ray, scaled to the data.
  double xi = std::max({10.0, std::sqrt(n_total)});
  for (int i = 0; i < m; ++i)
    xi = std::max(xi, n_total * std::abs(b(i)) / (1.0 + cons_norm[i]));
  double eta = std::max({10.0, std::sqrt(n_total), c_norm, a_norm});

  std::vector<Mat> X(nb), Z(nb);
  for (int bI = 0; bI < nb; ++bI) {
    X[bI] = xi * Mat::Identity(p.block_dims[bI], p.block_dims[bI]);
    Z[bI] = eta * Mat::Identity(p.block_dims[bI], p.block_dims[bI]);
  }
  RVec y = RVec::Zero(m);

  SdpSolution best;
  best.dual = y;
  best.primal = X;
  double best_score = std::numeric_limits<double>::infinity();

  RMat schur(m, m);
  Eigen::LLT<RMat> schur_llt;
  int stall = 0;

  auto apply_A = [&](const std::vector<Mat>& M) {
    RVec out(m);
    for (int i = 0; i < m; ++i) out(i) = constraint_value(p.constraints[i], M);
    return out;
  };
  auto apply_At = [&](const RVec& v) {
    std::vector<Mat> out(nb);
    for (int bI = 0; bI < nb; ++bI) out[bI] = Mat::Zero(p.block_dims[bI], p.block_dims[bI]);
    for (int i = 0; i < m; ++i) {
      if (v(i) == 0.0) continue;
      for (const auto& t : p.constraints[i].terms) out[t.block](t.row, t.col) += v(i) * t.value;
    }
    return out;
  };

  SdpSolution sol;
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    // Residuals and merit quantities.
    RVec rp = b - apply_A(X);
    std::vector<Mat> At_y = apply_At(y);
    std::vector<Mat> Rd(nb);
    double rd_norm = 0.0;
    for (int bI = 0; bI < nb; ++bI) {
      Rd[bI] = p.objective[bI] - Z[bI] - At_y[bI];
      rd_norm = std::max(rd_norm, Rd[bI].cwiseAbs().maxCoeff());
    }
    double pobj = 0.0, mu = 0.0;
    for (int bI = 0; bI < nb; ++bI) {
      pobj += (p.objective[bI] * X[bI]).trace().real();
      mu += (X[bI] * Z[bI]).trace().real();
    }
    mu /= n_total;
    double dobj = b.dot(y);
    double gap = pobj - dobj;
    double rp_norm = m > 0 ? rp.cwiseAbs().maxCoeff() : 0.0;

    sol.primal = X;
    sol.dual = y;
    sol.primal_obj = pobj;
    sol.dual_obj = dobj;
    sol.gap = gap;
    sol.primal_residual = rp_norm;
    sol.dual_residual = rd_norm;
    sol.iterations = iter;

    double score = std::abs(gap) + rp_norm + rd_norm;
    if (score < best_score) {
      best_score = score;
      best = sol;
    }

    if (std::abs(gap) <= opts.tol && rp_norm <= opts.tol * (1.0 + b_norm) &&
        rd_norm <= opts.tol * (1.0 + c_norm)) {
      sol.status = SdpStatus::optimal;
      return sol;
    }

    // Divergence heuristics: a dual objective running away with small dual
    // residual certifies primal infeasibility (and vice versa for the primal).
    double y_norm = m > 0 ? y.cwiseAbs().maxCoeff() : 0.0;
    if (y_norm > 1e10 * (1.0 + b_norm) && rd_norm <= 1e-6 * (1.0 + c_norm)) {
      sol.status = SdpStatus::infeasible;
      return sol;
    }
    double x_norm = 0.0;
    for (const auto& xb : X) x_norm = std::max(x_norm, xb.cwiseAbs().maxCoeff());
    if (x_norm > 1e12 * xi) {
      sol.status = SdpStatus::infeasible;
      return sol;
    }

    // Nesterov-Todd scaling point W per block: W Z W = X.
    std::vector<Mat> W(nb), Zinv(nb);
    for (int bI = 0; bI < nb; ++bI) {
      BlockEig ez = eig(Z[bI]);
      Mat z_half = power_of(ez, 0.5);
      Mat z_mhalf = power_of(ez, -0.5);
      Zinv[bI] = power_of(ez, -1.0);
      BlockEig em = eig(z_half * X[bI] * z_half);
      Mat m_half = power_of(em, 0.5);
      W[bI] = hermitize(z_mhalf * m_half * z_mhalf);
    }

    // Schur complement B_ij = sum_b tr(A_i W A_j W), assembled from entries.
    schur.setZero();
    for (int bI = 0; bI < nb; ++bI) {
      const auto& touch = cidx.touching[bI];
      const auto& terms = cidx.by_block[bI];
      const Mat& Wb = W[bI];
      for (size_t a = 0; a < touch.size(); ++a) {
        const int ia = touch[a];
        for (size_t c = a; c < touch.size(); ++c) {
          const int ic = touch[c];
          cxd acc(0.0, 0.0);
          for (const auto& t1 : terms[a])
            for (const auto& t2 : terms[c])
              acc += t1.value * t2.value * Wb(t1.col, t2.row) * Wb(t2.col, t1.row);
          schur(ia, ic) += acc.real();
          if (ia != ic) schur(ic, ia) += acc.real();
        }
      }
    }
    schur_llt.compute(schur);
    if (schur_llt.info() != Eigen::Success) {
      // Mild regularization; constraints are independent by construction but
      // late iterations can make the system numerically singular.
      double reg = 1e-13 * std::max(1.0, schur.diagonal().maxCoeff());
      for (int k = 0; k < 8 && schur_llt.info() != Eigen::Success; ++k) {
        schur.diagonal().array() += reg;
        reg *= 100.0;
        schur_llt.compute(schur);
      }
      if (schur_llt.info() != Eigen::Success) break;
    }

    std::vector<Mat> WRdW(nb);
    for (int bI = 0; bI < nb; ++bI) WRdW[bI] = W[bI] * Rd[bI] * W[bI];
    RVec a_wrdw = apply_A(WRdW);

    // Predictor (affine scaling direction).
    RVec rhs_aff = b + a_wrdw;
    RVec dy_aff = schur_llt.solve(rhs_aff);
    std::vector<Mat> dz_aff(nb), dx_aff(nb);
    {
      std::vector<Mat> at_dy = apply_At(dy_aff);
      for (int bI = 0; bI < nb; ++bI) {
        dz_aff[bI] = Rd[bI] - at_dy[bI];
        dx_aff[bI] = hermitize(-X[bI] - W[bI] * dz_aff[bI] * W[bI]);
      }
    }
    double ap_aff = 1.0, ad_aff = 1.0;
    for (int bI = 0; bI < nb; ++bI) {
      ap_aff = std::min(ap_aff, max_step(X[bI], dx_aff[bI]));
      ad_aff = std::min(ad_aff, max_step(Z[bI], dz_aff[bI]));
    }
    double mu_aff = 0.0;
    for (int bI = 0; bI < nb; ++bI)
      mu_aff += ((X[bI] + ap_aff * dx_aff[bI]) * (Z[bI] + ad_aff * dz_aff[bI])).trace().real();
    mu_aff /= n_total;
    double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 1e-8, 1.0);

    // Corrector with Mehrotra second-order term; falls back to a pure
    // centering step when the corrected direction collapses.
    {
      auto make_direction = [&](double sig, bool second_order, RVec& dy, std::vector<Mat>& dx,
                                std::vector<Mat>& dz) {
        std::vector<Mat> rc(nb);
        for (int bI = 0; bI < nb; ++bI) {
          rc[bI] = sig * mu * Zinv[bI] - X[bI];
          if (second_order) rc[bI] -= hermitize(dx_aff[bI] * dz_aff[bI] * Zinv[bI]);
        }
        RVec rhs = rp - apply_A(rc) + a_wrdw;
        dy = schur_llt.solve(rhs);
        std::vector<Mat> at_dy = apply_At(dy);
        dx.resize(nb);
        dz.resize(nb);
        for (int bI = 0; bI < nb; ++bI) {
          dz[bI] = hermitize(Rd[bI] - at_dy[bI]);
          dx[bI] = hermitize(rc[bI] - W[bI] * dz[bI] * W[bI]);
        }
      };
      const double gamma = 0.98;
      RVec dy;
      std::vector<Mat> dx, dz;
      make_direction(sigma, true, dy, dx, dz);
      double ap = 1.0, ad = 1.0;
      for (int bI = 0; bI < nb; ++bI) {
        ap = std::min(ap, gamma * max_step(X[bI], dx[bI]));
        ad = std::min(ad, gamma * max_step(Z[bI], dz[bI]));
      }
      if (std::min(ap, ad) < 0.05) {
        make_direction(std::max(sigma, 0.8), false, dy, dx, dz);
        ap = ad = 1.0;
        for (int bI = 0; bI < nb; ++bI) {
          ap = std::min(ap, gamma * max_step(X[bI], dx[bI]));
          ad = std::min(ad, gamma * max_step(Z[bI], dz[bI]));
        }
      }
      if (ap < 1e-10 && ad < 1e-10) {
        if (++stall >= 3) break;
      } else {
        stall = 0;
      }
      for (int bI = 0; bI < nb; ++bI) {
        X[bI] = hermitize(X[bI] + ap * dx[bI]);
        Z[bI] = hermitize(Z[bI] + ad * dz[bI]);
      }
      y += ad * dy;
    }
  }

  best.status = SdpStatus::max_iterations;
  return best;
}

CertifyReport certify(const SdpSolution& s, const SdpProblem& p) {
  CertifyReport r;
  for (int i = 0; i < p.n_constraints(); ++i)
    r.primal_eq_residual = std::max(
        r.primal_eq_residual,
        std::abs(constraint_value(p.constraints[i], s.primal) - p.constraints[i].rhs));
  r.primal_min_eig = std::numeric_limits<double>::infinity();
  std::vector<Mat> z(p.n_blocks());
  for (int bI = 0; bI < p.n_blocks(); ++bI) z[bI] = p.objective[bI];
  for (int i = 0; i < p.n_constraints(); ++i)
    for (const auto& t : p.constraints[i].terms) z[t.block](t.row, t.col) -= s.dual(i) * t.value;
  r.dual_slack_min_eig = std::numeric_limits<double>::infinity();
  double pobj = 0.0, comp = 0.0, dobj = 0.0;
  for (int bI = 0; bI < p.n_blocks(); ++bI) {
    Eigen::SelfAdjointEigenSolver<Mat> ex(hermitize(s.primal[bI]), Eigen::EigenvaluesOnly);
    r.primal_min_eig = std::min(r.primal_min_eig, ex.eigenvalues().minCoeff());
    Eigen::SelfAdjointEigenSolver<Mat> ez(hermitize(z[bI]), Eigen::EigenvaluesOnly);
    r.dual_slack_min_eig = std::min(r.dual_slack_min_eig, ez.eigenvalues().minCoeff());
    pobj += (p.objective[bI] * s.primal[bI]).trace().real();
    comp += (s.primal[bI] * z[bI]).trace().real();
  }
  for (int i = 0; i < p.n_constraints(); ++i) dobj += p.constraints[i].rhs * s.dual(i);
  r.gap = pobj - dobj;
  r.complementarity = std::abs(comp);
  return r;
}

std::string problem_to_json(const SdpProblem& p) {
  nlohmann::json j;
  j["blocks"] = p.block_dims;
  nlohmann::json obj = nlohmann::json::array();
  for (const auto& c : p.objective) {
    nlohmann::json entries = nlohmann::json::array();
    for (long r = 0; r < c.rows(); ++r)
      for (long cc = 0; cc < c.cols(); ++cc) entries.push_back({c(r, cc).real(), c(r, cc).imag()});
    obj.push_back(entries);
  }
  j["objective"] = obj;
  nlohmann::json cons = nlohmann::json::array();
  for (const auto& c : p.constraints) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : c.terms)
      terms.push_back({t.block, t.row, t.col, t.value.real(), t.value.imag()});
    cons.push_back({{"terms", terms}, {"rhs", c.rhs}});
  }
  j["constraints"] = cons;
  return j.dump();
}

SdpProblem problem_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  SdpProblem p;
  p.block_dims = j.at("blocks").get<std::vector<int>>();
  for (size_t bI = 0; bI < p.block_dims.size(); ++bI) {
    const auto& entries = j.at("objective").at(bI);
    const int d = p.block_dims[bI];
    Mat m(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) {
        const auto& e = entries.at(static_cast<size_t>(r) * d + c);
        m(r, c) = cxd(e.at(0).get<double>(), e.at(1).get<double>());
      }
    p.objective.push_back(std::move(m));
  }
  for (const auto& cj : j.at("constraints")) {
    SdpConstraint c;
    c.rhs = cj.at("rhs").get<double>();
    for (const auto& tj : cj.at("terms"))
      c.terms.push_back({tj.at(0).get<int>(), tj.at(1).get<int>(), tj.at(2).get<int>(),
                         cxd(tj.at(3).get<double>(), tj.at(4).get<double>())});
    p.constraints.push_back(std::move(c));
  }
  return p;
}

std::string solution_to_json(const SdpSolution& s) {
  nlohmann::json j;
  j["status"] = to_string(s.status);
  j["primal_obj"] = s.primal_obj;
  j["dual_obj"] = s.dual_obj;
  j["gap"] = s.gap;
  j["iterations"] = s.iterations;
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& x : s.primal) {
    nlohmann::json entries = nlohmann::json::array();
    for (long r = 0; r < x.rows(); ++r)
      for (long c = 0; c < x.cols(); ++c) entries.push_back({x(r, c).real(), x(r, c).imag()});
    blocks.push_back(entries);
  }
  j["primal"] = blocks;
  std::vector<double> dual(s.dual.data(), s.dual.data() + s.dual.size());
  j["dual"] = dual;
  return j.dump();
}

}  // namespace qsm
