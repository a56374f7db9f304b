#include <doctest.h>

#include "qsm/decoupling.hpp"
#include "test_helpers.hpp"

using namespace qsm;
using namespace qsm::test;

TEST_SUITE_BEGIN("decoupling");

TEST_CASE("block measurement shapes and completeness") {
  Rng rng(41);
  {
    BlockMeasurement m = build_measurement(4, 2, rng);
    CHECK(m.n_blocks == 2);
    CHECK(m.residual_size == 2);
    CHECK(m.exact_division());
    CHECK(m.completeness_error() <= 1e-12);
  }
  {
    BlockMeasurement m = build_measurement(4, 4, rng);
    CHECK(m.n_blocks == 1);
    CHECK(max_abs_diff(m.projectors[0], m.unitary) == 0.0);
  }
  {
    // residual block: d_A = 6, L = 4 -> one block of 4, one of 2
    BlockMeasurement m = build_measurement(6, 4, rng);
    CHECK(m.n_blocks == 2);
    CHECK(m.residual_size == 2);
    CHECK(!m.exact_division());
    CHECK(m.completeness_error() <= 1e-12);
  }
  for (int d : {2, 4, 6, 8})
    for (int l = 1; l <= d; ++l) {
      BlockMeasurement m = build_measurement(d, l, rng);
      REQUIRE(m.completeness_error() <= 1e-9);
    }
  CHECK_THROWS_AS(build_measurement(2, 3, rng), ValidationError);
}

TEST_CASE("trial: single block rotates the input") {
  Rng rng(42);
  DensityOperator rho_r = random_density(SystemLayout({Factor{"R", 2}}), rng);
  DensityOperator rho = tensor(
      DensityOperator(SystemLayout({Factor{"A", 2}}), (Mat(2, 2) << 1, 0, 0, 0).finished()),
      rho_r);
  BlockMeasurement m = build_measurement(2, 2, rng);
  auto outcomes = decoupling_trial(rho, "A", m);
  REQUIRE(outcomes.size() == 1);
  CHECK(outcomes[0].probability == doctest::Approx(1.0).epsilon(1e-12));
  Mat u_big = Mat::Zero(4, 4);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      u_big.block(r * 2, c * 2, 2, 2) = m.unitary(r, c) * Mat::Identity(2, 2);
  Mat rotated = u_big * rho.matrix * u_big.adjoint();
  CHECK(max_abs_diff(outcomes[0].state.matrix, rotated) < 1e-12);
}

TEST_CASE("trial: maximally mixed input gives exactly uniform blocks") {
  Rng rng(43);
  for (int d : {2, 4}) {
    for (int l = 1; l <= d; l *= 2) {
      DensityOperator rho(SystemLayout({Factor{"A", d}}), Mat::Identity(d, d) / d);
      BlockMeasurement m = build_measurement(d, l, rng);
      auto outcomes = decoupling_trial(rho, "A", m);
      double total = 0.0;
      for (const auto& o : outcomes) {
        total += o.probability;
        REQUIRE(max_abs_diff(o.state.matrix, Mat::Identity(l, l) / l) < 1e-12);
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("trial: bell outcomes match the two-dimensional oracle") {
  Rng rng(44);
  PureState bell = bell_pair("A", "R");
  DensityOperator rho = DensityOperator::from_pure(bell);
  BlockMeasurement m = build_measurement(2, 1, rng);
  auto outcomes = decoupling_trial(rho, "A", m);
  REQUIRE(outcomes.size() == 2);
  double total = 0.0;
  for (int j = 0; j < 2; ++j) {
    // row j of U defines <u_j|; outcome amplitude on R is conj(u_j(r)) / sqrt(2)
    Vec amp(2);
    for (int r = 0; r < 2; ++r) amp(r) = m.unitary(j, r) / std::sqrt(2.0);
    double p = amp.squaredNorm();
    CHECK(outcomes[j].probability == doctest::Approx(p).epsilon(1e-12));
    Mat oracle = amp * amp.adjoint() / p;
    CHECK(max_abs_diff(outcomes[j].state.matrix, oracle) < 1e-12);
    CHECK(support_rank(outcomes[j].state.matrix) == 1);
    total += outcomes[j].probability;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("estimator: product state, bound 1") {
  Rng rng(45);
  PureState prod = tensor(qubit("A", 0.3, 0.7), qubit("R", 1.0, cxd(0.2, 0.4)));
  DensityOperator rho = DensityOperator::from_pure(prod);
  DensityOperator rho_r = reduced_density(prod, {"R"});
  DecouplingReport rep = estimate_decoupling(rho, "A", rho_r, 1, 400, rng);
  CHECK(rep.bound_h2 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rep.mean <= rep.bound_h2 + 3.0 * rep.stderr_);
  CHECK(rep.support_ok);
}

TEST_CASE("estimator: bell state, bound sqrt(2)") {
  Rng rng(46);
  PureState bell = bell_pair("A", "R");
  DensityOperator rho = DensityOperator::from_pure(bell);
  DensityOperator half(rho.layout.subset({"R"}), 0.5 * Mat::Identity(2, 2));
  DecouplingReport rep = estimate_decoupling(rho, "A", half, 1, 2000, rng);
  CHECK(rep.bound_h2 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
  CHECK(rep.mean <= rep.bound_h2 + 3.0 * rep.stderr_);
  // H2 equals Hmin for the maximally entangled state, so the two bounds agree
  CHECK(rep.bound_hmin == doctest::Approx(rep.bound_h2).epsilon(1e-9));
}

TEST_CASE("estimator: uncorrelated mixed state, bound 2^{-1/2}") {
  Rng rng(47);
  DensityOperator rho_r = random_density(SystemLayout({Factor{"R", 2}}), rng);
  DensityOperator rho = tensor(
      DensityOperator(SystemLayout({Factor{"A", 4}}), Mat::Identity(4, 4) / 4.0), rho_r);
  DecouplingReport rep = estimate_decoupling(rho, "A", rho_r, 2, 800, rng);
  CHECK(rep.bound_h2 == doctest::Approx(std::pow(2.0, -0.5)).epsilon(1e-9));
  CHECK(rep.mean <= rep.bound_h2 + 3.0 * rep.stderr_);
}

TEST_CASE("estimator: determinism and the mean-state law") {
  Rng rng(48);
  PureState bell = bell_pair("A", "R");
  DensityOperator rho = DensityOperator::from_pure(bell);
  DensityOperator half(rho.layout.subset({"R"}), 0.5 * Mat::Identity(2, 2));

  DecouplingReport a = estimate_decoupling(rho, "A", half, 2, 500, Rng(1234));
  DecouplingReport b = estimate_decoupling(rho, "A", half, 2, 500, Rng(1234));
  CHECK(a.mean == b.mean);  // bit-identical
  CHECK(a.stderr_ == b.stderr_);
  CHECK(max_abs_diff(a.mean_state, b.mean_state) == 0.0);

  // <w>_U = (L/d_A) tau (x) rho_R at the Monte Carlo rate
  DensityOperator rho_r = reduced_density(bell, {"R"});
  Mat expect = Mat::Zero(4, 4);
  for (int i = 0; i < 2; ++i)
    expect.block(i * 2, i * 2, 2, 2) = rho_r.matrix / 2.0;  // tau (x) rho_R
  expect *= 2.0 / 2.0;  // L/d_A
  double tol = 5.0 / std::sqrt(500.0);
  CHECK(max_abs_diff(a.mean_state, expect) <= tol);
  (void)rng;
}

TEST_CASE("estimator: residual block runs are reported, not gated") {
  // L does not divide d_A: the bound applies to the exact-division grid only,
  // so the report carries the flag and finite statistics instead of a gate.
  Rng rng(49);
  SystemLayout l({Factor{"A", 6}, Factor{"R", 2}});
  DensityOperator rho = random_density(l, rng);
  DensityOperator sigma = partial_trace(rho, {"R"});
  DecouplingReport rep = estimate_decoupling(rho, "A", sigma, 4, 200, rng);
  CHECK(!rep.exact_division);
  CHECK(rep.n_blocks == 2);
  CHECK(std::isfinite(rep.mean));
  CHECK(std::isfinite(rep.stderr_));
  CHECK(std::isfinite(rep.margin));
}

TEST_CASE("estimator: support violation flagged") {
  PureState bell = bell_pair("A", "R");
  DensityOperator rho = DensityOperator::from_pure(bell);
  DensityOperator bad(rho.layout.subset({"R"}), (Mat(2, 2) << 1, 0, 0, 0).finished());
  DecouplingReport rep = estimate_decoupling(rho, "A", bad, 1, 10, Rng(5));
  CHECK(!rep.support_ok);
}

TEST_SUITE_END();
