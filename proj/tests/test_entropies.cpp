#include <doctest.h>

#include "qsm/entropies.hpp"
#include "test_helpers.hpp"

using namespace qsm;
using namespace qsm::test;

namespace {

// Pure bipartite state with a prescribed Schmidt spectrum.
PureState schmidt_state(const std::vector<double>& lambdas, int da, int db, Rng& rng) {
  Mat ua = haar_unitary(da, rng);
  Mat ub = haar_unitary(db, rng);
  SystemLayout l({Factor{"A", da}, Factor{"B", db}});
  Vec v = Vec::Zero(static_cast<long>(da) * db);
  for (size_t i = 0; i < lambdas.size(); ++i)
    for (int a = 0; a < da; ++a)
      for (int b = 0; b < db; ++b)
        v(static_cast<long>(a) * db + b) += std::sqrt(lambdas[i]) * ua(a, i) * ub(b, i);
  v /= v.norm();
  return PureState(std::move(l), std::move(v));
}

DensityOperator classical_00_11() {
  SystemLayout l({Factor{"A", 2}, Factor{"B", 2}});
  Mat m = Mat::Zero(4, 4);
  m(0, 0) = m(3, 3) = 0.5;
  return DensityOperator(l, std::move(m));
}

}  // namespace

TEST_SUITE_BEGIN("entropies");

TEST_CASE("unconditional min and max entropy") {
  DensityOperator mixed4 = diag_density(SystemLayout({Factor{"A", 4}}), {0.25, 0.25, 0.25, 0.25});
  CHECK(h_min(mixed4) == doctest::Approx(2.0));
  CHECK(h_max(mixed4) == doctest::Approx(2.0));

  Rng rng(4);
  DensityOperator pure = DensityOperator::from_pure(haar_state(SystemLayout({Factor{"A", 3}}), rng));
  CHECK(h_min(pure) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(h_max(pure) == doctest::Approx(0.0));

  DensityOperator skew = diag_density(SystemLayout({Factor{"A", 2}}), {0.75, 0.25});
  CHECK(h_min(skew) == doctest::Approx(-std::log2(0.75)));
  CHECK(h_max(skew) == doctest::Approx(1.0));
}

TEST_CASE("relative min-entropy closed cases") {
  PureState bell = bell_pair("A", "B");
  DensityOperator rho = DensityOperator::from_pure(bell);
  DensityOperator rho_b = reduced_density(bell, {"B"});
  EntropyValue v = h_min_rel(rho, rho_b);
  CHECK(v.bits == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(v.method == EntropyMethod::eigen);

  PureState prod = tensor(qubit("A", 1.0, 1.0), qubit("B", 1.0, 0.0));
  DensityOperator prho = DensityOperator::from_pure(prod);
  CHECK(h_min_rel(prho, reduced_density(prod, {"B"})).bits == doctest::Approx(0.0).epsilon(1e-9));

  Rng rng(6);
  const int da = 3;
  DensityOperator sb = random_density(SystemLayout({Factor{"B", 2}}), rng);
  DensityOperator big = tensor(
      diag_density(SystemLayout({Factor{"A", da}}), {1.0 / da, 1.0 / da, 1.0 / da}), sb);
  CHECK(h_min_rel(big, sb).bits == doctest::Approx(std::log2(da)).epsilon(1e-9));
}

TEST_CASE("relative min-entropy: support violation is an explicit unbounded value") {
  SystemLayout la({Factor{"A", 2}});
  SystemLayout lb({Factor{"B", 2}});
  DensityOperator rho = tensor(diag_density(la, {0.5, 0.5}), diag_density(lb, {0.5, 0.5}));
  DensityOperator sigma = diag_density(lb, {1.0, 0.0});
  EntropyValue v = h_min_rel(rho, sigma);
  CHECK(v.unbounded);
  CHECK(v.bits == -std::numeric_limits<double>::infinity());
  CHECK(v.note.find("support") != std::string::npos);
  CHECK(h2_rel(rho, sigma).unbounded);
}

TEST_CASE("eigen route agrees with feasibility bisection") {
  Rng rng(8);
  for (int trial = 0; trial < 25; ++trial) {
    SystemLayout l({Factor{"A", 2}, Factor{"B", 2 + trial % 2}});
    DensityOperator rho = random_density(l, rng);
    DensityOperator sigma = random_density(l.subset({"B"}), rng);
    double eig_route = h_min_rel(rho, sigma).bits;
    double bisect_route = h_min_rel_bisect(rho, sigma, 1e-11);
    REQUIRE(std::abs(eig_route - bisect_route) < 1e-7);
  }
}

TEST_CASE("conditional min-entropy SDP golden values") {
  PureState bell = bell_pair("A", "B");
  EntropyValue v = h_min_cond(DensityOperator::from_pure(bell), {"B"});
  CHECK(v.bits == doctest::Approx(-1.0).epsilon(1e-7));
  CHECK(std::abs(v.gap) <= 1e-8);
  CHECK(v.method == EntropyMethod::sdp);
  // witness reproduces the value on the eigenvalue route
  REQUIRE(v.witness.has_value());
  DensityOperator wit(SystemLayout({Factor{"B", 2}}), *v.witness);
  CHECK(std::abs(h_min_rel(DensityOperator::from_pure(bell), wit).bits - v.bits) < 1e-7);

  EntropyValue c = h_min_cond(classical_00_11(), {"B"});
  CHECK(c.bits == doctest::Approx(0.0).epsilon(1e-7));
  CHECK(std::abs(c.gap) <= 1e-8);

  Rng rng(9);
  DensityOperator rho_a = diag_density(SystemLayout({Factor{"A", 2}}), {0.75, 0.25});
  DensityOperator rho_b = random_density(SystemLayout({Factor{"B", 3}}), rng);
  EntropyValue pc = h_min_cond(tensor(rho_a, rho_b), {"B"});
  CHECK(pc.bits == doctest::Approx(-std::log2(0.75)).epsilon(1e-7));
}

TEST_CASE("max-entropy closed forms") {
  PureState bell = bell_pair("A", "B");
  DensityOperator rho = DensityOperator::from_pure(bell);
  DensityOperator half(SystemLayout({Factor{"B", 2}}), 0.5 * Mat::Identity(2, 2));
  // tr_A of the support projector of a pure state is its B-marginal
  CHECK(h_max_rel(rho, half) == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(h_max_cond(rho, {"B"}) == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(h_max_cond(classical_00_11(), {"B"}) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("collision entropy examples") {
  const int da = 3, db = 2;
  SystemLayout l({Factor{"A", da}, Factor{"B", db}});
  Mat m = Mat::Identity(da * db, da * db) / (da * db);
  DensityOperator uniform(l, m);
  DensityOperator sb(l.subset({"B"}), Mat::Identity(db, db) / db);
  CHECK(h2_rel(uniform, sb).bits == doctest::Approx(std::log2(da)).epsilon(1e-9));

  PureState bell = bell_pair("A", "B");
  DensityOperator rho = DensityOperator::from_pure(bell);
  CHECK(h2_rel(rho, sb.dim() == 2 ? sb : sb).bits == doctest::Approx(-1.0).epsilon(1e-9));

  PureState prod = tensor(qubit("A", 1.0, 1.0), qubit("B", cxd(0.0, 1.0), 1.0));
  DensityOperator prho = DensityOperator::from_pure(prod);
  CHECK(h2_rel(prho, reduced_density(prod, {"B"})).bits == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("von neumann entropies") {
  CHECK(von_neumann(diag_density(SystemLayout({Factor{"A", 2}}), {0.5, 0.5})) ==
        doctest::Approx(1.0));
  Rng rng(10);
  CHECK(von_neumann(DensityOperator::from_pure(haar_state(SystemLayout({Factor{"A", 4}}), rng))) ==
        doctest::Approx(0.0).epsilon(1e-8));
  PureState bell = bell_pair("A", "B");
  CHECK(cond_von_neumann(DensityOperator::from_pure(bell), {"B"}) == doctest::Approx(-1.0));
}

TEST_CASE("duality gap: ghz, bell with trivial reference, random states") {
  PureState g = ghz3();
  CHECK(duality_gap(g, {"A"}, {"B"}, {"R"}) <= 1e-7);
  DensityOperator rho_ar = reduced_density(g, {"A", "R"});
  CHECK(h_min_rel(rho_ar, reduced_density(g, {"R"})).bits == doctest::Approx(0.0).epsilon(1e-9));

  // Bell across A|B with a trivial R
  PureState bell = bell_pair("A", "B");
  PureState psi = tensor(bell, qubit("R", 1.0, 0.0));
  CHECK(h_min_rel(reduced_density(psi, {"A", "R"}), reduced_density(psi, {"R"})).bits ==
        doctest::Approx(1.0).epsilon(1e-9));
  CHECK(h_max_cond(reduced_density(psi, {"A", "B"}), {"B"}) == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(duality_gap(psi, {"A"}, {"B"}, {"R"}) <= 1e-7);

  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    SystemLayout l({Factor{"A", 2}, Factor{"B", 3}, Factor{"R", 4}});
    PureState h = haar_state(l, rng);
    REQUIRE(duality_gap(h, {"A"}, {"B"}, {"R"}) <= 1e-6);
  }
}

TEST_CASE("additivity under tensor products") {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    SystemLayout l1({Factor{"A", 2}, Factor{"B", 2}});
    SystemLayout l2({Factor{"C", 2}, Factor{"D", 3}});
    DensityOperator r1 = random_density(l1, rng);
    DensityOperator r2 = random_density(l2, rng);
    DensityOperator s1 = random_density(l1.subset({"B"}), rng);
    DensityOperator s2 = random_density(l2.subset({"D"}), rng);
    DensityOperator rr = tensor(r1, r2);
    DensityOperator ss = tensor(s1, s2);
    double joint = h_min_rel(rr, ss).bits;
    double parts = h_min_rel(r1, s1).bits + h_min_rel(r2, s2).bits;
    REQUIRE(std::abs(joint - parts) < 1e-7);
    double joint_max = h_max_rel(rr, ss);
    double parts_max = h_max_rel(r1, s1) + h_max_rel(r2, s2);
    REQUIRE(std::abs(joint_max - parts_max) < 1e-7);
  }
}

TEST_CASE("strong subadditivity") {
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    SystemLayout l({Factor{"A", 2}, Factor{"B", 2}, Factor{"R", 2}});
    DensityOperator rho = random_density(l, rng);
    DensityOperator sigma_br = random_density(l.subset({"B", "R"}), rng);
    DensityOperator sigma_b = partial_trace(sigma_br, {"B"});
    DensityOperator rho_ab = partial_trace(rho, {"A", "B"});
    REQUIRE(h_min_rel(rho, sigma_br).bits <= h_min_rel(rho_ab, sigma_b).bits + 1e-7);
    REQUIRE(h_max_rel(rho, sigma_br) <= h_max_rel(rho_ab, sigma_b) + 1e-7);
  }
}

TEST_CASE("dimension bound for the conditional min-entropy") {
  Rng rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    SystemLayout l({Factor{"A", 2}, Factor{"B", 2}, Factor{"R", 2}});
    DensityOperator rho = random_density(l, rng);
    double lhs = h_min_cond(rho, {"R"}).bits;
    double rhs = h_min_cond(partial_trace(rho, {"A", "R"}), {"R"}).bits + 1.0;
    REQUIRE(lhs <= rhs + 1e-7);
  }
}

TEST_CASE("min-entropy never exceeds collision entropy") {
  Rng rng(15);
  for (int trial = 0; trial < 100; ++trial) {
    SystemLayout l({Factor{"A", 2}, Factor{"B", 3}});
    DensityOperator rho = random_density(l, rng);
    DensityOperator sigma = random_density(l.subset({"B"}), rng);
    REQUIRE(h_min_rel(rho, sigma).bits <= h2_rel(rho, sigma).bits + 1e-7);
  }
}

TEST_CASE("schmidt-rank formula for pure states") {
  Rng rng(16);
  for (int trial = 0; trial < 100; ++trial) {
    const int da = 2 + trial % 7;  // up to 8
    const int db = 2 + (trial / 2) % 7;
    const int rmax = std::min(da, db);
    const int r = 1 + static_cast<int>(rng.uniform() * rmax);
    std::vector<double> lam(r);
    double tot = 0.0;
    for (int i = 0; i < r; ++i) {
      lam[i] = 0.05 + rng.uniform();
      tot += lam[i];
    }
    for (auto& x : lam) x /= tot;
    PureState psi = schmidt_state(lam, da, db, rng);
    DensityOperator rho = DensityOperator::from_pure(psi);
    DensityOperator rho_b = reduced_density(psi, {"B"});
    REQUIRE(std::abs(h_min_rel(rho, rho_b).bits + std::log2(static_cast<double>(r))) < 1e-6);
  }
}

TEST_CASE("ordering: min <= von neumann <= max") {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    SystemLayout l({Factor{"A", 2 + trial % 5}});
    DensityOperator rho = random_density(l, rng);
    double lo = h_min(rho), mid = von_neumann(rho), hi = h_max(rho);
    REQUIRE(lo <= mid + 1e-9);
    REQUIRE(mid <= hi + 1e-9);
  }
}

TEST_SUITE_END();
