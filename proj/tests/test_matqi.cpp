#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qconv/matqi.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace qconv;
using namespace qconv::testutil;

namespace {
DensityOperator qubit_proj(int which) {
  Mat m = Mat::Zero(2, 2);
  m(which, which) = 1.0;
  return DensityOperator(m, {{"A", 2}});
}

DensityOperator plus_state() {
  Vec v(2);
  v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  return DensityOperator(v * v.adjoint(), {{"A", 2}});
}
}  // namespace

TEST_CASE("fidelity: identities and closed forms") {
  Rng rng(1);
  auto rho = random_state({{"A", 2}, {"B", 2}}, 3, rng);
  CHECK(fidelity(rho, rho) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(fidelity(qubit_proj(0), qubit_proj(1)) == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(fidelity(qubit_proj(0), plus_state()) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-10));

  // Subnormalized: F(rho/2, rho) = sqrt(1/2) for pure rho (extra term vanishes).
  DensityOperator half(0.5 * qubit_proj(0).matrix(), {{"A", 2}}, false);
  CHECK(fidelity(half, qubit_proj(0)) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-10));

  // Symmetry in the arguments.
  auto sig = random_state({{"A", 2}, {"B", 2}}, 2, rng);
  CHECK(fidelity(rho, sig) == doctest::Approx(fidelity(sig, rho)).epsilon(1e-12));

  CHECK_THROWS(fidelity(qubit_proj(0), random_state({{"A", 3}}, 2, rng)));
}

TEST_CASE("purified and trace distances") {
  CHECK(purified_distance(qubit_proj(0), qubit_proj(0)) == doctest::Approx(0.0));
  CHECK(purified_distance(qubit_proj(0), qubit_proj(1)) == doctest::Approx(1.0));
  CHECK(purified_distance(qubit_proj(0), plus_state()) ==
        doctest::Approx(std::sqrt(0.5)).epsilon(1e-10));

  CHECK(trace_distance(qubit_proj(0), qubit_proj(0)) == doctest::Approx(0.0));
  CHECK(trace_distance(qubit_proj(0), qubit_proj(1)) == doctest::Approx(1.0));
  CHECK(trace_distance(qubit_proj(0), plus_state()) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-10));
}

TEST_CASE("property: trace-distance vs purified-distance sandwich and triangle") {
  Rng rng(42);
  for (int t = 0; t < 200; ++t) {
    Factors fs{{"A", 2 + static_cast<int>(rng.integer() % 2)}};
    auto a = random_state(fs, 1 + static_cast<int>(rng.integer() % fs[0].dim), rng);
    auto b = random_state(fs, 1 + static_cast<int>(rng.integer() % fs[0].dim), rng);
    auto c = random_state(fs, fs[0].dim, rng);
    const double td = trace_distance(a, b);
    const double pd = purified_distance(a, b);
    CHECK(td <= pd + 1e-9);
    CHECK(pd <= std::sqrt(2.0 * td) + 1e-9);  // P <= sqrt(||.||_1) = sqrt(2 * td)
    CHECK(purified_distance(a, c) <= pd + purified_distance(b, c) + 1e-9);
  }
}

TEST_CASE("partial trace") {
  // Tr_B Phi_2 = 1/2 identity.
  DensityOperator phi(maximally_entangled(2), {{"A", 2}, {"B", 2}});
  CHECK((partial_trace(phi, {"A"}).matrix() - maximally_mixed(2)).norm() <= 1e-12);

  // Product state marginal.
  Rng rng(2);
  Mat ra = haar_density(2, 2, rng), rb = haar_density(3, 3, rng);
  DensityOperator prod(kron(ra, rb), {{"A", 2}, {"B", 3}});
  CHECK((partial_trace(prod, {"A"}).matrix() - ra).norm() <= 1e-12);

  // GHZ: Tr_C = 1/2(|00><00| + |11><11|).
  Vec ghz = Vec::Zero(8);
  ghz[0] = ghz[7] = 1.0 / std::sqrt(2.0);
  PureState g(ghz, {{"A", 2}, {"B", 2}, {"C", 2}});
  Mat red = partial_trace(g, {"A", "B"}).matrix();
  Mat expect = Mat::Zero(4, 4);
  expect(0, 0) = expect(3, 3) = 0.5;
  CHECK((red - expect).norm() <= 1e-12);

  CHECK_THROWS(partial_trace(phi, {"Z"}));

  // Linearity + trace preservation on random states.
  for (int t = 0; t < 50; ++t) {
    auto x = random_state({{"A", 2}, {"B", 2}}, 4, rng);
    auto y = random_state({{"A", 2}, {"B", 2}}, 4, rng);
    Mat mix = 0.3 * x.matrix() + 0.7 * y.matrix();
    Mat lhs = partial_trace(mix, x.factors(), {"A"});
    Mat rhs = 0.3 * partial_trace(x, {"A"}).matrix() + 0.7 * partial_trace(y, {"A"}).matrix();
    CHECK((lhs - rhs).norm() <= 1e-12);
    CHECK(std::abs(lhs.trace().real() - 1.0) <= 1e-12);
  }
}

TEST_CASE("symmetric projector ranks and projector laws") {
  struct Case {
    int d, n;
    std::int64_t rank;
  } cases[] = {{2, 2, 3}, {2, 3, 4}, {3, 2, 6}};
  for (auto [d, n, rank] : cases) {
    Mat p = symmetric_projector(d, n);
    CHECK((p * p - p).norm() <= 1e-10);
    CHECK((p - p.adjoint()).norm() <= 1e-12);
    CHECK(std::llround(p.trace().real()) == rank);
    CHECK(rank == binomial(n + d - 1, n));
  }
  CHECK_THROWS(symmetric_projector(2, 13));  // guard
}

TEST_CASE("haar sampling") {
  Rng rng(7);
  Mat p = haar_projector(4, 2, rng);
  CHECK((p * p - p).norm() <= 1e-10);
  CHECK(std::abs(p.trace().real() - 2.0) <= 1e-10);
  CHECK_THROWS(haar_projector(4, 5, rng));

  Vec s = haar_state(2, rng);
  CHECK(std::abs(s.norm() - 1.0) <= 1e-12);

  // Determinism given the seed.
  Rng r1(99), r2(99);
  CHECK((haar_unitary(3, r1) - haar_unitary(3, r2)).norm() == 0.0);

  // Haar moment: mean of sampled qubit states approaches 1/2 identity.
  Rng rm(5);
  Mat mean = Mat::Zero(2, 2);
  const int nsamp = 10000;
  for (int i = 0; i < nsamp; ++i) {
    Vec v = haar_state(2, rm);
    mean += v * v.adjoint();
  }
  mean /= double(nsamp);
  CHECK(trace_distance(mean, maximally_mixed(2)) <= 0.02);
}

TEST_CASE("generalized inverse log-norm") {
  CHECK(generalized_inverse_lognorm(maximally_mixed(2)) == doctest::Approx(1.0));
  CHECK(generalized_inverse_lognorm(qubit_proj(0).matrix()) == doctest::Approx(0.0));
  Mat d(2, 2);
  d << 0.9, 0.0, 0.0, 0.1;
  CHECK(generalized_inverse_lognorm(d) == doctest::Approx(std::log2(10.0)).epsilon(1e-12));
  CHECK_THROWS(generalized_inverse_lognorm(Mat::Zero(2, 2)));
}

TEST_CASE("purification") {
  Rng rng(11);
  auto rho = random_state({{"A", 2}, {"B", 2}}, 3, rng);
  PureState psi = purify(rho);
  CHECK(psi.factors().back().name == "R");
  CHECK(psi.factors().back().dim == 3);
  Mat back = partial_trace(psi, {"A", "B"}).matrix();
  CHECK((back - rho.matrix()).norm() <= 1e-9);
}

TEST_CASE("type invariants") {
  CHECK_THROWS(DensityOperator(Mat::Identity(2, 2), {{"A", 2}}));           // trace 2
  CHECK_THROWS(DensityOperator(-maximally_mixed(2), {{"A", 2}}, false));    // negative
  CHECK_THROWS(DensityOperator(maximally_mixed(2), {{"A", 2}, {"B", 2}}));  // dim mismatch
  CHECK_THROWS(PureState(Vec::Ones(2), {{"A", 2}}));                        // norm
  Mat notiso(2, 2);
  notiso << 1, 1, 0, 0;
  CHECK_THROWS(Isometry(notiso, {"A", 2}, {{"B", 2}}));
  Factors dup{{"A", 2}, {"A", 2}};
  CHECK_THROWS(DensityOperator(maximally_mixed(4), dup));
}
