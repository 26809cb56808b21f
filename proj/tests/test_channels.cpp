#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qconv/channels.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace qconv;
using namespace qconv::testutil;

TEST_CASE("apply: identity, dephasing, erasure") {
  Rng rng(11);
  Mat rho = haar_density(2, 2, rng);
  DensityOperator st(rho, {{"A", 2}});

  auto id = make_identity(2);
  CHECK((apply(id, st, "A").matrix() - rho).norm() <= 1e-12);

  // Z_{1/2} on |+><+| -> maximally mixed.
  Vec plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  DensityOperator pl(plus * plus.adjoint(), {{"A", 2}});
  auto z = make_dephasing(0.5);
  CHECK((apply(z, pl, "A").matrix() - maximally_mixed(2)).norm() <= 1e-12);

  // Erasure: (1-q) rho (+) q |*><*| with the flag last.
  auto er = make_erasure(2, 0.3);
  Mat out = apply(er, st, "A").matrix();
  CHECK((out.topLeftCorner(2, 2) - 0.7 * rho).norm() <= 1e-12);
  CHECK(std::abs(out(2, 2).real() - 0.3) <= 1e-12);
  CHECK(out.topRightCorner(2, 1).norm() <= 1e-12);

  // erasure(2, 0.5) on the maximally mixed state -> diag(1/4, 1/4, 1/2).
  DensityOperator mm(maximally_mixed(2), {{"A", 2}});
  Mat out2 = apply(make_erasure(2, 0.5), mm, "A").matrix();
  Mat expect = Mat::Zero(3, 3);
  expect(0, 0) = 0.25;
  expect(1, 1) = 0.25;
  expect(2, 2) = 0.5;
  CHECK((out2 - expect).norm() <= 1e-12);
}

TEST_CASE("choi and kraus round-trip") {
  // Identity qubit channel: J = 2 Phi_2, rank one.
  auto id = make_identity(2);
  Mat j = id.choi().matrix;
  CHECK((j - 2.0 * maximally_entangled(2)).norm() <= 1e-12);
  CHECK(psd_rank(j) == 1);

  // Fully depolarizing qubit: J = 1/2 * identity_4.
  auto dep = make_depolarizing(2, 1.0);
  CHECK((dep.choi().matrix - 0.5 * Mat::Identity(4, 4)).norm() <= 1e-12);

  // Round-trip on random channels reproduces the action.
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    Channel c = random_channel(3, 2, 2, rng);
    Channel c2 = kraus_from_choi(c.choi());
    Mat rho = haar_density(3, 3, rng);
    CHECK((c.apply_matrix(rho) - c2.apply_matrix(rho)).norm() <= 1e-9);
  }

  // Invalid Choi matrices are rejected.
  ChoiMatrix bad{-Mat::Identity(4, 4), 2, 2};
  CHECK_THROWS(kraus_from_choi(bad));
  ChoiMatrix bad2{Mat::Identity(4, 4) * 0.9, 2, 2};
  CHECK_THROWS(kraus_from_choi(bad2));
}

TEST_CASE("minimal dilation environment dimensions") {
  CHECK(make_identity(2).minimal_dilation().denv == 1);
  CHECK(make_dephasing(0.3).minimal_dilation().denv == 2);
  CHECK(make_erasure(2, 0.4).minimal_dilation().denv == 3);

  // env dimension equals Choi rank on random channels.
  Rng rng(7);
  for (int t = 0; t < 100; ++t) {
    int din = 2 + static_cast<int>(rng.integer() % 2);
    int dout = 2 + static_cast<int>(rng.integer() % 2);
    int denv = 1 + static_cast<int>(rng.integer() % 3);
    while (dout * denv < din) ++denv;
    Channel c = random_channel(din, dout, denv, rng);
    CHECK(c.minimal_dilation().denv == psd_rank(c.choi().matrix, 1e-9));
  }

  // The dilation reproduces the channel on a spanning set.
  Channel c = random_channel(2, 3, 2, rng);
  const Dilation& d = c.minimal_dilation();
  Factors fs{{"B", d.dout}, {"E", d.denv}};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Mat eij = Mat::Zero(2, 2);
      eij(i, j) = 1.0;
      Mat lifted = d.u * eij * d.u.adjoint();
      Mat nb = partial_trace(lifted, fs, {"B"});
      Mat back = d.out_embed * nb * d.out_embed.adjoint();
      CHECK((back - c.apply_matrix(eij)).norm() <= 1e-9);
    }
}

TEST_CASE("complementary channels") {
  // complementary(E_q) ~ E_{1-q}: equal Choi spectra.
  auto eq = make_erasure(2, 0.3);
  auto eqc = complementary(eq);
  auto target = make_erasure(2, 0.7);
  auto s1 = sorted_eigs(eqc.choi().matrix);
  auto s2 = sorted_eigs(target.choi().matrix);
  REQUIRE(s1.size() == s2.size());
  CHECK((s1 - s2).cwiseAbs().maxCoeff() <= 1e-9);

  // complementary(identity) is constant to a 1-dim system.
  auto idc = complementary(make_identity(2));
  CHECK(idc.dout() == 1);
  Rng rng(3);
  Mat rho = haar_density(2, 2, rng);
  CHECK(std::abs(idc.apply_matrix(rho)(0, 0).real() - 1.0) <= 1e-10);

  // Schur channel: N^c(|i><j|) = delta_ij |phi_i><phi_i| up to the E basis.
  Mat s(2, 2);
  s << 1.0, 0.6, 0.6, 1.0;
  auto ns = make_schur(s);
  auto nsc = complementary(ns);
  Mat e01 = Mat::Zero(2, 2);
  e01(0, 1) = 1.0;
  CHECK(nsc.apply_matrix(e01).norm() <= 1e-9);
  Mat p0 = nsc.apply_matrix(Mat({{1.0, 0.0}, {0.0, 0.0}}).cast<cxd>());
  Mat p1 = nsc.apply_matrix(Mat({{0.0, 0.0}, {0.0, 1.0}}).cast<cxd>());
  CHECK(psd_rank(p0) == 1);
  CHECK(psd_rank(p1) == 1);
  // Overlap Tr[N^c(|0><0|) N^c(|1><1|)] = |S_01|^2, basis independent.
  CHECK(std::abs((p0 * p1).trace().real() - 0.36) <= 1e-9);

  // complementary(complementary(N)) has N's Choi spectrum after B-reduction.
  for (int t = 0; t < 20; ++t) {
    Channel c = random_channel(2, 3, 2, rng);
    Channel cc = complementary(complementary(c));
    auto sa = sorted_eigs(c.choi().matrix);
    auto sb = sorted_eigs(cc.choi().matrix);
    // Pad the shorter spectrum with zeros (reduction can shrink B).
    Eigen::VectorXd pa = Eigen::VectorXd::Zero(std::max(sa.size(), sb.size()));
    Eigen::VectorXd pb = pa;
    pa.tail(sa.size()) = sa;
    pb.tail(sb.size()) = sb;
    CHECK((pa - pb).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("tensor products") {
  auto id8 = tensor_power(make_identity(2), 3);
  CHECK(id8.din() == 8);
  CHECK(id8.kraus().size() == 1);
  CHECK((id8.kraus()[0] - Mat::Identity(8, 8)).norm() <= 1e-12);

  // Choi(c1 x c2) = Choi(c1) x Choi(c2) up to factor reordering; checked via
  // action on product and entangled inputs.
  Rng rng(9);
  auto z = make_dephasing(0.2);
  auto zz = tensor_power(z, 2);
  // product input
  Mat r1 = haar_density(2, 2, rng), r2 = haar_density(2, 2, rng);
  CHECK((zz.apply_matrix(kron(r1, r2)) - kron(z.apply_matrix(r1), z.apply_matrix(r2))).norm() <=
        1e-10);
  // entangled input Phi_4: apply sites one at a time on the first half
  Mat phi4 = maximally_entangled(4);
  DensityOperator st(phi4, {{"A1", 2}, {"A2", 2}, {"B", 4}});
  auto one = apply(z, st, "A1");
  auto two = apply(z, one, "A2");
  DensityOperator st2(phi4, {{"A", 4}, {"B", 4}});
  auto direct = apply(zz, st2, "A");
  CHECK((two.matrix() - direct.matrix()).norm() <= 1e-10);
}

TEST_CASE("zoo validation and identities") {
  // dephasing(0) == identity
  Rng rng(13);
  Mat rho = haar_density(2, 2, rng);
  CHECK((make_dephasing(0.0).apply_matrix(rho) - rho).norm() <= 1e-12);

  // schur(all ones) == identity
  Mat ones = Mat::Ones(3, 3);
  Mat r3 = haar_density(3, 2, rng);
  CHECK((make_schur(ones).apply_matrix(r3) - r3).norm() <= 1e-10);

  // dephasing Z_p is the Schur channel with S = [[1, 1-2p], [1-2p, 1]].
  Mat s(2, 2);
  s << 1.0, 0.6, 0.6, 1.0;
  CHECK((make_schur(s).apply_matrix(rho) - make_dephasing(0.2).apply_matrix(rho)).norm() <= 1e-10);
  Mat sprobe;
  CHECK(is_schur_diagonal(make_dephasing(0.2), &sprobe));
  CHECK(std::abs(sprobe(0, 1).real() - 0.6) <= 1e-10);
  CHECK(!is_schur_diagonal(make_erasure(2, 0.3)));

  CHECK_THROWS(make_schur(Mat({{1.0, 0.0}, {0.0, 0.5}}).cast<cxd>()));  // S_ii != 1
  CHECK_THROWS(make_erasure(2, 1.5));
  CHECK_THROWS(make_dephasing(-0.1));

  // every zoo channel satisfies sum K^dag K = 1 (constructor enforces; spot check)
  for (const Channel& c :
       {make_identity(3), make_erasure(3, 0.25), make_dephasing(0.7), make_depolarizing(3, 0.4),
        make_schur(ones), make_constant(maximally_mixed(2))}) {
    Mat sum = Mat::Zero(c.din(), c.din());
    for (const auto& k : c.kraus()) sum += k.adjoint() * k;
    CHECK((sum - Mat::Identity(c.din(), c.din())).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("channel json round-trip and zoo specs") {
  auto z = make_dephasing(0.25);
  auto z2 = channel_from_json(channel_to_json(z));
  Rng rng(17);
  Mat rho = haar_density(2, 2, rng);
  CHECK((z.apply_matrix(rho) - z2.apply_matrix(rho)).norm() <= 1e-12);

  auto e = channel_from_json(R"({"zoo": "erasure", "params": {"d": 2, "q": 0.5}})");
  CHECK(e.dout() == 3);
  CHECK_THROWS(channel_from_json(R"({"zoo": "nope", "params": {}})"));
  CHECK_THROWS(channel_from_json("not json"));
  CHECK_THROWS(channel_from_json(R"({"din": 2})"));
}
