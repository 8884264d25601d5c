#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "formhom/exterior.hpp"
#include "formhom/rng.hpp"
#include "oracle.hpp"

using namespace formhom;

namespace {

AltForm randomForm(int d, int r, CounterRng& rng) {
  AltForm a(d, r);
  for (int i = 0; i < a.comps(); ++i) a.coeffs(i) = rng.uniform(-1.0, 1.0);
  return a;
}

Eigen::MatrixXd randomSpd(int n, double lambda, CounterRng& rng) {
  Eigen::MatrixXd G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = rng.gaussian();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ();
  Eigen::VectorXd mu(n);
  for (int i = 0; i < n; ++i) mu(i) = rng.uniform(lambda * 1.01, 0.99 / lambda);
  Eigen::MatrixXd M = Q * mu.asDiagonal() * Q.transpose();
  return 0.5 * (M + M.transpose().eval());
}

}  // namespace

TEST_CASE("multi-index rank round-trips over the lexicographic enumeration") {
  for (int d = 1; d <= 4; ++d)
    for (int r = 0; r <= d; ++r)
      for (int rk = 0; rk < binom(d, r); ++rk) {
        MultiIndex I = MultiIndex::fromRank(d, r, rk);
        CHECK(I.degree() == r);
        CHECK(I.rank() == rk);
      }
}

TEST_CASE("multi-index rejects malformed input") {
  CHECK_THROWS(MultiIndex(3, {2, 1}));
  CHECK_THROWS(MultiIndex(3, {0, 3}));
  CHECK_THROWS(MultiIndex(2, {1, 1}));
}

TEST_CASE("wedge basis cases") {
  // d=2: dx1 ^ dx2 = +dx12
  AltForm a = AltForm::basis(2, 1, 0), b = AltForm::basis(2, 1, 1);
  AltForm w = wedge(a, b);
  CHECK(w.coeffs(0) == doctest::Approx(1.0));
  // d=3: dx2 ^ dx1 = -dx12
  AltForm c = wedge(AltForm::basis(3, 1, 1), AltForm::basis(3, 1, 0));
  CHECK(c.coeffs(MultiIndex(3, {0, 1}).rank()) == doctest::Approx(-1.0));
  // d=3: (dx1 + 2 dx3) ^ (dx2^dx3) = dx123
  AltForm u(3, 1);
  u.coeffs(0) = 1.0;
  u.coeffs(2) = 2.0;
  AltForm v(3, 2);
  v.coeffs(MultiIndex(3, {1, 2}).rank()) = 1.0;
  AltForm uv = wedge(u, v);
  CHECK(uv.coeffs(0) == doctest::Approx(1.0));
  AltForm ref = oracle::wedgePermutation(u, v);
  CHECK((uv.coeffs - ref.coeffs).norm() == doctest::Approx(0.0));
}

TEST_CASE("wedge matches the permutation-sum oracle and anticommutes") {
  CounterRng rng(42);
  for (int d = 1; d <= 4; ++d)
    for (int m = 0; m <= d; ++m)
      for (int s = 0; m + s <= d; ++s) {
        AltForm a = randomForm(d, m, rng), b = randomForm(d, s, rng);
        AltForm ab = wedge(a, b), ba = wedge(b, a);
        AltForm ref = oracle::wedgePermutation(a, b);
        CHECK((ab.coeffs - ref.coeffs).norm() < 1e-14);
        double sign = (m * s) % 2 == 0 ? 1.0 : -1.0;
        CHECK((ab.coeffs - sign * ba.coeffs).norm() < 1e-14);
      }
}

TEST_CASE("wedge beyond top degree returns the canonical zero") {
  CounterRng rng(7);
  AltForm a = randomForm(3, 2, rng), b = randomForm(3, 2, rng);
  AltForm w = wedge(a, b);
  CHECK(w.degree == 3);
  CHECK(w.coeffs.norm() == 0.0);
  CHECK_THROWS(wedge(randomForm(2, 1, rng), randomForm(3, 1, rng)));
}

TEST_CASE("hodge star basis cases and involution") {
  AltForm e1 = AltForm::basis(2, 1, 0);
  CHECK((hodgeStar(e1).coeffs - AltForm::basis(2, 1, 1).coeffs).norm() == 0.0);
  AltForm e2 = AltForm::basis(2, 1, 1);
  CHECK((hodgeStar(e2).coeffs + AltForm::basis(2, 1, 0).coeffs).norm() == 0.0);
  AltForm e12 = AltForm::basis(3, 2, MultiIndex(3, {0, 1}).rank());
  CHECK((hodgeStar(e12).coeffs - AltForm::basis(3, 1, 2).coeffs).norm() == 0.0);

  CounterRng rng(3);
  for (int d = 1; d <= 4; ++d)
    for (int r = 0; r <= d; ++r) {
      AltForm a = randomForm(d, r, rng);
      AltForm ss = hodgeStar(hodgeStar(a));
      double sign = (r * (d - r)) % 2 == 0 ? 1.0 : -1.0;
      CHECK((ss.coeffs - sign * a.coeffs).norm() < 1e-15);
      CHECK(hodgeStar(a).norm() == doctest::Approx(a.norm()));  // isometry
    }
}

TEST_CASE("hodge star satisfies the defining pairing against the wedge oracle") {
  CounterRng rng(11);
  for (int d = 1; d <= 4; ++d)
    for (int r = 0; r <= d; ++r) {
      AltForm a = randomForm(d, r, rng), b = randomForm(d, r, rng);
      AltForm top = oracle::wedgePermutation(a, hodgeStar(b));
      CHECK(top.coeffs(0) == doctest::Approx(a.coeffs.dot(b.coeffs)).epsilon(1e-12));
    }
}

TEST_CASE("sign table agrees with brute-force permutation signs") {
  for (int d = 1; d <= 4; ++d)
    for (int r = 0; r <= d; ++r) {
      SignTable st(d, r);
      for (int rk = 0; rk < binom(d, r); ++rk) {
        AltForm dxI = AltForm::basis(d, r, rk);
        AltForm dxIc = AltForm::basis(d, d - r, MultiIndex::fromRank(d, r, rk).complement().rank());
        AltForm top = oracle::wedgePermutation(dxI, dxIc);
        CHECK(top.coeffs(0) == doctest::Approx(double(st(rk))));
      }
    }
}

TEST_CASE("star-wedge scalar pairing") {
  AltForm e1 = AltForm::basis(2, 1, 0), e2 = AltForm::basis(2, 1, 1);
  CHECK(starWedgeScalar(e1, e2) == doctest::Approx(1.0));  // star(dx1 ^ dx2)
  CounterRng rng(5);
  for (int d = 1; d <= 4; ++d)
    for (int r = 0; r <= d; ++r) {
      AltForm p = randomForm(d, r, rng);
      CHECK(starWedgeScalar(p, hodgeStar(p)) == doctest::Approx(p.coeffs.squaredNorm()).epsilon(1e-14));
    }
  // d=3, r=1: star( dx2 ^ (dx3 ^ dx1) ) = 1
  AltForm q = wedge(AltForm::basis(3, 1, 2), AltForm::basis(3, 1, 0));
  CHECK(starWedgeScalar(AltForm::basis(3, 1, 1), q) == doctest::Approx(1.0));
  CHECK_THROWS(starWedgeScalar(AltForm::basis(3, 1, 0), AltForm::basis(3, 1, 0)));
}

TEST_CASE("energy matrix validation") {
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 0.5, 0.5 + 1e-6, 1.0;
  CHECK_THROWS(EnergyMatrix(2, 1, 0.25, bad));
  Eigen::MatrixXd wide = 10.0 * Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS(EnergyMatrix(2, 1, 0.25, wide));  // 10 > 1/lambda
  CHECK_NOTHROW(EnergyMatrix(2, 1, 0.25, 0.25 * Eigen::MatrixXd::Identity(2, 2)));
}

TEST_CASE("energy matrix of the star map") {
  EnergyMatrix em = energyMatrixOfStar(3, 1, 1.0, 0.25);
  CHECK(em.M.isIdentity(0.0));
  EnergyMatrix em4 = energyMatrixOfStar(2, 1, 4.0, 0.25);
  CHECK((em4.M - 4.0 * Eigen::MatrixXd::Identity(2, 2)).norm() == 0.0);
  CHECK_NOTHROW(energyMatrixOfStar(2, 1, 0.5, 0.5));  // boundary of the window
  CHECK_THROWS(energyMatrixOfStar(2, 1, 0.4, 0.5));
  // apply: a p = c * star p
  CounterRng rng(9);
  AltForm p = randomForm(2, 1, rng);
  AltForm ap = em4.apply(p);
  CHECK((ap.coeffs - 4.0 * hodgeStar(p).coeffs).norm() < 1e-15);
}

TEST_CASE("invert_coeff: isotropic case and involution") {
  for (int d = 2; d <= 4; ++d)
    for (int r = 1; r < d; ++r) {
      EnergyMatrix em = energyMatrixOfStar(d, r, 2.0, 0.25);
      EnergyMatrix inv = invertCoeff(em);
      CHECK(inv.degree == d - r);
      CHECK((inv.M - 0.5 * Eigen::MatrixXd::Identity(inv.M.rows(), inv.M.cols())).norm() < 1e-14);
      EnergyMatrix back = invertCoeff(inv);
      CHECK((back.M - em.M).norm() < 1e-12);
    }
}

TEST_CASE("invert_coeff round-trips the actual coefficient maps") {
  CounterRng rng(2024);
  for (int d = 1; d <= 4; ++d)
    for (int r = 1; r <= d; ++r) {
      int reps = 1000;
      for (int t = 0; t < reps; ++t) {
        EnergyMatrix em(d, r, 0.25, randomSpd(binom(d, r), 0.25, rng));
        EnergyMatrix inv = invertCoeff(em);
        AltForm p = randomForm(d, r, rng);
        AltForm back = applyInverse(inv, em.apply(p));
        CHECK((back.coeffs - p.coeffs).norm() < 1e-12);
        // spectrum of the inverse stays in the window
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(inv.M, Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues().minCoeff() >= 0.25 - 1e-10);
        CHECK(es.eigenvalues().maxCoeff() <= 4.0 + 1e-10);
      }
    }
}

TEST_CASE("invert_coeff closed form matches the Hodge sign conjugation") {
  CounterRng rng(77);
  for (int d = 2; d <= 3; ++d)
    for (int r = 1; r < d; ++r) {
      EnergyMatrix em(d, r, 0.25, randomSpd(binom(d, r), 0.25, rng));
      Eigen::MatrixXd H = hodgeMatrix(d, r);  // S[J,I] = sigma(I) 1{J=I^c}
      Eigen::MatrixXd viaS = H * em.M.inverse() * H.transpose();
      CHECK((invertCoeff(em).M - viaS).norm() < 1e-12);
    }
}
