#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "formhom/assembly.hpp"
#include "formhom/rng.hpp"
#include "oracle.hpp"

using namespace formhom;

namespace {

AltForm randomForm(int d, int r, CounterRng& rng) {
  AltForm a(d, r);
  for (int i = 0; i < a.comps(); ++i) a.coeffs(i) = rng.uniform(-1.0, 1.0);
  return a;
}

// affine form field a + sum_k b_k x_k with symbolic exterior derivative
struct AffineField {
  AltForm a0;
  std::vector<AltForm> b;  // per axis

  PolyFormField field() const {
    AltForm a0c = a0;
    std::vector<AltForm> bc = b;
    int d = a0.dim;
    return PolyFormField{d, a0.degree, 1, [a0c, bc, d](const Eigen::VectorXd& x) {
                           AltForm v = a0c;
                           for (int k = 0; k < d; ++k) v += x(k) * bc[k];
                           return v;
                         }};
  }

  AltForm exteriorDerivative() const {
    int d = a0.dim;
    AltForm out(d, a0.degree + 1);
    for (int k = 0; k < d; ++k) out += wedge(AltForm::basis(d, 1, k), b[k]);
    return out;
  }
};

AffineField randomAffine(int d, int r, CounterRng& rng) {
  AffineField f;
  f.a0 = randomForm(d, r, rng);
  for (int k = 0; k < d; ++k) f.b.push_back(randomForm(d, r, rng));
  return f;
}

}  // namespace

TEST_CASE("face counts match C(d,r) (N+1)^(d-r) N^r") {
  for (int d = 1; d <= 4; ++d)
    for (int N : {1, 2, 3}) {
      Grid g(d, N);
      for (int r = 0; r <= d; ++r) {
        double expect = binom(d, r) * std::pow(N + 1.0, d - r) * std::pow(double(N), r);
        CHECK(g.faceCount(r) == static_cast<long>(expect));
      }
    }
}

TEST_CASE("face enumeration round-trips") {
  for (int d = 1; d <= 4; ++d) {
    Grid g(d, 3);
    for (int r = 0; r <= d; ++r)
      for (long f = 0; f < g.faceCount(r); ++f) {
        int ds;
        Pos pos;
        g.faceDecode(r, f, ds, pos);
        CHECK(g.faceIndex(r, ds, pos) == f);
      }
  }
}

TEST_CASE("boundary mask flags exactly the boundary faces") {
  CHECK(boundaryMask(Grid(2, 3), 0).countFlagged() == 12);
  CHECK(boundaryMask(Grid(1, 3), 0).countFlagged() == 2);
  CHECK(boundaryMask(Grid(2, 1), 1).countFlagged() == 4);
  // no top-degree face lies in the boundary
  CHECK(boundaryMask(Grid(3, 2), 3).countFlagged() == 0);
}

TEST_CASE("coboundary of a constant 0-cochain vanishes") {
  Grid g(3, 3);
  Cochain u(g, 0);
  u.values.setConstant(2.5);
  CHECK(coboundary(u).values.norm() == 0.0);
}

TEST_CASE("d of d is exactly zero on integer cochains, all dims and degrees") {
  CounterRng rng(123);
  for (int d = 1; d <= 4; ++d) {
    Grid g(d, 3);
    for (int s = 0; s + 2 <= d; ++s) {
      for (int rep = 0; rep < 25; ++rep) {
        std::vector<long long> u(g.faceCount(s));
        for (auto& x : u) x = static_cast<long long>(rng.next() % 2001) - 1000;
        auto ddu = applyCoboundary(g, s + 1, applyCoboundary(g, s, u));
        for (long long v : ddu) CHECK(v == 0);
      }
    }
  }
  CHECK_THROWS(coboundary(Cochain(Grid(2, 3), 2)));
}

TEST_CASE("de Rham map is a chain map on affine fields") {
  CounterRng rng(99);
  for (int d = 2; d <= 3; ++d) {
    Grid g(d, 3, 0.5);
    for (int r = 0; r < d; ++r) {
      AffineField f = randomAffine(d, r, rng);
      Cochain lhs = coboundary(interpolate(f.field(), g));
      // d of affine is the constant form; interpolate it
      AltForm df = f.exteriorDerivative();
      PolyFormField cf{d, r + 1, 0, [df](const Eigen::VectorXd&) { return df; }};
      Cochain rhs = interpolate(cf, g);
      CHECK((lhs.values - rhs.values).lpNorm<Eigen::Infinity>() < 1e-13);
    }
  }
}

TEST_CASE("interpolation basics") {
  Grid g(2, 3);
  // constant form p: DOF = p_I h^r on faces of direction I
  AltForm p(2, 1);
  p.coeffs << 2.0, -3.0;
  PolyFormField cf{2, 1, 0, [p](const Eigen::VectorXd&) { return p; }};
  Cochain u = interpolate(cf, g);
  int ds;
  Pos pos;
  for (long f = 0; f < g.faceCount(1); ++f) {
    g.faceDecode(1, f, ds, pos);
    CHECK(u.values(f) == doctest::Approx(p.coeffs(ds)));
  }
  // l_p with p = dx1^dx2 on d=2: l_p = x1 dx2, the DOF on the vertical edge
  // from (x1,x2) to (x1,x2+1) equals x1
  AltForm vol = AltForm::basis(2, 2, 0);
  Cochain lp = interpolate(lpField(vol), g);
  for (long f = 0; f < g.faceCount(1); ++f) {
    g.faceDecode(1, f, ds, pos);
    double expect = (ds == 1) ? double(pos[0]) : 0.0;  // direction {x2} edges
    CHECK(lp.values(f) == doctest::Approx(expect).epsilon(1e-14));
  }
  // zero form
  PolyFormField zf{2, 1, 0, [](const Eigen::VectorXd&) { return AltForm(2, 1); }};
  CHECK(interpolate(zf, g).values.norm() == 0.0);
  // l_p integrates d l_p = p exactly: coboundary equals constant-p cochain
  CounterRng rng(4);
  for (int r = 1; r <= 2; ++r) {
    AltForm q = randomForm(2, r, rng);
    Cochain lq = interpolate(lpField(q), g);
    PolyFormField qc{2, r, 0, [q](const Eigen::VectorXd&) { return q; }};
    CHECK((coboundary(lq).values - interpolate(qc, g).values).lpNorm<Eigen::Infinity>() < 1e-13);
  }
  CHECK_THROWS(interpolate(PolyFormField{2, 1, 3, nullptr}, g));
}

TEST_CASE("cell averages reconstruct constants exactly") {
  CounterRng rng(31);
  for (int d = 2; d <= 3; ++d) {
    Grid g(d, 3, 0.5);
    for (int r = 1; r <= d; ++r) {
      AltForm p = randomForm(d, r, rng);
      PolyFormField cf{d, r, 0, [p](const Eigen::VectorXd&) { return p; }};
      CellField f = cellAverages(g, r, interpolate(cf, g).values);
      for (long c = 0; c < g.cellCount(); ++c)
        CHECK((f.values.row(c).transpose() - p.coeffs).norm() < 1e-13);
    }
  }
}

TEST_CASE("cube mean") {
  Grid g(2, 3);
  CellField f(g, 1);
  // constant field
  f.values.col(0).setConstant(1.5);
  f.values.col(1).setConstant(-0.5);
  AltForm m = cubeMean(f);
  CHECK(m.coeffs(0) == doctest::Approx(1.5));
  CHECK(m.coeffs(1) == doctest::Approx(-0.5));
  // +p / -p split cancels
  CellField s(g, 1);
  for (long c = 0; c < g.cellCount(); ++c) s.values(c, 0) = (c % 2 == 0) ? 1.0 : -1.0;
  s.values(4, 0) = 0.0;  // 9 cells: 4 positive, 4 negative, one zero
  CHECK(std::abs(cubeMean(s).coeffs(0)) < 1e-15);
  // random field vs direct summation
  CounterRng rng(8);
  CellField rf(g, 1);
  for (long c = 0; c < g.cellCount(); ++c)
    for (int k = 0; k < 2; ++k) rf.values(c, k) = rng.uniform(-2.0, 2.0);
  Eigen::VectorXd hand = Eigen::VectorXd::Zero(2);
  for (long c = 0; c < g.cellCount(); ++c) hand += rf.values.row(c).transpose();
  hand /= double(g.cellCount());
  CHECK((cubeMean(rf).coeffs - hand).norm() < 1e-14);
  Pos off{};
  CHECK_THROWS(cubeMean(rf, off, 0));
  CHECK_THROWS(cubeMean(rf, off, 5));
}

TEST_CASE("multiscale seminorm: zero, constants, and a direct two-level oracle") {
  Grid g(2, 9);  // m = 2
  CellField z(g, 1);
  CHECK(multiscaleSeminorm(z) == 0.0);

  CellField c(g, 1);
  c.values.col(0).setConstant(3.0);
  c.values.col(1).setConstant(4.0);  // |c| = 5
  CHECK(multiscaleSeminorm(c) == doctest::Approx(5.0 * (1.0 + (9.0 - 1.0) / 2.0)));

  CounterRng rng(17);
  CellField f(g, 1);
  for (long i = 0; i < f.values.rows(); ++i)
    for (int k = 0; k < 2; ++k) f.values(i, k) = rng.uniform(-1.0, 1.0);
  // direct two-level sum
  double l2 = std::sqrt(f.values.squaredNorm() / 81.0);
  double lvl0 = 0.0;
  for (long i = 0; i < 81; ++i) lvl0 += f.values.row(i).squaredNorm();
  lvl0 = std::sqrt(lvl0 / 81.0);
  double lvl1 = 0.0;
  for (int bx = 0; bx < 3; ++bx)
    for (int by = 0; by < 3; ++by) {
      Eigen::Vector2d mean = Eigen::Vector2d::Zero();
      for (int ix = 0; ix < 3; ++ix)
        for (int iy = 0; iy < 3; ++iy) {
          Pos cell{3 * bx + ix, 3 * by + iy, 0, 0};
          mean += f.values.row(g.cellIndex(cell)).transpose();
        }
      lvl1 += (mean / 9.0).squaredNorm();
    }
  lvl1 = 3.0 * std::sqrt(lvl1 / 9.0);
  CHECK(multiscaleSeminorm(f) == doctest::Approx(l2 + lvl0 + lvl1).epsilon(1e-12));

  CHECK_THROWS(multiscaleSeminorm(CellField(Grid(2, 4), 1)));
}

TEST_CASE("multiscale seminorm is a seminorm") {
  CounterRng rng(23);
  Grid g(2, 9);
  for (int rep = 0; rep < 10; ++rep) {
    CellField a(g, 1), b(g, 1);
    for (long i = 0; i < a.values.rows(); ++i)
      for (int k = 0; k < 2; ++k) {
        a.values(i, k) = rng.uniform(-1.0, 1.0);
        b.values(i, k) = rng.uniform(-1.0, 1.0);
      }
    double t = rng.uniform(-3.0, 3.0);
    CellField ta = a;
    ta.values *= t;
    CHECK(multiscaleSeminorm(ta) == doctest::Approx(std::abs(t) * multiscaleSeminorm(a)));
    CellField sum = a;
    sum.values += b.values;
    CHECK(multiscaleSeminorm(sum) <= multiscaleSeminorm(a) + multiscaleSeminorm(b) + 1e-12);
  }
}

TEST_CASE("assembled energy matches the dense quadrature oracle") {
  CounterRng rng(55);
  for (int d = 2; d <= 3; ++d) {
    int N = (d == 2) ? 3 : 2;
    for (int r = 1; r <= d; ++r) {
      Grid g(d, N, d == 2 ? 1.0 : 0.5);
      EnsembleSpec spec;
      spec.kind = EnsembleSpec::Kind::IidSpd;
      spec.dim = d;
      spec.degree = r;
      spec.lambda = 0.25;
      Environment env = sampleEnvironmentSide(spec, N, 999, g.spacing);
      SpMat D = coboundaryMatrix(g, r - 1);
      SpMat A = stiffness(env, D);
      Eigen::MatrixXd Aref = oracle::denseStiffness(env);
      CHECK((Eigen::MatrixXd(A) - Aref).lpNorm<Eigen::Infinity>() < 1e-12);
    }
  }
}

TEST_CASE("energy form: kernel, affine exactness, ellipticity sandwich") {
  CounterRng rng(65);
  Grid g(2, 3);
  int r = 1;
  EnsembleSpec spec;
  spec.kind = EnsembleSpec::Kind::IidSpd;
  spec.dim = 2;
  spec.degree = r;
  spec.lambda = 0.25;
  Environment env = sampleEnvironmentSide(spec, 3, 4321, 1.0);
  SpMat D = coboundaryMatrix(g, r - 1);
  SpMat A = stiffness(env, D);

  // Q(u+c, u+c) = Q(u,u) for closed c (constants at degree 0)
  Eigen::VectorXd u(g.faceCount(0));
  for (long i = 0; i < u.size(); ++i) u(i) = rng.uniform(-1.0, 1.0);
  Eigen::VectorXd shifted = u.array() + 7.0;
  CHECK(u.dot(A * u) == doctest::Approx(shifted.dot(A * shifted)).epsilon(1e-12));

  // constant coefficient a = star, u = interpolate(l_p): Q = |p|^2 |cube|
  Environment unit = Environment::constant(g, energyMatrixOfStar(2, r, 1.0, 0.25));
  SpMat A1 = stiffness(unit, D);
  AltForm p = AltForm(2, 1, Eigen::Vector2d(0.6, -1.1));
  Eigen::VectorXd lp = interpolate(lpField(p), g).values;
  CHECK(lp.dot(A1 * lp) == doctest::Approx(p.coeffs.squaredNorm() * 9.0).epsilon(1e-12));

  // ellipticity sandwich lambda G1 <= Q <= G1/lambda on random cochains
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::VectorXd w(g.faceCount(0));
    for (long i = 0; i < w.size(); ++i) w(i) = rng.uniform(-1.0, 1.0);
    double q = w.dot(A * w), q1 = w.dot(A1 * w);
    CHECK(q >= 0.25 * q1 - 1e-12);
    CHECK(q <= 4.0 * q1 + 1e-12);
  }

  // closed input: Q(coboundary(w), .) for degree-2 energies
  EnsembleSpec spec2 = spec;
  spec2.degree = 2;
  Environment env2 = sampleEnvironmentSide(spec2, 3, 11, 1.0);
  SpMat D1 = coboundaryMatrix(g, 1);
  SpMat A2 = stiffness(env2, D1);
  Eigen::VectorXd w0(g.faceCount(0));
  for (long i = 0; i < w0.size(); ++i) w0(i) = rng.uniform(-1.0, 1.0);
  Eigen::VectorXd closed = coboundaryMatrix(g, 0) * w0;
  CHECK(std::abs(closed.dot(A2 * closed)) < 1e-14 * w0.size());
}

TEST_CASE("pairing load agrees with the quadrature oracle") {
  CounterRng rng(72);
  Grid g(2, 3);
  EnsembleSpec spec;
  spec.kind = EnsembleSpec::Kind::Checkerboard2;
  spec.dim = 2;
  spec.degree = 1;
  spec.lambda = 0.25;
  spec.c1 = 1.0;
  spec.c2 = 4.0;
  Environment env = sampleEnvironmentSide(spec, 3, 5, 1.0);
  AltForm q = randomForm(2, 1, rng);
  SpMat D = coboundaryMatrix(g, 0);
  Eigen::VectorXd viaLoad = D.transpose() * pairingLoad(g, 1, q);
  Eigen::VectorXd ref = oracle::densePairingLoad(env, q);
  CHECK((viaLoad - ref).lpNorm<Eigen::Infinity>() < 1e-12);
}
