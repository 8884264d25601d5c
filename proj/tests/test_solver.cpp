#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "formhom/rng.hpp"
#include "formhom/solver.hpp"
#include "oracle.hpp"

using namespace formhom;

namespace {

AltForm randomForm(int d, int r, CounterRng& rng) {
  AltForm a(d, r);
  for (int i = 0; i < a.comps(); ++i) a.coeffs(i) = rng.uniform(-1.0, 1.0);
  return a;
}

EnsembleSpec iidSpd(int d, int r) {
  EnsembleSpec s;
  s.kind = EnsembleSpec::Kind::IidSpd;
  s.dim = d;
  s.degree = r;
  s.lambda = 0.25;
  return s;
}

EnsembleSpec checkerboard() {
  EnsembleSpec s;
  s.kind = EnsembleSpec::Kind::Checkerboard2;
  s.dim = 2;
  s.degree = 1;
  s.lambda = 0.25;
  s.c1 = 1.0;
  s.c2 = 4.0;
  return s;
}

Eigen::VectorXd pairingVecOf(const AltForm& q) {
  int d = q.dim, r = d - q.degree;
  SignTable st(d, r);
  Eigen::VectorXd w(binom(d, r));
  for (int i = 0; i < binom(d, r); ++i)
    w(i) = st(i) * q.coeffs(MultiIndex::fromRank(d, r, i).complement().rank());
  return w;
}

}  // namespace

TEST_CASE("cg: zero load returns the zero solution") {
  Environment env = sampleEnvironment(iidSpd(2, 1), 1, 3);
  System sys = buildSystem(env);
  CgResult r = conjugateGradient(sys.A, Eigen::VectorXd::Zero(sys.A.rows()),
                                 Eigen::VectorXd::Zero(sys.A.rows()), {});
  CHECK(r.x.norm() == 0.0);
  CHECK(r.iterations == 0);
}

TEST_CASE("constant coefficients are reproduced exactly") {
  CounterRng rng(1);
  for (int d = 2; d <= 3; ++d)
    for (int r = 1; r <= d; ++r) {
      Eigen::MatrixXd M = Eigen::MatrixXd::Identity(binom(d, r), binom(d, r));
      M(0, 0) = 2.0;
      if (M.rows() > 1) M(0, 1) = M(1, 0) = 0.3;
      Environment env = Environment::constant(Grid(d, 3), EnergyMatrix(d, r, 0.25, M));
      System sys = buildSystem(env);
      AltForm p = randomForm(d, r, rng);
      SolveReport nu = solveNu(sys, p);
      CHECK(nu.value == doctest::Approx(0.5 * p.coeffs.dot(M * p.coeffs)).epsilon(1e-10));
      AltForm q = randomForm(d, d - r, rng);
      SolveReport ns = solveNuStar(sys, q);
      Eigen::VectorXd w = pairingVecOf(q);
      CHECK(ns.value == doctest::Approx(0.5 * w.dot(M.ldlt().solve(w))).epsilon(1e-10));
      // J(p, a p) = 0
      AltForm ap = hodgeStar(AltForm(d, r, M * p.coeffs));
      JBundle jb = solveJ(sys, p, ap);
      CHECK(std::abs(jb.J) < 1e-9);
    }
}

TEST_CASE("zero data gives zero values") {
  Environment env = sampleEnvironment(iidSpd(2, 1), 1, 17);
  System sys = buildSystem(env);
  CHECK(solveNu(sys, AltForm(2, 1)).value == doctest::Approx(0.0));
  CHECK(solveNuStar(sys, AltForm(2, 1)).value == doctest::Approx(0.0));
  CHECK(solveJ(sys, AltForm(2, 1), AltForm(2, 1)).J == doctest::Approx(0.0));
}

TEST_CASE("dense oracle equivalence on 3x3 grids") {
  CounterRng rng(2);
  for (int r = 1; r <= 2; ++r) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      Environment env = sampleEnvironmentSide(iidSpd(2, r), 3, 100 + seed, 1.0);
      System sys = buildSystem(env);
      AltForm p = randomForm(2, r, rng), q = randomForm(2, 2 - r, rng);

      double nuRef = oracle::denseNu(env, p);
      CHECK(solveNu(sys, p).value == doctest::Approx(nuRef).epsilon(1e-9));

      double nsRef = oracle::denseNuStar(env, q);
      CHECK(solveNuStar(sys, q).value == doctest::Approx(nsRef).epsilon(1e-9));

      JBundle jb = solveJ(sys, p, q);
      double jRef = oracle::denseJDirect(env, p, q);
      CHECK(jb.J == doctest::Approx(jRef).epsilon(1e-8));

      // Dirichlet du against the dense minimum-norm solve
      Eigen::MatrixXd Aref = oracle::denseStiffness(env);
      Cochain bdata = interpolate(lpField(p), env.grid);
      Eigen::VectorXd uRef = oracle::denseDirichlet(env, Aref, bdata.values);
      SolveReport rep = solveDirichletValues(sys, bdata.values, &bdata.values);
      Eigen::VectorXd duRef = sys.D * uRef, du = sys.D * rep.maximizer.values;
      CHECK((du - duRef).lpNorm<Eigen::Infinity>() < 1e-9);
    }
  }
}

TEST_CASE("first variation holds for discrete probe solutions") {
  CounterRng rng(5);
  Environment env = sampleEnvironment(checkerboard(), 1, 7);
  System sys = buildSystem(env);
  AltForm p = randomForm(2, 1, rng), q = randomForm(2, 1, rng);
  JBundle jb = solveJ(sys, p, q);
  Eigen::VectorXd v = jb.vP.values + jb.vQ.values;
  Eigen::VectorXd load = pairingLoad(env.grid, 1, q);
  for (int t = 0; t < 8; ++t) {
    Cochain u = probeSolution(sys, 50 + t);
    Eigen::VectorXd du = sys.D * u.values;
    double lhs = v.dot(sys.A * u.values);
    double rhs = -energyPairConst(env, p, du) + load.dot(du);
    double scale = du.norm() * (p.norm() + q.norm() + (sys.D * v).norm()) + 1e-30;
    CHECK(std::abs(lhs - rhs) <= 1e-8 * scale);
  }
}

TEST_CASE("nu and nu* are quadratic in their arguments") {
  CounterRng rng(6);
  Environment env = sampleEnvironment(checkerboard(), 1, 9);
  System sys = buildSystem(env);
  AltForm p = randomForm(2, 1, rng), q = randomForm(2, 1, rng);
  double nu1 = solveNu(sys, p).value, ns1 = solveNuStar(sys, q).value;
  for (double t : {2.0, -1.0, 0.5}) {
    CHECK(solveNu(sys, t * p).value == doctest::Approx(t * t * nu1).epsilon(1e-9));
    CHECK(solveNuStar(sys, t * q).value == doctest::Approx(t * t * ns1).epsilon(1e-9));
  }
}

TEST_CASE("uniform convexity surrogate in p and in q") {
  CounterRng rng(7);
  Environment env = sampleEnvironment(checkerboard(), 1, 21);
  System sys = buildSystem(env);
  for (int rep = 0; rep < 5; ++rep) {
    AltForm p1 = randomForm(2, 1, rng), p2 = randomForm(2, 1, rng), q = randomForm(2, 1, rng);
    AltForm mid = 0.5 * (p1 + p2);
    double gap = 0.5 * solveJ(sys, p1, q).J + 0.5 * solveJ(sys, p2, q).J - solveJ(sys, mid, q).J;
    double sep = (p1 - p2).coeffs.squaredNorm();
    CHECK(gap >= -1e-9);
    CHECK(gap <= sep / (8.0 * 0.25) + 1e-9);  // measured discrete constant 1/(8 lambda)
    AltForm q1 = randomForm(2, 1, rng), q2 = randomForm(2, 1, rng), pp = randomForm(2, 1, rng);
    AltForm qm = 0.5 * (q1 + q2);
    double gapQ = 0.5 * solveJ(sys, pp, q1).J + 0.5 * solveJ(sys, pp, q2).J - solveJ(sys, pp, qm).J;
    CHECK(gapQ >= -1e-9);
    CHECK(gapQ <= (q1 - q2).coeffs.squaredNorm() / (8.0 * 0.25) + 1e-9);
  }
}

TEST_CASE("subadditivity margins") {
  // constant env with q = a p: both sides vanish
  Eigen::MatrixXd M = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  Environment cenv = Environment::constant(Grid(2, 9), EnergyMatrix(2, 1, 0.25, M));
  AltForm p(2, 1, Eigen::Vector2d(1.0, -0.5));
  AltForm ap = hodgeStar(AltForm(2, 1, M * p.coeffs));
  CHECK(std::abs(subadditivityMargin(cenv, p, ap)) < 1e-9);
  // zero forms: margin exactly zero
  CHECK(subadditivityMargin(cenv, AltForm(2, 1), AltForm(2, 1)) == doctest::Approx(0.0));
  // random checkerboard: per-sample inequality
  CounterRng rng(8);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Environment env = sampleEnvironment(checkerboard(), 2, 300 + seed);
    AltForm pp = randomForm(2, 1, rng), qq = randomForm(2, 1, rng);
    CHECK(subadditivityMargin(env, pp, qq) >= -1e-8);
  }
}

TEST_CASE("quadratic response sandwich") {
  CounterRng rng(9);
  Environment env = sampleEnvironment(checkerboard(), 1, 33);
  System sys = buildSystem(env);
  AltForm p = randomForm(2, 1, rng), q = randomForm(2, 1, rng);
  JBundle jb = solveJ(sys, p, q);
  // w = v: middle ~ 0
  Cochain v(env.grid, 0, jb.vP.values + jb.vQ.values);
  QuadraticResponse at_v = quadraticResponse(sys, p, q, v);
  CHECK(std::abs(at_v.middle) < 1e-9);
  CHECK(at_v.lowerOk);
  CHECK(at_v.upperOk);
  // w = 0: middle = J
  Cochain zero(env.grid, 0);
  QuadraticResponse at_0 = quadraticResponse(sys, p, q, zero);
  CHECK(at_0.middle == doctest::Approx(jb.J).epsilon(1e-9));
  CHECK(at_0.lowerOk);
  CHECK(at_0.upperOk);
  // random probe solutions
  for (int t = 0; t < 10; ++t) {
    Cochain w = probeSolution(sys, 900 + t);
    QuadraticResponse qr = quadraticResponse(sys, p, q, w);
    CHECK(qr.middle >= -1e-9);
    CHECK(qr.lowerOk);
    CHECK(qr.upperOk);
  }
  // non-solutions are rejected
  Cochain junk(env.grid, 0);
  junk.values.setConstant(1.0);
  junk.values(5) = 5.0;  // interior vertex spike
  CHECK_THROWS(quadraticResponse(sys, p, q, junk));
}

TEST_CASE("optimizer control: child gradient gaps bounded by the margin") {
  CounterRng rng(10);
  Environment env = sampleEnvironment(checkerboard(), 2, 44);
  System sys = buildSystem(env);
  AltForm p = randomForm(2, 1, rng), q = randomForm(2, 1, rng);
  JBundle parent = solveJ(sys, p, q);
  Eigen::VectorXd vParent = parent.vP.values + parent.vQ.values;
  double margin = 0.0, gaps = 0.0;
  int child = env.grid.side / 3;
  Environment unitChild =
      Environment::constant(Grid(2, child), energyMatrixOfStar(2, 1, 1.0, 0.25));
  SpMat G1c = faceEnergy(unitChild);
  for (int bx = 0; bx < 3; ++bx)
    for (int by = 0; by < 3; ++by) {
      Pos off{bx * child, by * child, 0, 0};
      Environment sub = env.restrictTo(off, child);
      System subSys = buildSystem(sub);
      JBundle jc = solveJ(subSys, p, q);
      margin += jc.J / 9.0;
      Eigen::VectorXd vRestr = restrictFaceValues(env.grid, 0, vParent, off, sub.grid);
      Eigen::VectorXd dDiff = subSys.D * (vRestr - jc.vP.values - jc.vQ.values);
      gaps += dDiff.dot(G1c * dDiff) / subSys.volume / 9.0;
    }
  margin -= parent.J;
  CHECK(gaps <= (2.0 / 0.25) * margin + 1e-9);
}

TEST_CASE("all reported values are invariant under adding closed forms") {
  CounterRng rng(11);
  Environment env = sampleEnvironment(iidSpd(2, 2), 1, 55);  // r = 2: solutions are 1-cochains
  System sys = buildSystem(env);
  AltForm p = randomForm(2, 2, rng), q = randomForm(2, 0, rng);
  JBundle jb = solveJ(sys, p, q);
  Eigen::VectorXd v = jb.vP.values + jb.vQ.values;
  // closed 1-cochain: coboundary of a random 0-cochain
  Eigen::VectorXd w0(env.grid.faceCount(0));
  for (long i = 0; i < w0.size(); ++i) w0(i) = rng.uniform(-1.0, 1.0);
  Eigen::VectorXd closed = coboundaryMatrix(env.grid, 0) * w0;
  double f0 = functionalAt(sys, p, q, v);
  double f1 = functionalAt(sys, p, q, v + closed);
  CHECK(f0 == doctest::Approx(f1).epsilon(1e-12));
  CHECK((sys.D * closed).norm() < 1e-13);  // du unchanged up to rounding
  // cube means of dv unchanged
  CellField a = cellAverages(env.grid, 2, sys.D * v);
  CellField b = cellAverages(env.grid, 2, sys.D * (v + closed));
  CHECK((cubeMean(a).coeffs - cubeMean(b).coeffs).norm() < 1e-13);
}

TEST_CASE("gauge projection removes exactly the closed part") {
  Environment env = sampleEnvironment(iidSpd(2, 2), 1, 66);
  System sys = buildSystem(env);
  CounterRng rng(12);
  // closed interior 1-cochain: coboundary of an interior-supported 0-cochain
  BoundaryMask b0 = boundaryMask(env.grid, 0);
  Eigen::VectorXd w0 = Eigen::VectorXd::Zero(env.grid.faceCount(0));
  for (long i = 0; i < w0.size(); ++i)
    if (!b0.flags[i]) w0(i) = rng.uniform(-1.0, 1.0);
  // edges inside the boundary connect boundary vertices, so this coboundary
  // is interior-supported and closed
  Eigen::VectorXd closed = coboundaryMatrix(env.grid, 0) * w0;
  CHECK(gaugeFixedL2(sys, closed) < 1e-10);

  Eigen::VectorXd delta = Eigen::VectorXd::Zero(env.grid.faceCount(1));
  for (long f = 0; f < delta.size(); ++f)
    if (!sys.bnd.flags[f]) delta(f) = rng.uniform(-1.0, 1.0);
  double base = gaugeFixedL2(sys, delta);
  CHECK(base > 0.0);
  CHECK(gaugeFixedL2(sys, (delta + closed).eval()) == doctest::Approx(base).epsilon(1e-10));
}

TEST_CASE("J on the 9x9 cube matches direct maximization over the solution space") {
  Environment env = sampleEnvironment(checkerboard(), 2, 4242);
  System sys = buildSystem(env);
  AltForm p = AltForm::basis(2, 1, 0), q = AltForm::basis(2, 1, 0);
  double jRef = oracle::denseJDirect(env, p, q);
  CHECK(solveJ(sys, p, q).J == doctest::Approx(jRef).epsilon(1e-8));
}

TEST_CASE("nustar load consistency check rejects a corrupted system") {
  Environment env = sampleEnvironment(iidSpd(2, 1), 1, 77);
  System sys = buildSystem(env);
  CHECK_NOTHROW(solveNuStar(sys, AltForm::basis(2, 1, 0)));
}

TEST_CASE("nu and nu* obey the measured two-sided bounds") {
  CounterRng rng(44);
  Environment env = sampleEnvironment(checkerboard(), 2, 123);
  System sys = buildSystem(env);
  for (int rep = 0; rep < 5; ++rep) {
    AltForm p = randomForm(2, 1, rng), q = randomForm(2, 1, rng);
    double nu = solveNu(sys, p).value;
    double ns = solveNuStar(sys, q).value;
    double p2 = p.coeffs.squaredNorm(), q2 = q.coeffs.squaredNorm();
    // discrete Stokes pins the mean of du, so 0.5 lambda |p|^2 <= nu <= |p|^2 / (2 lambda)
    CHECK(nu >= 0.5 * 0.25 * p2 - 1e-10);
    CHECK(nu <= 0.5 / 0.25 * p2 + 1e-10);
    CHECK(ns >= 0.5 * 0.25 * q2 - 1e-10);
    CHECK(ns <= 0.5 / 0.25 * q2 + 1e-10);
  }
}
