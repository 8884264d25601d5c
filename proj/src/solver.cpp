#include "formhom/solver.hpp"

#include <cmath>
#include <stdexcept>

#include "formhom/rng.hpp"

namespace formhom {

CgResult conjugateGradient(const SpMat& A, const Eigen::VectorXd& b, const Eigen::VectorXd& x0,
                           const SolverOptions& opts) {
  CgResult res;
  double bnorm = b.norm();
  if (bnorm == 0.0) {
    res.x = Eigen::VectorXd::Zero(A.rows());
    return res;
  }
  Eigen::VectorXd invDiag(A.rows());
  for (long i = 0; i < A.rows(); ++i) {
    double d = A.coeff(i, i);
    invDiag(i) = d > 0.0 ? 1.0 / d : 1.0;
  }
  Eigen::VectorXd x = x0;
  Eigen::VectorXd r = b - A * x;
  Eigen::VectorXd z = invDiag.cwiseProduct(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  long maxIter = opts.maxIters(A.rows());
  long it = 0;
  while (r.norm() > opts.tol * bnorm && it < maxIter) {
    Eigen::VectorXd Ap = A * p;
    double pAp = p.dot(Ap);
    if (pAp <= 0.0) break;  // kernel direction; consistent systems do not reach it
    double alpha = rz / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    z = invDiag.cwiseProduct(r);
    double rzNew = r.dot(z);
    p = z + (rzNew / rz) * p;
    rz = rzNew;
    ++it;
  }
  res.x = std::move(x);
  res.iterations = it;
  res.relResidual = (b - A * res.x).norm() / bnorm;
  res.converged = res.relResidual <= opts.tol * 10.0;
  return res;
}

System buildSystem(const Environment& env) {
  System sys;
  sys.env = env;
  const Grid& g = sys.env.grid;
  int r = env.degree;
  sys.D = coboundaryMatrix(g, r - 1);
  sys.A = stiffness(sys.env, sys.D);
  sys.bnd = boundaryMask(g, r - 1);
  sys.interior.reserve(g.faceCount(r - 1));
  for (long f = 0; f < g.faceCount(r - 1); ++f)
    if (!sys.bnd.flags[f]) sys.interior.push_back(f);
  // interior block
  std::vector<long> fullToInt(g.faceCount(r - 1), -1);
  for (std::size_t k = 0; k < sys.interior.size(); ++k) fullToInt[sys.interior[k]] = k;
  std::vector<Eigen::Triplet<double>> trips;
  for (int col = 0; col < sys.A.outerSize(); ++col) {
    if (fullToInt[col] < 0) continue;
    for (SpMat::InnerIterator it(sys.A, col); it; ++it) {
      if (fullToInt[it.row()] < 0) continue;
      trips.emplace_back(fullToInt[it.row()], fullToInt[col], it.value());
    }
  }
  sys.Aii.resize(sys.interior.size(), sys.interior.size());
  sys.Aii.setFromTriplets(trips.begin(), trips.end());
  sys.volume = std::pow(g.side * g.spacing, g.dim);
  return sys;
}

namespace {

Eigen::VectorXd gatherInterior(const System& sys, const Eigen::VectorXd& full) {
  Eigen::VectorXd out(sys.interior.size());
  for (std::size_t k = 0; k < sys.interior.size(); ++k) out(k) = full(sys.interior[k]);
  return out;
}

void scatterInterior(const System& sys, const Eigen::VectorXd& interior, Eigen::VectorXd& full) {
  for (std::size_t k = 0; k < sys.interior.size(); ++k) full(sys.interior[k]) = interior(k);
}

// solve with prescribed boundary values; `guessFull` supplies the interior start
SolveReport dirichletCore(const System& sys, const Eigen::VectorXd& boundaryFull,
                          const Eigen::VectorXd* guessFull, const SolverOptions& opts) {
  const Grid& g = sys.env.grid;
  long nf = g.faceCount(sys.solDegree());
  Eigen::VectorXd ext = Eigen::VectorXd::Zero(nf);
  for (long f = 0; f < nf; ++f)
    if (sys.bnd.flags[f]) ext(f) = boundaryFull(f);
  Eigen::VectorXd b = gatherInterior(sys, (-(sys.A * ext)).eval());
  Eigen::VectorXd x0 = guessFull ? gatherInterior(sys, *guessFull)
                                 : Eigen::VectorXd::Zero(sys.interior.size());
  CgResult cg = conjugateGradient(sys.Aii, b, x0, opts);
  if (!cg.converged) throw CgFailure("dirichlet solve: CG did not converge");
  Eigen::VectorXd full = ext;
  scatterInterior(sys, cg.x, full);
  SolveReport rep;
  rep.maximizer = Cochain(g, sys.solDegree(), std::move(full));
  rep.iterations = cg.iterations;
  rep.relativeResidual = cg.relResidual;
  return rep;
}

// (Pi q)_I = sigma(I) q_{I^c}: coefficient vector of the pairing functional
Eigen::VectorXd pairingVector(int d, int r, const AltForm& q) {
  SignTable st(d, r);
  Eigen::VectorXd w(binom(d, r));
  for (int i = 0; i < binom(d, r); ++i)
    w(i) = st(i) * q.coeffs(MultiIndex::fromRank(d, r, i).complement().rank());
  return w;
}

void checkLoadConsistency(const System& sys, const Eigen::VectorXd& b) {
  const Grid& g = sys.env.grid;
  int s = sys.solDegree();
  double bn = b.norm();
  if (bn == 0.0) return;
  if (s == 0) {
    if (std::abs(b.sum()) > 1e-8 * bn * std::sqrt(double(b.size())))
      throw std::runtime_error("nustar load inconsistent with constants kernel");
    return;
  }
  // pair against a few exact cocycles d(random (s-1)-cochain)
  SpMat Dlow = coboundaryMatrix(g, s - 1);
  CounterRng rng(0x5EEDCAFEu);
  for (int trial = 0; trial < 3; ++trial) {
    Eigen::VectorXd w(g.faceCount(s - 1));
    for (long i = 0; i < w.size(); ++i) w(i) = rng.uniform(-1.0, 1.0);
    Eigen::VectorXd z = Dlow * w;
    double zn = z.norm();
    if (zn == 0.0) continue;
    if (std::abs(z.dot(b)) > 1e-8 * zn * bn)
      throw std::runtime_error("nustar load inconsistent with closed-form kernel");
  }
}

}  // namespace

SolveReport solveNu(const System& sys, const AltForm& p, const SolverOptions& opts) {
  const Grid& g = sys.env.grid;
  if (p.degree != sys.env.degree) throw std::invalid_argument("solveNu: p must have the environment degree");
  AltForm minusP = -1.0 * p;
  Cochain gdat = interpolate(lpField(minusP), g);
  SolveReport rep = dirichletCore(sys, gdat.values, &gdat.values, opts);
  const Eigen::VectorXd& u = rep.maximizer.values;
  rep.value = 0.5 * u.dot(sys.A * u) / sys.volume;
  return rep;
}

SolveReport solveNuStar(const System& sys, const AltForm& q, const SolverOptions& opts) {
  const Grid& g = sys.env.grid;
  int d = g.dim, r = sys.env.degree;
  if (q.degree != d - r) throw std::invalid_argument("solveNuStar: q must have degree d-r");
  Eigen::VectorXd load = pairingLoad(g, r, q);
  Eigen::VectorXd b = sys.D.transpose() * load;
  checkLoadConsistency(sys, b);
  // affine initial guess from the mean coefficient matrix
  Eigen::VectorXd w = pairingVector(d, r, q);
  Eigen::VectorXd xstar = sys.env.meanMatrix().ldlt().solve(w);
  Cochain guess = interpolate(lpField(AltForm(d, r, xstar)), g);
  CgResult cg = conjugateGradient(sys.A, b, guess.values, opts);
  if (!cg.converged) throw CgFailure("nustar solve: CG did not converge");
  SolveReport rep;
  rep.value = (-0.5 * cg.x.dot(sys.A * cg.x) + load.dot(sys.D * cg.x)) / sys.volume;
  rep.maximizer = Cochain(g, r - 1, std::move(cg.x));
  rep.iterations = cg.iterations;
  rep.relativeResidual = cg.relResidual;
  return rep;
}

SolveReport solveDirichletValues(const System& sys, const Eigen::VectorXd& boundaryValues,
                                 const Eigen::VectorXd* initialGuess, const SolverOptions& opts) {
  return dirichletCore(sys, boundaryValues, initialGuess, opts);
}

JBundle solveJ(const System& sys, const AltForm& p, const AltForm& q, const SolverOptions& opts) {
  SolveReport nu = solveNu(sys, p, opts);
  SolveReport nustar = solveNuStar(sys, q, opts);
  JBundle out;
  out.nu = nu.value;
  out.nustar = nustar.value;
  out.pairing = starWedgeScalar(p, q);
  out.J = out.nu + out.nustar - out.pairing;
  out.vP = std::move(nu.maximizer);
  out.vQ = std::move(nustar.maximizer);
  out.iterations = nu.iterations + nustar.iterations;
  out.relativeResidual = std::max(nu.relativeResidual, nustar.relativeResidual);
  return out;
}

JBundle solveJInv(const System& invSys, const AltForm& p, const AltForm& q, const SolverOptions& opts) {
  // dual functional pairs with star(q ^ du): flip q by the wedge commutation
  // sign so the generic machinery computes the dual quantity
  int d = invSys.env.grid.dim, s = invSys.env.degree;
  double sign = ((s * (d - s)) % 2 == 0) ? 1.0 : -1.0;
  return solveJ(invSys, p, sign * q, opts);
}

double functionalAt(const System& sys, const AltForm& p, const AltForm& q, const Eigen::VectorXd& w) {
  const Grid& g = sys.env.grid;
  Eigen::VectorXd dw = sys.D * w;
  double quad = -0.5 * w.dot(sys.A * w);
  double mid = -energyPairConst(sys.env, p, dw);
  double lin = pairingLoad(g, sys.env.degree, q).dot(dw);
  return (quad + mid + lin) / sys.volume;
}

double subadditivityMargin(const Environment& env, const AltForm& p, const AltForm& q,
                           const SolverOptions& opts) {
  if (env.grid.side % 3 != 0) throw std::invalid_argument("subadditivityMargin: side must be divisible by 3");
  System parent = buildSystem(env);
  double jParent = solveJ(parent, p, q, opts).J;
  int child = env.grid.side / 3;
  double acc = 0.0;
  Pos off{};
  long nchild = 1;
  for (int a = 0; a < env.grid.dim; ++a) nchild *= 3;
  for (long c = 0; c < nchild; ++c) {
    long rem = c;
    for (int a = env.grid.dim - 1; a >= 0; --a) {
      off[a] = static_cast<int>(rem % 3) * child;
      rem /= 3;
    }
    System sub = buildSystem(env.restrictTo(off, child));
    acc += solveJ(sub, p, q, opts).J;
  }
  return acc / double(nchild) - jParent;
}

QuadraticResponse quadraticResponse(const System& sys, const AltForm& p, const AltForm& q,
                                    const Cochain& w, const SolverOptions& opts) {
  double res = interiorResidual(sys, w.values);
  if (res > 1e-6) throw std::invalid_argument("quadraticResponse: w does not solve the interior equations");
  JBundle jb = solveJ(sys, p, q, opts);
  QuadraticResponse out;
  out.middle = jb.J - functionalAt(sys, p, q, w.values);
  Eigen::VectorXd delta = w.values - jb.vP.values - jb.vQ.values;
  Environment unit = Environment::constant(sys.env.grid,
                                           energyMatrixOfStar(sys.env.grid.dim, sys.env.degree, 1.0,
                                                              sys.env.lambda));
  SpMat G1 = faceEnergy(unit);
  Eigen::VectorXd dd = sys.D * delta;
  out.gradGapSq = dd.dot(G1 * dd) / sys.volume;
  auto [lo, hi] = cellSpectrumBounds(sys.env);
  out.lowerConst = 0.5 * lo;
  out.upperConst = 0.5 * hi;
  double slack = 1e-9 * (1.0 + std::abs(out.middle));
  out.lowerOk = out.middle >= out.lowerConst * out.gradGapSq - slack;
  out.upperOk = out.middle <= out.upperConst * out.gradGapSq + slack;
  return out;
}

Cochain probeSolution(const System& sys, std::uint64_t seed, const SolverOptions& opts) {
  const Grid& g = sys.env.grid;
  long nf = g.faceCount(sys.solDegree());
  Eigen::VectorXd bvals = Eigen::VectorXd::Zero(nf);
  CounterRng rng(CounterRng::key(seed, 0x9B0BEu));
  for (long f = 0; f < nf; ++f)
    if (sys.bnd.flags[f]) bvals(f) = rng.uniform(-1.0, 1.0);
  return dirichletCore(sys, bvals, nullptr, opts).maximizer;
}

double interiorResidual(const System& sys, const Eigen::VectorXd& w) {
  Eigen::VectorXd Aw = sys.A * w;
  double num = gatherInterior(sys, Aw).norm();
  double scale = sys.A.diagonal().maxCoeff() * w.norm() + 1e-300;
  return num / scale;
}

double gaugeFixedL2(const System& sys, const Eigen::VectorXd& interiorDelta, const SolverOptions& opts) {
  const Grid& g = sys.env.grid;
  int s = sys.solDegree();
  if (interiorDelta.norm() == 0.0) return 0.0;
  Eigen::VectorXd mass = lumpedMass(g, s);
  Eigen::VectorXd minvMasked = Eigen::VectorXd::Zero(mass.size());
  for (long f = 0; f < mass.size(); ++f)
    if (!sys.bnd.flags[f]) minvMasked(f) = 1.0 / mass(f);
  SpMat B = sys.D * minvMasked.asDiagonal() * sys.D.transpose();
  Eigen::VectorXd rhs = sys.D * interiorDelta;
  if (rhs.norm() == 0.0) return 0.0;  // delta itself closed
  CgResult cg = conjugateGradient(B, rhs, Eigen::VectorXd::Zero(B.rows()), opts);
  if (!cg.converged) throw CgFailure("gauge projection: CG did not converge");
  double val = cg.x.dot(rhs);
  return std::sqrt(std::max(0.0, val) / sys.volume);
}

}  // namespace formhom
