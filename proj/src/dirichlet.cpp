#include "formhom/dirichlet.hpp"

#include <cmath>
#include <stdexcept>

#include "formhom/parallel.hpp"
#include "formhom/rng.hpp"

namespace formhom {

SolveReport solveDirichlet(const DirichletProblem& problem) {
  System sys = buildSystem(problem.env);
  if (problem.boundaryData.values.size() != sys.env.grid.faceCount(sys.solDegree()))
    throw std::invalid_argument("solveDirichlet: boundary data size mismatch");
  return solveDirichletValues(sys, problem.boundaryData.values, &problem.boundaryData.values,
                              problem.opts);
}

namespace {

double fitLogRate(const std::vector<double>& epsList, const std::vector<double>& errs) {
  // err ~ eps^rate: slope of log err against log eps
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < errs.size(); ++i)
    if (errs[i] > 0.0) {
      xs.push_back(std::log(epsList[i]));
      ys.push_back(std::log(errs[i]));
    }
  if (xs.size() < 2) return 0.0;
  double n = double(xs.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double cutoff(const Eigen::VectorXd& x, double l) {
  double dist = std::numeric_limits<double>::infinity();
  for (long a = 0; a < x.size(); ++a) dist = std::min({dist, x(a), 1.0 - x(a)});
  return std::min(1.0, std::max(0.0, dist / l - 1.0));
}

}  // namespace

TwoScaleReport twoScaleError(const EnsembleSpec& spec, const std::vector<int>& epsKList,
                             const PolyFormField& f, std::uint64_t seed, const AhomEstimate& ahomRef,
                             int samplesPerEps, int threads, const SolverOptions& opts) {
  int d = spec.dim, r = spec.degree;
  if (f.degree != r - 1) throw std::invalid_argument("twoScaleError: boundary data must have degree r-1");
  TwoScaleReport rep;
  rep.samplesPerEps = samplesPerEps;
  EnergyMatrix ahomEM = ahomRef.asEnergyMatrix(spec.lambda);

  for (int k : epsKList) {
    if (k < 1 || k > 7) throw std::invalid_argument("twoScaleError: eps exponent must be in 1..7");
    int side = 1;
    for (int i = 0; i < k; ++i) side *= 3;
    double eps = 1.0 / double(side);
    Grid gridEps(d, side, eps);
    Cochain fDat = interpolate(f, gridEps);

    Environment envHom = Environment::constant(gridEps, ahomEM);
    System sysHom = buildSystem(envHom);
    SolveReport u0 = solveDirichletValues(sysHom, fDat.values, &fDat.values, opts);
    CellField du0 = cellAverages(gridEps, r, sysHom.D * u0.maximizer.values);
    Eigen::MatrixXd du0AtFaces = faceAverages(du0, r - 1);

    // unit-scale grid for the correctors; same cells viewed at spacing 1
    std::uint64_t kSeed = CounterRng::key(seed, 0x25CA1EULL, k);
    std::vector<double> l2s(samplesPerEps), hm1s(samplesPerEps), cors(samplesPerEps);
    parallelFor(samplesPerEps, threads, [&](std::size_t j) {
      Environment envUnit = sampleEnvironmentSide(spec, side, sampleSeed(kSeed, j), 1.0);
      Environment envEps = envUnit.withSpacing(eps);
      System sysEps = buildSystem(envEps);
      SolveReport uE = solveDirichletValues(sysEps, fDat.values, &fDat.values, opts);

      Eigen::VectorXd delta = uE.maximizer.values - u0.maximizer.values;
      for (long ff = 0; ff < delta.size(); ++ff)
        if (sysEps.bnd.flags[ff]) delta(ff) = 0.0;  // equal data; guard rounding
      l2s[j] = gaugeFixedL2(sysEps, delta, opts);

      CellField duE = cellAverages(gridEps, r, sysEps.D * uE.maximizer.values);
      CellField gdiff = duE;
      gdiff.values -= du0.values;
      hm1s[j] = eps * multiscaleSeminorm(gdiff);

      // correctors at unit scale, one per basis direction of Lambda^r
      System sysUnit = buildSystem(envUnit);
      int c = binom(d, r);
      std::vector<Eigen::VectorXd> phi(c);
      for (int i = 0; i < c; ++i) {
        Cochain lp = interpolate(lpField(AltForm::basis(d, r, i)), envUnit.grid);
        phi[i] = solveDirichletValues(sysUnit, lp.values, &lp.values, opts).maximizer.values;
        phi[i] -= lp.values;  // oscillatory part phi - l_p; d(phi)+dx_I handled below
      }
      // two-scale expansion w = u0 + eps zeta_l sum_I (du0)_I phi_I(./eps)
      double l = std::sqrt(eps);
      double epsR = std::pow(eps, r);
      Eigen::VectorXd w = u0.maximizer.values;
      long nf = gridEps.faceCount(r - 1);
      for (long ff = 0; ff < nf; ++ff) {
        int ds;
        Pos pos;
        gridEps.faceDecode(r - 1, ff, ds, pos);
        double zeta = cutoff(gridEps.faceCenter(r - 1, ds, pos), l);
        if (zeta == 0.0) continue;
        double acc = 0.0;
        for (int i = 0; i < c; ++i) acc += du0AtFaces(ff, i) * phi[i](ff);
        w(ff) += epsR * zeta * acc;
      }
      Eigen::VectorXd dDiff = sysEps.D * (uE.maximizer.values - w);
      Environment unitCoeff = Environment::constant(
          gridEps, energyMatrixOfStar(d, r, 1.0, spec.lambda));
      SpMat G1 = faceEnergy(unitCoeff);
      cors[j] = std::sqrt(std::max(0.0, dDiff.dot(G1 * dDiff)) / sysEps.volume);
    });
    double l2 = 0.0, hm1 = 0.0, cor = 0.0;
    for (int j = 0; j < samplesPerEps; ++j) {
      l2 += l2s[j];
      hm1 += hm1s[j];
      cor += cors[j];
    }
    rep.epsList.push_back(eps);
    rep.l2Errors.push_back(l2 / samplesPerEps);
    rep.hminus1Errors.push_back(hm1 / samplesPerEps);
    rep.correctorEnergyErrors.push_back(cor / samplesPerEps);
  }
  rep.fittedRate = fitLogRate(rep.epsList, rep.l2Errors);
  rep.fittedRateHminus1 = fitLogRate(rep.epsList, rep.hminus1Errors);
  return rep;
}

CaccioppoliReport caccioppoliDiag(const Environment& env, double vFraction, int probes,
                                  std::uint64_t seed, const SolverOptions& opts) {
  if (vFraction <= 0.0 || vFraction >= 1.0)
    throw std::invalid_argument("caccioppoliDiag: V fraction must be in (0,1)");
  const Grid& g = env.grid;
  int N = g.side;
  int inset = std::max(1, static_cast<int>(std::lround(0.5 * N * (1.0 - vFraction))));
  if (N - 2 * inset < 1) throw std::invalid_argument("caccioppoliDiag: V fraction too small for grid");
  int s = env.degree - 1;

  std::vector<char> maskV(g.cellCount(), 0), maskOut(g.cellCount(), 0);
  Pos cell{};
  for (long c = 0; c < g.cellCount(); ++c) {
    g.cellDecode(c, cell);
    bool inV = true;
    for (int a = 0; a < g.dim; ++a)
      if (cell[a] < inset || cell[a] >= N - inset) inV = false;
    maskV[c] = inV;
    maskOut[c] = !inV;
  }
  System sys = buildSystem(env);
  Environment unit = Environment::constant(g, energyMatrixOfStar(g.dim, env.degree, 1.0, env.lambda));
  SpMat GV = faceEnergy(unit, &maskV);
  Eigen::VectorXd massOut = lumpedMass(g, s, &maskOut);

  SpMat DlowT, Blow;  // gauge system for s >= 1
  if (s >= 1) {
    SpMat Dlow = coboundaryMatrix(g, s - 1);
    DlowT = Dlow;
    Blow = Dlow.transpose() * massOut.asDiagonal() * Dlow;
  }

  CaccioppoliReport rep;
  rep.distVBoundary = inset * g.spacing;
  for (int j = 0; j < probes; ++j) {
    Cochain u = probeSolution(sys, CounterRng::key(seed, 0xCACC10ULL, j), opts);
    Eigen::VectorXd du = sys.D * u.values;
    double num = std::sqrt(std::max(0.0, du.dot(GV * du)));
    Eigen::VectorXd res = u.values;
    if (s == 0) {
      double total = massOut.sum();
      double mean = massOut.dot(u.values) / total;
      res.array() -= mean;
    } else {
      Eigen::VectorXd rhs = DlowT.transpose() * massOut.asDiagonal() * u.values;
      CgResult cg = conjugateGradient(Blow, rhs, Eigen::VectorXd::Zero(Blow.rows()), opts);
      res -= DlowT * cg.x;
    }
    double den = std::sqrt(res.dot(massOut.asDiagonal() * res));
    rep.ratios.push_back(den > 1e-14 ? num / den : 0.0);
  }
  for (double x : rep.ratios) {
    rep.maxRatio = std::max(rep.maxRatio, x);
    rep.meanRatio += x;
  }
  if (!rep.ratios.empty()) rep.meanRatio /= double(rep.ratios.size());
  return rep;
}

}  // namespace formhom
