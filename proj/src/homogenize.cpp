#include "formhom/homogenize.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

#include "formhom/parallel.hpp"
#include "formhom/rng.hpp"

namespace formhom {

namespace {

Eigen::VectorXd pairingVec(const AltForm& q) {
  // (Pi q)_I = sigma(I) q_{I^c} = (-1)^{r(d-r)} (star q) in coefficients
  int d = q.dim, r = d - q.degree;
  AltForm h = hodgeStar(q);
  double sign = ((r * (d - r)) % 2 == 0) ? 1.0 : -1.0;
  return sign * h.coeffs;
}

double opNorm(const Eigen::MatrixXd& M) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues()(0);
}

double sampleStderr(const std::vector<double>& xs) {
  std::size_t n = xs.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= double(n);
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= double(n - 1);
  return std::sqrt(var / double(n));
}

double sampleMean(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  return xs.empty() ? 0.0 : mean / double(xs.size());
}

// ahom from the sample list of mean-dv matrices, with jackknife errors
AhomEstimate ahomFromMeanDv(const std::vector<Eigen::MatrixXd>& meanDvs, int d, int r, double lambda,
                            int m, std::uint64_t seed) {
  int n = static_cast<int>(meanDvs.size());
  int c = binom(d, r);
  Eigen::MatrixXd H = hodgeMatrix(d, r);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(c, c);
  for (const auto& g : meanDvs) sum += g;
  auto ahomOf = [&](const Eigen::MatrixXd& ginv) {
    Eigen::MatrixXd mi = ginv * H;
    mi = 0.5 * (mi + mi.transpose().eval());
    return mi;
  };
  Eigen::MatrixXd minv = ahomOf(sum / double(n));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(minv, Eigen::EigenvaluesOnly);
  double emin = es.eigenvalues().cwiseAbs().minCoeff();
  double emax = es.eigenvalues().cwiseAbs().maxCoeff();
  AhomEstimate out;
  out.dim = d;
  out.degree = r;
  out.nsamples = n;
  out.m = m;
  out.seed = seed;
  out.conditionNumber = emin > 0 ? emax / emin : std::numeric_limits<double>::infinity();
  if (out.conditionNumber > 1e8)
    throw std::runtime_error("estimateAhom: mean-gradient matrix conditioned worse than 1e8");
  out.matrix = minv.inverse();
  out.matrix = 0.5 * (out.matrix + out.matrix.transpose().eval());
  // jackknife over samples
  out.stderr_ = Eigen::MatrixXd::Zero(c, c);
  if (n >= 2) {
    std::vector<Eigen::MatrixXd> loo(n);
    Eigen::MatrixXd jkMean = Eigen::MatrixXd::Zero(c, c);
    for (int s = 0; s < n; ++s) {
      Eigen::MatrixXd mi = ahomOf((sum - meanDvs[s]) / double(n - 1));
      loo[s] = mi.inverse();
      jkMean += loo[s];
    }
    jkMean /= double(n);
    Eigen::MatrixXd var = Eigen::MatrixXd::Zero(c, c);
    for (int s = 0; s < n; ++s) var += (loo[s] - jkMean).cwiseAbs2();
    out.stderr_ = (var * double(n - 1) / double(n)).cwiseSqrt();
  }
  double scale = opNorm(out.stderr_);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es2(out.matrix, Eigen::EigenvaluesOnly);
  out.spectrumOk = es2.eigenvalues().minCoeff() >= lambda - 3.0 * scale - 1e-12 &&
                   es2.eigenvalues().maxCoeff() <= 1.0 / lambda + 3.0 * scale + 1e-12;
  return out;
}

}  // namespace

EnergyMatrix AhomEstimate::asEnergyMatrix(double lambda) const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(matrix, Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  if (lo <= 0.0) throw std::runtime_error("AhomEstimate: matrix not positive definite");
  double lam = std::min({lambda, lo * (1.0 - 1e-9), 1.0 / (hi * (1.0 + 1e-9))});
  lam = std::min(lam, 1.0);
  return EnergyMatrix(dim, degree, lam, matrix);
}

AltForm AhomEstimate::applyInverseMap(const AltForm& q) const {
  return AltForm(dim, degree, matrix.ldlt().solve(pairingVec(q)));
}

AltForm AhomEstimate::applyMap(const AltForm& p) const {
  return hodgeStar(AltForm(dim, degree, matrix * p.coeffs));
}

std::uint64_t sampleSeed(std::uint64_t seed, long sampleIndex) {
  return CounterRng::key(seed, 0x5A3173ULL, sampleIndex);
}

BasisSolves basisSolves(const Environment& env, const SolverOptions& opts, bool keepFields,
                        bool nuSide) {
  System sys = buildSystem(env);
  const Grid& g = env.grid;
  int d = g.dim, r = env.degree;
  int c = binom(d, r);
  BasisSolves bs;
  bs.nuGram.resize(c, c);
  bs.nuStarGram.resize(c, c);
  bs.meanDv.resize(c, c);
  std::vector<Eigen::VectorXd> us(c), vs(c), loads(c);
  if (nuSide)
    for (int i = 0; i < c; ++i) {
      SolveReport rep = solveNu(sys, AltForm::basis(d, r, i), opts);
      bs.iterations += rep.iterations;
      us[i] = std::move(rep.maximizer.values);
      if (keepFields) bs.dirichletFields.push_back(cellAverages(g, r, sys.D * us[i]));
    }
  for (int k = 0; k < c; ++k) {
    AltForm q = AltForm::basis(d, d - r, k);
    SolveReport rep = solveNuStar(sys, q, opts);
    bs.iterations += rep.iterations;
    vs[k] = std::move(rep.maximizer.values);
    loads[k] = pairingLoad(g, r, q);
    CellField f = cellAverages(g, r, sys.D * vs[k]);
    bs.meanDv.col(k) = cubeMean(f).coeffs;
    if (keepFields) bs.neumannFields.push_back(std::move(f));
  }
  if (nuSide)
    for (int i = 0; i < c; ++i) {
      Eigen::VectorXd Aui = sys.A * us[i];
      for (int j = 0; j < c; ++j) bs.nuGram(i, j) = us[j].dot(Aui) / sys.volume;
    }
  else
    bs.nuGram.setZero();
  for (int k = 0; k < c; ++k)
    for (int l = 0; l < c; ++l) bs.nuStarGram(k, l) = loads[k].dot(sys.D * vs[l]) / sys.volume;
  bs.nuGram = 0.5 * (bs.nuGram + bs.nuGram.transpose().eval());
  bs.nuStarGram = 0.5 * (bs.nuStarGram + bs.nuStarGram.transpose().eval());
  return bs;
}

double jFromGrams(const BasisSolves& bs, const AltForm& p, const AltForm& q) {
  double nu = 0.5 * p.coeffs.dot(bs.nuGram * p.coeffs);
  double nustar = 0.5 * q.coeffs.dot(bs.nuStarGram * q.coeffs);
  return nu + nustar - starWedgeScalar(p, q);
}

AhomEstimate estimateAhom(const EnsembleSpec& spec, int m, int nsamples, std::uint64_t seed,
                          int threads, const SolverOptions& opts) {
  if (nsamples < 2) throw std::invalid_argument("estimateAhom: nsamples >= 2 required");
  std::vector<Eigen::MatrixXd> meanDvs(nsamples);
  parallelFor(nsamples, threads, [&](std::size_t s) {
    Environment env = sampleEnvironment(spec, m, sampleSeed(seed, s));
    meanDvs[s] = basisSolves(env, opts, false, false).meanDv;
  });
  return ahomFromMeanDv(meanDvs, spec.dim, spec.degree, spec.lambda, m, seed);
}

RateFit fitRate(const std::vector<double>& D) {
  RateFit fit;
  std::vector<double> xs, ys;
  for (std::size_t n = 2; n < D.size(); ++n) {
    if (D[n] > 0.0) {
      xs.push_back(double(n));
      ys.push_back(std::log(D[n]));
      if (fit.nFirst == 0) fit.nFirst = static_cast<int>(n);
      fit.nLast = static_cast<int>(n);
    }
  }
  if (xs.empty()) {
    fit.allZero = true;
    fit.alpha = std::numeric_limits<double>::infinity();
    return fit;
  }
  if (xs.size() < 3) throw std::invalid_argument("fitRate: need >= 3 positive entries beyond n = 1");
  double n = double(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    syy += ys[i] * ys[i];
  }
  double denom = n * sxx - sx * sx;
  double slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - slope * sx) / n;
  fit.alpha = -slope / std::log(3.0);
  double ssTot = syy - sy * sy / n;
  double ssRes = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double e = ys[i] - (fit.intercept + slope * xs[i]);
    ssRes += e * e;
  }
  fit.rSquared = ssTot > 0 ? 1.0 - ssRes / ssTot : 1.0;
  return fit;
}

SequenceResult computeSequences(const EnsembleSpec& spec, int mMax, int nsamples, std::uint64_t seed,
                                int threads, const SolverOptions& opts) {
  if (mMax < 1) throw std::invalid_argument("computeSequences: mMax >= 1 required");
  int d = spec.dim, r = spec.degree;
  int c = binom(d, r);
  SequenceResult res;
  res.grams.resize(mMax + 1);
  res.nuValues.resize(mMax + 1);
  res.nuStarValues.resize(mMax + 1);
  for (int n = 0; n <= mMax; ++n) {
    res.grams[n].resize(nsamples);
    std::uint64_t levelSeed = CounterRng::key(seed, 0x1E7E1ULL, n);
    parallelFor(nsamples, threads, [&](std::size_t s) {
      Environment env = sampleEnvironment(spec, n, sampleSeed(levelSeed, s));
      res.grams[n][s] = basisSolves(env, opts, false);
    });
    std::vector<Eigen::MatrixXd> meanDvs(nsamples);
    for (int s = 0; s < nsamples; ++s) meanDvs[s] = res.grams[n][s].meanDv;
    res.ahomPerLevel.push_back(ahomFromMeanDv(meanDvs, d, r, spec.lambda, n, levelSeed));
    res.nuValues[n].resize(nsamples, c);
    res.nuStarValues[n].resize(nsamples, c);
    for (int s = 0; s < nsamples; ++s)
      for (int i = 0; i < c; ++i) {
        res.nuValues[n](s, i) = 0.5 * res.grams[n][s].nuGram(i, i);
        res.nuStarValues[n](s, i) = 0.5 * res.grams[n][s].nuStarGram(i, i);
      }
    // D_n = sum_i E[ J(cube_n, e_i, ahom_n e_i) ]
    std::vector<double> jsum(nsamples, 0.0);
    for (int s = 0; s < nsamples; ++s)
      for (int i = 0; i < c; ++i) {
        AltForm ei = AltForm::basis(d, r, i);
        jsum[s] += jFromGrams(res.grams[n][s], ei, res.ahomPerLevel[n].applyMap(ei));
      }
    res.jSamplesPerLevel.push_back(jsum);
    res.D.push_back(sampleMean(jsum));
    res.Dstderr.push_back(sampleStderr(jsum));
  }
  // tau_n: basis-direction approximation of the sup of expected decrements
  for (int n = 0; n < mMax; ++n) {
    double bestNu = -std::numeric_limits<double>::infinity(), bestNuErr = 0.0;
    double bestNs = -std::numeric_limits<double>::infinity(), bestNsErr = 0.0;
    for (int i = 0; i < c; ++i) {
      double dNu = res.nuValues[n].col(i).mean() - res.nuValues[n + 1].col(i).mean();
      double dNs = res.nuStarValues[n].col(i).mean() - res.nuStarValues[n + 1].col(i).mean();
      auto colErr = [&](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
        std::vector<double> xa(a.col(i).data(), a.col(i).data() + a.rows());
        std::vector<double> xb(b.col(i).data(), b.col(i).data() + b.rows());
        double ea = sampleStderr(xa), eb = sampleStderr(xb);
        return std::sqrt(ea * ea + eb * eb);
      };
      if (dNu > bestNu) {
        bestNu = dNu;
        bestNuErr = colErr(res.nuValues[n], res.nuValues[n + 1]);
      }
      if (dNs > bestNs) {
        bestNs = dNs;
        bestNsErr = colErr(res.nuStarValues[n], res.nuStarValues[n + 1]);
      }
    }
    res.tau.push_back(bestNu + bestNs);
    res.tauStderr.push_back(std::sqrt(bestNuErr * bestNuErr + bestNsErr * bestNsErr));
  }
  return res;
}

DualityReport verifyDuality(const EnsembleSpec& spec, int m, int nsamples, std::uint64_t seed,
                            int threads, const SolverOptions& opts) {
  int d = spec.dim, r = spec.degree;
  if (r >= d) throw std::invalid_argument("verifyDuality: needs 1 <= r <= d-1");
  int c = binom(d, r);
  std::vector<Eigen::MatrixXd> primalDv(nsamples), inverseDv(nsamples);
  std::vector<double> exch(nsamples, 0.0);
  parallelFor(nsamples, threads, [&](std::size_t s) {
    Environment env = sampleEnvironment(spec, m, sampleSeed(seed, s));
    BasisSolves bp = basisSolves(env, opts, false);
    BasisSolves bi = basisSolves(invertEnv(env), opts, false);
    primalDv[s] = bp.meanDv;
    inverseDv[s] = bi.meanDv;
    // exchange identity J_inv(cube,p,q) = J(cube,q,p) over basis pairs,
    // with the dual pairing orientation star(q ^ p) in the cross term
    double acc = 0.0;
    for (int k = 0; k < c; ++k)
      for (int i = 0; i < c; ++i) {
        AltForm p = AltForm::basis(d, d - r, k);
        AltForm q = AltForm::basis(d, r, i);
        double jinv = 0.5 * p.coeffs.dot(bi.nuGram * p.coeffs) +
                      0.5 * q.coeffs.dot(bi.nuStarGram * q.coeffs) - starWedgeScalar(q, p);
        double jpr = jFromGrams(bp, q, p);
        acc += std::abs(jinv - jpr);
      }
    exch[s] = acc / double(c * c);
  });
  DualityReport rep;
  rep.primal = ahomFromMeanDv(primalDv, d, r, spec.lambda, m, seed);
  rep.inverse = ahomFromMeanDv(inverseDv, d, d - r, spec.lambda, m, seed);
  rep.deviationOpNorm = opNorm(rep.inverse.matrix - invertEnergyMatrixRaw(rep.primal.matrix, d, r));
  rep.exchangeResidualMean = sampleMean(exch);
  rep.exchangeResidualStderr = sampleStderr(exch);
  return rep;
}

FlatnessResult flatnessCheck(const EnsembleSpec& spec, int m, const AltForm& p, const AltForm& q,
                             const AhomEstimate& ahomRef, int nsamples, std::uint64_t seed,
                             int threads, const SolverOptions& opts) {
  int d = spec.dim, r = spec.degree;
  int c = binom(d, r);
  AltForm gradTarget = ahomRef.applyInverseMap(q) - p;          // ahom^{-1} q - p
  AltForm fluxTarget = q - ahomRef.applyMap(p);                 // q - ahom p
  std::vector<double> gradTerm(nsamples), fluxTerm(nsamples);
  double scale = std::pow(3.0, -m);
  parallelFor(nsamples, threads, [&](std::size_t s) {
    Environment env = sampleEnvironment(spec, m, sampleSeed(seed, s));
    BasisSolves bs = basisSolves(env, opts, true);
    CellField dv(env.grid, r);
    for (int i = 0; i < c; ++i)
      if (p.coeffs(i) != 0.0) dv.values += p.coeffs(i) * bs.dirichletFields[i].values;
    for (int k = 0; k < c; ++k)
      if (q.coeffs(k) != 0.0) dv.values += q.coeffs(k) * bs.neumannFields[k].values;
    CellField flux = fluxField(env, dv);
    CellField g1 = dv;
    g1.values.rowwise() -= gradTarget.coeffs.transpose();
    CellField g2 = flux;
    g2.values.rowwise() -= fluxTarget.coeffs.transpose();
    gradTerm[s] = scale * multiscaleSeminorm(g1);
    fluxTerm[s] = scale * multiscaleSeminorm(g2);
  });
  FlatnessResult res;
  res.gradTermMean = sampleMean(gradTerm);
  res.gradTermStderr = sampleStderr(gradTerm);
  res.fluxTermMean = sampleMean(fluxTerm);
  res.fluxTermStderr = sampleStderr(fluxTerm);
  return res;
}

OsCalibration osCalibrate(const std::vector<double>& samples, double s) {
  if (samples.size() < 10) throw std::invalid_argument("osCalibrate: need >= 10 samples");
  if (s <= 0.0) throw std::invalid_argument("osCalibrate: exponent must be positive");
  OsCalibration cal;
  cal.s = s;
  cal.nsamples = static_cast<int>(samples.size());
  double mx = 0.0;
  for (double x : samples) mx = std::max(mx, x);
  if (mx <= 0.0) {
    cal.allZero = true;
    cal.C = 0.0;
    return cal;
  }
  auto meanExp = [&](double C) {
    double acc = 0.0;
    for (double x : samples) {
      double xp = std::max(x, 0.0);
      acc += std::exp(std::pow(xp / C, s));
    }
    return acc / double(samples.size());
  };
  // upper endpoint where every term is <= 2; bisect scale-equivariantly
  double hi = mx / std::pow(std::log(2.0), 1.0 / s);
  if (meanExp(hi) > 2.0) hi *= 2.0;  // guard against rounding at the corner
  double lo = hi * 0x1.0p-40;
  for (int it = 0; it < 80; ++it) {
    double mid = 0.5 * (lo + hi);
    if (meanExp(mid) <= 2.0)
      hi = mid;
    else
      lo = mid;
  }
  cal.C = hi;
  return cal;
}

}  // namespace formhom
