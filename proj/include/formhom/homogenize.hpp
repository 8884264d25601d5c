#ifndef FORMHOM_HOMOGENIZE_HPP
#define FORMHOM_HOMOGENIZE_HPP

#include "formhom/solver.hpp"

namespace formhom {

/// Monte Carlo estimate of the level-m homogenized energy matrix.
struct AhomEstimate {
  int dim = 0;
  int degree = 0;
  Eigen::MatrixXd matrix;   // symmetric C(d,r) x C(d,r)
  Eigen::MatrixXd stderr_;  // per-entry jackknife standard error
  int nsamples = 0;
  int m = 0;
  std::uint64_t seed = 0;
  double conditionNumber = 0.0;
  bool spectrumOk = true;  // spectrum within [lambda, 1/lambda] up to 3 stderr

  EnergyMatrix asEnergyMatrix(double lambda) const;
  /// ahom^{-1} q as an r-form (coefficient map through the sign pairing)
  AltForm applyInverseMap(const AltForm& q) const;
  /// ahom p as a (d-r)-form
  AltForm applyMap(const AltForm& p) const;
};

/// Basis solves for one environment: the Gram matrices of nu and nu* over the
/// canonical form bases (every J(p,q) of this sample is a quadratic read-off)
/// and the cube means of the nu*-maximizer gradients (the ahom estimator).
struct BasisSolves {
  Eigen::MatrixXd nuGram;      // nu(p) = 1/2 p^T nuGram p
  Eigen::MatrixXd nuStarGram;  // nu*(q) = 1/2 q^T nuStarGram q
  Eigen::MatrixXd meanDv;      // column K: cube mean of dv(.,cube,0,dx_K)
  std::vector<CellField> dirichletFields;  // dv(., e_i, 0) when kept
  std::vector<CellField> neumannFields;    // dv(., 0, dx_K) when kept
  long iterations = 0;
};

BasisSolves basisSolves(const Environment& env, const SolverOptions& opts, bool keepFields,
                        bool nuSide = true);

/// J(cube,p,q) of one sample from its Gram matrices.
double jFromGrams(const BasisSolves& bs, const AltForm& p, const AltForm& q);

std::uint64_t sampleSeed(std::uint64_t seed, long sampleIndex);

/// ahom_m from nsamples independent environments (basis nu* solves, cube
/// means, sign pairing, symmetrization, inversion).  Throws if the mean
/// matrix is conditioned worse than 1e8.
AhomEstimate estimateAhom(const EnsembleSpec& spec, int m, int nsamples, std::uint64_t seed,
                          int threads = 1, const SolverOptions& opts = {});

/// Rate fit of log D_n against n log 3 (entries n = 0,1 dropped).
struct RateFit {
  double alpha = 0.0;
  double intercept = 0.0;
  double rSquared = 0.0;
  int nFirst = 0, nLast = 0;
  bool allZero = false;  // alpha reported as +infinity sentinel
};

RateFit fitRate(const std::vector<double>& D);

/// D_m, tau_n and the per-level estimates; per-sample J values for the
/// basis directions are retained for stochastic-integrability calibration.
struct SequenceResult {
  std::vector<double> D, Dstderr;
  std::vector<double> tau, tauStderr;
  std::vector<AhomEstimate> ahomPerLevel;
  // per level, per sample: J(cube_n, e_i, ahom_n e_i) summed over i
  std::vector<std::vector<double>> jSamplesPerLevel;
  // per level, per sample, per basis direction: nu and nu* values
  std::vector<Eigen::MatrixXd> nuValues;      // level -> nsamples x C
  std::vector<Eigen::MatrixXd> nuStarValues;  // level -> nsamples x C
  std::vector<std::vector<BasisSolves>> grams;  // retained per level
};

SequenceResult computeSequences(const EnsembleSpec& spec, int mMax, int nsamples, std::uint64_t seed,
                                int threads = 1, const SolverOptions& opts = {});

/// Duality experiment: ahom of the ensemble vs ahom of the inverted
/// environments with paired seeds, plus the per-sample exchange residual
/// |J_inv(cube,p,q) - J(cube,q,p)| averaged over basis pairs.
struct DualityReport {
  AhomEstimate primal;
  AhomEstimate inverse;
  double deviationOpNorm = 0.0;  // || inv-ahom - (ahom)^{-1} ||_op
  double exchangeResidualMean = 0.0;
  double exchangeResidualStderr = 0.0;
};

DualityReport verifyDuality(const EnsembleSpec& spec, int m, int nsamples, std::uint64_t seed,
                            int threads = 1, const SolverOptions& opts = {});

/// Sample means of the scaled multiscale-surrogate norms of
/// dv - (ahom^{-1} q - p) and a dv - (q - ahom p) on the level-m cube.
struct FlatnessResult {
  double gradTermMean = 0.0, gradTermStderr = 0.0;
  double fluxTermMean = 0.0, fluxTermStderr = 0.0;
};

FlatnessResult flatnessCheck(const EnsembleSpec& spec, int m, const AltForm& p, const AltForm& q,
                             const AhomEstimate& ahomRef, int nsamples, std::uint64_t seed,
                             int threads = 1, const SolverOptions& opts = {});

/// Smallest C with mean exp((X_+/C)^s) <= 2, bisected to 1e-6 relative.
struct OsCalibration {
  double C = 0.0;
  double s = 1.0;
  int nsamples = 0;
  bool allZero = false;
};

OsCalibration osCalibrate(const std::vector<double>& samples, double s = 1.0);

}  // namespace formhom

#endif
