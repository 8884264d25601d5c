#ifndef FORMHOM_DIRICHLET_HPP
#define FORMHOM_DIRICHLET_HPP

#include "formhom/homogenize.hpp"

namespace formhom {

/// d(a du) = 0 with prescribed tangential (boundary-face) data.  The solution
/// cochain is unique only modulo closed forms; consumers use du or the
/// gauge-fixed norms.
struct DirichletProblem {
  Environment env;
  Cochain boundaryData;  // full-length (r-1)-cochain; only boundary faces are read
  SolverOptions opts;
};

SolveReport solveDirichlet(const DirichletProblem& problem);

/// Homogenization error of the Dirichlet problem: for each eps = 3^{-k} the
/// heterogeneous and constant-ahom solutions on the unit cube at the eps-cell
/// resolution, the gauge-fixed L2 distance, the multiscale surrogate of the
/// weak-norm gradient distance, and the two-scale expansion diagnostic.
struct TwoScaleReport {
  std::vector<double> epsList;
  std::vector<double> l2Errors;
  std::vector<double> hminus1Errors;
  std::vector<double> correctorEnergyErrors;  // || du_eps - d w_eps ||_L2 diagnostic
  double fittedRate = 0.0;                    // log-log slope of the L2 errors
  double fittedRateHminus1 = 0.0;
  int samplesPerEps = 0;
};

/// `epsKList` holds the exponents k (eps = 3^{-k}).  Boundary data is an
/// affine or quadratic (r-1)-form field on the unit cube.
TwoScaleReport twoScaleError(const EnsembleSpec& spec, const std::vector<int>& epsKList,
                             const PolyFormField& f, std::uint64_t seed, const AhomEstimate& ahomRef,
                             int samplesPerEps = 1, int threads = 1, const SolverOptions& opts = {});

/// Caccioppoli diagnostic: ratio ||du||_{L2(V)} / ||u - z*||_{L2(U\V)} over
/// random probe solutions, V a concentric sub-cube, z* the best global closed
/// approximation on U\V.
struct CaccioppoliReport {
  std::vector<double> ratios;
  double maxRatio = 0.0;
  double meanRatio = 0.0;
  double distVBoundary = 0.0;  // dist(V, boundary of U)
};

CaccioppoliReport caccioppoliDiag(const Environment& env, double vFraction, int probes,
                                  std::uint64_t seed, const SolverOptions& opts = {});

}  // namespace formhom

#endif
