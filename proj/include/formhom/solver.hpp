#ifndef FORMHOM_SOLVER_HPP
#define FORMHOM_SOLVER_HPP

#include <cstdint>

#include "formhom/assembly.hpp"

namespace formhom {

struct SolverOptions {
  double tol = 1e-10;       // relative residual
  long maxIterExtra = 1000; // max iterations = 50 sqrt(#dof) + extra
  long maxIters(long dof) const { return static_cast<long>(50.0 * std::sqrt(double(dof))) + maxIterExtra; }
};

struct CgResult {
  Eigen::VectorXd x;
  long iterations = 0;
  double relResidual = 0.0;
  bool converged = true;
};

/// Jacobi-preconditioned CG.  Works on consistent singular SPD systems; the
/// kernel component of the iterate is whatever the Krylov space produces, so
/// callers must consume solutions only through their coboundary or through
/// gauge-fixed norms.
CgResult conjugateGradient(const SpMat& A, const Eigen::VectorXd& b, const Eigen::VectorXd& x0,
                           const SolverOptions& opts);

struct CgFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Assembled problem for one environment: coboundary, stiffness, boundary
/// bookkeeping.  Shared by every solve against the same environment.
struct System {
  Environment env;
  SpMat D;                    // coboundary (r-1) -> r
  SpMat A;                    // stiffness on (r-1)-cochains
  BoundaryMask bnd;           // boundary (r-1)-faces
  std::vector<long> interior; // interior (r-1)-face indices
  SpMat Aii;                  // interior block
  double volume = 0.0;

  int solDegree() const { return env.degree - 1; }
  long dof() const { return A.rows(); }
};

System buildSystem(const Environment& env);

struct SolveReport {
  double value = 0.0;
  Cochain maximizer;
  long iterations = 0;
  double relativeResidual = 0.0;
};

/// nu(U,p): minimize fint 1/2 star(du ^ a du) over u with tangential data
/// l_{-p}; value at the minimizer, which is also the maximizer v(.,U,p,0).
SolveReport solveNu(const System& sys, const AltForm& p, const SolverOptions& opts = {});

/// nu*(U,q): maximize fint( -1/2 star(du ^ a du) + star(du ^ q) ) over all u.
SolveReport solveNuStar(const System& sys, const AltForm& q, const SolverOptions& opts = {});

/// Dirichlet solve with prescribed values on the boundary (r-1)-faces;
/// initial guess defaults to the zero-interior extension.
SolveReport solveDirichletValues(const System& sys, const Eigen::VectorXd& boundaryValues,
                                 const Eigen::VectorXd* initialGuess = nullptr,
                                 const SolverOptions& opts = {});

struct JBundle {
  double J = 0.0;
  double nu = 0.0;
  double nustar = 0.0;
  double pairing = 0.0;  // star(p ^ q)
  Cochain vP;            // maximizer component v(.,U,p,0)
  Cochain vQ;            // maximizer component v(.,U,0,q)
  long iterations = 0;
  double relativeResidual = 0.0;
};

/// J(U,p,q) = nu + nu* - star(p^q), maximizer v = vP + vQ.
JBundle solveJ(const System& sys, const AltForm& p, const AltForm& q, const SolverOptions& opts = {});

/// J for the inverse problem: same machinery on an inverted environment, with
/// the pairing orientation of the dual functional (cross term star(q ^ p)).
JBundle solveJInv(const System& invSys, const AltForm& p, const AltForm& q,
                  const SolverOptions& opts = {});

/// Functional value fint( -1/2 star(dw ^ a dw) - star(p ^ a dw) + star(dw ^ q) )
/// at an arbitrary (r-1)-cochain w.
double functionalAt(const System& sys, const AltForm& p, const AltForm& q, const Eigen::VectorXd& w);

/// Child-average minus parent J over the 3^d triadic children; >= -tol
/// per sample by exact restriction of discrete solutions.
double subadditivityMargin(const Environment& env, const AltForm& p, const AltForm& q,
                           const SolverOptions& opts = {});

struct QuadraticResponse {
  double middle = 0.0;       // J - functional at w
  double gradGapSq = 0.0;    // normalized L2 of d(w - v)
  double lowerConst = 0.0;   // measured lambda'/2
  double upperConst = 0.0;   // measured (1/lambda')/2
  bool lowerOk = false;
  bool upperOk = false;
};

/// Quadratic response of J around its maximizer, evaluated at a discrete
/// solution w (interior residual checked).
QuadraticResponse quadraticResponse(const System& sys, const AltForm& p, const AltForm& q,
                                    const Cochain& w, const SolverOptions& opts = {});

/// Random-boundary-data probe solution in the discrete solution space.
Cochain probeSolution(const System& sys, std::uint64_t seed, const SolverOptions& opts = {});

/// Residual of the interior (first-order optimality) equations of w.
double interiorResidual(const System& sys, const Eigen::VectorXd& w);

/// Normalized L2 norm of an interior-supported (r-1)-cochain after removing
/// its best closed approximation (one CG solve on the d-orthogonality system).
double gaugeFixedL2(const System& sys, const Eigen::VectorXd& interiorDelta,
                    const SolverOptions& opts = {});

}  // namespace formhom

#endif
