#ifndef FORMHOM_EXTERIOR_HPP
#define FORMHOM_EXTERIOR_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

// Exact combinatorial algebra of constant alternating forms on R^d:
// multi-indices, wedge, Hodge star, and the energy-matrix representation
// of coefficient maps Lambda^r -> Lambda^(d-r).

namespace formhom {

int binom(int n, int k);

/// Strictly increasing subset of {0,..,d-1}; lexicographic rank among all
/// subsets of the same cardinality.
struct MultiIndex {
  int dim = 0;
  std::vector<int> indices;  // strictly increasing, 0-based axes

  MultiIndex() = default;
  MultiIndex(int d, std::vector<int> idx);

  int degree() const { return static_cast<int>(indices.size()); }
  int rank() const;
  bool contains(int axis) const;
  MultiIndex complement() const;

  static MultiIndex fromRank(int d, int r, int rank);
};

/// Sign of the permutation (I, I^c) of (0,..,d-1), one entry per rank.
struct SignTable {
  int dim = 0;
  int degree = 0;
  std::vector<int> sigma;

  SignTable() = default;
  SignTable(int d, int r);
  int operator()(int rank) const { return sigma[rank]; }
};

/// Sign of the permutation sorting `perm`; 0 if any entry repeats.
int permutationSign(const std::vector<int>& perm);

/// Constant alternating r-form, coefficients over the lexicographic basis.
struct AltForm {
  int dim = 0;
  int degree = 0;
  Eigen::VectorXd coeffs;

  AltForm() = default;
  AltForm(int d, int r);
  AltForm(int d, int r, Eigen::VectorXd c);

  static AltForm zero(int d, int r) { return AltForm(d, r); }
  static AltForm basis(int d, int r, int rank);

  int comps() const { return static_cast<int>(coeffs.size()); }
  double norm() const { return coeffs.norm(); }

  AltForm& operator+=(const AltForm& o);
  AltForm& operator-=(const AltForm& o);
  AltForm& operator*=(double t);
};

AltForm operator+(AltForm a, const AltForm& b);
AltForm operator-(AltForm a, const AltForm& b);
AltForm operator*(double t, AltForm a);

/// Exterior product. Degrees m+s > d yield the canonical zero d-form.
AltForm wedge(const AltForm& alpha, const AltForm& beta);

/// Hodge star: Lambda^r -> Lambda^(d-r), (star a)_{I^c} = sigma(I) a_I.
AltForm hodgeStar(const AltForm& alpha);

/// star(p ^ q) for complementary degrees: sum_I sigma(I) p_I q_{I^c}.
double starWedgeScalar(const AltForm& p, const AltForm& q);

/// Coefficient matrix of the Hodge star in the lexicographic bases,
/// size C(d,d-r) x C(d,r).
Eigen::MatrixXd hodgeMatrix(int d, int r);

/// Point value of a coefficient map a: Lambda^r -> Lambda^(d-r), stored as
/// the symmetric matrix M[I,J] = star(dx_I ^ a dx_J) with spectrum in
/// [lambda, 1/lambda].
struct EnergyMatrix {
  int dim = 0;
  int degree = 0;
  double lambda = 1.0;
  Eigen::MatrixXd M;

  EnergyMatrix() = default;
  /// Validates symmetry (1e-12) and the spectral window (1e-10 slack).
  EnergyMatrix(int d, int r, double lam, Eigen::MatrixXd m);

  /// a p as an actual (d-r)-form: star applied to M p.
  AltForm apply(const AltForm& p) const;
};

/// Energy matrix of the isotropic map a p = c * (star p); equals c * Id.
EnergyMatrix energyMatrixOfStar(int d, int r, double c, double lambda);

/// Energy matrix of the inverse map a^{-1}: Lambda^(d-r) -> Lambda^r,
/// M'[K,L] = sigma(K) sigma(L) (M^{-1})[K^c, L^c].  Round-trips with apply:
/// invert(M).apply(M.apply(p)) recovers p up to the star-star sign, and the
/// energy pairings match the inverse map exactly.
EnergyMatrix invertCoeff(const EnergyMatrix& em);

/// Same sign-conjugated inversion on a raw matrix (no ellipticity checks);
/// used where Monte Carlo noise may push estimates slightly off-window.
Eigen::MatrixXd invertEnergyMatrixRaw(const Eigen::MatrixXd& M, int d, int r);

/// Reconstructs the map a^{-1} from an inverse-orientation energy matrix
/// (as produced by invertCoeff).  The stored pairing of an inverse
/// environment is star(a^{-1} dx_K ^ dx_L), so the actual map carries an
/// extra (-1)^{r(d-r)} relative to the primal reconstruction:
///   a^{-1} q = (-1)^{s(d-s)} star(M' q),  s = em.degree.
/// Satisfies applyInverse(invertCoeff(M), M.apply(p)) == p.
AltForm applyInverse(const EnergyMatrix& invEm, const AltForm& q);

}  // namespace formhom

#endif
