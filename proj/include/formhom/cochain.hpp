#ifndef FORMHOM_COCHAIN_HPP
#define FORMHOM_COCHAIN_HPP

#include <Eigen/Sparse>
#include <functional>

#include "formhom/grid.hpp"

namespace formhom {

using SpMat = Eigen::SparseMatrix<double>;

/// Discrete r-form: one degree of freedom per r-face, the integral of the
/// represented form over that face.
struct Cochain {
  Grid grid;
  int degree = 0;
  Eigen::VectorXd values;

  Cochain() = default;
  Cochain(const Grid& g, int r) : grid(g), degree(r), values(Eigen::VectorXd::Zero(g.faceCount(r))) {}
  Cochain(const Grid& g, int r, Eigen::VectorXd v);
};

/// Signed incidence of s-faces into (s+1)-faces (the discrete d).
SpMat coboundaryMatrix(const Grid& grid, int s);

/// Exact coboundary on arbitrary scalars; integer inputs stay integer.
template <typename T>
std::vector<T> applyCoboundary(const Grid& grid, int s, const std::vector<T>& u);

Cochain coboundary(const Cochain& u);

/// A form field with polynomial coefficients; degree <= 2 is supported by
/// exact face quadrature.
struct PolyFormField {
  int dim = 0;
  int degree = 0;      // form degree
  int polyDegree = 0;  // max coefficient degree
  std::function<AltForm(const Eigen::VectorXd&)> eval;
};

/// l_p: the canonical affine primitive with d l_p = p (first-index convention).
PolyFormField lpField(const AltForm& p);

/// Variant of l_p with the leading factor x_{i1} replaced by x_{i1}^2/2;
/// quadratic boundary data for the Dirichlet experiments.
PolyFormField lpQuadraticField(const AltForm& p);

/// de Rham map: DOF on each face = exact integral of the form over the face.
Cochain interpolate(const PolyFormField& field, const Grid& grid);

/// Values of a parent-grid s-cochain on the faces of a sub-cube grid.
Eigen::VectorXd restrictFaceValues(const Grid& parent, int s, const Eigen::VectorXd& values,
                                   const Pos& offset, const Grid& child);

/// One constant AltForm per cell (e.g. a reconstructed gradient or flux).
struct CellField {
  Grid grid;
  int degree = 0;
  Eigen::MatrixXd values;  // cellCount x C(d,degree)

  CellField() = default;
  CellField(const Grid& g, int r)
      : grid(g), degree(r), values(Eigen::MatrixXd::Zero(g.cellCount(), binom(g.dim, r))) {}
};

/// Per-cell reconstruction of an r-cochain: for each direction set, the mean
/// of the 2^(d-r) parallel faces of the cell divided by the face volume.
/// Exact on interpolants of constant forms.
CellField cellAverages(const Grid& grid, int r, const Eigen::VectorXd& values);

/// Componentwise mean over a block of cells (offset/extent in cells).
AltForm cubeMean(const CellField& field, const Pos& offset, int extent);
AltForm cubeMean(const CellField& field);

/// Multiscale block-mean seminorm on a triadic grid: the normalized L2 norm
/// plus sum_{n<m} 3^n ( |Z_{m,n}|^{-1} sum_z |mean over z+block_n|^2 )^{1/2},
/// in grid units (unit cells).  This is the computable surrogate for the
/// H^-1 norm on the triadic cube; callers multiply by the physical cell size
/// when the grid is a rescaled domain.
double multiscaleSeminorm(const CellField& field);

}  // namespace formhom

#endif
