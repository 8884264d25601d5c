#ifndef FORMHOM_ASSEMBLY_HPP
#define FORMHOM_ASSEMBLY_HPP

#include "formhom/cochain.hpp"
#include "formhom/env.hpp"

// Lowest-order tensor-product (cubical Whitney) discretization.  Per cell the
// r-form Whitney basis is W_F = h^{-r} prod_{a not in K} lambda(x_a) dx_K,
// one basis form per r-face F=(K,corner) of the cell, normalized so that the
// face integrals of a cochain are its coefficients.  All cell integrals below
// are exact for the piecewise-constant coefficient.

namespace formhom {

/// G[F,F'] = sum_cells int_cell star( W_F ^ a_cell W_F' ):  symmetric positive
/// definite energy pairing of r-cochains.  `cellMask`, when given, restricts
/// the integration to flagged cells.
SpMat faceEnergy(const Environment& env, const std::vector<char>* cellMask = nullptr);

/// Stiffness A = D^T G D on (r-1)-cochains; kernel = closed (r-1)-cochains.
SpMat stiffness(const Environment& env, const SpMat& D);

/// Load vector on r-faces with c_F the exact integral of star(W_F ^ q):
/// the linear functional u -> int star(du ^ q) is (D u) . load.
Eigen::VectorXd pairingLoad(const Grid& grid, int r, const AltForm& q);

/// int_U star( p ^ a W(y) ) for a constant r-form p and r-cochain values y.
double energyPairConst(const Environment& env, const AltForm& p, const Eigen::VectorXd& y);

/// Row-sum lumped L2 mass on s-cochains (diagonal, positive).
Eigen::VectorXd lumpedMass(const Grid& grid, int s, const std::vector<char>* cellMask = nullptr);

/// Per-cell flux field: cell c carries star( a_c  dv_c ).
CellField fluxField(const Environment& env, const CellField& dv);

/// min and max eigenvalue of the cell matrices over the grid
std::pair<double, double> cellSpectrumBounds(const Environment& env);

/// Average of a cell field over the cells adjacent to each s-face
/// (rows: s-face index, cols: field components).
Eigen::MatrixXd faceAverages(const CellField& field, int faceDegree);

}  // namespace formhom

#endif
