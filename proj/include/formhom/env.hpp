#ifndef FORMHOM_ENV_HPP
#define FORMHOM_ENV_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "formhom/grid.hpp"

namespace formhom {

/// Realization of the random coefficient field: one symmetric energy matrix
/// with spectrum in [lambda, 1/lambda] per grid cell.
struct Environment {
  Grid grid;
  int degree = 0;   // r: maps r-forms to (d-r)-forms
  int comps = 0;    // C(d, r)
  double lambda = 1.0;
  std::vector<double> cells;  // cellCount * comps * comps, row-major blocks

  Eigen::Map<const Eigen::MatrixXd> cell(long c) const {
    return {cells.data() + static_cast<std::size_t>(c) * comps * comps, comps, comps};
  }
  Eigen::Map<Eigen::MatrixXd> cell(long c) {
    return {cells.data() + static_cast<std::size_t>(c) * comps * comps, comps, comps};
  }

  /// mean of the cell matrices (used for solver initial guesses)
  Eigen::MatrixXd meanMatrix() const;

  static Environment constant(const Grid& grid, const EnergyMatrix& m);
  /// same cells viewed at a different grid spacing
  Environment withSpacing(double h) const;
  /// sub-environment on the cube of `extent` cells starting at `offset`
  Environment restrictTo(const Pos& offset, int extent) const;
  /// finer grid resolution: k^d cells per coefficient sample, spacing h/k
  Environment refineBy(int k) const;

  void validate() const;  // throws if any cell violates symmetry/ellipticity
};

/// Single-cell law of an ensemble plus its parameters.
struct EnsembleSpec {
  enum class Kind { Constant, IidSpd, Checkerboard2, Laminate };

  Kind kind = Kind::Constant;
  int dim = 0;
  int degree = 0;
  double lambda = 0.25;
  std::optional<Eigen::MatrixXd> constantM;  // Constant, defaults to identity
  double c1 = 1.0, c2 = 1.0;                 // Checkerboard2 / Laminate scales
  int axis = 0;                              // Laminate: axis of variation (0-based)

  void validate() const;
  std::string describe() const;

  static EnsembleSpec parse(const std::string& text, int dim, int degree, double lambda);
};

/// Draws an environment on the triadic cube of side 3^m.  Cells are
/// independent and a pure function of (seed, cell coordinates): the result is
/// byte-identical across runs, iteration orders and thread counts.
Environment sampleEnvironment(const EnsembleSpec& spec, int m, std::uint64_t seed);

/// Same law on an arbitrary side (used by the two-scale experiments).
Environment sampleEnvironmentSide(const EnsembleSpec& spec, int side, std::uint64_t seed, double h = 1.0);

/// Per-cell coefficient inversion: an environment of degree d-r whose energy
/// pairing is that of the inverse maps; spectrum window is preserved.
Environment invertEnv(const Environment& env);

}  // namespace formhom

#endif
