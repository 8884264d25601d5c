#ifndef FORMHOM_GRID_HPP
#define FORMHOM_GRID_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "formhom/exterior.hpp"

// Cubical grid on [0, N*h]^d.  An s-face is a pair (direction set K, position):
// the face spans [pos_a*h, (pos_a+1)*h] along axes a in K and sits at pos_a*h
// along the others, so pos_a ranges over 0..N-1 (a in K) or 0..N (a not in K).
// Faces are ordered by (direction-set rank, then position row-major with the
// last axis fastest); this ordering is the contract for every dump and matrix.

namespace formhom {

using Pos = std::array<int, 4>;  // d <= 4

struct Grid {
  int dim = 0;
  int side = 0;
  double spacing = 1.0;

  Grid() = default;
  Grid(int d, int N, double h = 1.0);

  struct DirLayout {
    std::uint32_t mask = 0;           // bit a set iff axis a in K
    std::array<int, 4> extent{};      // faces per axis
    std::array<long, 4> stride{};     // row-major strides
    long count = 0;
    long offset = 0;                  // global offset within degree s
  };

  long cellCount() const;
  long faceCount(int s) const;
  int dirCount(int s) const { return binom(dim, s); }
  const DirLayout& layout(int s, int dirRank) const { return layouts_[s][dirRank]; }

  long faceIndex(int s, int dirRank, const Pos& pos) const;
  /// inverse of faceIndex
  void faceDecode(int s, long index, int& dirRank, Pos& pos) const;

  long cellIndex(const Pos& cell) const;
  void cellDecode(long index, Pos& cell) const;

  bool isTriadic(int& m) const;  // side == 3^m

  /// physical center of a face
  Eigen::VectorXd faceCenter(int s, int dirRank, const Pos& pos) const;

 private:
  std::vector<std::vector<DirLayout>> layouts_;
  std::array<long, 5> cellStride_{};
};

/// Marks the s-faces contained in the topological boundary of the cube.
struct BoundaryMask {
  Grid grid;
  int degree = 0;
  std::vector<char> flags;

  long countFlagged() const;
};

BoundaryMask boundaryMask(const Grid& grid, int degree);

}  // namespace formhom

#endif
