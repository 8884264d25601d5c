#include "formhom/grid.hpp"

#include <stdexcept>

namespace formhom {

Grid::Grid(int d, int N, double h) : dim(d), side(N), spacing(h) {
  if (d < 1 || d > 4) throw std::invalid_argument("Grid: dim must be in 1..4");
  if (N < 1) throw std::invalid_argument("Grid: side must be >= 1");
  if (h <= 0.0) throw std::invalid_argument("Grid: spacing must be positive");
  layouts_.resize(d + 1);
  for (int s = 0; s <= d; ++s) {
    int nd = binom(d, s);
    layouts_[s].resize(nd);
    long offset = 0;
    for (int ds = 0; ds < nd; ++ds) {
      MultiIndex K = MultiIndex::fromRank(d, s, ds);
      DirLayout& L = layouts_[s][ds];
      for (int a : K.indices) L.mask |= (1u << a);
      for (int a = 0; a < d; ++a) L.extent[a] = (L.mask >> a & 1u) ? N : N + 1;
      long stride = 1;
      for (int a = d - 1; a >= 0; --a) {
        L.stride[a] = stride;
        stride *= L.extent[a];
      }
      L.count = stride;
      L.offset = offset;
      offset += L.count;
    }
  }
  long stride = 1;
  for (int a = d - 1; a >= 0; --a) {
    cellStride_[a] = stride;
    stride *= N;
  }
  cellStride_[4] = stride;  // total
}

long Grid::cellCount() const { return cellStride_[4]; }

long Grid::faceCount(int s) const {
  if (s < 0 || s > dim) return 0;
  const auto& last = layouts_[s].back();
  return last.offset + last.count;
}

long Grid::faceIndex(int s, int dirRank, const Pos& pos) const {
  const DirLayout& L = layouts_[s][dirRank];
  long idx = L.offset;
  for (int a = 0; a < dim; ++a) idx += L.stride[a] * pos[a];
  return idx;
}

void Grid::faceDecode(int s, long index, int& dirRank, Pos& pos) const {
  int nd = dirCount(s);
  dirRank = nd - 1;
  for (int ds = 0; ds + 1 < nd; ++ds) {
    if (index < layouts_[s][ds + 1].offset) {
      dirRank = ds;
      break;
    }
  }
  const DirLayout& L = layouts_[s][dirRank];
  long rem = index - L.offset;
  pos.fill(0);
  for (int a = 0; a < dim; ++a) {
    pos[a] = static_cast<int>(rem / L.stride[a]);
    rem %= L.stride[a];
  }
}

long Grid::cellIndex(const Pos& cell) const {
  long idx = 0;
  for (int a = 0; a < dim; ++a) idx += cellStride_[a] * cell[a];
  return idx;
}

void Grid::cellDecode(long index, Pos& cell) const {
  cell.fill(0);
  for (int a = 0; a < dim; ++a) {
    cell[a] = static_cast<int>(index / cellStride_[a]);
    index %= cellStride_[a];
  }
}

bool Grid::isTriadic(int& m) const {
  int n = side;
  m = 0;
  while (n % 3 == 0) {
    n /= 3;
    ++m;
  }
  return n == 1;
}

Eigen::VectorXd Grid::faceCenter(int s, int dirRank, const Pos& pos) const {
  const DirLayout& L = layouts_[s][dirRank];
  Eigen::VectorXd x(dim);
  for (int a = 0; a < dim; ++a)
    x(a) = spacing * ((L.mask >> a & 1u) ? pos[a] + 0.5 : pos[a]);
  return x;
}

BoundaryMask boundaryMask(const Grid& grid, int degree) {
  BoundaryMask bm{grid, degree, std::vector<char>(grid.faceCount(degree), 0)};
  for (int ds = 0; ds < grid.dirCount(degree); ++ds) {
    const Grid::DirLayout& L = grid.layout(degree, ds);
    for (long k = 0; k < L.count; ++k) {
      long idx = L.offset + k;
      long rem = k;
      bool onBoundary = false;
      for (int a = 0; a < grid.dim; ++a) {
        int p = static_cast<int>(rem / L.stride[a]);
        rem %= L.stride[a];
        if (!(L.mask >> a & 1u) && (p == 0 || p == grid.side)) onBoundary = true;
      }
      if (onBoundary) bm.flags[idx] = 1;
    }
  }
  return bm;
}

long BoundaryMask::countFlagged() const {
  long n = 0;
  for (char f : flags) n += f;
  return n;
}

}  // namespace formhom
