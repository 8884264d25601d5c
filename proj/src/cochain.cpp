#include "formhom/cochain.hpp"

#include <cmath>
#include <stdexcept>

namespace formhom {

Cochain::Cochain(const Grid& g, int r, Eigen::VectorXd v) : grid(g), degree(r), values(std::move(v)) {
  if (values.size() != grid.faceCount(r)) throw std::invalid_argument("Cochain: value count mismatch");
}

namespace {

struct IncidenceEntry {
  long face;  // s-face index
  int sign;
};

// boundary s-faces of the (s+1)-face (dirRank, pos), with incidence signs
template <typename Fn>
void forEachBoundaryFace(const Grid& grid, int s1, int dirRank, const Pos& pos, Fn&& fn) {
  int d = grid.dim;
  MultiIndex J = MultiIndex::fromRank(d, s1, dirRank);
  for (int t = 0; t < s1; ++t) {
    int axis = J.indices[t];
    int sign = (t % 2 == 0) ? 1 : -1;  // (-1)^{#{i in J : i < axis}}
    std::vector<int> sub = J.indices;
    sub.erase(sub.begin() + t);
    int subRank = MultiIndex(d, sub).rank();
    Pos q = pos;
    fn(grid.faceIndex(s1 - 1, subRank, q), -sign);  // lower
    q[axis] = pos[axis] + 1;
    fn(grid.faceIndex(s1 - 1, subRank, q), sign);  // upper
  }
}

template <typename Fn>
void forEachFace(const Grid& grid, int s, Fn&& fn) {
  for (int ds = 0; ds < grid.dirCount(s); ++ds) {
    const Grid::DirLayout& L = grid.layout(s, ds);
    Pos pos{};
    pos.fill(0);
    for (long k = 0; k < L.count; ++k) {
      fn(ds, pos, L.offset + k);
      for (int a = grid.dim - 1; a >= 0; --a) {
        if (++pos[a] < L.extent[a]) break;
        pos[a] = 0;
      }
    }
  }
}

}  // namespace

SpMat coboundaryMatrix(const Grid& grid, int s) {
  if (s < 0 || s >= grid.dim) throw std::invalid_argument("coboundaryMatrix: need 0 <= s < dim");
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(grid.faceCount(s + 1) * 2 * (s + 1));
  forEachFace(grid, s + 1, [&](int ds, const Pos& pos, long row) {
    forEachBoundaryFace(grid, s + 1, ds, pos,
                        [&](long col, int sign) { trips.emplace_back(row, col, double(sign)); });
  });
  SpMat D(grid.faceCount(s + 1), grid.faceCount(s));
  D.setFromTriplets(trips.begin(), trips.end());
  return D;
}

template <typename T>
std::vector<T> applyCoboundary(const Grid& grid, int s, const std::vector<T>& u) {
  if (static_cast<long>(u.size()) != grid.faceCount(s))
    throw std::invalid_argument("applyCoboundary: size mismatch");
  if (s >= grid.dim) throw std::invalid_argument("applyCoboundary: degree d input rejected");
  std::vector<T> out(grid.faceCount(s + 1), T(0));
  forEachFace(grid, s + 1, [&](int ds, const Pos& pos, long row) {
    forEachBoundaryFace(grid, s + 1, ds, pos,
                        [&](long col, int sign) { out[row] += T(sign) * u[col]; });
  });
  return out;
}

template std::vector<double> applyCoboundary<double>(const Grid&, int, const std::vector<double>&);
template std::vector<long long> applyCoboundary<long long>(const Grid&, int, const std::vector<long long>&);

Cochain coboundary(const Cochain& u) {
  if (u.degree >= u.grid.dim) throw std::invalid_argument("coboundary: top-degree cochain rejected");
  Cochain out(u.grid, u.degree + 1);
  forEachFace(u.grid, u.degree + 1, [&](int ds, const Pos& pos, long row) {
    double acc = 0.0;
    forEachBoundaryFace(u.grid, u.degree + 1, ds, pos,
                        [&](long col, int sign) { acc += sign * u.values(col); });
    out.values(row) = acc;
  });
  return out;
}

PolyFormField lpField(const AltForm& p) {
  int d = p.dim, r = p.degree;
  if (r < 1) throw std::invalid_argument("lpField: need degree >= 1");
  AltForm pc = p;
  return PolyFormField{d, r - 1, 1, [pc, d, r](const Eigen::VectorXd& x) {
                         AltForm out(d, r - 1);
                         for (int ir = 0; ir < binom(d, r); ++ir) {
                           if (pc.coeffs(ir) == 0.0) continue;
                           MultiIndex I = MultiIndex::fromRank(d, r, ir);
                           std::vector<int> rest(I.indices.begin() + 1, I.indices.end());
                           int rk = MultiIndex(d, rest).rank();
                           out.coeffs(rk) += pc.coeffs(ir) * x(I.indices[0]);
                         }
                         return out;
                       }};
}

PolyFormField lpQuadraticField(const AltForm& p) {
  int d = p.dim, r = p.degree;
  if (r < 1) throw std::invalid_argument("lpQuadraticField: need degree >= 1");
  AltForm pc = p;
  return PolyFormField{d, r - 1, 2, [pc, d, r](const Eigen::VectorXd& x) {
                         AltForm out(d, r - 1);
                         for (int ir = 0; ir < binom(d, r); ++ir) {
                           if (pc.coeffs(ir) == 0.0) continue;
                           MultiIndex I = MultiIndex::fromRank(d, r, ir);
                           std::vector<int> rest(I.indices.begin() + 1, I.indices.end());
                           int rk = MultiIndex(d, rest).rank();
                           double t = x(I.indices[0]);
                           out.coeffs(rk) += pc.coeffs(ir) * 0.5 * t * t;
                         }
                         return out;
                       }};
}

namespace {

// 3-point Gauss-Legendre on [0,1]; exact through polynomial degree 5
constexpr double kGaussX[3] = {0.1127016653792583, 0.5, 0.8872983346207417};
constexpr double kGaussW[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

}  // namespace

Cochain interpolate(const PolyFormField& field, const Grid& grid) {
  if (field.dim != grid.dim) throw std::invalid_argument("interpolate: dimension mismatch");
  if (field.polyDegree > 2) throw std::invalid_argument("interpolate: unsupported polynomial degree");
  int d = grid.dim, s = field.degree;
  double h = grid.spacing;
  Cochain out(grid, s);
  forEachFace(grid, s, [&](int ds, const Pos& pos, long idx) {
    const Grid::DirLayout& L = grid.layout(s, ds);
    // tensor Gauss over the axes the face spans
    std::array<int, 4> qi{};
    double acc = 0.0;
    while (true) {
      Eigen::VectorXd x(d);
      double w = 1.0;
      int qa = 0;
      for (int a = 0; a < d; ++a) {
        if (L.mask >> a & 1u) {
          x(a) = h * (pos[a] + kGaussX[qi[qa]]);
          w *= kGaussW[qi[qa]];
          ++qa;
        } else {
          x(a) = h * pos[a];
        }
      }
      acc += w * field.eval(x).coeffs(ds);
      int a = s - 1;
      for (; a >= 0; --a) {
        if (++qi[a] < 3) break;
        qi[a] = 0;
      }
      if (a < 0) break;
    }
    out.values(idx) = acc * std::pow(h, s);
  });
  return out;
}

Eigen::VectorXd restrictFaceValues(const Grid& parent, int s, const Eigen::VectorXd& values,
                                   const Pos& offset, const Grid& child) {
  if (parent.dim != child.dim) throw std::invalid_argument("restrictFaceValues: dimension mismatch");
  Eigen::VectorXd out(child.faceCount(s));
  for (long f = 0; f < out.size(); ++f) {
    int ds;
    Pos pos;
    child.faceDecode(s, f, ds, pos);
    Pos ppos = pos;
    for (int a = 0; a < parent.dim; ++a) ppos[a] += offset[a];
    out(f) = values(parent.faceIndex(s, ds, ppos));
  }
  return out;
}

CellField cellAverages(const Grid& grid, int r, const Eigen::VectorXd& values) {
  if (values.size() != grid.faceCount(r)) throw std::invalid_argument("cellAverages: size mismatch");
  int d = grid.dim;
  CellField field(grid, r);
  double faceVol = std::pow(grid.spacing, r);
  double weight = 1.0 / ((1 << (d - r)) * faceVol);
  for (int ds = 0; ds < grid.dirCount(r); ++ds) {
    const Grid::DirLayout& L = grid.layout(r, ds);
    Pos cell{};
    cell.fill(0);
    long nc = grid.cellCount();
    for (long c = 0; c < nc; ++c) {
      grid.cellDecode(c, cell);
      double acc = 0.0;
      // the 2^(d-r) faces of this cell parallel to direction set ds
      int freeAxes[4], nf = 0;
      for (int a = 0; a < d; ++a)
        if (!(L.mask >> a & 1u)) freeAxes[nf++] = a;
      for (int corner = 0; corner < (1 << nf); ++corner) {
        Pos pos = cell;
        for (int b = 0; b < nf; ++b)
          if (corner >> b & 1) pos[freeAxes[b]] += 1;
        acc += values(grid.faceIndex(r, ds, pos));
      }
      field.values(c, ds) = acc * weight;
    }
  }
  return field;
}

AltForm cubeMean(const CellField& field, const Pos& offset, int extent) {
  if (extent < 1) throw std::invalid_argument("cubeMean: empty region");
  const Grid& g = field.grid;
  for (int a = 0; a < g.dim; ++a)
    if (offset[a] < 0 || offset[a] + extent > g.side)
      throw std::invalid_argument("cubeMean: region outside grid");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(field.values.cols());
  Pos cell{};
  long n = 1;
  for (int a = 0; a < g.dim; ++a) n *= extent;
  cell.fill(0);
  // iterate the block row-major
  Pos it{};
  it.fill(0);
  for (long k = 0; k < n; ++k) {
    for (int a = 0; a < g.dim; ++a) cell[a] = offset[a] + it[a];
    acc += field.values.row(g.cellIndex(cell)).transpose();
    for (int a = g.dim - 1; a >= 0; --a) {
      if (++it[a] < extent) break;
      it[a] = 0;
    }
  }
  return AltForm(g.dim, field.degree, acc / double(n));
}

AltForm cubeMean(const CellField& field) {
  Pos zero{};
  zero.fill(0);
  return cubeMean(field, zero, field.grid.side);
}

double multiscaleSeminorm(const CellField& field) {
  const Grid& g = field.grid;
  int m = 0;
  if (!g.isTriadic(m)) throw std::invalid_argument("multiscaleSeminorm: grid side is not a power of 3");
  long nc = g.cellCount();
  double l2 = std::sqrt(field.values.squaredNorm() / double(nc));
  double total = l2;
  for (int n = 0; n < m; ++n) {
    int block = 1;
    for (int k = 0; k < n; ++k) block *= 3;
    int nb = g.side / block;  // blocks per axis
    long nblocks = 1;
    for (int a = 0; a < g.dim; ++a) nblocks *= nb;
    double acc = 0.0;
    Pos it{};
    it.fill(0);
    for (long b = 0; b < nblocks; ++b) {
      Pos off{};
      for (int a = 0; a < g.dim; ++a) off[a] = it[a] * block;
      acc += cubeMean(field, off, block).coeffs.squaredNorm();
      for (int a = g.dim - 1; a >= 0; --a) {
        if (++it[a] < nb) break;
        it[a] = 0;
      }
    }
    total += std::pow(3.0, n) * std::sqrt(acc / double(nblocks));
  }
  return total;
}

}  // namespace formhom
