#include "formhom/assembly.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace formhom {

namespace {

// enumeration of the r-faces of one cell: (direction rank, corner bits over
// the d-r transverse axes), with the global face index resolved per cell
struct LocalFace {
  int dirRank;
  int corner;  // bit b set: transverse axis freeAxes[b] at +1
};

struct LocalFaceTable {
  int r;
  std::vector<LocalFace> faces;
  std::vector<std::array<int, 4>> freeAxes;  // per direction rank
  std::vector<int> nFree;

  LocalFaceTable(const Grid& g, int r_) : r(r_) {
    int d = g.dim;
    int nd = g.dirCount(r);
    freeAxes.resize(nd);
    nFree.resize(nd);
    for (int ds = 0; ds < nd; ++ds) {
      const auto& L = g.layout(r, ds);
      int nf = 0;
      for (int a = 0; a < d; ++a)
        if (!(L.mask >> a & 1u)) freeAxes[ds][nf++] = a;
      nFree[ds] = nf;
      for (int c = 0; c < (1 << nf); ++c) faces.push_back({ds, c});
    }
  }

  long globalIndex(const Grid& g, const Pos& cell, const LocalFace& lf) const {
    Pos pos = cell;
    for (int b = 0; b < nFree[lf.dirRank]; ++b)
      if (lf.corner >> b & 1) pos[freeAxes[lf.dirRank][b]] += 1;
    return g.faceIndex(r, lf.dirRank, pos);
  }
};

// int_cell w_F w_F' dx for the scalar profiles of two local r-faces,
// including the h^{-2r} Whitney normalization
double profileOverlap(const Grid& g, int r, const Grid::DirLayout& LK, const Grid::DirLayout& LK2,
                      int cornerF, int cornerF2, const LocalFaceTable& tab, int dsF, int dsF2) {
  double h = g.spacing;
  double acc = std::pow(h, -2.0 * r);
  int bF = 0, bF2 = 0;
  for (int a = 0; a < g.dim; ++a) {
    bool inK = LK.mask >> a & 1u;
    bool inK2 = LK2.mask >> a & 1u;
    if (inK && inK2) {
      acc *= h;
    } else if (inK != inK2) {
      acc *= 0.5 * h;
      if (!inK) ++bF;  // consumed a transverse bit of F
      if (!inK2) ++bF2;
      continue;
    } else {
      int cF = (cornerF >> bF) & 1;
      int cF2 = (cornerF2 >> bF2) & 1;
      acc *= (cF == cF2) ? h / 3.0 : h / 6.0;
      ++bF;
      ++bF2;
    }
  }
  (void)tab;
  (void)dsF;
  (void)dsF2;
  return acc;
}

}  // namespace

SpMat faceEnergy(const Environment& env, const std::vector<char>* cellMask) {
  const Grid& g = env.grid;
  int r = env.degree;
  LocalFaceTable tab(g, r);
  int nloc = static_cast<int>(tab.faces.size());

  // per-pair profile overlaps are cell-independent; precompute
  Eigen::MatrixXd overlap(nloc, nloc);
  std::vector<int> dsOf(nloc);
  for (int i = 0; i < nloc; ++i) dsOf[i] = tab.faces[i].dirRank;
  for (int i = 0; i < nloc; ++i)
    for (int j = 0; j < nloc; ++j)
      overlap(i, j) = profileOverlap(g, r, g.layout(r, dsOf[i]), g.layout(r, dsOf[j]),
                                     tab.faces[i].corner, tab.faces[j].corner, tab, dsOf[i], dsOf[j]);

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(g.cellCount()) * nloc * nloc);
  std::vector<long> gidx(nloc);
  Pos cell{};
  for (long c = 0; c < g.cellCount(); ++c) {
    if (cellMask && !(*cellMask)[c]) continue;
    g.cellDecode(c, cell);
    auto M = env.cell(c);
    for (int i = 0; i < nloc; ++i) gidx[i] = tab.globalIndex(g, cell, tab.faces[i]);
    for (int i = 0; i < nloc; ++i)
      for (int j = 0; j < nloc; ++j) {
        double v = M(dsOf[i], dsOf[j]) * overlap(i, j);
        if (v != 0.0) trips.emplace_back(gidx[i], gidx[j], v);
      }
  }
  SpMat G(g.faceCount(r), g.faceCount(r));
  G.setFromTriplets(trips.begin(), trips.end());
  return G;
}

SpMat stiffness(const Environment& env, const SpMat& D) {
  SpMat G = faceEnergy(env);
  SpMat A = D.transpose() * G * D;
  return A;
}

Eigen::VectorXd pairingLoad(const Grid& grid, int r, const AltForm& q) {
  if (q.dim != grid.dim || q.degree != grid.dim - r)
    throw std::invalid_argument("pairingLoad: q must have degree d-r");
  int d = grid.dim;
  double h = grid.spacing;
  SignTable st(d, r);
  LocalFaceTable tab(grid, r);
  double w = std::pow(0.5 * h, d - r);  // int_cell w_F dx = h^{-r} h^r (h/2)^{d-r}
  Eigen::VectorXd load = Eigen::VectorXd::Zero(grid.faceCount(r));
  std::vector<double> dirWeight(grid.dirCount(r));
  for (int ds = 0; ds < grid.dirCount(r); ++ds) {
    int compRank = MultiIndex::fromRank(d, r, ds).complement().rank();
    dirWeight[ds] = st(ds) * q.coeffs(compRank) * w;
  }
  Pos cell{};
  for (long c = 0; c < grid.cellCount(); ++c) {
    grid.cellDecode(c, cell);
    for (const auto& lf : tab.faces) load(tab.globalIndex(grid, cell, lf)) += dirWeight[lf.dirRank];
  }
  return load;
}

double energyPairConst(const Environment& env, const AltForm& p, const Eigen::VectorXd& y) {
  const Grid& g = env.grid;
  int r = env.degree;
  if (p.degree != r || y.size() != g.faceCount(r))
    throw std::invalid_argument("energyPairConst: degree/size mismatch");
  LocalFaceTable tab(g, r);
  double w = std::pow(0.5 * g.spacing, g.dim - r);
  double acc = 0.0;
  Pos cell{};
  for (long c = 0; c < g.cellCount(); ++c) {
    g.cellDecode(c, cell);
    Eigen::VectorXd Mp = env.cell(c) * p.coeffs;
    for (const auto& lf : tab.faces) acc += y(tab.globalIndex(g, cell, lf)) * Mp(lf.dirRank) * w;
  }
  return acc;
}

Eigen::VectorXd lumpedMass(const Grid& grid, int s, const std::vector<char>* cellMask) {
  LocalFaceTable tab(grid, s);
  double h = grid.spacing;
  double w = std::pow(h, -double(s)) * std::pow(0.5 * h, grid.dim - s);
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(grid.faceCount(s));
  Pos cell{};
  for (long c = 0; c < grid.cellCount(); ++c) {
    if (cellMask && !(*cellMask)[c]) continue;
    grid.cellDecode(c, cell);
    for (const auto& lf : tab.faces) mass(tab.globalIndex(grid, cell, lf)) += w;
  }
  return mass;
}

CellField fluxField(const Environment& env, const CellField& dv) {
  const Grid& g = env.grid;
  int d = g.dim, r = env.degree;
  if (dv.degree != r) throw std::invalid_argument("fluxField: degree mismatch");
  SignTable st(d, r);
  std::vector<int> comp(env.comps);
  for (int k = 0; k < env.comps; ++k) comp[k] = MultiIndex::fromRank(d, r, k).complement().rank();
  CellField out(g, d - r);
  for (long c = 0; c < g.cellCount(); ++c) {
    Eigen::VectorXd Mv = env.cell(c) * dv.values.row(c).transpose();
    for (int k = 0; k < env.comps; ++k) out.values(c, comp[k]) = st(k) * Mv(k);
  }
  return out;
}

Eigen::MatrixXd faceAverages(const CellField& field, int faceDegree) {
  const Grid& g = field.grid;
  LocalFaceTable tab(g, faceDegree);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(g.faceCount(faceDegree), field.values.cols());
  Eigen::VectorXd count = Eigen::VectorXd::Zero(g.faceCount(faceDegree));
  Pos cell{};
  for (long c = 0; c < g.cellCount(); ++c) {
    g.cellDecode(c, cell);
    for (const auto& lf : tab.faces) {
      long f = tab.globalIndex(g, cell, lf);
      acc.row(f) += field.values.row(c);
      count(f) += 1.0;
    }
  }
  for (long f = 0; f < count.size(); ++f)
    if (count(f) > 0) acc.row(f) /= count(f);
  return acc;
}

std::pair<double, double> cellSpectrumBounds(const Environment& env) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  for (long c = 0; c < env.grid.cellCount(); ++c) {
    es.compute(env.cell(c), Eigen::EigenvaluesOnly);
    lo = std::min(lo, es.eigenvalues().minCoeff());
    hi = std::max(hi, es.eigenvalues().maxCoeff());
  }
  return {lo, hi};
}

}  // namespace formhom
