#include "formhom/env.hpp"

#include <Eigen/QR>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "formhom/rng.hpp"

namespace formhom {

Eigen::MatrixXd Environment::meanMatrix() const {
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(comps, comps);
  long nc = grid.cellCount();
  for (long c = 0; c < nc; ++c) acc += cell(c);
  return acc / double(nc);
}

Environment Environment::constant(const Grid& grid, const EnergyMatrix& m) {
  if (m.dim != grid.dim) throw std::invalid_argument("Environment::constant: dimension mismatch");
  Environment env;
  env.grid = grid;
  env.degree = m.degree;
  env.comps = binom(grid.dim, m.degree);
  env.lambda = m.lambda;
  env.cells.resize(static_cast<std::size_t>(grid.cellCount()) * env.comps * env.comps);
  for (long c = 0; c < grid.cellCount(); ++c) env.cell(c) = m.M;
  return env;
}

Environment Environment::withSpacing(double h) const {
  Environment env = *this;
  env.grid = Grid(grid.dim, grid.side, h);
  return env;
}

Environment Environment::restrictTo(const Pos& offset, int extent) const {
  Environment sub;
  sub.grid = Grid(grid.dim, extent, grid.spacing);
  sub.degree = degree;
  sub.comps = comps;
  sub.lambda = lambda;
  sub.cells.resize(static_cast<std::size_t>(sub.grid.cellCount()) * comps * comps);
  Pos cell{};
  for (long c = 0; c < sub.grid.cellCount(); ++c) {
    sub.grid.cellDecode(c, cell);
    Pos parent = cell;
    for (int a = 0; a < grid.dim; ++a) parent[a] += offset[a];
    sub.cell(c) = this->cell(grid.cellIndex(parent));
  }
  return sub;
}

Environment Environment::refineBy(int k) const {
  if (k < 1) throw std::invalid_argument("Environment::refineBy: factor must be >= 1");
  if (k == 1) return *this;
  Environment fine;
  fine.grid = Grid(grid.dim, grid.side * k, grid.spacing / k);
  fine.degree = degree;
  fine.comps = comps;
  fine.lambda = lambda;
  fine.cells.resize(static_cast<std::size_t>(fine.grid.cellCount()) * comps * comps);
  Pos cell{};
  for (long c = 0; c < fine.grid.cellCount(); ++c) {
    fine.grid.cellDecode(c, cell);
    Pos coarse = cell;
    for (int a = 0; a < grid.dim; ++a) coarse[a] /= k;
    fine.cell(c) = this->cell(grid.cellIndex(coarse));
  }
  return fine;
}

void Environment::validate() const {
  for (long c = 0; c < grid.cellCount(); ++c)
    EnergyMatrix(grid.dim, degree, lambda, cell(c));  // ctor throws on violation
}

void EnsembleSpec::validate() const {
  if (dim < 1 || dim > 4) throw std::invalid_argument("EnsembleSpec: dim in 1..4 required");
  if (degree < 1 || degree > dim) throw std::invalid_argument("EnsembleSpec: degree in 1..dim required");
  if (lambda <= 0.0 || lambda > 1.0) throw std::invalid_argument("EnsembleSpec: lambda in (0,1] required");
  auto inWindow = [&](double c) { return c >= lambda - 1e-12 && c <= 1.0 / lambda + 1e-12; };
  switch (kind) {
    case Kind::Constant:
      if (constantM) EnergyMatrix(dim, degree, lambda, *constantM);
      break;
    case Kind::IidSpd:
      break;
    case Kind::Checkerboard2:
      if (!inWindow(c1) || !inWindow(c2))
        throw std::invalid_argument("EnsembleSpec: checkerboard scales outside ellipticity window");
      break;
    case Kind::Laminate:
      if (!inWindow(c1) || !inWindow(c2))
        throw std::invalid_argument("EnsembleSpec: laminate scales outside ellipticity window");
      if (axis < 0 || axis >= dim) throw std::invalid_argument("EnsembleSpec: laminate axis out of range");
      break;
  }
}

std::string EnsembleSpec::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Constant:
      os << "constant";
      if (constantM && !constantM->isIdentity(0.0)) os << ":custom";
      break;
    case Kind::IidSpd:
      os << "iid-spd";
      break;
    case Kind::Checkerboard2:
      os << "checkerboard2:" << c1 << "," << c2;
      break;
    case Kind::Laminate:
      os << "laminate:" << (axis + 1) << "," << c1 << "," << c2;
      break;
  }
  return os.str();
}

EnsembleSpec EnsembleSpec::parse(const std::string& text, int dim, int degree, double lambda) {
  EnsembleSpec spec;
  spec.dim = dim;
  spec.degree = degree;
  spec.lambda = lambda;
  auto colon = text.find(':');
  std::string name = text.substr(0, colon);
  std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);
  auto splitArgs = [&]() {
    std::vector<double> vals;
    std::stringstream ss(args);
    std::string tok;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    return vals;
  };
  if (name == "constant") {
    spec.kind = Kind::Constant;
    double c = args.empty() ? 1.0 : std::stod(args);
    spec.constantM = c * Eigen::MatrixXd::Identity(binom(dim, degree), binom(dim, degree));
  } else if (name == "iid-spd") {
    spec.kind = Kind::IidSpd;
  } else if (name == "checkerboard2") {
    auto v = splitArgs();
    if (v.size() != 2) throw std::invalid_argument("ensemble: checkerboard2 needs c1,c2");
    spec.kind = Kind::Checkerboard2;
    spec.c1 = v[0];
    spec.c2 = v[1];
  } else if (name == "laminate") {
    auto v = splitArgs();
    if (v.size() != 3) throw std::invalid_argument("ensemble: laminate needs axis,c1,c2");
    spec.kind = Kind::Laminate;
    spec.axis = static_cast<int>(v[0]) - 1;  // 1-based on the command line
    spec.c1 = v[1];
    spec.c2 = v[2];
  } else {
    throw std::invalid_argument("ensemble: unknown kind '" + name + "'");
  }
  spec.validate();
  return spec;
}

namespace {

// Haar-like random orthogonal matrix: QR of a Gaussian matrix with the
// R diagonal sign fixed, so the draw is a deterministic function of the rng.
Eigen::MatrixXd randomOrthogonal(int n, CounterRng& rng) {
  Eigen::MatrixXd G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = rng.gaussian();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ();
  Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)
    if (R(j, j) < 0) Q.col(j) *= -1.0;
  return Q;
}

void drawCell(const EnsembleSpec& spec, std::uint64_t seed, long cellIdx, const Pos& cellPos,
              Eigen::Map<Eigen::MatrixXd> out) {
  int n = out.rows();
  switch (spec.kind) {
    case EnsembleSpec::Kind::Constant: {
      if (spec.constantM)
        out = *spec.constantM;
      else
        out = Eigen::MatrixXd::Identity(n, n);
      break;
    }
    case EnsembleSpec::Kind::IidSpd: {
      CounterRng rng(CounterRng::key(seed, 0x11Du, cellIdx));
      Eigen::MatrixXd Q = randomOrthogonal(n, rng);
      Eigen::VectorXd mu(n);
      for (int i = 0; i < n; ++i) mu(i) = rng.uniform(spec.lambda, 1.0 / spec.lambda);
      Eigen::MatrixXd M = Q * mu.asDiagonal() * Q.transpose();
      out = 0.5 * (M + M.transpose());
      break;
    }
    case EnsembleSpec::Kind::Checkerboard2: {
      CounterRng rng(CounterRng::key(seed, 0xC4Bu, cellIdx));
      double c = rng.bernoulli() ? spec.c1 : spec.c2;
      out = c * Eigen::MatrixXd::Identity(n, n);
      break;
    }
    case EnsembleSpec::Kind::Laminate: {
      // all cells in a slab share the draw: key on the slab coordinate
      CounterRng rng(CounterRng::key(seed, 0x1A3u, cellPos[spec.axis]));
      double c = rng.bernoulli() ? spec.c1 : spec.c2;
      out = c * Eigen::MatrixXd::Identity(n, n);
      break;
    }
  }
}

}  // namespace

Environment sampleEnvironmentSide(const EnsembleSpec& spec, int side, std::uint64_t seed, double h) {
  spec.validate();
  Environment env;
  env.grid = Grid(spec.dim, side, h);
  env.degree = spec.degree;
  env.comps = binom(spec.dim, spec.degree);
  env.lambda = spec.lambda;
  env.cells.resize(static_cast<std::size_t>(env.grid.cellCount()) * env.comps * env.comps);
  Pos pos{};
  for (long c = 0; c < env.grid.cellCount(); ++c) {
    env.grid.cellDecode(c, pos);
    drawCell(spec, seed, c, pos, env.cell(c));
  }
  return env;
}

Environment sampleEnvironment(const EnsembleSpec& spec, int m, std::uint64_t seed) {
  int side = 1;
  for (int i = 0; i < m; ++i) side *= 3;
  return sampleEnvironmentSide(spec, side, seed);
}

Environment invertEnv(const Environment& env) {
  Environment out;
  out.grid = env.grid;
  out.degree = env.grid.dim - env.degree;
  out.comps = env.comps;
  out.lambda = env.lambda;
  out.cells.resize(env.cells.size());
  int d = env.grid.dim, r = env.degree, s = d - r;
  int n = env.comps;
  SignTable stc(d, s);
  std::vector<int> comp(n);
  for (int k = 0; k < n; ++k) comp[k] = MultiIndex::fromRank(d, s, k).complement().rank();
  for (long c = 0; c < env.grid.cellCount(); ++c) {
    Eigen::MatrixXd Minv = env.cell(c).inverse();
    auto out_c = out.cell(c);
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) out_c(k, l) = stc(k) * stc(l) * Minv(comp[k], comp[l]);
    Eigen::MatrixXd sym = 0.5 * (out_c + out_c.transpose());
    out_c = sym;
  }
  return out;
}

}  // namespace formhom
