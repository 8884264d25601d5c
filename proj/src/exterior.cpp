#include "formhom/exterior.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <stdexcept>

namespace formhom {

int binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long v = 1;
  for (int i = 0; i < k; ++i) v = v * (n - i) / (i + 1);
  return static_cast<int>(v);
}

MultiIndex::MultiIndex(int d, std::vector<int> idx) : dim(d), indices(std::move(idx)) {
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= d) throw std::invalid_argument("MultiIndex: axis out of range");
    if (i > 0 && indices[i] <= indices[i - 1]) throw std::invalid_argument("MultiIndex: not strictly increasing");
  }
}

int MultiIndex::rank() const {
  // lexicographic rank among all C(d,r) increasing subsets
  int r = degree();
  int rank = 0;
  int prev = -1;
  for (int pos = 0; pos < r; ++pos) {
    for (int a = prev + 1; a < indices[pos]; ++a) rank += binom(dim - a - 1, r - pos - 1);
    prev = indices[pos];
  }
  return rank;
}

bool MultiIndex::contains(int axis) const {
  return std::binary_search(indices.begin(), indices.end(), axis);
}

MultiIndex MultiIndex::complement() const {
  std::vector<int> comp;
  comp.reserve(dim - degree());
  for (int a = 0; a < dim; ++a)
    if (!contains(a)) comp.push_back(a);
  return MultiIndex(dim, std::move(comp));
}

MultiIndex MultiIndex::fromRank(int d, int r, int rank) {
  std::vector<int> idx(r);
  int prev = -1;
  for (int pos = 0; pos < r; ++pos) {
    for (int a = prev + 1; a <= d - (r - pos); ++a) {
      int block = binom(d - a - 1, r - pos - 1);
      if (rank < block) {
        idx[pos] = a;
        prev = a;
        break;
      }
      rank -= block;
    }
  }
  return MultiIndex(d, std::move(idx));
}

int permutationSign(const std::vector<int>& perm) {
  int inv = 0;
  for (std::size_t i = 0; i < perm.size(); ++i)
    for (std::size_t j = i + 1; j < perm.size(); ++j) {
      if (perm[i] == perm[j]) return 0;
      if (perm[i] > perm[j]) ++inv;
    }
  return (inv % 2 == 0) ? 1 : -1;
}

SignTable::SignTable(int d, int r) : dim(d), degree(r), sigma(binom(d, r)) {
  for (int rk = 0; rk < binom(d, r); ++rk) {
    MultiIndex I = MultiIndex::fromRank(d, r, rk);
    MultiIndex Ic = I.complement();
    std::vector<int> perm = I.indices;
    perm.insert(perm.end(), Ic.indices.begin(), Ic.indices.end());
    sigma[rk] = permutationSign(perm);
  }
}

AltForm::AltForm(int d, int r) : dim(d), degree(r), coeffs(Eigen::VectorXd::Zero(binom(d, r))) {
  if (r < 0 || r > d) throw std::invalid_argument("AltForm: degree out of range");
}

AltForm::AltForm(int d, int r, Eigen::VectorXd c) : dim(d), degree(r), coeffs(std::move(c)) {
  if (r < 0 || r > d) throw std::invalid_argument("AltForm: degree out of range");
  if (coeffs.size() != binom(d, r)) throw std::invalid_argument("AltForm: coefficient count mismatch");
}

AltForm AltForm::basis(int d, int r, int rank) {
  AltForm a(d, r);
  a.coeffs(rank) = 1.0;
  return a;
}

AltForm& AltForm::operator+=(const AltForm& o) {
  if (dim != o.dim || degree != o.degree) throw std::invalid_argument("AltForm: mismatched operands");
  coeffs += o.coeffs;
  return *this;
}

AltForm& AltForm::operator-=(const AltForm& o) {
  if (dim != o.dim || degree != o.degree) throw std::invalid_argument("AltForm: mismatched operands");
  coeffs -= o.coeffs;
  return *this;
}

AltForm& AltForm::operator*=(double t) {
  coeffs *= t;
  return *this;
}

AltForm operator+(AltForm a, const AltForm& b) { return a += b; }
AltForm operator-(AltForm a, const AltForm& b) { return a -= b; }
AltForm operator*(double t, AltForm a) { return a *= t; }

AltForm wedge(const AltForm& alpha, const AltForm& beta) {
  if (alpha.dim != beta.dim) throw std::invalid_argument("wedge: dimension mismatch");
  int d = alpha.dim;
  int m = alpha.degree, s = beta.degree;
  if (m + s > d) return AltForm::zero(d, d);  // over-degree products vanish identically
  AltForm out(d, m + s);
  for (int ia = 0; ia < binom(d, m); ++ia) {
    if (alpha.coeffs(ia) == 0.0) continue;
    MultiIndex I = MultiIndex::fromRank(d, m, ia);
    for (int ib = 0; ib < binom(d, s); ++ib) {
      if (beta.coeffs(ib) == 0.0) continue;
      MultiIndex J = MultiIndex::fromRank(d, s, ib);
      std::vector<int> cat = I.indices;
      cat.insert(cat.end(), J.indices.begin(), J.indices.end());
      int sign = permutationSign(cat);
      if (sign == 0) continue;
      std::sort(cat.begin(), cat.end());
      int rk = MultiIndex(d, cat).rank();
      out.coeffs(rk) += sign * alpha.coeffs(ia) * beta.coeffs(ib);
    }
  }
  return out;
}

AltForm hodgeStar(const AltForm& alpha) {
  int d = alpha.dim, r = alpha.degree;
  SignTable st(d, r);
  AltForm out(d, d - r);
  for (int ia = 0; ia < binom(d, r); ++ia) {
    MultiIndex I = MultiIndex::fromRank(d, r, ia);
    out.coeffs(I.complement().rank()) = st(ia) * alpha.coeffs(ia);
  }
  return out;
}

double starWedgeScalar(const AltForm& p, const AltForm& q) {
  if (p.dim != q.dim || p.degree + q.degree != p.dim)
    throw std::invalid_argument("starWedgeScalar: degrees not complementary");
  int d = p.dim, r = p.degree;
  SignTable st(d, r);
  double acc = 0.0;
  for (int ia = 0; ia < binom(d, r); ++ia) {
    MultiIndex I = MultiIndex::fromRank(d, r, ia);
    acc += st(ia) * p.coeffs(ia) * q.coeffs(I.complement().rank());
  }
  return acc;
}

Eigen::MatrixXd hodgeMatrix(int d, int r) {
  int nr = binom(d, r);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(nr, nr);  // C(d,d-r) == C(d,r)
  SignTable st(d, r);
  for (int ia = 0; ia < nr; ++ia) {
    MultiIndex I = MultiIndex::fromRank(d, r, ia);
    H(I.complement().rank(), ia) = st(ia);
  }
  return H;
}

EnergyMatrix::EnergyMatrix(int d, int r, double lam, Eigen::MatrixXd m)
    : dim(d), degree(r), lambda(lam), M(std::move(m)) {
  int n = binom(d, r);
  if (M.rows() != n || M.cols() != n) throw std::invalid_argument("EnergyMatrix: size mismatch");
  if (lam <= 0.0 || lam > 1.0) throw std::invalid_argument("EnergyMatrix: lambda outside (0,1]");
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("EnergyMatrix: not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  if (lo < lambda - 1e-10 || hi > 1.0 / lambda + 1e-10)
    throw std::invalid_argument("EnergyMatrix: spectrum outside ellipticity window");
}

AltForm EnergyMatrix::apply(const AltForm& p) const {
  if (p.dim != dim || p.degree != degree) throw std::invalid_argument("EnergyMatrix::apply: degree mismatch");
  return hodgeStar(AltForm(dim, degree, M * p.coeffs));
}

EnergyMatrix energyMatrixOfStar(int d, int r, double c, double lambda) {
  if (c < lambda - 1e-12 || c > 1.0 / lambda + 1e-12)
    throw std::invalid_argument("energyMatrixOfStar: scale outside ellipticity window");
  int n = binom(d, r);
  return EnergyMatrix(d, r, lambda, c * Eigen::MatrixXd::Identity(n, n));
}

EnergyMatrix invertCoeff(const EnergyMatrix& em) {
  int d = em.dim, r = em.degree;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(em.M);
  if (!lu.isInvertible()) throw std::runtime_error("invertCoeff: singular energy matrix");
  return EnergyMatrix(d, d - r, em.lambda, invertEnergyMatrixRaw(em.M, d, r));
}

Eigen::MatrixXd invertEnergyMatrixRaw(const Eigen::MatrixXd& M, int d, int r) {
  int s = d - r;
  int n = binom(d, r);
  Eigen::MatrixXd Minv = M.inverse();
  SignTable stc(d, s);
  Eigen::MatrixXd Mp(n, n);
  for (int k = 0; k < n; ++k) {
    int kc = MultiIndex::fromRank(d, s, k).complement().rank();
    for (int l = 0; l < n; ++l) {
      int lc = MultiIndex::fromRank(d, s, l).complement().rank();
      Mp(k, l) = stc(k) * stc(l) * Minv(kc, lc);
    }
  }
  return 0.5 * (Mp + Mp.transpose().eval());
}

AltForm applyInverse(const EnergyMatrix& invEm, const AltForm& q) {
  if (q.dim != invEm.dim || q.degree != invEm.degree)
    throw std::invalid_argument("applyInverse: degree mismatch");
  int s = invEm.degree, d = invEm.dim;
  double sign = ((s * (d - s)) % 2 == 0) ? 1.0 : -1.0;
  AltForm out = hodgeStar(AltForm(d, s, invEm.M * q.coeffs));
  out.coeffs *= sign;
  return out;
}

}  // namespace formhom
