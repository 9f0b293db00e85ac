#include "dantzig/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dantzig/errors.hpp"

namespace dantzig {

IndexSet::IndexSet(std::vector<int> indices) : indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    if (indices_[k] < 0)
      throw InvalidArgument("negative index " + std::to_string(indices_[k]));
    if (k > 0 && indices_[k] == indices_[k - 1])
      throw InvalidArgument("duplicate index " + std::to_string(indices_[k]));
  }
}

IndexSet IndexSet::range(int begin, int end) {
  std::vector<int> v;
  for (int i = begin; i < end; ++i) v.push_back(i);
  return IndexSet(std::move(v));
}

IndexSet IndexSet::from_mask(std::span<const bool> mask) {
  std::vector<int> v;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) v.push_back(static_cast<int>(i));
  return IndexSet(std::move(v));
}

bool IndexSet::contains(int index) const {
  return std::binary_search(indices_.begin(), indices_.end(), index);
}

void IndexSet::check_bound(std::size_t p) const {
  if (!indices_.empty() && static_cast<std::size_t>(indices_.back()) >= p)
    throw InvalidArgument("index " + std::to_string(indices_.back()) +
                          " out of range for p = " + std::to_string(p));
}

IndexSet IndexSet::unite(const IndexSet& other) const {
  std::vector<int> out;
  std::set_union(begin(), end(), other.begin(), other.end(),
                 std::back_inserter(out));
  IndexSet r;
  r.indices_ = std::move(out);
  return r;
}

IndexSet IndexSet::minus(const IndexSet& other) const {
  std::vector<int> out;
  std::set_difference(begin(), end(), other.begin(), other.end(),
                      std::back_inserter(out));
  IndexSet r;
  r.indices_ = std::move(out);
  return r;
}

IndexSet IndexSet::complement(std::size_t p) const {
  return range(0, static_cast<int>(p)).minus(*this);
}

bool IndexSet::disjoint(const IndexSet& other) const {
  auto a = begin(), b = other.begin();
  while (a != end() && b != other.end()) {
    if (*a == *b) return false;
    if (*a < *b) ++a; else ++b;
  }
  return true;
}

DesignMatrix::DesignMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() < 1 || entries_.cols() < 1)
    throw InvalidArgument("design matrix must have n >= 1 and p >= 1");
  if (!entries_.allFinite())
    throw InvalidArgument("design matrix has non-finite entries");
  column_norms_ = entries_.colwise().norm().transpose();
  normalized_ = ((column_norms_.array() - 1.0).abs() <= kUnitNormTolerance).all();
}

Matrix DesignMatrix::columns(const IndexSet& set) const {
  set.check_bound(static_cast<std::size_t>(cols()));
  Matrix out(rows(), static_cast<Eigen::Index>(set.size()));
  for (std::size_t k = 0; k < set.size(); ++k)
    out.col(static_cast<Eigen::Index>(k)) = entries_.col(set[k]);
  return out;
}

Matrix DesignMatrix::gram() const {
  Matrix g(cols(), cols());
  g.setZero();
  g.selfadjointView<Eigen::Lower>().rankUpdate(entries_.transpose());
  return g.selfadjointView<Eigen::Lower>();
}

NormalizedColumns normalize_columns(const Matrix& m) {
  if (m.rows() < 1 || m.cols() < 1)
    throw InvalidArgument("matrix must have n >= 1 and p >= 1");
  Vector scales = m.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < scales.size(); ++j)
    if (!(scales(j) > 0.0)) throw ZeroColumnError(static_cast<std::size_t>(j));
  Matrix out = m * scales.cwiseInverse().asDiagonal();
  return {DesignMatrix(std::move(out)), std::move(scales)};
}

Vector ls_on_support(const DesignMatrix& x, const Vector& y,
                     const IndexSet& support, double rank_tol) {
  if (y.size() != x.rows())
    throw DimensionMismatch("y has length " + std::to_string(y.size()) +
                            ", X has " + std::to_string(x.rows()) + " rows");
  if (support.empty()) return Vector(0);
  Matrix xi = x.columns(support);
  if (xi.cols() > xi.rows())
    throw RankDeficient("support of size " + std::to_string(xi.cols()) +
                            " exceeds n = " + std::to_string(xi.rows()),
                        0.0, xi.norm());
  Eigen::JacobiSVD<Matrix> svd(xi, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  double smax = sv(0), smin = sv(sv.size() - 1);
  if (!(smin > rank_tol * smax))
    throw RankDeficient("X_I is rank deficient (|I| = " +
                            std::to_string(support.size()) + ")",
                        smin, smax);
  return svd.solve(y);
}

namespace {

constexpr Eigen::Index kBlock = 64;

// In-place lower Cholesky of a block, offset gives pivot numbering.
void unblocked_cholesky(Eigen::Ref<Matrix> a, Eigen::Index offset) {
  const Eigen::Index m = a.rows();
  for (Eigen::Index j = 0; j < m; ++j) {
    double pivot = a(j, j);
    if (j > 0) pivot -= a.row(j).head(j).squaredNorm();
    if (!(pivot > 0.0) || !std::isfinite(pivot))
      throw FactorizationError(static_cast<std::size_t>(offset + j), pivot);
    double l = std::sqrt(pivot);
    a(j, j) = l;
    if (j + 1 < m) {
      Eigen::Index rest = m - j - 1;
      if (j > 0)
        a.col(j).tail(rest).noalias() -=
            a.bottomLeftCorner(rest, j) * a.row(j).head(j).transpose();
      a.col(j).tail(rest) /= l;
    }
  }
}

}  // namespace

SpdFactor::SpdFactor(const Matrix& a) {
  const Eigen::Index m = a.rows();
  if (a.cols() != m) throw DimensionMismatch("matrix is not square");
  scale_.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!(a(i, i) > 0.0) || !std::isfinite(a(i, i)))
      throw FactorizationError(static_cast<std::size_t>(i), a(i, i));
    scale_(i) = 1.0 / std::sqrt(a(i, i));
  }
  // Lower triangle of the Jacobi-scaled matrix; upper part is ignored.
  lower_ = scale_.asDiagonal() * a * scale_.asDiagonal();
  for (Eigen::Index k = 0; k < m; k += kBlock) {
    Eigen::Index b = std::min(kBlock, m - k);
    Eigen::Index rest = m - k - b;
    unblocked_cholesky(lower_.block(k, k, b, b), k);
    if (rest > 0) {
      // panel := panel * L11^{-T}
      Matrix p = lower_.block(k + b, k, rest, b);
      lower_.block(k, k, b, b)
          .transpose()
          .triangularView<Eigen::Upper>()
          .solveInPlace<Eigen::OnTheRight>(p);
      lower_.block(k + b, k, rest, b) = p;
      lower_.block(k + b, k + b, rest, rest)
          .selfadjointView<Eigen::Lower>()
          .rankUpdate(p, -1.0);
    }
  }
  lower_.triangularView<Eigen::StrictlyUpper>().setZero();
}

Vector SpdFactor::solve(const Vector& rhs) const {
  if (rhs.size() != lower_.rows())
    throw DimensionMismatch("right-hand side has length " +
                            std::to_string(rhs.size()) + ", system has " +
                            std::to_string(lower_.rows()));
  Vector z = scale_.cwiseProduct(rhs);
  lower_.triangularView<Eigen::Lower>().solveInPlace(z);
  lower_.transpose().triangularView<Eigen::Upper>().solveInPlace(z);
  return scale_.cwiseProduct(z);
}

Vector spd_solve(const Matrix& a, const Vector& rhs) {
  return SpdFactor(a).solve(rhs);
}

namespace {

// H v with H = diag(d) + X^T G X, G = X diag(w) X^T.
Vector apply_weighted_gram(const Vector& d, const Matrix& x, const Matrix& g,
                           const Vector& v) {
  Vector xv = x * v;
  Vector gxv = g * xv;
  Vector out = x.transpose() * gxv;
  out += d.cwiseProduct(v);
  return out;
}

}  // namespace

Vector smw_solve(const Vector& d, const DesignMatrix& x, const Vector& w,
                 const Vector& rhs) {
  const Matrix& xm = x.entries();
  const Eigen::Index n = xm.rows(), p = xm.cols();
  if (d.size() != p || w.size() != p || rhs.size() != p)
    throw DimensionMismatch("smw_solve expects p-vectors with p = " +
                            std::to_string(p));
  if ((d.array() <= 0.0).any())
    throw InvalidArgument("smw_solve needs a positive diagonal");
  Vector dinv = d.cwiseInverse();
  Matrix g(n, n), wd(n, n);
  g.setZero();
  wd.setZero();
  g.selfadjointView<Eigen::Lower>().rankUpdate(xm * w.cwiseSqrt().asDiagonal());
  wd.selfadjointView<Eigen::Lower>().rankUpdate(xm *
                                                dinv.cwiseSqrt().asDiagonal());
  Matrix gs = g.selfadjointView<Eigen::Lower>();
  Matrix wds = wd.selfadjointView<Eigen::Lower>();
  // H^{-1} = D^{-1} - D^{-1} X^T (I + G Wd)^{-1} G X D^{-1}
  Matrix k = Matrix::Identity(n, n) + gs * wds;
  Eigen::PartialPivLU<Matrix> lu(k);
  double rcond = lu.rcond();
  if (!(rcond > 1e-14))
    throw SingularSystem("inner n x n system is singular (rcond " +
                         std::to_string(rcond) + ")");
  auto apply_inverse = [&](const Vector& r) {
    Vector dr = dinv.cwiseProduct(r);
    Vector inner = lu.solve(gs * (xm * dr));
    return Vector(dr - dinv.cwiseProduct(xm.transpose() * inner));
  };
  Vector sol = apply_inverse(rhs);
  const double target = 1e-10 * (1.0 + rhs.norm());
  for (int pass = 0; pass < 3; ++pass) {
    Vector res = rhs - apply_weighted_gram(d, xm, gs, sol);
    if (res.norm() <= target) break;
    sol += apply_inverse(res);
  }
  Vector res = rhs - apply_weighted_gram(d, xm, gs, sol);
  if (!sol.allFinite() || res.norm() > 1e-8 * (1.0 + rhs.norm()))
    throw SingularSystem("SMW residual " + std::to_string(res.norm()) +
                         " above tolerance");
  return sol;
}

Vector dense_weighted_gram_solve(const Vector& d, const Matrix& gram,
                                 const Vector& w, const Vector& rhs) {
  Matrix h = gram * w.asDiagonal() * gram;
  h.diagonal() += d;
  return spd_solve(h, rhs);
}

double orthonormality_defect(const DesignMatrix& x) {
  Matrix g = x.gram();
  g.diagonal().array() -= 1.0;
  return g.cwiseAbs().maxCoeff();
}

}  // namespace dantzig
