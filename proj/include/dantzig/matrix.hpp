#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace dantzig {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Column norms within this distance of one count as unit-normed.
inline constexpr double kUnitNormTolerance = 1e-10;

/// Strictly increasing list of column indices.
class IndexSet {
 public:
  IndexSet() = default;
  /// Sorts and validates; duplicates or negative entries throw.
  explicit IndexSet(std::vector<int> indices);
  IndexSet(std::initializer_list<int> indices)
      : IndexSet(std::vector<int>(indices)) {}

  static IndexSet range(int begin, int end);
  /// {i : mask[i]}
  static IndexSet from_mask(std::span<const bool> mask);

  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  int operator[](std::size_t k) const { return indices_[k]; }
  bool contains(int index) const;
  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }
  const std::vector<int>& indices() const { return indices_; }

  /// Throws InvalidArgument unless every index is < p.
  void check_bound(std::size_t p) const;

  IndexSet unite(const IndexSet& other) const;
  IndexSet minus(const IndexSet& other) const;
  /// [0, p) \ this
  IndexSet complement(std::size_t p) const;
  bool disjoint(const IndexSet& other) const;

  friend bool operator==(const IndexSet&, const IndexSet&) = default;

 private:
  std::vector<int> indices_;
};

/// The n x p predictor matrix X together with its column norms.
class DesignMatrix {
 public:
  /// Validates shape and finiteness and records the column norms.
  explicit DesignMatrix(Matrix entries);

  const Matrix& entries() const { return entries_; }
  const Vector& column_norms() const { return column_norms_; }
  bool normalized() const { return normalized_; }
  Eigen::Index rows() const { return entries_.rows(); }
  Eigen::Index cols() const { return entries_.cols(); }
  auto col(Eigen::Index j) const { return entries_.col(j); }

  /// Columns listed in `set`, in order.
  Matrix columns(const IndexSet& set) const;
  /// X^T X
  Matrix gram() const;

 private:
  Matrix entries_;
  Vector column_norms_;
  bool normalized_ = false;
};

struct NormalizedColumns {
  DesignMatrix matrix;
  /// Original column norms: original = matrix * diag(scales).
  Vector scales;
};

/// Rescales every column to unit Euclidean norm. Throws ZeroColumnError.
NormalizedColumns normalize_columns(const Matrix& m);

/// Least-squares coefficients of y regressed on the columns in `support`.
/// Throws RankDeficient when sigma_min < rank_tol * sigma_max.
Vector ls_on_support(const DesignMatrix& x, const Vector& y,
                     const IndexSet& support, double rank_tol = 1e-8);

/// Solves A x = rhs for symmetric positive-definite A by a blocked Cholesky
/// factorization of the Jacobi-scaled matrix. Throws FactorizationError with
/// the index of the first non-positive pivot.
Vector spd_solve(const Matrix& a, const Vector& rhs);

/// Cholesky factor that reports the failing pivot, reusable for several
/// right-hand sides.
class SpdFactor {
 public:
  explicit SpdFactor(const Matrix& a);
  Vector solve(const Vector& rhs) const;
  Eigen::Index size() const { return lower_.rows(); }

 private:
  Matrix lower_;
  Vector scale_;
};

/// Solves (diag(d) + X^T B) x = rhs with B = X diag(w) X^T X through the
/// Sherman-Morrison-Woodbury identity, so only an n x n system is factored.
/// The p x p matrix is never formed. Throws SingularSystem when the inner
/// system is singular or the refined residual stays above 1e-8 relative.
Vector smw_solve(const Vector& d, const DesignMatrix& x, const Vector& w,
                 const Vector& rhs);

/// The same system assembled densely and solved with spd_solve.
Vector dense_weighted_gram_solve(const Vector& d, const Matrix& gram,
                                 const Vector& w, const Vector& rhs);

/// max_ij |(X^T X - I)_ij|
double orthonormality_defect(const DesignMatrix& x);

}  // namespace dantzig
