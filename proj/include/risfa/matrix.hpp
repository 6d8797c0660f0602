// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace risfa {

using cxd = std::complex<double>;

// Dense complex matrices back every quantity in the toolkit. Eigen's default
// column-major storage matches the column-wise vec() convention used
// throughout, so reshapes are views rather than copies.
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

class DimensionError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Input that is structurally valid but mathematically unusable (all-zero
// normalizer, zero pilot, ...).
class DegenerateInputError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline bool all_finite(const CMatrix& a) { return a.allFinite(); }

/// Third-order complex tensor stored as an ordered list of equally shaped
/// frontal slices (d1 x d2, d3 of them).
class CTensor3 {
 public:
  CTensor3() = default;

  explicit CTensor3(std::vector<CMatrix> slices) : slices_(std::move(slices)) {
    if (slices_.empty()) throw DimensionError("CTensor3: needs at least one slice");
    const auto r = slices_.front().rows();
    const auto c = slices_.front().cols();
    if (r < 1 || c < 1) throw DimensionError("CTensor3: slices must be non-empty");
    for (const auto& s : slices_) {
      if (s.rows() != r || s.cols() != c)
        throw DimensionError("CTensor3: slices differ in shape");
      if (!s.allFinite()) throw DimensionError("CTensor3: non-finite entry");
    }
  }

  static CTensor3 zeros(Eigen::Index d1, Eigen::Index d2, Eigen::Index d3) {
    return CTensor3(std::vector<CMatrix>(static_cast<std::size_t>(d3), CMatrix::Zero(d1, d2)));
  }

  Eigen::Index dim1() const { return slices_.front().rows(); }
  Eigen::Index dim2() const { return slices_.front().cols(); }
  Eigen::Index dim3() const { return static_cast<Eigen::Index>(slices_.size()); }

  const CMatrix& slice(Eigen::Index s) const { return slices_.at(static_cast<std::size_t>(s)); }
  CMatrix& slice(Eigen::Index s) { return slices_.at(static_cast<std::size_t>(s)); }

  const std::vector<CMatrix>& slices() const { return slices_; }

 private:
  std::vector<CMatrix> slices_;
};

/// Kronecker product: block (i,j) of the result is a(i,j) * b.
inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Khatri-Rao (column-wise Kronecker) product; inputs must have equal column
/// counts.
inline CMatrix khatri_rao(const CMatrix& a, const CMatrix& b) {
  if (a.cols() != b.cols())
    throw DimensionError("khatri_rao: column counts differ (" + std::to_string(a.cols()) +
                         " vs " + std::to_string(b.cols()) + ")");
  CMatrix out(a.rows() * b.rows(), a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      out.block(i * b.rows(), j, b.rows(), 1) = a(i, j) * b.col(j);
  return out;
}

/// Column-major vectorization: stacks the columns of a in order.
inline CVector vec(const CMatrix& a) { return a.reshaped(); }

/// Inverse of vec for the given target shape.
inline CMatrix unvec(const CVector& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols)
    throw DimensionError("unvec: vector length " + std::to_string(v.size()) +
                         " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
  return v.reshaped(rows, cols);
}

/// Square diagonal matrix holding row i of c on its main diagonal.
inline CMatrix diag_from_row(const CMatrix& c, Eigen::Index i) {
  if (i < 0 || i >= c.rows())
    throw std::out_of_range("diag_from_row: row " + std::to_string(i) + " out of range");
  CMatrix out = CMatrix::Zero(c.cols(), c.cols());
  out.diagonal() = c.row(i).transpose();
  return out;
}

inline double fro_norm(const CMatrix& a) { return a.norm(); }

inline double fro_norm(const CTensor3& t) {
  double acc = 0.0;
  for (const auto& s : t.slices()) acc += s.squaredNorm();
  return std::sqrt(acc);
}

// Singular values at or below rel_tol * sigma_max are truncated in pinv and
// pinv_solve; exposed everywhere a pseudo-inverse is taken.
inline constexpr double kDefaultPinvRelTol = 1e-12;

struct PinvResult {
  CMatrix value;
  Eigen::Index effective_rank = 0;
};

struct LsqSolution {
  CMatrix value;
  Eigen::Index effective_rank = 0;
};

namespace detail {

inline Eigen::Index truncation_rank(const Eigen::VectorXd& sv, double rel_tol) {
  if (sv.size() == 0) return 0;
  const double cutoff = rel_tol * sv(0);
  Eigen::Index r = 0;
  while (r < sv.size() && sv(r) > cutoff && sv(r) > 0.0) ++r;
  return r;
}

}  // namespace detail

/// Moore-Penrose pseudo-inverse by SVD with relative singular-value
/// truncation. Rank deficiency is not an error; the effective rank after
/// truncation is reported alongside the result.
inline PinvResult pinv(const CMatrix& a, double rel_tol = kDefaultPinvRelTol) {
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::Index r = detail::truncation_rank(svd.singularValues(), rel_tol);
  if (r == 0) return {CMatrix::Zero(a.cols(), a.rows()), 0};
  const CMatrix u = svd.matrixU().leftCols(r);
  const CMatrix v = svd.matrixV().leftCols(r);
  const Eigen::VectorXd inv_sv = svd.singularValues().head(r).cwiseInverse();
  return {v * inv_sv.asDiagonal() * u.adjoint(), r};
}

/// Minimum-norm least-squares solution pinv(a) * b computed through the same
/// truncated SVD as pinv, without forming the pseudo-inverse explicitly.
inline LsqSolution pinv_solve(const CMatrix& a, const CMatrix& b,
                              double rel_tol = kDefaultPinvRelTol) {
  if (a.rows() != b.rows())
    throw DimensionError("pinv_solve: lhs has " + std::to_string(a.rows()) +
                         " rows, rhs has " + std::to_string(b.rows()));
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::Index r = detail::truncation_rank(svd.singularValues(), rel_tol);
  if (r == 0) return {CMatrix::Zero(a.cols(), b.cols()), 0};
  const Eigen::VectorXd inv_sv = svd.singularValues().head(r).cwiseInverse();
  CMatrix x = svd.matrixV().leftCols(r) *
              (inv_sv.asDiagonal() * (svd.matrixU().leftCols(r).adjoint() * b));
  return {std::move(x), r};
}

}  // namespace risfa
