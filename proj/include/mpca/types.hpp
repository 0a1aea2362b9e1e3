#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace mpca {

/// Thrown for malformed inputs: shape mismatches, out-of-range dimensions, bad files.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical routine fails (e.g. eigensolver non-convergence).
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

namespace detail {

/// Absolute tolerance `nominal` for double, widened to a few ulps for lower precision.
template <typename Scalar>
constexpr Scalar tolerance(double nominal) {
  return std::max<Scalar>(static_cast<Scalar>(nominal),
                          Scalar(64) * std::numeric_limits<Scalar>::epsilon());
}

inline std::string shape_str(Index r, Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace detail

/// Matrix with orthonormal columns, MᵀM = I to 1e-10 in Frobenius norm.
template <typename Scalar = double>
class OrthonormalFrame {
  static_assert(std::is_floating_point_v<Scalar>, "Scalar must be a floating point type");

public:
  using MatrixType = Matrix<Scalar>;

  OrthonormalFrame() = default;

  explicit OrthonormalFrame(MatrixType m) : m_(std::move(m)) {
    if (m_.cols() < 1 || m_.rows() < m_.cols())
      throw ValidationError("orthonormal frame must be l x k with 1 <= k <= l, got " +
                            detail::shape_str(m_.rows(), m_.cols()));
    if (!m_.allFinite()) throw ValidationError("orthonormal frame has non-finite entries");
    const Scalar defect =
        (m_.transpose() * m_ - MatrixType::Identity(m_.cols(), m_.cols())).norm();
    if (defect > detail::tolerance<Scalar>(1e-10))
      throw ValidationError("frame columns are not orthonormal (defect " +
                            std::to_string(static_cast<double>(defect)) + ")");
  }

  static OrthonormalFrame identity(Index n) { return OrthonormalFrame(MatrixType::Identity(n, n)); }

  /// Leading k columns of the n x n identity.
  static OrthonormalFrame canonical(Index n, Index k) {
    return OrthonormalFrame(MatrixType::Identity(n, k));
  }

  const MatrixType& matrix() const noexcept { return m_; }
  Index ambient() const noexcept { return m_.rows(); }
  Index rank() const noexcept { return m_.cols(); }

  /// Orthogonal projector M Mᵀ onto the span.
  MatrixType projector() const { return m_ * m_.transpose(); }

  OrthonormalFrame leading(Index k) const { return OrthonormalFrame(MatrixType(m_.leftCols(k))); }

private:
  MatrixType m_;
};

/// n ≥ 2 observations of a fixed p×q shape together with their arithmetic mean.
template <typename Scalar = double>
class MatrixDataset {
public:
  using MatrixType = Matrix<Scalar>;

  MatrixDataset() = default;

  explicit MatrixDataset(std::vector<MatrixType> samples) : samples_(std::move(samples)) {
    if (samples_.empty()) throw ValidationError("dataset is empty");
    if (samples_.size() < 2)
      throw ValidationError("dataset needs at least 2 samples, got " +
                            std::to_string(samples_.size()));
    const Index p = samples_.front().rows();
    const Index q = samples_.front().cols();
    if (p < 1 || q < 1) throw ValidationError("samples must be non-empty matrices");
    mean_ = MatrixType::Zero(p, q);
    for (const auto& x : samples_) {
      if (x.rows() != p || x.cols() != q)
        throw ValidationError("sample shape " + detail::shape_str(x.rows(), x.cols()) +
                              " differs from " + detail::shape_str(p, q));
      if (!x.allFinite()) throw ValidationError("sample has non-finite entries");
      mean_ += x;
    }
    mean_ /= static_cast<Scalar>(samples_.size());
  }

  Index size() const noexcept { return static_cast<Index>(samples_.size()); }
  Index rows() const noexcept { return mean_.rows(); }
  Index cols() const noexcept { return mean_.cols(); }

  const MatrixType& operator[](Index i) const { return samples_[static_cast<std::size_t>(i)]; }
  const std::vector<MatrixType>& samples() const noexcept { return samples_; }
  const MatrixType& mean() const noexcept { return mean_; }

  MatrixDataset transposed() const {
    std::vector<MatrixType> t;
    t.reserve(samples_.size());
    for (const auto& x : samples_) t.emplace_back(x.transpose());
    return MatrixDataset(std::move(t));
  }

private:
  std::vector<MatrixType> samples_;
  MatrixType mean_;
};

/// Covariance of vec(X), m×m with m = pq, together with the (p,q) shape it came from.
template <typename Scalar = double>
struct CovarianceMatrix {
  Matrix<Scalar> entries;
  Index p = 0;
  Index q = 0;

  CovarianceMatrix() = default;
  CovarianceMatrix(Matrix<Scalar> s, Index rows, Index cols)
      : entries(std::move(s)), p(rows), q(cols) {
    if (p < 1 || q < 1 || entries.rows() != p * q || entries.cols() != p * q)
      throw ValidationError("covariance must be pq x pq for shape " + detail::shape_str(p, q));
    if (!entries.allFinite()) throw ValidationError("covariance has non-finite entries");
    const Scalar scale = std::max<Scalar>(entries.norm(), Scalar(1));
    if ((entries - entries.transpose()).norm() > detail::tolerance<Scalar>(1e-12) * scale)
      throw ValidationError("covariance is not symmetric");
  }

  Index dim() const noexcept { return entries.rows(); }
};

enum class ScatterSide { row, column };

/// p×p (row) or q×q (column) symmetric PSD scatter.
template <typename Scalar = double>
struct ScatterMatrix {
  Matrix<Scalar> entries;
  ScatterSide side = ScatterSide::row;
};

/// m×k loading matrix with its eigenvalues (conventional PCA or assembled B ⊗ A).
template <typename Scalar = double>
struct PcaBasis {
  OrthonormalFrame<Scalar> loadings;
  Vector<Scalar> eigenvalues;  // descending; empty when the loadings were not fitted directly
  Index p = 0;
  Index q = 0;
  Matrix<Scalar> mean;  // centering used at fit time; empty for population fits

  Index components() const noexcept { return loadings.rank(); }
};

}  // namespace mpca
