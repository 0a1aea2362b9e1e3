#pragma once

// Vectorization, Kronecker products, centering, covariance and partial scatters.
//
// vec() is column-major throughout: vec(A U Bᵀ) = (B ⊗ A) vec(U). Every on-disk
// format in this project relies on that ordering.

#include "mpca/types.hpp"

namespace mpca {

template <typename Derived>
Vector<typename Derived::Scalar> vec_of(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  Matrix<Scalar> tmp = x;
  return Eigen::Map<const Vector<Scalar>>(tmp.data(), tmp.size());
}

template <typename Derived>
Matrix<typename Derived::Scalar> mat_of(const Eigen::MatrixBase<Derived>& v, Index p, Index q) {
  using Scalar = typename Derived::Scalar;
  if (v.size() != p * q)
    throw ValidationError("mat_of: vector of length " + std::to_string(v.size()) +
                          " cannot be reshaped to " + detail::shape_str(p, q));
  Vector<Scalar> tmp = v;
  return Eigen::Map<const Matrix<Scalar>>(tmp.data(), p, q);
}

/// Kronecker product B ⊗ A.
template <typename DerivedB, typename DerivedA>
Matrix<typename DerivedA::Scalar> kron(const Eigen::MatrixBase<DerivedB>& b,
                                       const Eigen::MatrixBase<DerivedA>& a) {
  using Scalar = typename DerivedA::Scalar;
  Matrix<Scalar> out(b.rows() * a.rows(), b.cols() * a.cols());
  for (Index j = 0; j < b.cols(); ++j)
    for (Index i = 0; i < b.rows(); ++i)
      out.block(i * a.rows(), j * a.cols(), a.rows(), a.cols()) = b(i, j) * a;
  return out;
}

/// Dataset shifted by its own mean; the result has a zero mean.
template <typename Scalar>
MatrixDataset<Scalar> center(const MatrixDataset<Scalar>& data) {
  if (data.size() == 0) throw ValidationError("center: empty dataset");
  std::vector<Matrix<Scalar>> out;
  out.reserve(static_cast<std::size_t>(data.size()));
  for (const auto& x : data.samples()) out.emplace_back(x - data.mean());
  return MatrixDataset<Scalar>(std::move(out));
}

namespace detail {

// Finite data can still overflow once squared; that is a numerical failure, not bad input.
template <typename Scalar>
void require_finite(const Matrix<Scalar>& m, const char* what) {
  if (!m.allFinite()) throw NumericalError(std::string(what) + ": overflow in accumulated scatter");
}

}  // namespace detail

/// m×n design matrix whose i-th column is vec(Xᵢ − X̄).
template <typename Scalar>
Matrix<Scalar> centered_design(const MatrixDataset<Scalar>& data) {
  const Index m = data.rows() * data.cols();
  Matrix<Scalar> z(m, data.size());
  for (Index i = 0; i < data.size(); ++i) {
    const Matrix<Scalar> c = data[i] - data.mean();
    z.col(i) = Eigen::Map<const Vector<Scalar>>(c.data(), m);
  }
  return z;
}

/// Sₙ = (1/n) Σ vec(Xᵢ−X̄) vec(Xᵢ−X̄)ᵀ.
template <typename Scalar>
CovarianceMatrix<Scalar> sample_covariance(const MatrixDataset<Scalar>& data) {
  if (data.size() < 2) throw ValidationError("sample_covariance: need n >= 2");
  const Matrix<Scalar> z = centered_design(data);
  const Index m = z.rows();
  Matrix<Scalar> s = Matrix<Scalar>::Zero(m, m);
  s.template selfadjointView<Eigen::Lower>().rankUpdate(z, Scalar(1) / Scalar(data.size()));
  s.template triangularView<Eigen::StrictlyUpper>() = s.transpose();
  detail::require_finite(s, "sample_covariance");
  return CovarianceMatrix<Scalar>(std::move(s), data.rows(), data.cols());
}

/// (1/n) Σ (Xᵢ−X̄) B Bᵀ (Xᵢ−X̄)ᵀ, a p×p matrix.
template <typename Scalar>
ScatterMatrix<Scalar> partial_row_scatter(const MatrixDataset<Scalar>& data,
                                          const OrthonormalFrame<Scalar>& b) {
  if (b.ambient() != data.cols())
    throw ValidationError("partial_row_scatter: frame has " + std::to_string(b.ambient()) +
                          " rows, data has q = " + std::to_string(data.cols()));
  const Index p = data.rows();
  Matrix<Scalar> s = Matrix<Scalar>::Zero(p, p);
  for (const auto& x : data.samples()) {
    const Matrix<Scalar> y = (x - data.mean()) * b.matrix();
    s.noalias() += y * y.transpose();
  }
  s /= static_cast<Scalar>(data.size());
  detail::require_finite(s, "partial_row_scatter");
  return {Scalar(0.5) * (s + s.transpose()), ScatterSide::row};
}

/// (1/n) Σ (Xᵢ−X̄)ᵀ A Aᵀ (Xᵢ−X̄), a q×q matrix.
template <typename Scalar>
ScatterMatrix<Scalar> partial_col_scatter(const MatrixDataset<Scalar>& data,
                                          const OrthonormalFrame<Scalar>& a) {
  if (a.ambient() != data.rows())
    throw ValidationError("partial_col_scatter: frame has " + std::to_string(a.ambient()) +
                          " rows, data has p = " + std::to_string(data.rows()));
  const Index q = data.cols();
  Matrix<Scalar> s = Matrix<Scalar>::Zero(q, q);
  for (const auto& x : data.samples()) {
    const Matrix<Scalar> y = a.matrix().transpose() * (x - data.mean());
    s.noalias() += y.transpose() * y;
  }
  s /= static_cast<Scalar>(data.size());
  detail::require_finite(s, "partial_col_scatter");
  return {Scalar(0.5) * (s + s.transpose()), ScatterSide::column};
}

/// Σⱼ (bⱼ ⊗ I_p)ᵀ Σ (bⱼ ⊗ I_p).
template <typename Scalar>
ScatterMatrix<Scalar> population_partial_row_scatter(const CovarianceMatrix<Scalar>& sigma,
                                                     const OrthonormalFrame<Scalar>& b) {
  if (b.ambient() != sigma.q)
    throw ValidationError("population_partial_row_scatter: frame has " +
                          std::to_string(b.ambient()) + " rows, covariance has q = " +
                          std::to_string(sigma.q));
  const Index p = sigma.p;
  const Index q = sigma.q;
  Matrix<Scalar> s = Matrix<Scalar>::Zero(p, p);
  for (Index j = 0; j < b.rank(); ++j) {
    // Σ (bⱼ ⊗ I_p) as a sum of p-wide column blocks, then the matching row blocks.
    Matrix<Scalar> right = Matrix<Scalar>::Zero(p * q, p);
    for (Index l = 0; l < q; ++l) right += b.matrix()(l, j) * sigma.entries.middleCols(l * p, p);
    for (Index k = 0; k < q; ++k) s += b.matrix()(k, j) * right.middleRows(k * p, p);
  }
  return {Scalar(0.5) * (s + s.transpose()), ScatterSide::row};
}

/// Σᵢ (I_q ⊗ aᵢ)ᵀ Σ (I_q ⊗ aᵢ).
template <typename Scalar>
ScatterMatrix<Scalar> population_partial_col_scatter(const CovarianceMatrix<Scalar>& sigma,
                                                     const OrthonormalFrame<Scalar>& a) {
  if (a.ambient() != sigma.p)
    throw ValidationError("population_partial_col_scatter: frame has " +
                          std::to_string(a.ambient()) + " rows, covariance has p = " +
                          std::to_string(sigma.p));
  const Index p = sigma.p;
  const Index q = sigma.q;
  Matrix<Scalar> s = Matrix<Scalar>::Zero(q, q);
  for (Index i = 0; i < a.rank(); ++i) {
    const auto ai = a.matrix().col(i);
    Matrix<Scalar> right(p * q, q);  // Σ (I_q ⊗ aᵢ)
    for (Index c = 0; c < q; ++c) right.col(c) = sigma.entries.middleCols(c * p, p) * ai;
    for (Index r = 0; r < q; ++r) s.row(r) += ai.transpose() * right.middleRows(r * p, p);
  }
  return {Scalar(0.5) * (s + s.transpose()), ScatterSide::column};
}

/// ‖M₁M₁ᵀ − M₂M₂ᵀ‖_F; zero iff the spans coincide.
template <typename Scalar>
Scalar projection_distance(const OrthonormalFrame<Scalar>& m1, const OrthonormalFrame<Scalar>& m2) {
  if (m1.ambient() != m2.ambient())
    throw ValidationError("projection_distance: ambient dimensions differ (" +
                          std::to_string(m1.ambient()) + " vs " + std::to_string(m2.ambient()) +
                          ")");
  return (m1.projector() - m2.projector()).norm();
}

/// ‖(I − P_sup) M_sub‖_F, the part of span(M_sub) outside span(M_sup).
template <typename Scalar>
Scalar containment_residual(const OrthonormalFrame<Scalar>& sub,
                            const OrthonormalFrame<Scalar>& sup) {
  if (sub.ambient() != sup.ambient())
    throw ValidationError("span_contained: ambient dimensions differ (" +
                          std::to_string(sub.ambient()) + " vs " + std::to_string(sup.ambient()) +
                          ")");
  const Matrix<Scalar>& s = sub.matrix();
  return (s - sup.matrix() * (sup.matrix().transpose() * s)).norm();
}

template <typename Scalar>
bool span_contained(const OrthonormalFrame<Scalar>& sub, const OrthonormalFrame<Scalar>& sup,
                    Scalar tol) {
  return containment_residual(sub, sup) <= tol;
}

}  // namespace mpca
