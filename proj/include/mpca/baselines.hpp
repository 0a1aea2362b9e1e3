#pragma once

// Baselines against which MPCA is compared: conventional PCA on vec(X) and
// (2D)²PCA, which takes leading eigenvectors of the full row and column scatters
// in one pass without alternation.

#include "mpca/eigensolver.hpp"
#include "mpca/linalg.hpp"

#include <cstdint>

namespace mpca {

template <typename Scalar = double>
struct TwoDPcaBasis {
  OrthonormalFrame<Scalar> Astar;
  OrthonormalFrame<Scalar> Bstar;
  Vector<Scalar> lambdaStar;
  Vector<Scalar> xiStar;
  Matrix<Scalar> mean;
};

enum class MethodKind { pca, mpca };

/// Free parameters in one basis element of a p×q image: pq − 1 for a unit vector
/// in ℝ^{pq}, (p − 1) + (q − 1) for a Kronecker product of unit vectors.
inline std::int64_t free_parameter_count(MethodKind kind, std::int64_t p, std::int64_t q) {
  if (p < 1 || q < 1) throw ValidationError("free_parameter_count: p and q must be >= 1");
  return kind == MethodKind::pca ? p * q - 1 : (p - 1) + (q - 1);
}

namespace detail {

/// Extends orthonormal columns to k columns with canonical vectors (double Gram-Schmidt).
template <typename Scalar>
Matrix<Scalar> complete_frame(const Matrix<Scalar>& u, Index k) {
  const Index m = u.rows();
  Matrix<Scalar> out(m, k);
  out.leftCols(u.cols()) = u;
  Index have = u.cols();
  for (Index e = 0; e < m && have < k; ++e) {
    Vector<Scalar> v = Vector<Scalar>::Unit(m, e);
    for (int pass = 0; pass < 2; ++pass)
      v -= out.leftCols(have) * (out.leftCols(have).transpose() * v);
    const Scalar nv = v.norm();
    if (nv > Scalar(0.5)) out.col(have++) = v / nv;
  }
  return out;
}

}  // namespace detail

/// Leading k eigenpairs of Sₙ. Uses the n×n Gram matrix when n < m.
template <typename Scalar>
PcaBasis<Scalar> pca_fit(const MatrixDataset<Scalar>& data, Index k) {
  const Index m = data.rows() * data.cols();
  if (k < 1 || k > m)
    throw ValidationError("pca_fit: k = " + std::to_string(k) + " out of range [1, " +
                          std::to_string(m) + "]");
  const Index n = data.size();
  PcaBasis<Scalar> out;
  out.p = data.rows();
  out.q = data.cols();
  out.mean = data.mean();

  if (n >= m) {
    auto e = sym_eig(sample_covariance(data).entries, k);
    out.eigenvalues = clamp_psd<Scalar>(e.eigenvalues, e.eigenvalues(0));
    out.loadings = e.frame();
    return out;
  }

  // Gram route: G v = μ v  ⇒  Sₙ (Z v) = μ (Z v), with ‖Z v‖² = n μ.
  const Matrix<Scalar> z = centered_design(data);
  const Matrix<Scalar> gram = (z.transpose() * z) / static_cast<Scalar>(n);
  detail::require_finite(gram, "pca_fit");
  auto e = sym_eig_full(gram);
  const Scalar top = std::max(e.eigenvalues(0), Scalar(0));
  const Scalar cutoff = detail::tolerance<Scalar>(1e-10) * top;
  Index rank = 0;
  while (rank < std::min(n, k) && e.eigenvalues(rank) > cutoff) ++rank;

  Matrix<Scalar> u(m, rank);
  for (Index i = 0; i < rank; ++i) {
    u.col(i) = z * e.eigenvectors.col(i) /
               std::sqrt(static_cast<Scalar>(n) * e.eigenvalues(i));
    detail::canonicalize_sign<Scalar>(u.col(i));
  }
  out.loadings = OrthonormalFrame<Scalar>(detail::complete_frame(u, k));
  out.eigenvalues = Vector<Scalar>::Zero(k);
  out.eigenvalues.head(rank) = e.eigenvalues.head(rank);
  return out;
}

/// X̂ᵢ = center + mat(Γ Γᵀ vec(Xᵢ − center)).
template <typename Scalar>
MatrixDataset<Scalar> pca_reconstruct(const MatrixDataset<Scalar>& data,
                                      const PcaBasis<Scalar>& basis,
                                      const Matrix<Scalar>& center) {
  const Index p = data.rows();
  const Index q = data.cols();
  if (basis.loadings.ambient() != p * q)
    throw ValidationError("pca_reconstruct: basis ambient dimension " +
                          std::to_string(basis.loadings.ambient()) + " does not match " +
                          detail::shape_str(p, q));
  if (center.rows() != p || center.cols() != q)
    throw ValidationError("pca_reconstruct: centering matrix has the wrong shape");
  const Matrix<Scalar>& g = basis.loadings.matrix();
  std::vector<Matrix<Scalar>> out;
  out.reserve(data.samples().size());
  for (const auto& x : data.samples()) {
    const Vector<Scalar> v = vec_of(x - center);
    out.emplace_back(center + mat_of(g * (g.transpose() * v), p, q));
  }
  return MatrixDataset<Scalar>(std::move(out));
}

template <typename Scalar>
MatrixDataset<Scalar> pca_reconstruct(const MatrixDataset<Scalar>& data,
                                      const PcaBasis<Scalar>& basis) {
  return pca_reconstruct(data, basis, data.mean());
}

template <typename Scalar>
TwoDPcaBasis<Scalar> twod2pca_fit(const MatrixDataset<Scalar>& data, Index pdim, Index qdim) {
  const Index p = data.rows();
  const Index q = data.cols();
  if (pdim < 1 || pdim > p || qdim < 1 || qdim > q)
    throw ValidationError("twod2pca_fit: dimensionality (" + std::to_string(pdim) + "," +
                          std::to_string(qdim) + ") invalid for shape " +
                          detail::shape_str(p, q));
  auto ea = sym_eig(partial_row_scatter(data, OrthonormalFrame<Scalar>::identity(q)).entries, pdim);
  auto eb = sym_eig(partial_col_scatter(data, OrthonormalFrame<Scalar>::identity(p)).entries, qdim);
  return {ea.frame(), eb.frame(), clamp_psd<Scalar>(ea.eigenvalues, ea.eigenvalues(0)),
          clamp_psd<Scalar>(eb.eigenvalues, eb.eigenvalues(0)), data.mean()};
}

template <typename Scalar>
TwoDPcaBasis<Scalar> population_twod2pca(const CovarianceMatrix<Scalar>& sigma, Index pdim,
                                         Index qdim) {
  if (pdim < 1 || pdim > sigma.p || qdim < 1 || qdim > sigma.q)
    throw ValidationError("population_twod2pca: dimensionality (" + std::to_string(pdim) + "," +
                          std::to_string(qdim) + ") invalid for shape " +
                          detail::shape_str(sigma.p, sigma.q));
  auto ea = sym_eig(
      population_partial_row_scatter(sigma, OrthonormalFrame<Scalar>::identity(sigma.q)).entries,
      pdim);
  auto eb = sym_eig(
      population_partial_col_scatter(sigma, OrthonormalFrame<Scalar>::identity(sigma.p)).entries,
      qdim);
  return {ea.frame(), eb.frame(), clamp_psd<Scalar>(ea.eigenvalues, ea.eigenvalues(0)),
          clamp_psd<Scalar>(eb.eigenvalues, eb.eigenvalues(0)), Matrix<Scalar>()};
}

}  // namespace mpca
