#pragma once

// Cyclic Jacobi eigendecomposition for dense symmetric matrices.
//
// Output ordering and signs are fixed so that identical input bits always give
// identical output bits: eigenvalues descending, and each eigenvector flipped so
// that its largest-magnitude entry is positive (lowest index wins ties).

#include "mpca/types.hpp"

#include <numeric>

namespace mpca {

template <typename Scalar = double>
struct SymEigResult {
  Vector<Scalar> eigenvalues;  // descending
  Matrix<Scalar> eigenvectors;  // columns aligned with eigenvalues

  OrthonormalFrame<Scalar> frame() const { return OrthonormalFrame<Scalar>(eigenvectors); }
};

struct JacobiOptions {
  int max_sweeps = 100;
  double off_tolerance = 1e-12;  // relative to ||S||_F
};

namespace detail {

template <typename Scalar>
void canonicalize_sign(Eigen::Ref<Vector<Scalar>> v) {
  Index arg = 0;
  Scalar best = Scalar(-1);
  for (Index i = 0; i < v.size(); ++i) {
    const Scalar a = std::abs(v(i));
    if (a > best) {
      best = a;
      arg = i;
    }
  }
  if (v(arg) < Scalar(0)) v = -v;
}

template <typename Scalar>
Scalar off_diagonal_norm(const Matrix<Scalar>& a) {
  Scalar s(0);
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace detail

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps.
template <typename Derived>
SymEigResult<typename Derived::Scalar> sym_eig_full(const Eigen::MatrixBase<Derived>& s_in,
                                                    const JacobiOptions& opt = {}) {
  using Scalar = typename Derived::Scalar;
  const Index n = s_in.rows();
  if (n < 1 || s_in.cols() != n)
    throw ValidationError("sym_eig: matrix must be square and non-empty, got " +
                          detail::shape_str(s_in.rows(), s_in.cols()));
  if (!s_in.allFinite()) throw ValidationError("sym_eig: non-finite entries");

  Matrix<Scalar> a = s_in;
  const Scalar norm = a.norm();
  if ((a - a.transpose()).norm() > detail::tolerance<Scalar>(1e-10) * std::max(norm, Scalar(1)))
    throw ValidationError("sym_eig: matrix is not symmetric");
  a = Scalar(0.5) * (a + a.transpose()).eval();

  Matrix<Scalar> v = Matrix<Scalar>::Identity(n, n);
  const Scalar threshold = detail::tolerance<Scalar>(opt.off_tolerance) * norm;

  bool done = detail::off_diagonal_norm(a) <= threshold;
  for (int sweep = 0; !done && sweep < opt.max_sweeps; ++sweep) {
    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const Scalar apq = a(p, q);
        if (apq == Scalar(0)) continue;
        const Scalar theta = (a(q, q) - a(p, p)) / (Scalar(2) * apq);
        Scalar t = Scalar(1) / (std::abs(theta) + std::sqrt(theta * theta + Scalar(1)));
        if (theta < Scalar(0)) t = -t;
        const Scalar c = Scalar(1) / std::sqrt(t * t + Scalar(1));
        const Scalar sn = t * c;

        for (Index k = 0; k < n; ++k) {
          const Scalar akp = a(k, p);
          const Scalar akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const Scalar apk = a(p, k);
          const Scalar aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = Scalar(0);
        a(q, p) = Scalar(0);
        for (Index k = 0; k < n; ++k) {
          const Scalar vkp = v(k, p);
          const Scalar vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
    done = detail::off_diagonal_norm(a) <= threshold;
  }
  if (!done)
    throw NumericalError("sym_eig: Jacobi iteration did not converge in " +
                         std::to_string(opt.max_sweeps) + " sweeps");

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](Index i, Index j) { return a(i, i) > a(j, j); });

  SymEigResult<Scalar> out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    const Index src = order[static_cast<std::size_t>(k)];
    out.eigenvalues(k) = a(src, src);
    out.eigenvectors.col(k) = v.col(src);
    detail::canonicalize_sign<Scalar>(out.eigenvectors.col(k));
  }
  return out;
}

/// Leading k eigenpairs of a symmetric matrix, 1 <= k <= dim(S).
template <typename Derived>
SymEigResult<typename Derived::Scalar> sym_eig(const Eigen::MatrixBase<Derived>& s, Index k,
                                               const JacobiOptions& opt = {}) {
  if (k < 1 || k > s.rows())
    throw ValidationError("sym_eig: requested " + std::to_string(k) +
                          " eigenpairs of a matrix of size " + std::to_string(s.rows()));
  auto full = sym_eig_full(s, opt);
  if (k == s.rows()) return full;
  using Scalar = typename Derived::Scalar;
  SymEigResult<Scalar> out;
  out.eigenvalues = full.eigenvalues.head(k);
  out.eigenvectors = full.eigenvectors.leftCols(k);
  return out;
}

/// Replaces eigenvalues in [-1e-10 * max, 0) by zero; leaves larger negatives alone.
template <typename Scalar>
Vector<Scalar> clamp_psd(Vector<Scalar> values, Scalar reference) {
  const Scalar floor = -detail::tolerance<Scalar>(1e-10) * std::abs(reference);
  for (Index i = 0; i < values.size(); ++i)
    if (values(i) < Scalar(0) && values(i) >= floor) values(i) = Scalar(0);
  return values;
}

}  // namespace mpca
