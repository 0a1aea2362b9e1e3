#pragma once

// Generative model X = μ + A₀ U B₀ᵀ + ε with cov(vec U) = T and cov(vec ε) = σ² I.
// In vectorized form vec(X − μ) = (B₀ ⊗ A₀) vec(U) + vec(ε), hence
// Σ = (B₀ ⊗ A₀) T (B₀ ⊗ A₀)ᵀ + σ² I exactly.

#include "mpca/eigensolver.hpp"
#include "mpca/linalg.hpp"
#include "mpca/random.hpp"

#include <cstdint>

namespace mpca {

inline constexpr std::uint32_t kStreamA0 = 0x41304130u;
inline constexpr std::uint32_t kStreamB0 = 0x42304230u;
inline constexpr std::uint32_t kStreamT = 0x54545454u;
inline constexpr std::uint32_t kStreamMu = 0x4d554d55u;
inline constexpr std::uint32_t kStreamU = 0x55555555u;
inline constexpr std::uint32_t kStreamNoise = 0x45505349u;

template <typename Scalar = double>
struct ModelSpec {
  Matrix<Scalar> mu;
  OrthonormalFrame<Scalar> A0;
  OrthonormalFrame<Scalar> B0;
  Matrix<Scalar> T;
  Scalar sigma2 = Scalar(1);

  Index p() const noexcept { return A0.ambient(); }
  Index q() const noexcept { return B0.ambient(); }
  Index p0() const noexcept { return A0.rank(); }
  Index q0() const noexcept { return B0.rank(); }

  /// Shapes, symmetry and strict positive definiteness of T; σ² ≥ 0.
  void validate() const {
    if (mu.rows() != p() || mu.cols() != q())
      throw ValidationError("model spec: mu must be " + detail::shape_str(p(), q()));
    const Index m0 = p0() * q0();
    if (T.rows() != m0 || T.cols() != m0)
      throw ValidationError("model spec: T must be " + detail::shape_str(m0, m0));
    if (!T.allFinite() || !mu.allFinite()) throw ValidationError("model spec: non-finite entries");
    if ((T - T.transpose()).norm() > detail::tolerance<Scalar>(1e-12) * std::max(T.norm(), Scalar(1)))
      throw ValidationError("model spec: T is not symmetric");
    Eigen::LLT<Matrix<Scalar>> llt(T);
    if (llt.info() != Eigen::Success)
      throw ValidationError("model spec: T is not positive definite");
    if (!(sigma2 >= Scalar(0)) || !std::isfinite(static_cast<double>(sigma2)))
      throw ValidationError("model spec: sigma2 must be a finite non-negative number");
  }
};

/// Random spec: A₀, B₀ orthonormalized Gaussian draws, T = GGᵀ + 0.1 I, μ Gaussian.
template <typename Scalar = double>
ModelSpec<Scalar> random_spec(Index p, Index q, Index p0, Index q0, Scalar sigma2,
                              std::uint64_t seed) {
  if (p < 1 || q < 1 || p0 < 1 || q0 < 1 || p0 > p || q0 > q)
    throw ValidationError("random_spec: need 1 <= p0 <= p and 1 <= q0 <= q");
  if (!(sigma2 > Scalar(0))) throw ValidationError("random_spec: sigma2 must be positive");
  ModelSpec<Scalar> spec;
  spec.A0 = random_frame<Scalar>(p, p0, seed, 0, kStreamA0);
  spec.B0 = random_frame<Scalar>(q, q0, seed, 0, kStreamB0);
  const Index m0 = p0 * q0;
  NormalStream gt(seed, 0, kStreamT);
  const Matrix<Scalar> g = gt.matrix<Scalar>(m0, m0);
  spec.T = g * g.transpose() + Scalar(0.1) * Matrix<Scalar>::Identity(m0, m0);
  spec.T = Scalar(0.5) * (spec.T + spec.T.transpose()).eval();
  NormalStream gm(seed, 0, kStreamMu);
  spec.mu = gm.matrix<Scalar>(p, q);
  spec.sigma2 = sigma2;
  return spec;
}

/// n draws of X with Gaussian U and ε; sample i depends only on (spec, seed, i).
template <typename Scalar>
MatrixDataset<Scalar> sample(const ModelSpec<Scalar>& spec, Index n, std::uint64_t seed) {
  if (n < 2) throw ValidationError("sample: need n >= 2");
  spec.validate();
  if (!(spec.sigma2 > Scalar(0))) throw ValidationError("sample: sigma2 must be positive");
  const Matrix<Scalar> chol = Eigen::LLT<Matrix<Scalar>>(spec.T).matrixL();
  const Scalar sigma = std::sqrt(spec.sigma2);
  const Index p = spec.p();
  const Index q = spec.q();
  std::vector<Matrix<Scalar>> xs;
  xs.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const auto idx = static_cast<std::uint32_t>(i);
    NormalStream zu(seed, idx, kStreamU);
    NormalStream ze(seed, idx, kStreamNoise);
    const Vector<Scalar> u = chol * zu.matrix<Scalar>(chol.rows(), 1);
    const Matrix<Scalar> um = mat_of(u, spec.p0(), spec.q0());
    xs.emplace_back(spec.mu + spec.A0.matrix() * um * spec.B0.matrix().transpose() +
                    sigma * ze.matrix<Scalar>(p, q));
  }
  return MatrixDataset<Scalar>(std::move(xs));
}

/// Σ = (B₀ ⊗ A₀) T (B₀ ⊗ A₀)ᵀ + σ² I. σ² = 0 is admitted here (Σ is then only PSD).
template <typename Scalar>
CovarianceMatrix<Scalar> population_covariance(const ModelSpec<Scalar>& spec) {
  spec.validate();
  const Matrix<Scalar> k = kron(spec.B0.matrix(), spec.A0.matrix());
  Matrix<Scalar> s = k * spec.T * k.transpose();
  s = Scalar(0.5) * (s + s.transpose()).eval();
  s.diagonal().array() += spec.sigma2;
  return CovarianceMatrix<Scalar>(std::move(s), spec.p(), spec.q());
}

}  // namespace mpca
