#pragma once

// Multilinear PCA for matrix-valued samples via GLRAM alternating eigen-iteration.
//
// Given a target dimensionality (p̃, q̃), find A (p×p̃) and B (q×q̃) with orthonormal
// columns maximizing (1/n) Σ ‖Aᵀ(Xᵢ − X̄)B‖²_F, equivalently tr{(B⊗A)ᵀ S (B⊗A)}.
// Each half-step solves an ordinary symmetric eigenproblem of size q or p, so the
// objective never decreases; it is bounded above by the total centered variance.

#include "mpca/eigensolver.hpp"
#include "mpca/linalg.hpp"
#include "mpca/random.hpp"

#include <cstdint>
#include <optional>

namespace mpca {

enum class InitStrategy { row_scatter_eigenvectors, random_orthonormal, user_supplied };

struct MpcaConfig {
  Index pdim = 1;
  Index qdim = 1;
  double tol = 1e-10;  // on |f_new − f_old| / (1 + |f_old|)
  // Once the objective has settled, keep iterating until neither frame moves by more
  // than this in projection distance (or max_iter is hit).
  double subspace_tol = 1e-11;
  int max_iter = 500;
  InitStrategy init = InitStrategy::row_scatter_eigenvectors;
  // Restart 0 uses `init`; restarts 1.. start from random orthonormal frames.
  int restarts = 5;
  std::uint64_t seed = 0;
  std::optional<Eigen::MatrixXd> initial_a;  // p×p̃, required for user_supplied
};

template <typename Scalar = double>
struct MpcaBasis {
  OrthonormalFrame<Scalar> A;
  OrthonormalFrame<Scalar> B;
  Vector<Scalar> lambda;  // eigenvalues of the final A-step
  Vector<Scalar> xi;      // eigenvalues of the final B-step
  std::vector<Scalar> objective_trace;
  bool converged = false;
  int iterations = 0;
  int best_restart = 0;
  std::vector<Scalar> restart_objectives;
  Matrix<Scalar> mean;  // centering used at fit time; empty for population fits

  Scalar objective() const { return objective_trace.empty() ? Scalar(0) : objective_trace.back(); }
};

/// p̃ q̃ matrices Uᵢ = Aᵀ(Xᵢ − X̄)B.
template <typename Scalar = double>
struct CoordinateSet {
  std::vector<Matrix<Scalar>> coords;
};

inline constexpr std::uint32_t kRestartStream = 0x52535452u;  // "RSTR"

inline void validate_config(const MpcaConfig& cfg, Index p, Index q) {
  if (cfg.pdim < 1 || cfg.pdim > p || cfg.qdim < 1 || cfg.qdim > q)
    throw ValidationError("dimensionality (" + std::to_string(cfg.pdim) + "," +
                          std::to_string(cfg.qdim) + ") invalid for shape " +
                          detail::shape_str(p, q));
  if (!(cfg.tol > 0)) throw ValidationError("tol must be positive");
  if (!(cfg.subspace_tol >= 0)) throw ValidationError("subspace_tol must be non-negative");
  if (cfg.max_iter < 1) throw ValidationError("max_iter must be >= 1");
  if (cfg.restarts < 1) throw ValidationError("restarts must be >= 1");
  if (cfg.init == InitStrategy::user_supplied) {
    if (!cfg.initial_a) throw ValidationError("user_supplied init requires initial_a");
    if (cfg.initial_a->rows() != p || cfg.initial_a->cols() != cfg.pdim)
      throw ValidationError("initial_a must be " + detail::shape_str(p, cfg.pdim));
  }
}

namespace detail {

template <typename Scalar>
Scalar quadratic_trace(const Matrix<Scalar>& s, const Matrix<Scalar>& frame) {
  return (frame.transpose() * s * frame).trace();
}

/// Shared alternation. `row_scatter(B)` is p×p, `col_scatter(A)` is q×q; `full_row`
/// is the unprojected row scatter used for the default initial A.
template <typename Scalar, typename RowFn, typename ColFn>
MpcaBasis<Scalar> alternate(Index p, Index q, const MpcaConfig& cfg,
                            const Matrix<Scalar>& full_row, RowFn row_scatter, ColFn col_scatter) {
  validate_config(cfg, p, q);

  auto initial = [&](int restart) -> OrthonormalFrame<Scalar> {
    const InitStrategy s = restart == 0 ? cfg.init : InitStrategy::random_orthonormal;
    switch (s) {
      case InitStrategy::row_scatter_eigenvectors:
        return sym_eig(full_row, cfg.pdim).frame();
      case InitStrategy::user_supplied:
        return OrthonormalFrame<Scalar>(cfg.initial_a->template cast<Scalar>());
      case InitStrategy::random_orthonormal:
        break;
    }
    return random_frame<Scalar>(p, cfg.pdim, cfg.seed, static_cast<std::uint32_t>(restart),
                                kRestartStream);
  };

  std::optional<MpcaBasis<Scalar>> best;
  std::vector<Scalar> finals;
  for (int r = 0; r < cfg.restarts; ++r) {
    MpcaBasis<Scalar> fit;
    fit.A = initial(r);
    Scalar previous = Scalar(0);
    for (int k = 1; k <= cfg.max_iter; ++k) {
      const OrthonormalFrame<Scalar> a_prev = fit.A;
      const OrthonormalFrame<Scalar> b_prev = fit.B;
      auto eb = sym_eig(col_scatter(fit.A), cfg.qdim);
      fit.B = eb.frame();
      const Matrix<Scalar> rs = row_scatter(fit.B);
      if (k == 1) {
        previous = quadratic_trace(rs, fit.A.matrix());
        fit.objective_trace.push_back(previous);
      }
      auto ea = sym_eig(rs, cfg.pdim);
      fit.A = ea.frame();
      fit.xi = clamp_psd<Scalar>(eb.eigenvalues, eb.eigenvalues(0));
      fit.lambda = clamp_psd<Scalar>(ea.eigenvalues, ea.eigenvalues(0));
      const Scalar current = quadratic_trace(rs, fit.A.matrix());
      fit.objective_trace.push_back(current);
      fit.iterations = k;
      fit.converged = std::abs(current - previous) / (Scalar(1) + std::abs(previous)) <
                      static_cast<Scalar>(cfg.tol);
      if (fit.converged && k > 1 &&
          std::max(projection_distance(a_prev, fit.A), projection_distance(b_prev, fit.B)) <=
              static_cast<Scalar>(cfg.subspace_tol))
        break;
      previous = current;
    }
    finals.push_back(fit.objective());
    if (!best || fit.objective() > best->objective()) {
      fit.best_restart = r;
      best = std::move(fit);
    }
  }
  best->restart_objectives = std::move(finals);
  return std::move(*best);
}

}  // namespace detail

/// Sample-level MPCA on a dataset.
template <typename Scalar>
MpcaBasis<Scalar> glram_fit(const MatrixDataset<Scalar>& data, const MpcaConfig& cfg) {
  const Index p = data.rows();
  const Index q = data.cols();
  validate_config(cfg, p, q);
  const Matrix<Scalar> full_row =
      partial_row_scatter(data, OrthonormalFrame<Scalar>::identity(q)).entries;
  auto fit = detail::alternate<Scalar>(
      p, q, cfg, full_row,
      [&](const OrthonormalFrame<Scalar>& b) { return partial_row_scatter(data, b).entries; },
      [&](const OrthonormalFrame<Scalar>& a) { return partial_col_scatter(data, a).entries; });
  fit.mean = data.mean();
  return fit;
}

/// Population-level MPCA: maximizes tr{(B⊗A)ᵀ Σ (B⊗A)} for a given covariance.
template <typename Scalar>
MpcaBasis<Scalar> population_mpca(const CovarianceMatrix<Scalar>& sigma, const MpcaConfig& cfg) {
  validate_config(cfg, sigma.p, sigma.q);
  const Matrix<Scalar> full_row =
      population_partial_row_scatter(sigma, OrthonormalFrame<Scalar>::identity(sigma.q)).entries;
  return detail::alternate<Scalar>(
      sigma.p, sigma.q, cfg, full_row,
      [&](const OrthonormalFrame<Scalar>& b) {
        return population_partial_row_scatter(sigma, b).entries;
      },
      [&](const OrthonormalFrame<Scalar>& a) {
        return population_partial_col_scatter(sigma, a).entries;
      });
}

namespace detail {

template <typename Scalar>
void check_frames(Index p, Index q, const OrthonormalFrame<Scalar>& a,
                  const OrthonormalFrame<Scalar>& b, const char* what) {
  if (a.ambient() != p || b.ambient() != q)
    throw ValidationError(std::string(what) + ": frames of ambient size (" +
                          std::to_string(a.ambient()) + "," + std::to_string(b.ambient()) +
                          ") do not match data shape " + shape_str(p, q));
}

}  // namespace detail

/// (1/n) Σ ‖Aᵀ(Xᵢ − X̄)B‖²_F.
template <typename Scalar>
Scalar objective(const MatrixDataset<Scalar>& data, const OrthonormalFrame<Scalar>& a,
                 const OrthonormalFrame<Scalar>& b) {
  detail::check_frames(data.rows(), data.cols(), a, b, "objective");
  Scalar total(0);
  for (const auto& x : data.samples())
    total += (a.matrix().transpose() * (x - data.mean()) * b.matrix()).squaredNorm();
  return total / static_cast<Scalar>(data.size());
}

/// (1/n) Σ ‖Xᵢ − X̄‖²_F.
template <typename Scalar>
Scalar total_variance(const MatrixDataset<Scalar>& data) {
  Scalar total(0);
  for (const auto& x : data.samples()) total += (x - data.mean()).squaredNorm();
  return total / static_cast<Scalar>(data.size());
}

template <typename Scalar>
CoordinateSet<Scalar> coordinates(const MatrixDataset<Scalar>& data,
                                  const OrthonormalFrame<Scalar>& a,
                                  const OrthonormalFrame<Scalar>& b) {
  detail::check_frames(data.rows(), data.cols(), a, b, "coordinates");
  CoordinateSet<Scalar> out;
  out.coords.reserve(data.samples().size());
  for (const auto& x : data.samples())
    out.coords.emplace_back(a.matrix().transpose() * (x - data.mean()) * b.matrix());
  return out;
}

template <typename Scalar>
CoordinateSet<Scalar> coordinates(const MatrixDataset<Scalar>& data,
                                  const MpcaBasis<Scalar>& basis) {
  return coordinates(data, basis.A, basis.B);
}

/// X̂ᵢ = center + A Aᵀ (Xᵢ − center) B Bᵀ.
template <typename Scalar>
MatrixDataset<Scalar> reconstruct(const MatrixDataset<Scalar>& data,
                                  const OrthonormalFrame<Scalar>& a,
                                  const OrthonormalFrame<Scalar>& b,
                                  const Matrix<Scalar>& center) {
  detail::check_frames(data.rows(), data.cols(), a, b, "reconstruct");
  if (center.rows() != data.rows() || center.cols() != data.cols())
    throw ValidationError("reconstruct: centering matrix has the wrong shape");
  const Matrix<Scalar> pa = a.projector();
  const Matrix<Scalar> pb = b.projector();
  std::vector<Matrix<Scalar>> out;
  out.reserve(data.samples().size());
  for (const auto& x : data.samples()) out.emplace_back(center + pa * (x - center) * pb);
  return MatrixDataset<Scalar>(std::move(out));
}

/// Reconstruction centered on the dataset's own mean.
template <typename Scalar>
MatrixDataset<Scalar> reconstruct(const MatrixDataset<Scalar>& data,
                                  const MpcaBasis<Scalar>& basis) {
  return reconstruct(data, basis.A, basis.B, data.mean());
}

/// Columns bⱼ ⊗ aᵢ in kron(B, A) order (i fastest). Eigenvalues are left empty.
template <typename Scalar>
PcaBasis<Scalar> tensor_principal_components(const MpcaBasis<Scalar>& basis) {
  PcaBasis<Scalar> out;
  out.loadings = OrthonormalFrame<Scalar>(kron(basis.B.matrix(), basis.A.matrix()));
  out.p = basis.A.ambient();
  out.q = basis.B.ambient();
  out.mean = basis.mean;
  return out;
}

template <typename Scalar>
Scalar explained_variance(const MatrixDataset<Scalar>& data, const OrthonormalFrame<Scalar>& a,
                          const OrthonormalFrame<Scalar>& b) {
  const Scalar total = total_variance(data);
  if (!(total > Scalar(0))) throw ValidationError("explained_variance: dataset has zero variance");
  return std::clamp(objective(data, a, b) / total, Scalar(0), Scalar(1));
}

template <typename Scalar>
Scalar explained_variance(const MatrixDataset<Scalar>& data, const MpcaBasis<Scalar>& basis) {
  return explained_variance(data, basis.A, basis.B);
}

}  // namespace mpca
