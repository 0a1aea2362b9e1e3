#pragma once

#include "mpca/mpca.hpp"

#include <random>

namespace mpca::testing {

inline Eigen::MatrixXd gaussian(std::mt19937_64& rng, Index r, Index c) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd m(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) m(i, j) = nd(rng);
  return m;
}

inline MatrixDataset<double> gaussian_dataset(std::mt19937_64& rng, Index n, Index p, Index q) {
  std::vector<Eigen::MatrixXd> xs;
  for (Index i = 0; i < n; ++i) xs.push_back(gaussian(rng, p, q));
  return MatrixDataset<double>(std::move(xs));
}

/// Gaussian data with an anisotropic row/column structure so spectra are well separated.
inline MatrixDataset<double> structured_dataset(std::mt19937_64& rng, Index n, Index p, Index q) {
  Eigen::VectorXd row_scale(p), col_scale(q);
  for (Index i = 0; i < p; ++i) row_scale(i) = 1.0 / (1.0 + i);
  for (Index j = 0; j < q; ++j) col_scale(j) = 1.0 / (1.0 + 0.7 * j);
  const Eigen::MatrixXd rot_p = orthonormalize<double>(gaussian(rng, p, p));
  const Eigen::MatrixXd rot_q = orthonormalize<double>(gaussian(rng, q, q));
  std::vector<Eigen::MatrixXd> xs;
  for (Index i = 0; i < n; ++i)
    xs.push_back(rot_p * row_scale.asDiagonal() * gaussian(rng, p, q) * col_scale.asDiagonal() *
                 rot_q.transpose());
  return MatrixDataset<double>(std::move(xs));
}

inline OrthonormalFrame<double> random_orthonormal(std::mt19937_64& rng, Index l, Index k) {
  return OrthonormalFrame<double>(orthonormalize<double>(gaussian(rng, l, k)));
}

inline Eigen::MatrixXd random_symmetric(std::mt19937_64& rng, Index n) {
  const Eigen::MatrixXd g = gaussian(rng, n, n);
  return 0.5 * (g + g.transpose());
}

}  // namespace mpca::testing
