#pragma once

// Philox4x32-10 counter-based generator and the normal-variate stream built on it.
//
// Stream contract (stable across releases; simulated datasets depend on it):
//   key     = (seed & 0xffffffff, seed >> 32)
//   counter = (block, index, stream, 0)
// Each block yields four 32-bit words w0..w3. Two uniforms in (0,1) are formed as
//   u = ((hi >> 5) * 2^26 + (lo >> 6) + 0.5) * 2^-53   with (hi, lo) = (w0, w1) and (w2, w3),
// and a Box-Muller transform turns (u1, u2) into the two normals
//   r cos(2π u2), r sin(2π u2),   r = sqrt(-2 ln u1),
// emitted in that order. `index` selects a sample (or matrix) and `stream` a
// purpose tag, so every substream is addressable without sequential state.

#include "mpca/types.hpp"

#include <array>
#include <cstdint>

namespace mpca {

class Philox4x32 {
public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) {
    constexpr std::uint32_t kM0 = 0xD2511F53u;
    constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u;
    constexpr std::uint32_t kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
      key[0] += kW0;
      key[1] += kW1;
    }
    return ctr;
  }
};

/// Sequential view over one (seed, index, stream) substream of standard normals.
class NormalStream {
public:
  NormalStream(std::uint64_t seed, std::uint32_t index, std::uint32_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        index_(index),
        stream_(stream) {}

  double next() {
    if (cursor_ == 2) refill();
    return cache_[cursor_++];
  }

  template <typename Scalar = double>
  Matrix<Scalar> matrix(Index rows, Index cols) {
    Matrix<Scalar> m(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = static_cast<Scalar>(next());
    return m;
  }

private:
  static double uniform(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (std::uint64_t{hi >> 5} << 26) | (lo >> 6);
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  void refill() {
    const auto w = Philox4x32::block({block_++, index_, stream_, 0u}, key_);
    const double u1 = uniform(w[0], w[1]);
    const double u2 = uniform(w[2], w[3]);
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    const double r = std::sqrt(-2.0 * std::log(u1));
    cache_ = {r * std::cos(kTwoPi * u2), r * std::sin(kTwoPi * u2)};
    cursor_ = 0;
  }

  Philox4x32::Key key_;
  std::uint32_t index_;
  std::uint32_t stream_;
  std::uint32_t block_ = 0;
  std::array<double, 2> cache_{};
  int cursor_ = 2;
};

/// Orthonormal basis of the column space of a full-column-rank matrix (thin Householder Q).
template <typename Scalar>
Matrix<Scalar> orthonormalize(const Matrix<Scalar>& m) {
  Eigen::HouseholderQR<Matrix<Scalar>> qr(m);
  Matrix<Scalar> q = qr.householderQ() * Matrix<Scalar>::Identity(m.rows(), m.cols());
  return q;
}

/// Random l×k orthonormal frame from orthonormalized standard-normal draws.
template <typename Scalar = double>
OrthonormalFrame<Scalar> random_frame(Index l, Index k, std::uint64_t seed, std::uint32_t index,
                                      std::uint32_t stream) {
  NormalStream rng(seed, index, stream);
  return OrthonormalFrame<Scalar>(orthonormalize<Scalar>(rng.matrix<Scalar>(l, k)));
}

}  // namespace mpca
