#include <doctest.h>

#include "support.hpp"

#include <cstring>

using namespace mpca;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("diagonal input") {
  const MatrixXd s = VectorXd((VectorXd(3) << 3, 1, 2).finished()).asDiagonal();
  const auto e = sym_eig(s, 2);
  CHECK(e.eigenvalues == (VectorXd(2) << 3, 2).finished());
  MatrixXd expected = MatrixXd::Zero(3, 2);
  expected(0, 0) = 1;
  expected(2, 1) = 1;
  CHECK(e.eigenvectors == expected);
}

TEST_CASE("degenerate spectrum: identity") {
  const auto e = sym_eig(MatrixXd::Identity(3, 3), 3);
  CHECK((e.eigenvalues - VectorXd::Ones(3)).norm() <= 1e-15);
  CHECK((e.eigenvectors.transpose() * e.eigenvectors - MatrixXd::Identity(3, 3)).norm() <= 1e-10);
  CHECK((e.eigenvectors * e.eigenvectors.transpose() - MatrixXd::Identity(3, 3)).norm() <= 1e-10);
}

TEST_CASE("random symmetric reconstruction, ordering, signs") {
  std::mt19937_64 rng(31);
  for (int draw = 0; draw < 30; ++draw) {
    const Index n = 1 + draw % 12;
    const MatrixXd s = mpca::testing::random_symmetric(rng, n);
    const auto e = sym_eig_full(s);
    const MatrixXd& v = e.eigenvectors;
    CHECK((v * e.eigenvalues.asDiagonal() * v.transpose() - s).norm() <= 1e-10 * (1 + s.norm()));
    CHECK((v.transpose() * v - MatrixXd::Identity(n, n)).norm() <= 1e-10);
    CHECK((s * v - v * e.eigenvalues.asDiagonal()).norm() <= 1e-9 * (1 + s.norm()));
    CHECK(std::abs(e.eigenvalues.sum() - s.trace()) <= 1e-10 * (1 + std::abs(s.trace())));
    for (Index i = 0; i + 1 < n; ++i) CHECK(e.eigenvalues(i) >= e.eigenvalues(i + 1));
    for (Index j = 0; j < n; ++j) {
      Index arg;
      v.col(j).cwiseAbs().maxCoeff(&arg);
      CHECK(v(arg, j) > 0);
    }
    // independent oracle
    Eigen::SelfAdjointEigenSolver<MatrixXd> ref(s);
    const VectorXd ref_desc = ref.eigenvalues().reverse();
    CHECK((ref_desc - e.eigenvalues).norm() <= 1e-10 * (1 + s.norm()));
  }
}

TEST_CASE("sign ties resolve to the lowest index") {
  // eigenvector (1, -1)/sqrt2 for eigenvalue 3, (1, 1)/sqrt2 for 1
  MatrixXd s(2, 2);
  s << 2, -1, -1, 2;
  const auto e = sym_eig_full(s);
  CHECK(e.eigenvalues(0) == doctest::Approx(3));
  CHECK(e.eigenvectors(0, 0) > 0);
  CHECK(e.eigenvectors(0, 1) > 0);
}

TEST_CASE("determinism: identical bits in, identical bits out") {
  std::mt19937_64 rng(32);
  const MatrixXd s = mpca::testing::random_symmetric(rng, 20);
  const auto e1 = sym_eig_full(s);
  const auto e2 = sym_eig_full(MatrixXd(s));
  CHECK(std::memcmp(e1.eigenvalues.data(), e2.eigenvalues.data(), sizeof(double) * 20) == 0);
  CHECK(std::memcmp(e1.eigenvectors.data(), e2.eigenvectors.data(), sizeof(double) * 400) == 0);
}

TEST_CASE("error paths") {
  MatrixXd ns(2, 2);
  ns << 1, 2, 0, 1;
  CHECK_THROWS_AS(sym_eig(ns, 1), ValidationError);
  CHECK_THROWS_AS(sym_eig(MatrixXd::Identity(3, 3), 0), ValidationError);
  CHECK_THROWS_AS(sym_eig(MatrixXd::Identity(3, 3), 4), ValidationError);
  CHECK_THROWS_AS(sym_eig(MatrixXd(2, 3), 1), ValidationError);
  std::mt19937_64 rng(33);
  JacobiOptions capped;
  capped.max_sweeps = 0;
  CHECK_THROWS_AS(sym_eig_full(mpca::testing::random_symmetric(rng, 5), capped), NumericalError);
}

TEST_CASE("zero matrix") {
  const auto e = sym_eig_full(MatrixXd::Zero(4, 4));
  CHECK(e.eigenvalues == VectorXd::Zero(4));
  CHECK(e.eigenvectors == MatrixXd::Identity(4, 4));
}

TEST_CASE("clamp_psd only touches tiny negatives") {
  VectorXd v(3);
  v << 1, -1e-12, -1e-3;
  const VectorXd c = clamp_psd<double>(v, 1.0);
  CHECK(c(1) == 0);
  CHECK(c(2) == -1e-3);
}
