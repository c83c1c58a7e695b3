#include "symspin/symplectic.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <random>

using namespace symspin;

namespace {
constexpr double kTol = 1e-14;
}

TEST_CASE("standard pairing matrix has the canonical block pattern") {
  for (int l : {1, 2, 3}) {
    auto s = SymplecticSpace::standard(l);
    REQUIRE(s.dim() == 2 * l);
    for (int i = 0; i < 2 * l; ++i)
      for (int j = 0; j < 2 * l; ++j) {
        double expected = 0.0;
        if (i < l && j == l + i) expected = 1.0;
        if (i >= l && j == i - l) expected = -1.0;
        REQUIRE(s.omega_lower(i, j) == expected);
      }
    // Antisymmetry and nondegeneracy.
    REQUIRE((s.omega_lower + s.omega_lower.transpose()).norm() == 0.0);
    REQUIRE(std::abs(std::abs(s.omega_lower.determinant()) - 1.0) < kTol);
  }
}

TEST_CASE("upper pairing solves the defining linear system") {
  for (int l : {1, 2, 3}) {
    auto s = SymplecticSpace::standard(l);
    const int n = 2 * l;
    // sum_k omega_lower(i,k) omega_upper(j,k) = delta_ij
    Eigen::MatrixXd prod = s.omega_lower * s.omega_upper.transpose();
    REQUIRE((prod - Eigen::MatrixXd::Identity(n, n)).norm() < kTol);
  }
}

TEST_CASE("upper pairing at l=1 matches brute-force 2x2 solve") {
  auto s = SymplecticSpace::standard(1);
  // Solve a11*w11 + a12*w12 = 1 etc. by hand for Omega = [[0,1],[-1,0]]:
  // row i of W satisfies Omega * W(i,:)^T = e_i.
  Eigen::Matrix2d omega = s.omega_lower;
  Eigen::Matrix2d w_expected;
  for (int i = 0; i < 2; ++i) {
    // Cramer's rule on the 2x2 system.
    double det = omega(0, 0) * omega(1, 1) - omega(0, 1) * omega(1, 0);
    Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
    rhs[i] = 1.0;
    w_expected(i, 0) = (rhs[0] * omega(1, 1) - omega(0, 1) * rhs[1]) / det;
    w_expected(i, 1) = (omega(0, 0) * rhs[1] - rhs[0] * omega(1, 0)) / det;
  }
  REQUIRE((s.omega_upper - w_expected).norm() < kTol);
  // Numerically coincides with the lower pairing in the standard basis.
  REQUIRE((s.omega_upper - s.omega_lower).norm() < kTol);
}

TEST_CASE("raise then lower is the identity on random tensors") {
  std::mt19937_64 rng(20260823);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int l : {1, 2}) {
    auto s = SymplecticSpace::standard(l);
    for (int rank : {1, 2, 4}) {
      DenseTensor t(2 * l, rank);
      for (auto& v : t.data) v = dist(rng);
      for (int slot = 0; slot < rank; ++slot) {
        DenseTensor back = lower_index(s, raise_index(s, t, slot), slot);
        double err = 0.0;
        for (std::size_t i = 0; i < t.data.size(); ++i)
          err = std::max(err, std::abs(back.data[i] - t.data[i]));
        REQUIRE(err < kTol);
        DenseTensor back2 = raise_index(s, lower_index(s, t, slot), slot);
        for (std::size_t i = 0; i < t.data.size(); ++i)
          REQUIRE(std::abs(back2.data[i] - t.data[i]) < kTol);
      }
    }
  }
}

TEST_CASE("raising a rank-2 tensor matches explicit contraction") {
  auto s = SymplecticSpace::standard(2);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  DenseTensor t(4, 2);
  for (auto& v : t.data) v = dist(rng);
  DenseTensor r = raise_index(s, t, 0);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double expected = 0.0;
      for (int c = 0; c < 4; ++c)
        expected += s.omega_upper(i, c) * t.at({c, j});
      REQUIRE(std::abs(r.at({i, j}) - expected) < kTol);
    }
  DenseTensor low = lower_index(s, t, 1);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double expected = 0.0;
      for (int c = 0; c < 4; ++c)
        expected += t.at({i, c}) * s.omega_lower(c, j);
      REQUIRE(std::abs(low.at({i, j}) - expected) < kTol);
    }
}

TEST_CASE("invalid constructions are rejected") {
  REQUIRE_THROWS_AS(SymplecticSpace::standard(0), std::invalid_argument);
  REQUIRE_THROWS_AS(SymplecticSpace::standard(-2), std::invalid_argument);
  auto s = SymplecticSpace::standard(1);
  DenseTensor t(2, 2);
  REQUIRE_THROWS_AS(raise_index(s, t, 5), std::out_of_range);
  REQUIRE_THROWS_AS(t.at({0, 7}), std::out_of_range);
}
