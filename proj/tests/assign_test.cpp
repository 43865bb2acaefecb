#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "facet/assign.hpp"
#include "facet/error.hpp"

namespace facet {
namespace {

// rows are subcarriers, columns devices
Matrix from_rows(const std::vector<std::vector<double>>& rows) {
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t s = 0; s < rows.size(); ++s) {
    for (std::size_t l = 0; l < rows[s].size(); ++l) m(s, l) = rows[s][l];
  }
  return m;
}

Matrix random_matrix(std::mt19937_64& gen, int S, int L) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix m(S, L);
  for (int s = 0; s < S; ++s) {
    for (int l = 0; l < L; ++l) m(s, l) = u(gen);
  }
  return m;
}

TEST(Assign, TwoByTwo) {
  const auto a = hungarian_max(from_rows({{1, 3}, {4, 1}}));
  EXPECT_EQ(a.subcarrier_of, (std::vector<int>{1, 0}));
}

TEST(Assign, ThreeSubcarriersTwoDevices) {
  const auto m = from_rows({{5, 9}, {8, 2}, {7, 7}});
  const auto a = hungarian_max(m);
  EXPECT_EQ(a.subcarrier_of, (std::vector<int>{1, 0}));
  EXPECT_EQ(a.num_subcarriers, 3);
  EXPECT_DOUBLE_EQ(total_weight(m, a), 17.0);
  EXPECT_EQ(a.device_of(), (std::vector<int>{1, 0, -1}));
}

TEST(Assign, TiesGoToTheSmallestSubcarriers) {
  const Matrix m(5, 3, 2.0);
  EXPECT_EQ(hungarian_max(m).subcarrier_of, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(brute_force_max(m).subcarrier_of, (std::vector<int>{0, 1, 2}));
}

TEST(Assign, HungarianMatchesBruteForce) {
  std::mt19937_64 gen(5);
  for (int i = 0; i < 100; ++i) {
    const auto m = random_matrix(gen, 8, 6);
    const auto h = hungarian_max(m);
    const auto b = brute_force_max(m);
    EXPECT_EQ(total_weight(m, h), total_weight(m, b));
    EXPECT_EQ(h, b);
  }
}

TEST(Assign, HungarianMatchesBruteForceOnCoarseTies) {
  // integer entries make ties common
  std::mt19937_64 gen(9);
  std::uniform_int_distribution<int> u(0, 3);
  for (int i = 0; i < 100; ++i) {
    Matrix m(6, 5);
    for (int s = 0; s < 6; ++s) {
      for (int l = 0; l < 5; ++l) m(s, l) = u(gen);
    }
    EXPECT_EQ(hungarian_max(m), brute_force_max(m));
  }
}

TEST(Assign, ScaleInvariant) {
  std::mt19937_64 gen(13);
  for (int i = 0; i < 50; ++i) {
    const auto m = random_matrix(gen, 7, 5);
    for (double c : {0.25, 3.7, 1e6}) {
      Matrix scaled = m;
      for (std::size_t s = 0; s < m.rows(); ++s) {
        for (std::size_t l = 0; l < m.cols(); ++l) scaled(s, l) = c * m(s, l);
      }
      EXPECT_EQ(hungarian_max(scaled), hungarian_max(m));
    }
  }
}

TEST(Assign, DevicePermutationPermutesTheResult) {
  std::mt19937_64 gen(17);
  for (int i = 0; i < 50; ++i) {
    const auto m = random_matrix(gen, 7, 5);
    std::vector<int> perm(5);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), gen);
    Matrix pm(7, 5);
    for (int s = 0; s < 7; ++s) {
      for (int l = 0; l < 5; ++l) pm(s, l) = m(s, perm[l]);
    }
    const auto a = hungarian_max(m);
    const auto b = hungarian_max(pm);
    for (int l = 0; l < 5; ++l) EXPECT_EQ(b.subcarrier_of[l], a.subcarrier_of[perm[l]]);
  }
}

TEST(Assign, RejectsBadInput) {
  EXPECT_THROW(hungarian_max(Matrix(2, 3, 1.0)), InfeasibleError);
  auto m = from_rows({{1, 2}, {3, -1}});
  EXPECT_THROW(hungarian_max(m), DomainError);
  m(1, 1) = std::nan("");
  EXPECT_THROW(hungarian_max(m), DomainError);
  EXPECT_ANY_THROW(brute_force_max(Matrix(10, 9, 1.0)));
}

TEST(Assign, ValidateAssignment) {
  Assignment a;
  a.subcarrier_of = {0, 2};
  a.num_subcarriers = 3;
  EXPECT_FALSE(validate_assignment(a).has_value());
  a.subcarrier_of = {1, 1};
  EXPECT_TRUE(validate_assignment(a).has_value());
  a.subcarrier_of = {0, 3};
  EXPECT_TRUE(validate_assignment(a).has_value());
  a.subcarrier_of = {-1, 0};
  EXPECT_TRUE(validate_assignment(a).has_value());
}

TEST(Assign, GainMatrixIsTheDownlinkGain) {
  ScenarioConfig c;
  c.num_devices = 1;
  c.num_subcarriers = 2;
  c.num_antennas = 1;
  c.pathloss_exponent = 2.0;
  c.distance_range = {10.0, 10.0};
  c.fading_model = FadingModel::fixed_unit_gain;
  const auto g = gain_matrix(generate(c));
  EXPECT_DOUBLE_EQ(g(0, 0), 0.01);
  EXPECT_DOUBLE_EQ(g(1, 0), 0.01);
}

}  // namespace
}  // namespace facet
