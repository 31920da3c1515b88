#include <gtest/gtest.h>

#include <random>

#include "rcc/units.hpp"

using namespace rcc;

TEST(Units, DbmExamples) {
  EXPECT_DOUBLE_EQ(dbm_to_watts(30.0), 1.0);
  EXPECT_DOUBLE_EQ(dbm_to_watts(0.0), 0.001);
  EXPECT_NEAR(dbm_to_watts(50.0), 100.0, 1e-12);
}

TEST(Units, DbExamples) {
  EXPECT_DOUBLE_EQ(db_to_linear(0.0), 1.0);
  EXPECT_DOUBLE_EQ(db_to_linear(10.0), 10.0);
  EXPECT_NEAR(db_to_linear(-105.0) / std::pow(10.0, -10.5), 1.0, 1e-14);
}

TEST(Units, RoundTrip) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-200.0, 200.0);
  for (int i = 0; i < 10000; ++i) {
    const double x = u(rng);
    EXPECT_NEAR(watts_to_dbm(dbm_to_watts(x)), x, 1e-12);
    EXPECT_NEAR(linear_to_db(db_to_linear(x)), x, 1e-12);
  }
  EXPECT_NEAR(watts_to_dbm(dbm_to_watts(-200.0)), -200.0, 1e-12);
  EXPECT_NEAR(watts_to_dbm(dbm_to_watts(200.0)), 200.0, 1e-12);
}
