#include <gtest/gtest.h>

#include <random>

#include "rcc/model.hpp"
#include "support.hpp"

using namespace rcc;
using rcc::testing::random_channels;
using rcc::testing::small_config;

namespace {

CoefficientBundle scalar_bundle(std::size_t n, std::size_t k, double alpha, double beta, double xi,
                                double gamma) {
  return {Matrix(n, k, alpha), Matrix(n, k, beta), std::vector<double>(n, xi),
          std::vector<double>(n, gamma), InterferenceGain::receiver};
}

}  // namespace

TEST(RelaxedRate, ZeroCommGivesZero) {
  std::mt19937_64 rng(1);
  const auto cfg = small_config(4, 3);
  const auto c = make_coefficients(random_channels(4, 3, rng), cfg);
  PowerMatrix p(3, 4);
  for (std::size_t n = 0; n < 4; ++n) p.radar(n) = 0.7;
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(relaxed_rate(p, c, 0.5, k), 0.0);
}

TEST(RelaxedRate, SingleRatio) {
  const auto c = scalar_bundle(1, 1, 1.0, 0.0, 1.0, 1.0);
  PowerMatrix p(1, 1);
  p.comm(0, 0) = 3.0;
  p.radar(0) = 17.0;
  EXPECT_DOUBLE_EQ(relaxed_rate(p, c, 0.5, 0), 2.0);
}

TEST(RelaxedRate, TwoUsersSharing) {
  const auto c = scalar_bundle(1, 2, 1.0, 0.0, 1.0, 1.0);
  PowerMatrix p(2, 1);
  p.comm(0, 0) = 2.0;
  p.comm(1, 0) = 2.0;
  // 2·log2(1 + 2/(0.5·2 + 1)) = 2
  EXPECT_NEAR(sum_relaxed_rate(p, c, 0.5), 2.0, 1e-15);
}

TEST(RelaxedRate, MatchesRawGainFormula) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto cfg = small_config(5, 3);
    const auto ch = random_channels(5, 3, rng);
    const auto c = make_coefficients(ch, cfg);
    const PowerMatrix p(rcc::testing::random_box_point(3, 5, 1.0, 1.0, rng));
    const double ref = rcc::testing::raw_relaxed_sum_rate(p, ch, cfg.noise_comm_w(), cfg.eta);
    EXPECT_NEAR(sum_relaxed_rate(p, c, cfg.eta), ref, 1e-10 * std::max(1.0, ref));
  }
}

TEST(RelaxedRate, TransmitterModeUsesInterfererGain) {
  CoefficientBundle c = scalar_bundle(1, 2, 1.0, 0.0, 1.0, 1.0);
  c.alpha(0, 1) = 4.0;
  c.interference = InterferenceGain::transmitter;
  PowerMatrix p(2, 1);
  p.comm(0, 0) = 1.0;
  p.comm(1, 0) = 1.0;
  // user 0 sees 0.5·4·1 from user 1; user 1 sees 0.5·1·1 from user 0
  EXPECT_NEAR(relaxed_rate(p, c, 0.5, 0), std::log2(1.0 + 1.0 / 3.0), 1e-15);
  EXPECT_NEAR(relaxed_rate(p, c, 0.5, 1), std::log2(1.0 + 4.0 / 1.5), 1e-15);
}

TEST(RelaxedRate, DimensionMismatch) {
  const auto c = scalar_bundle(2, 2, 1.0, 0.0, 1.0, 1.0);
  EXPECT_THROW(sum_relaxed_rate(PowerMatrix(3, 2), c, 0.5), DimensionError);
  EXPECT_THROW(relaxed_rate(PowerMatrix(2, 2), c, 0.5, 2), DimensionError);
}

TEST(RelaxedRate, MonotoneInRadarAndOwnPower) {
  std::mt19937_64 rng(9);
  const auto cfg = small_config(3, 2);
  const auto c = make_coefficients(random_channels(3, 2, rng), cfg);
  PowerMatrix p(rcc::testing::random_box_point(2, 3, 1.0, 1.0, rng));
  double prev = sum_relaxed_rate(p, c, 0.5);
  for (int step = 0; step < 20; ++step) {
    p.radar(1) += 0.1;
    const double r = sum_relaxed_rate(p, c, 0.5);
    EXPECT_LE(r, prev);
    prev = r;
  }
  p.comm(1, 2) = 0.0;
  prev = sum_relaxed_rate(p, c, 0.5);
  for (int step = 0; step < 20; ++step) {
    p.comm(0, 2) += 0.1;
    const double r = sum_relaxed_rate(p, c, 0.5);
    EXPECT_GE(r, prev);
    prev = r;
  }
}

TEST(RadarSinr, Examples) {
  auto c = scalar_bundle(1, 1, 1.0, 0.0, 1.0, 1.0);
  PowerMatrix p(1, 1);
  p.radar(0) = 1.0;
  p.comm(0, 0) = 1.0;
  EXPECT_DOUBLE_EQ(radar_sinr(p, c), 0.5);

  c = scalar_bundle(2, 1, 1.0, 0.0, 1.0, 1.0);
  PowerMatrix q(1, 2);
  q.radar(0) = q.radar(1) = 1.0;
  EXPECT_DOUBLE_EQ(radar_sinr(q, c), 1.0);
}

TEST(RadarSinr, NormalizedFormEqualsRawForm) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto cfg = small_config(4, 3);
    const auto ch = random_channels(4, 3, rng);
    const PowerMatrix p(rcc::testing::random_box_point(3, 4, 1.0, 1.0, rng));
    const double a = radar_sinr(p, make_coefficients(ch, cfg));
    const double b = radar_sinr_raw(p, ch, cfg.noise_radar_w());
    EXPECT_NEAR(a / b, 1.0, 1e-12);
  }
}

TEST(BinaryRate, Examples) {
  std::mt19937_64 rng(2);
  const auto cfg = small_config(2, 2);
  const auto ch = random_channels(2, 2, rng);
  Assignment none{{std::nullopt, std::nullopt}, {0.0, 0.0}, {0.3, 0.1}, {0.0, 0.0}};
  EXPECT_EQ(binary_rate(none, ch, cfg), 0.0);

  // Hand substitution on a two-subcarrier instance.
  ChannelSet hand{Matrix(2, 2), Matrix(2, 2), {1.0, 1.0}, {1.0, 1.0}};
  hand.h2(0, 0) = 2e-10;
  hand.h2(0, 1) = 5e-11;
  hand.h2(1, 0) = 1e-12;
  hand.h2(1, 1) = 8e-10;
  hand.s2(0, 0) = 1e-11;
  hand.s2(1, 1) = 4e-11;
  Assignment a{{0, 1}, {0.5, 0.25}, {0.2, 1.0}, {0.0, 0.0}};
  const double sigma = dbm_to_watts(-105.0);
  const double expect = std::log2(1.0 + 2e-10 * 0.5 / (1e-11 * 0.2 + sigma)) +
                        std::log2(1.0 + 8e-10 * 0.25 / (4e-11 * 1.0 + sigma));
  EXPECT_NEAR(binary_rate(a, hand, cfg), expect, 1e-13);
}

TEST(BinaryRate, RejectsPowerOnUnownedSubcarrier) {
  std::mt19937_64 rng(2);
  const auto cfg = small_config(1, 1);
  Assignment bad{{std::nullopt}, {0.1}, {0.0}, {0.0}};
  EXPECT_THROW(binary_rate(bad, random_channels(1, 1, rng), cfg), DomainError);
}

TEST(PenaltyConsistency, SingleOwnerColumnsIgnoreEta) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> pick(-1, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto cfg = small_config(6, 4);
    const auto ch = random_channels(6, 4, rng);
    const auto c = make_coefficients(ch, cfg);
    Matrix m = rcc::testing::random_box_point(4, 6, 1.0, 1.0, rng);
    for (std::size_t n = 0; n < 6; ++n) {
      const int owner = pick(rng);
      for (std::size_t k = 0; k < 4; ++k)
        if (static_cast<int>(k) != owner) m(k, n) = 0.0;
    }
    const PowerMatrix p(m);
    const Assignment a = extract_assignment(p, cfg.p_c_cap_w());
    const double binary = binary_rate(a, ch, cfg);
    for (double eta : {0.5, 1.0, 7.0})
      EXPECT_NEAR(sum_relaxed_rate(p, c, eta), binary, 1e-12 * std::max(1.0, binary));
    EXPECT_TRUE(to_power_matrix(a, 4) == p);
  }
}

TEST(Extraction, Rules) {
  PowerMatrix p(2, 3);
  p.comm(1, 0) = 0.8;           // single owner
  p.comm(0, 2) = 0.6;           // (0.6, 0.4) column
  p.comm(1, 2) = 0.4;
  p.radar(1) = 0.3;
  const Assignment a = extract_assignment(p, 0.9);
  ASSERT_TRUE(a.owner[0].has_value());
  EXPECT_EQ(*a.owner[0], 1u);
  EXPECT_DOUBLE_EQ(a.comm_power[0], 0.8);
  EXPECT_FALSE(a.owner[1].has_value());
  EXPECT_EQ(a.comm_power[1], 0.0);
  EXPECT_DOUBLE_EQ(a.radar_power[1], 0.3);
  EXPECT_EQ(*a.owner[2], 0u);
  EXPECT_DOUBLE_EQ(a.comm_power[2], 0.9);  // 1.0 clipped to the cap
  EXPECT_NEAR(a.dominance[2], 0.4 / 0.6, 1e-15);
  EXPECT_EQ(count_shared(a, 0.5), 1u);
}

TEST(Extraction, TiesGoToLowestIndex) {
  PowerMatrix p(3, 1);
  p.comm(1, 0) = 0.5;
  p.comm(2, 0) = 0.5;
  EXPECT_EQ(*extract_assignment(p, 1.0).owner[0], 1u);
}

TEST(SharingInequality, Examples) {
  const auto zero = proposition1_inequality(0.3, 2.0, 1.5, 0.0, 0.5);
  EXPECT_EQ(zero.lhs, zero.rhs);
  const auto b = proposition1_inequality(1.0, 1.0, 1.0, 0.5, 0.5);
  EXPECT_DOUBLE_EQ(b.lhs, 1.0);
  EXPECT_NEAR(b.rhs, 2.0 * std::log2(1.4), 1e-15);
  EXPECT_LE(b.rhs, b.lhs);
}

TEST(SharingInequality, DomainErrors) {
  EXPECT_THROW(proposition1_inequality(0.0, 1.0, 1.0, 0.1, 0.5), DomainError);
  EXPECT_THROW(proposition1_inequality(2.0, 1.0, 1.0, 0.1, 0.5), DomainError);
  EXPECT_THROW(proposition1_inequality(1.0, 1.0, 1.0, 1.5, 0.5), DomainError);
  EXPECT_THROW(proposition1_inequality(1.0, 1.0, 1.0, -0.1, 0.5), DomainError);
  EXPECT_THROW(proposition1_inequality(1.0, 1.0, 1.0, 0.1, -1.0), DomainError);
}

TEST(SharingInequality, HoldsForEtaAtLeastHalf) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100000; ++i) {
    double z1 = std::pow(10.0, -3.0 + 6.0 * u(rng));
    double z2 = std::pow(10.0, -3.0 + 6.0 * u(rng));
    if (z1 > z2) std::swap(z1, z2);
    const double W = std::pow(10.0, -3.0 + 6.0 * u(rng));
    const double delta = W * u(rng);
    const double eta = 0.5 + 2.5 * u(rng);
    const auto b = proposition1_inequality(z1, z2, W, delta, eta);
    ASSERT_GE(b.lhs - b.rhs, -1e-12) << z1 << ' ' << z2 << ' ' << W << ' ' << delta << ' ' << eta;
  }
}

TEST(SharingInequality, FailsBelowHalf) {
  // Grid search with eta = 0.2 and equal noise levels.
  bool violated = false;
  for (double z = 0.01; z < 100.0 && !violated; z *= 1.5)
    for (double W = 0.01; W < 100.0 && !violated; W *= 1.5)
      for (int j = 1; j < 20 && !violated; ++j) {
        const auto b = proposition1_inequality(z, z, W, W * j / 20.0, 0.2);
        violated = b.rhs > b.lhs;
      }
  EXPECT_TRUE(violated);
}
