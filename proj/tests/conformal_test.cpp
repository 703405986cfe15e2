#include "cmcqa/conformal.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "cmcqa/error.hpp"

namespace cmcqa {
namespace {

// Threshold rank from integer arithmetic over alpha = a / 100:
// ceil((n+1)(100-a) / 100).
std::size_t rank_oracle(std::size_t n, int alpha_percent) {
  const std::size_t num = (n + 1) * static_cast<std::size_t>(100 - alpha_percent);
  return (num + 99) / 100;
}

TEST(ConformalQuantile, NineScoresAtHalf) {
  const std::vector<double> scores{0.9, 0.1, 0.5, 0.3, 0.7, 0.2, 0.8, 0.4, 0.6};
  const auto out = conformal_quantile(scores, 0.5);
  ASSERT_TRUE(out.q_hat);
  EXPECT_EQ(*out.q_hat, 0.5);
  EXPECT_EQ(out.n, 9u);
  EXPECT_FALSE(out.full_set());
}

TEST(ConformalQuantile, SmallCalibrationSetGivesFullSet) {
  const std::vector<double> scores{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  EXPECT_EQ(quantile_rank(9, 0.05), 10u);
  const auto out = conformal_quantile(scores, 0.05);
  EXPECT_TRUE(out.full_set());
  EXPECT_FALSE(out.q_hat);
  EXPECT_EQ(prediction_mask(std::vector<double>{1, 0, 0, 0}, out), 0b1111u);
}

TEST(ConformalQuantile, ConstantScores) {
  const std::vector<double> scores(20, 0.35);
  for (double alpha : {0.1, 0.3, 0.5, 0.9}) {
    EXPECT_EQ(*conformal_quantile(scores, alpha).q_hat, 0.35);
  }
}

TEST(ConformalQuantile, RanksAndRules) {
  EXPECT_EQ(quantile_rank(100, 0.1), 91u);
  EXPECT_EQ(quantile_rank(99, 0.1), 90u);  // (n+1)(1-alpha) is an integer
  EXPECT_EQ(quantile_rank(99, 0.1, QuantileRule::kFloor), 90u);
  EXPECT_EQ(quantile_rank(100, 0.1, QuantileRule::kFloor), 90u);
  EXPECT_EQ(quantile_rank(3, 0.9, QuantileRule::kFloor), 1u);
}

TEST(ConformalQuantile, Errors) {
  EXPECT_THROW(conformal_quantile(std::vector<double>{}, 0.1), Error);
  EXPECT_THROW(conformal_quantile(std::vector<double>{0.5}, 0.0), Error);
  EXPECT_THROW(conformal_quantile(std::vector<double>{0.5}, 1.0), Error);
  EXPECT_THROW(conformal_quantile(std::vector<double>{1.5}, 0.5), Error);
  try {
    conformal_quantile(std::vector<double>{}, 0.1);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kCalibration);
  }
}

TEST(ConformalQuantile, MatchesRankOracleOnSmallMultisets) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    std::vector<double> scores(n);
    for (double& s : scores) s = static_cast<double>(rng() % 6) / 5.0;
    std::vector<double> sorted = scores;
    std::sort(sorted.begin(), sorted.end());
    for (int a = 5; a <= 95; a += 5) {
      const double alpha = a / 100.0;
      const std::size_t k = rank_oracle(n, a);
      EXPECT_EQ(quantile_rank(n, alpha), k) << "n=" << n << " a=" << a;
      const auto out = conformal_quantile(scores, alpha);
      if (k > n) {
        EXPECT_TRUE(out.full_set());
      } else {
        ASSERT_TRUE(out.q_hat);
        EXPECT_EQ(*out.q_hat, sorted[k - 1]);
        EXPECT_NE(std::find(scores.begin(), scores.end(), *out.q_hat), scores.end());
      }
    }
  }
}

TEST(ConformalQuantile, NonIncreasingInAlpha) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> scores(1 + rng() % 200);
    for (double& s : scores) s = u(rng);
    double previous = 2.0;
    for (int a = 1; a < 100; ++a) {
      const auto out = conformal_quantile(scores, a / 100.0);
      const double q = out.q_hat.value_or(2.0);
      EXPECT_LE(q, previous);
      previous = q;
    }
  }
}

TEST(PredictionSet, ThresholdExamples) {
  const std::vector<double> probs{0.2, 0.6, 0.1, 0.1};
  CalibrationOutput calib;
  calib.q_hat = 0.85;
  EXPECT_EQ(prediction_mask(probs, calib), 0b0011u);
  const auto set = prediction_set("q", probs, Label::from_index(1), calib);
  EXPECT_EQ(set.size(), 2u);
  EXPECT_TRUE(set.covered);
  EXPECT_EQ(set.members, (std::vector<Label>{Label::from_index(0), Label::from_index(1)}));

  calib.q_hat = 1.0;
  EXPECT_EQ(prediction_mask(probs, calib), 0b1111u);

  calib.q_hat = 0.05;
  const auto empty = prediction_set("q", probs, Label::from_index(0), calib);
  EXPECT_EQ(empty.size(), 0u);
  EXPECT_FALSE(empty.covered);
}

TEST(PredictionSet, BoundaryScoreIsIncluded) {
  CalibrationOutput calib;
  calib.q_hat = 1.0 - 0.3;
  EXPECT_TRUE(mask_contains(prediction_mask(std::vector<double>{0.7, 0.3}, calib), 1));
}

TEST(PredictionSet, NestedInThreshold) {
  std::mt19937_64 rng(14);
  std::gamma_distribution<double> gamma(1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> p(2 + rng() % 9);
    double total = 0.0;
    for (double& v : p) total += (v = gamma(rng));
    for (double& v : p) v /= total;
    std::uint32_t previous = 0;
    for (int t = 0; t <= 20; ++t) {
      CalibrationOutput calib;
      calib.q_hat = t / 20.0;
      const std::uint32_t mask = prediction_mask(p, calib);
      EXPECT_EQ(mask & previous, previous);
      previous = mask;
    }
    EXPECT_EQ(previous, (1u << p.size()) - 1u);
  }
}

TEST(CalibrationScore, OneMinusTrueProbability) {
  const std::vector<double> probs{0.6, 0.4, 0.0};
  EXPECT_DOUBLE_EQ(calibration_score("q", probs, Label::from_index(0)).value, 0.4);
  EXPECT_EQ(calibration_score("q", std::vector<double>{1.0, 0.0}, Label::from_index(0)).value, 0.0);
  EXPECT_EQ(calibration_score("q", probs, Label::from_index(2)).value, 1.0);
  EXPECT_EQ(calibration_score("q", probs, Label::from_index(2)).question_id, "q");
  EXPECT_THROW(nonconformity(probs, 3), Error);
}

// Marginal coverage over exchangeable scores: with n calibration scores and
// one test score drawn from the same distribution, P(test <= q) >= 1 - alpha.
// Checked exactly by enumerating the rank of the test score.
TEST(ConformalQuantile, ExactCoverageOverRanks) {
  for (std::size_t n = 1; n <= 12; ++n) {
    for (int a = 5; a <= 95; a += 5) {
      const std::size_t k = quantile_rank(n, a / 100.0);
      // Test score rank r in 1..n+1, all equally likely with distinct scores.
      // Covered iff r <= k.
      const double coverage = k > n ? 1.0 : static_cast<double>(k) / static_cast<double>(n + 1);
      EXPECT_GE(coverage + 1e-12, 1.0 - a / 100.0) << n << " " << a;
    }
  }
}

}  // namespace
}  // namespace cmcqa
