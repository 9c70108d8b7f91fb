#include <gtest/gtest.h>

#include <cmath>

#include "xorlab/pipeline.hpp"

using namespace xorlab;

namespace {

Observation planted(int n, int k, double p, double delta, std::uint64_t seed, const PlantedAssignment& x) {
  return sample_planted(ModelParams{n, k, SamplingModel::bernoulli(p), delta, seed}, x);
}

Observation as_clean(Observation obs) {
  obs.set_pool(Pool::clean);
  return obs;
}

Observation clean_pool(int n, int k, std::uint64_t m, double delta, std::uint64_t seed, const PlantedAssignment& x) {
  return as_clean(sample_planted(ModelParams{n, k, SamplingModel::without_replacement(m), delta, seed}, x));
}

std::vector<int> corrupt(std::vector<int> x, std::size_t count, KeyedStream rng) {
  const auto picks = detail::floyd_subset(x.size(), count, rng);
  for (auto i : picks) x[static_cast<std::size_t>(i)] = -x[static_cast<std::size_t>(i)];
  return x;
}

std::vector<int> negated(std::vector<int> x) {
  for (auto& s : x) s = -s;
  return x;
}

}  // namespace

TEST(Pipeline, DecisionRule) {
  EXPECT_EQ(decide(1.0, 1.0), Verdict::planted);
  EXPECT_EQ(decide(1.5, 1.0), Verdict::planted);
  EXPECT_EQ(decide(0.999, 1.0), Verdict::null_model);
}

TEST(Pipeline, ThresholdIsHalfClosedFormMean) {
  const auto fam = build_cycle_family(1, 3, 2);
  EXPECT_DOUBLE_EQ(detection_threshold(16, fam, 0.3, 0.9),
                   0.5 * closed_form_moments(16, 6, 4, 45, 0.3, 0.9).mean_planted);
}

TEST(Pipeline, NoiselessFullSupportIsPlanted) {
  const auto fam = build_cycle_family(1, 3, 2);
  const auto obs = planted(8, 3, 1.0, 1.0, 1, PlantedAssignment::random(8, KeyedStream(1, "x")));
  StatisticConfig exact{true, 0, 0};
  const auto d = detect(obs, fam, exact);
  EXPECT_DOUBLE_EQ(d.statistic, 45.0 * 20160.0);
  EXPECT_DOUBLE_EQ(d.threshold, 0.5 * 45.0 * 20160.0);
  EXPECT_EQ(d.verdict, Verdict::planted);
}

TEST(Pipeline, EmptySupportIsNull) {
  const auto fam = build_cycle_family(1, 3, 2);
  const Observation obs(10, 3, 0.9, SamplingModel::bernoulli(0.2), 0);
  for (bool exact : {true, false}) {
    const auto d = detect(obs, fam, StatisticConfig{exact, 0, 3});
    EXPECT_EQ(d.statistic, 0.0);
    EXPECT_EQ(d.verdict, Verdict::null_model);
  }
}

TEST(Pipeline, DetectionAtOperatingPoint) {
  const auto fam = build_cycle_family(1, 3, 2);
  const int n = 16;
  const double p = 4.0 * detection_operating_point(n, 6, 4, fam.size(), 0.9);
  int correct = 0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    const bool is_planted = t % 2 == 0;
    const ModelParams mp{n, 3, SamplingModel::bernoulli(p), 0.9, 1000 + t};
    const auto obs = is_planted ? sample_planted(mp, PlantedAssignment::random(n, KeyedStream(t, "x"))) : sample_null(mp);
    const auto d = detect(obs, fam, StatisticConfig{false, 0, t});
    correct += (d.verdict == Verdict::planted) == is_planted ? 1 : 0;
  }
  EXPECT_GE(correct, 90);
}

TEST(Pipeline, OperatingPointsSolveTheirEquations) {
  const double p = detection_operating_point(16, 6, 4, 45, 0.9);
  const auto mom = closed_form_moments(16, 6, 4, 45, p, 0.9);
  EXPECT_NEAR(mom.mean_planted * mom.mean_planted / mom.var_null, 25.0, 1e-9);
  const double q = recovery_operating_point(24, 7, 4, 30, 0.9);
  const double mean = rooted_closed_form_mean(24, 7, 4, 30, q, 0.9, 1);
  const double var = 30.0 * falling_factorial(22, 5) * factorial(5) * std::pow(q, 4);
  EXPECT_DOUBLE_EQ(rooted_null_variance(24, 7, 4, 30, q), var);
  EXPECT_NEAR(mean * mean / var, 25.0, 1e-9);
  EXPECT_NEAR(clean_pool_probability(24, 3) * 253.0, 30.0, 1e-12);
}

TEST(Pipeline, PairwiseSignNoiselessExact) {
  const auto fam = build_path_family(1, 3, 2);
  const auto x = PlantedAssignment::random(9, KeyedStream(2, "x"));
  const auto obs = planted(9, 3, 1.0, 1.0, 1, x);
  StatisticConfig exact{true, 0, 0};
  for (int b = 1; b < 9; ++b) EXPECT_EQ(estimate_pairwise_sign(obs, 0, b, fam, exact), x.x[0] * x.x[b]);
  EXPECT_THROW(estimate_pairwise_sign(obs, 3, 3, fam, exact), ValidationError);
}

TEST(Pipeline, PairwiseSignGenerousRegime) {
  const auto fam = build_path_family(1, 3, 2);
  const int n = 16;
  const double p = std::min(1.0, 4.0 * recovery_operating_point(n, 7, 4, fam.size(), 0.9));
  int agree = 0;
  for (std::uint64_t t = 0; t < 50; ++t) {
    const auto x = PlantedAssignment::random(n, KeyedStream(t, "x"));
    const auto obs = planted(n, 3, p, 0.9, 500 + t, x);
    const int a = static_cast<int>(t % n), b = static_cast<int>((t + 7) % n);
    agree += estimate_pairwise_sign(obs, a, b, fam, StatisticConfig{false, 0, t}) == x.x[a] * x.x[b] ? 1 : 0;
  }
  EXPECT_GE(agree, 45);
}

TEST(Pipeline, PairwiseAccuracyGrowsWithSamples) {
  const auto fam = build_path_family(1, 3, 2);
  const int n = 16;
  const double p0 = recovery_operating_point(n, 7, 4, fam.size(), 0.9);
  std::vector<int> correct;
  for (double scale : {1.0, 2.0, 4.0}) {
    int agree = 0;
    for (std::uint64_t t = 0; t < 100; ++t) {
      const auto x = PlantedAssignment::random(n, KeyedStream(t, "x"));
      const auto obs = planted(n, 3, std::min(1.0, scale * p0), 0.9, 9000 + t, x);
      agree += estimate_pairwise_sign(obs, 0, 1, fam, StatisticConfig{false, 0, t}) == x.x[0] * x.x[1] ? 1 : 0;
    }
    correct.push_back(agree);
  }
  int inversions = 0;
  for (std::size_t i = 0; i < correct.size(); ++i)
    for (std::size_t j = i + 1; j < correct.size(); ++j) inversions += correct[i] > correct[j] ? 1 : 0;
  EXPECT_LE(inversions, 1) << correct[0] << ' ' << correct[1] << ' ' << correct[2];
}

TEST(Pipeline, PreliminaryNoiselessIsSignNormalized) {
  const auto fam = build_path_family(1, 3, 2);
  const auto x = PlantedAssignment::random(9, KeyedStream(5, "x"));
  const auto obs = planted(9, 3, 1.0, 1.0, 2, x);
  const auto xhat = preliminary_assignment(obs, fam, StatisticConfig{true, 0, 0});
  for (int i = 0; i < 9; ++i) EXPECT_EQ(xhat[static_cast<std::size_t>(i)], x.x[static_cast<std::size_t>(i)] * x.x[0]);
}

TEST(Pipeline, PreliminaryErrorFraction) {
  const auto fam = build_path_family(1, 3, 2);
  const int n = 16, k = 3;
  const double p = std::min(1.0, 4.0 * recovery_operating_point(n, 7, 4, fam.size(), 0.9));
  const auto x = PlantedAssignment::all_plus(n);
  int good = 0;
  for (std::uint64_t t = 0; t < 20; ++t) {
    const auto xhat = preliminary_assignment(planted(n, k, p, 0.9, 300 + t, x), fam, StatisticConfig{false, 0, t});
    for (int s : xhat) EXPECT_TRUE(s == 1 || s == -1);
    good += hamming(xhat, x.x) <= static_cast<std::size_t>(n / (4 * k)) ? 1 : 0;
  }
  EXPECT_GE(good, 18);
}

TEST(Pipeline, GlobalSignNoiseless) {
  const auto x = PlantedAssignment::random(20, KeyedStream(1, "x"));
  const auto clean = clean_pool(20, 3, 300, 1.0, 4, x);
  bool flipped = true;
  EXPECT_EQ(fix_global_sign(x.x, clean, 3, &flipped), x.x);
  EXPECT_FALSE(flipped);
  EXPECT_EQ(fix_global_sign(negated(x.x), clean, 3, &flipped), x.x);
  EXPECT_TRUE(flipped);
  // Even k: sign is not identifiable and is left alone.
  EXPECT_EQ(fix_global_sign(negated(x.x), clean, 4), negated(x.x));
}

TEST(Pipeline, GlobalSignFlipComplementsSatisfaction) {
  const auto x = PlantedAssignment::random(15, KeyedStream(6, "x"));
  const auto clean = clean_pool(15, 3, 200, 1.0, 7, x);
  const auto xhat = corrupt(x.x, 3, KeyedStream(1, "c"));
  EXPECT_DOUBLE_EQ(satisfied_fraction(xhat, clean) + satisfied_fraction(negated(xhat), clean), 1.0);
}

TEST(Pipeline, GlobalSignEmptyPool) {
  const Observation empty(10, 3, 0.9, SamplingModel::without_replacement(0), 0);
  EXPECT_THROW(fix_global_sign(PlantedAssignment::all_plus(10).x, empty, 3), ValidationError);
  EXPECT_NO_THROW(fix_global_sign(PlantedAssignment::all_plus(10).x, empty, 4));
}

TEST(Pipeline, GlobalSignWithCorruptionAndNoise) {
  const int n = 40;
  int kept = 0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    const auto x = PlantedAssignment::random(n, KeyedStream(t, "x"));
    const auto clean = clean_pool(n, 3, 2000, 0.9, 100 + t, x);
    const auto xhat = corrupt(x.x, n / 20, KeyedStream(t, "c"));
    kept += fix_global_sign(xhat, clean, 3) == xhat ? 1 : 0;
  }
  EXPECT_GE(kept, 99);
}

TEST(Pipeline, CleanupNoiselessIdentity) {
  const auto x = PlantedAssignment::random(30, KeyedStream(2, "x"));
  const auto clean = clean_pool(30, 3, 500, 1.0, 8, x);
  EXPECT_EQ(cleanup(x.x, clean), x.x);
}

TEST(Pipeline, CleanupRepairsSingleErrorWhenVotesAgree) {
  const int n = 12;
  const auto x = PlantedAssignment::random(n, KeyedStream(3, "x"));
  const auto clean = as_clean(planted(n, 3, 1.0, 1.0, 1, x));
  for (int bad = 0; bad < n; ++bad) {
    auto xhat = x.x;
    xhat[static_cast<std::size_t>(bad)] = -xhat[static_cast<std::size_t>(bad)];
    CleanupStats stats;
    EXPECT_EQ(cleanup(xhat, clean, &stats), x.x);
    EXPECT_EQ(stats.changed, 1U);
  }
}

TEST(Pipeline, CleanupAtFiniteScale) {
  const int n = 100, k = 3;
  int exact = 0;
  for (std::uint64_t t = 0; t < 40; ++t) {
    const auto x = PlantedAssignment::random(n, KeyedStream(t, "x"));
    const auto clean = clean_pool(n, k, 20 * n, 0.8, 700 + t, x);
    const auto xhat = corrupt(x.x, n / (4 * k), KeyedStream(t, "c"));
    exact += cleanup(xhat, clean) == x.x ? 1 : 0;
  }
  EXPECT_GE(exact, 38);
}

TEST(Pipeline, CleanupEdgeCases) {
  const auto x = PlantedAssignment::random(8, KeyedStream(4, "x"));
  const Observation empty = as_clean(Observation(8, 3, 0.9, SamplingModel::without_replacement(0), 0));
  CleanupStats stats;
  EXPECT_EQ(cleanup(x.x, empty, &stats), x.x);
  EXPECT_EQ(stats.silent, 8U);

  // Vertex 0 receives one vote each way: a tie, resolved to +1.
  Observation tie(8, 3, 0.9, SamplingModel::without_replacement(2), 0);
  tie.push_tuple(std::vector<int>{0, 1, 2}, 1);
  tie.push_tuple(std::vector<int>{0, 3, 4}, -1);
  tie.set_pool(Pool::clean);
  const std::vector<int> ones(8, 1);
  auto minus = ones;
  minus[0] = -1;
  EXPECT_EQ(cleanup(minus, tie)[0], 1);

  Observation main = tie;
  main.set_pool(Pool::main);
  EXPECT_THROW(cleanup(ones, main), ValidationError);
}

TEST(Pipeline, RecoverNoiselessExact) {
  const auto fam = build_path_family(1, 3, 2);
  const auto x = PlantedAssignment::random(10, KeyedStream(9, "x"));
  const auto obs = planted(10, 3, 1.0, 1.0, 3, x);
  RecoveryConfig cfg;
  cfg.statistic = StatisticConfig{true, 0, 1};
  cfg.split = 0.3;
  const auto res = recover(obs, fam, cfg);
  EXPECT_EQ(res.assignment, x.x);
  EXPECT_EQ(res.main_size + res.clean_size, obs.size());
}

TEST(Pipeline, RecoverEvenArityUpToSign) {
  const auto fam = build_path_family(1, 4, 2, FamilyMode::sample(3, 2));
  const int n = 10;
  int ok = 0;
  for (std::uint64_t t = 0; t < 4; ++t) {
    const auto x = PlantedAssignment::random(n, KeyedStream(t, "x"));
    const auto obs = planted(n, 4, 1.0, 1.0, t, x);
    RecoveryConfig cfg;
    cfg.statistic = StatisticConfig{true, 0, t};
    cfg.split = 0.3;
    const auto res = recover(obs, fam, cfg);
    ok += recovery_success(res.assignment, x.x, 4) ? 1 : 0;
    EXPECT_FALSE(res.sign_flipped);
  }
  EXPECT_EQ(ok, 4);
  EXPECT_TRUE(recovery_success(negated(PlantedAssignment::all_plus(5).x), PlantedAssignment::all_plus(5).x, 4));
  EXPECT_FALSE(recovery_success(negated(PlantedAssignment::all_plus(5).x), PlantedAssignment::all_plus(5).x, 3));
}

TEST(Pipeline, RecoverIsDeterministic) {
  const auto fam = build_path_family(1, 3, 2);
  const auto x = PlantedAssignment::random(14, KeyedStream(1, "x"));
  const auto obs = planted(14, 3, 0.5, 0.9, 5, x);
  RecoveryConfig cfg;
  cfg.statistic.seed = 11;
  const auto a = recover(obs, fam, cfg);
  const auto b = recover(obs, fam, cfg);
  EXPECT_EQ(a.assignment, b.assignment);
  EXPECT_EQ(a.preliminary, b.preliminary);
  EXPECT_EQ(a.sign_flipped, b.sign_flipped);
  EXPECT_EQ(a.cleanup_changed, b.cleanup_changed);
}

TEST(Pipeline, RecoverEndToEnd) {
  const auto fam = build_path_family(1, 3, 2);
  const int n = 24, k = 3;
  const double p_main = 4.0 * recovery_operating_point(n, 7, 4, fam.size(), 0.9);
  const double p_clean = clean_pool_probability(n, k);
  RecoveryConfig cfg;
  cfg.split = p_clean / (p_main + p_clean);
  int ok = 0;
  for (std::uint64_t t = 0; t < 20; ++t) {
    const auto x = PlantedAssignment::random(n, KeyedStream(t, "x"));
    cfg.statistic.seed = t;
    const auto res = recover(planted(n, k, p_main + p_clean, 0.9, 4000 + t, x), fam, cfg);
    ok += recovery_success(res.assignment, x.x, k) ? 1 : 0;
  }
  EXPECT_GE(ok, 16);
}

TEST(Pipeline, LowVoteWarning) {
  const auto fam = build_path_family(1, 3, 2);
  const auto x = PlantedAssignment::random(12, KeyedStream(1, "x"));
  RecoveryConfig cfg;
  cfg.split = 0.05;
  const auto res = recover(planted(12, 3, 0.3, 0.9, 1, x), fam, cfg);
  EXPECT_FALSE(res.warnings.empty());
}
