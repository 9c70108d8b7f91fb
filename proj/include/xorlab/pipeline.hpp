#pragma once

// Detection test and recovery with sample splitting.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "xorlab/colorcode.hpp"
#include "xorlab/combinatorics.hpp"
#include "xorlab/error.hpp"
#include "xorlab/exactstats.hpp"
#include "xorlab/instance.hpp"
#include "xorlab/patterns.hpp"
#include "xorlab/rng.hpp"

namespace xorlab {

/// How a family statistic is evaluated.
struct StatisticConfig {
  bool exact = false;                // direct enumeration instead of color coding
  std::uint64_t repetitions = 0;     // colorings; 0 means ceil(1/rho)
  std::uint64_t seed = 0;

  EstimatorConfig estimator(int v) const { return EstimatorConfig::for_colors(v, seed, repetitions); }
};

enum class Verdict { null_model, planted };

inline const char* verdict_name(Verdict v) noexcept { return v == Verdict::planted ? "planted" : "null"; }

struct DetectionDecision {
  double statistic = 0.0;
  double threshold = 0.0;
  Verdict verdict = Verdict::null_model;
};

// Inclusion probability of an observation's sampling model.
inline double observed_density(const Observation& obs) {
  if (obs.model().kind == ModelKind::bernoulli) return obs.model().p;
  return static_cast<double>(obs.model().m) / static_cast<double>(obs.universe());
}

/// Half the planted mean of the family statistic.
inline double detection_threshold(int n, const std::vector<CyclePattern>& family, double p, double delta) {
  require(!family.empty(), "family must be nonempty");
  const auto& h = family.front();
  return 0.5 * closed_form_moments(n, h.v(), h.s(), family.size(), p, delta).mean_planted;
}

/// Verdict rule; a statistic exactly at the threshold counts as planted.
inline Verdict decide(double statistic, double threshold) noexcept {
  return statistic >= threshold ? Verdict::planted : Verdict::null_model;
}

inline double family_statistic(const Observation& obs, const std::vector<CyclePattern>& family,
                               const StatisticConfig& cfg) {
  require(!family.empty(), "family must be nonempty");
  LabelIndex labels(obs);
  if (cfg.exact) return static_cast<double>(family_sum_exact(family, labels, obs.n()));
  return estimate_F_detection(family, labels, obs.n(), cfg.estimator(family.front().v()));
}

/// Threshold test at half the planted mean.
inline DetectionDecision detect(const Observation& obs, const std::vector<CyclePattern>& family,
                                const StatisticConfig& cfg) {
  DetectionDecision d;
  d.threshold = detection_threshold(obs.n(), family, observed_density(obs), obs.delta());
  d.statistic = family_statistic(obs, family, cfg);
  d.verdict = decide(d.statistic, d.threshold);
  return d;
}

inline int sign_of(double value) noexcept { return value < 0.0 ? -1 : 1; }

/// Rooted statistic F_{J,a,b} for every b (entry a is 0).
inline std::vector<double> rooted_statistics(const Observation& obs, int a, const std::vector<PathPattern>& family,
                                             const StatisticConfig& cfg) {
  require(!family.empty(), "family must be nonempty");
  require(a >= 0 && a < obs.n(), "anchor out of range");
  LabelIndex labels(obs);
  const int n = obs.n();
  if (!cfg.exact) return estimate_F_recovery_all(family, a, labels, n, cfg.estimator(family.front().v()));
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (int b = 0; b < n; ++b) {
    if (b == a) continue;
    std::int64_t total = 0;
    for (const auto& pat : family) total += rooted_embed_sum_exact(pat, a, b, labels, n);
    out[static_cast<std::size_t>(b)] = static_cast<double>(total);
  }
  return out;
}

/// Estimate of x_a x_b; a zero statistic gives +1.
inline int estimate_pairwise_sign(const Observation& obs, int a, int b, const std::vector<PathPattern>& family,
                                  const StatisticConfig& cfg) {
  require(a != b, "pairwise sign needs distinct vertices");
  require(b >= 0 && b < obs.n(), "vertex out of range");
  LabelIndex labels(obs);
  if (cfg.exact) {
    std::int64_t total = 0;
    for (const auto& pat : family) total += rooted_embed_sum_exact(pat, a, b, labels, obs.n());
    return sign_of(static_cast<double>(total));
  }
  return sign_of(estimate_F_recovery(family, a, b, labels, obs.n(), cfg.estimator(family.front().v())));
}

/// Anchor vertex 0 at +1 and sign every other vertex relative to it.
inline std::vector<int> preliminary_assignment(const Observation& obs, const std::vector<PathPattern>& family,
                                               const StatisticConfig& cfg) {
  require(obs.n() >= 2, "need at least two variables");
  const auto stats = rooted_statistics(obs, 0, family, cfg);
  std::vector<int> xhat(stats.size());
  for (std::size_t b = 0; b < stats.size(); ++b) xhat[b] = sign_of(stats[b]);
  xhat[0] = 1;
  return xhat;
}

inline int parity_under(const std::vector<int>& x, const std::vector<int>& tuple) noexcept {
  int s = 1;
  for (int i : tuple) s *= x[static_cast<std::size_t>(i)];
  return s;
}

/// Fraction of constraints whose label equals the parity under x.
inline double satisfied_fraction(const std::vector<int>& x, const Observation& obs) {
  require(!obs.empty(), "no constraints to evaluate");
  std::size_t good = 0;
  for (std::size_t i = 0; i < obs.size(); ++i)
    if (obs.entries()[i].label == parity_under(x, obs.tuple(i))) ++good;
  return static_cast<double>(good) / static_cast<double>(obs.size());
}

/// For odd k, flip x-hat when it satisfies fewer than half the constraints.
inline std::vector<int> fix_global_sign(const std::vector<int>& xhat, const Observation& clean, int k,
                                        bool* flipped = nullptr) {
  if (flipped) *flipped = false;
  if (k % 2 == 0) return xhat;
  require(!clean.empty(), "global sign is undecidable without clean-up constraints");
  if (satisfied_fraction(xhat, clean) >= 0.5) return xhat;
  if (flipped) *flipped = true;
  std::vector<int> out(xhat);
  for (auto& s : out) s = -s;
  return out;
}

struct CleanupStats {
  std::size_t changed = 0;
  std::size_t silent = 0;  // vertices with no incident constraint
};

/// Majority vote T_i = sum_{e containing i} y_e prod_{j in e, j != i} xhat_j.
/// Ties give +1; vertices without votes keep their preliminary value.
inline std::vector<int> cleanup(const std::vector<int>& xhat, const Observation& clean, CleanupStats* stats = nullptr) {
  require(clean.pool() != Pool::main, "clean-up votes must come from a pool independent of the preliminary estimate");
  require(static_cast<int>(xhat.size()) == clean.n(), "assignment length must equal n");
  std::vector<std::int64_t> votes(xhat.size(), 0);
  std::vector<std::uint32_t> seen(xhat.size(), 0);
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const auto tuple = clean.tuple(i);
    const int p = clean.entries()[i].label * parity_under(xhat, tuple);
    for (int u : tuple) {
      votes[static_cast<std::size_t>(u)] += p * xhat[static_cast<std::size_t>(u)];
      ++seen[static_cast<std::size_t>(u)];
    }
  }
  CleanupStats local;
  std::vector<int> out(xhat.size());
  for (std::size_t i = 0; i < xhat.size(); ++i) {
    if (seen[i] == 0) {
      out[i] = xhat[i];
      ++local.silent;
      continue;
    }
    out[i] = votes[i] >= 0 ? 1 : -1;
    if (out[i] != xhat[i]) ++local.changed;
  }
  if (stats) *stats = local;
  return out;
}

// ---------------------------------------------------------------------------
// Recovery

struct RecoveryConfig {
  StatisticConfig statistic;
  double split = 0.25;        // fraction routed to the clean-up pool
  double min_votes = 30.0;    // expected votes per coordinate below which a warning is recorded
};

struct RecoveryResult {
  std::vector<int> assignment;
  std::vector<int> preliminary;
  bool sign_flipped = false;
  std::size_t cleanup_changed = 0;
  std::size_t cleanup_silent = 0;
  std::size_t main_size = 0;
  std::size_t clean_size = 0;
  std::vector<std::string> warnings;
};

/// Expected clean-up votes per coordinate at inclusion probability p.
inline double expected_votes(int n, int k, double p) {
  return p * static_cast<double>(binomial(static_cast<std::uint64_t>(n - 1), static_cast<std::uint64_t>(k - 1)));
}

/// Recovery from an explicit (main, clean) pair of pools.
inline RecoveryResult recover_from_pools(const Observation& main, const Observation& clean,
                                         const std::vector<PathPattern>& family, const RecoveryConfig& cfg) {
  require(main.n() == clean.n() && main.k() == clean.k(), "pools must share n and k");
  RecoveryResult res;
  res.main_size = main.size();
  res.clean_size = clean.size();
  const double votes = expected_votes(clean.n(), clean.k(), observed_density(clean));
  if (votes < cfg.min_votes)
    res.warnings.push_back("expected clean-up votes per coordinate " + std::to_string(votes) + " below " +
                           std::to_string(cfg.min_votes));
  res.preliminary = preliminary_assignment(main, family, cfg.statistic);
  auto signed_x = fix_global_sign(res.preliminary, clean, main.k(), &res.sign_flipped);
  CleanupStats cs;
  res.assignment = cleanup(signed_x, clean, &cs);
  res.cleanup_changed = cs.changed;
  res.cleanup_silent = cs.silent;
  if (cs.silent > 0) res.warnings.push_back(std::to_string(cs.silent) + " vertices had no clean-up votes");
  return res;
}

/// Split the observation, then preliminary estimate, sign fix and clean-up.
inline RecoveryResult recover(const Observation& obs, const std::vector<PathPattern>& family,
                              const RecoveryConfig& cfg) {
  KeyedStream rng(cfg.statistic.seed, "split");
  auto [main, clean] = split_samples(obs, cfg.split, rng);
  return recover_from_pools(main, clean, family, cfg);
}

inline RecoveryResult recover(const Observation& obs, int r, int ell, const RecoveryConfig& cfg) {
  return recover(obs, build_path_family(r, obs.k(), ell), cfg);
}

/// Exact recovery, or recovery up to a global sign when k is even.
inline bool recovery_success(const std::vector<int>& xhat, const std::vector<int>& x, int k) {
  if (xhat == x) return true;
  if (k % 2 != 0) return false;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (xhat[i] != -x[i]) return false;
  return true;
}

inline std::size_t hamming(const std::vector<int>& a, const std::vector<int>& b) {
  require(a.size() == b.size(), "length mismatch");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

// ---------------------------------------------------------------------------
// Operating points

/// p at which (planted mean)^2 = ratio * (null variance) for a cycle family.
inline double detection_operating_point(int n, int v, int s, std::uint64_t family_size, double delta,
                                        double ratio = 25.0) {
  require(family_size > 0 && s > 0, "empty family");
  const double ps = ratio * factorial(v) / (static_cast<double>(family_size) * falling_factorial(n, v) *
                                            std::pow(delta, 2.0 * s));
  return std::pow(ps, 1.0 / s);
}

/// p at which (rooted mean)^2 = ratio * (rooted null variance) for a path family.
inline double recovery_operating_point(int n, int v, int s, std::uint64_t family_size, double delta,
                                       double ratio = 25.0) {
  require(family_size > 0 && s > 0, "empty family");
  const double ps = ratio * factorial(v - 2) / (static_cast<double>(family_size) * falling_factorial(n - 2, v - 2) *
                                                std::pow(delta, 2.0 * s));
  return std::pow(ps, 1.0 / s);
}

/// Inclusion probability giving `votes` expected clean-up votes per coordinate.
inline double clean_pool_probability(int n, int k, double votes = 30.0) {
  return votes / static_cast<double>(binomial(static_cast<std::uint64_t>(n - 1), static_cast<std::uint64_t>(k - 1)));
}

}  // namespace xorlab
