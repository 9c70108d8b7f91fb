#pragma once

// Seeded Monte Carlo campaigns: configuration, trial execution, reports.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "xorlab/error.hpp"
#include "xorlab/exactstats.hpp"
#include "xorlab/instance.hpp"
#include "xorlab/patterns.hpp"
#include "xorlab/pipeline.hpp"
#include "xorlab/rng.hpp"

namespace xorlab {

enum class Task { detect, recover, moments, census, lowdeg, patterns, oracle };

inline const char* task_name(Task t) noexcept {
  switch (t) {
    case Task::detect: return "detect";
    case Task::recover: return "recover";
    case Task::moments: return "moments";
    case Task::census: return "census";
    case Task::lowdeg: return "lowdeg";
    case Task::patterns: return "patterns";
    case Task::oracle: return "oracle";
  }
  return "?";
}

inline Task parse_task(const std::string& s) {
  for (Task t : {Task::detect, Task::recover, Task::moments, Task::census, Task::lowdeg, Task::patterns, Task::oracle})
    if (s == task_name(t)) return t;
  throw ValidationError("unknown task '" + s + "'");
}

/// Flat experiment configuration. Zero p and m select the automatic
/// operating point (4x the mean-versus-deviation point of the task).
struct ExperimentConfig {
  Task task = Task::detect;
  int n = 16;
  int k = 3;
  double delta = 0.9;
  ModelKind model = ModelKind::bernoulli;
  double p = 0.0;
  std::uint64_t m = 0;
  int r = 1;
  int ell = 2;
  std::size_t family_count = 0;  // 0 = full family, otherwise a sample of that size
  std::uint64_t t_override = 0;
  bool exact = false;
  double split = 0.25;
  bool fresh_clean = false;
  double scale = 4.0;        // multiple of the operating point used in auto mode
  double clean_votes = 30.0;  // expected clean-up votes per coordinate in auto mode
  std::uint64_t trials = 1;
  std::uint64_t seed = 0;
  std::string output;

  bool auto_density() const noexcept { return p == 0.0 && m == 0; }

  void validate() const {
    require(n >= 2, "n must be at least 2");
    require(k >= 2 && k <= n, "k must satisfy 2 <= k <= n");
    require(delta > 0.0 && delta <= 1.0, "delta must lie in (0, 1]");
    require(!(p != 0.0 && m != 0), "give at most one of p and m");
    require(p >= 0.0 && p <= 1.0, "p must lie in [0, 1]");
    require(model == ModelKind::bernoulli || p == 0.0, "p applies to the bernoulli model only; use m");
    require(model != ModelKind::bernoulli || m == 0, "m applies to fixed-size models; use p");
    require(m <= binomial(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(k)) ||
                model == ModelKind::with_replacement,
            "m exceeds C(n,k)");
    require(r >= 1, "r must be at least 1");
    require(ell >= 2, "l must be at least 2");
    require(split > 0.0 && split < 1.0, "split must lie in (0, 1)");
    require(scale > 0.0, "scale must be positive");
    require(clean_votes > 0.0, "clean_votes must be positive");
    if (task == Task::detect || task == Task::recover || task == Task::moments) {
      const int v = r * k * ell + (task == Task::recover ? 1 : 0);
      require(v <= n, "pattern has more vertices than n");
      require(v <= kMaxColors, "pattern exceeds the color bitmask width");
      require(model != ModelKind::with_replacement,
              "statistics need distinct constraints; use the without-replacement or bernoulli model");
    } else {
      throw ValidationError(std::string("task '") + task_name(task) + "' has no trial campaign; use its subcommand");
    }
  }

  // Canonical key=value echo, in a fixed order.
  std::vector<std::pair<std::string, std::string>> to_pairs() const {
    auto num = [](double v) { return detail::format_double(v); };
    return {{"task", task_name(task)},
            {"n", std::to_string(n)},
            {"k", std::to_string(k)},
            {"delta", num(delta)},
            {"model", model_tag(model)},
            {"p", num(p)},
            {"m", std::to_string(m)},
            {"r", std::to_string(r)},
            {"l", std::to_string(ell)},
            {"family_count", std::to_string(family_count)},
            {"t", std::to_string(t_override)},
            {"exact", exact ? "true" : "false"},
            {"split", num(split)},
            {"fresh_clean", fresh_clean ? "true" : "false"},
            {"scale", num(scale)},
            {"clean_votes", num(clean_votes)},
            {"trials", std::to_string(trials)},
            {"seed", std::to_string(seed)},
            {"output", output}};
  }

  /// Apply one key=value setting.
  void set(const std::string& key, const std::string& value) {
    auto as_int = [&]() {
      int out = 0;
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
      require(ec == std::errc() && ptr == value.data() + value.size(), "bad integer for '" + key + "': " + value);
      return out;
    };
    auto as_u64 = [&]() {
      std::uint64_t out = 0;
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
      require(ec == std::errc() && ptr == value.data() + value.size(), "bad integer for '" + key + "': " + value);
      return out;
    };
    auto as_real = [&]() {
      try {
        return detail::parse_double(value);
      } catch (const std::exception&) {
        throw ValidationError("bad number for '" + key + "': " + value);
      }
    };
    auto as_bool = [&]() {
      if (value == "true" || value == "1") return true;
      if (value == "false" || value == "0") return false;
      throw ValidationError("bad boolean for '" + key + "': " + value);
    };
    if (key == "task") task = parse_task(value);
    else if (key == "n") n = as_int();
    else if (key == "k") k = as_int();
    else if (key == "delta") delta = as_real();
    else if (key == "model") model = parse_model_tag(value);
    else if (key == "p") p = as_real();
    else if (key == "m") m = as_u64();
    else if (key == "r") r = as_int();
    else if (key == "l") ell = as_int();
    else if (key == "family_count") family_count = as_u64();
    else if (key == "t") t_override = as_u64();
    else if (key == "exact") exact = as_bool();
    else if (key == "split") split = as_real();
    else if (key == "fresh_clean") fresh_clean = as_bool();
    else if (key == "scale") scale = as_real();
    else if (key == "clean_votes") clean_votes = as_real();
    else if (key == "trials") trials = as_u64();
    else if (key == "seed") seed = as_u64();
    else if (key == "output") output = value;
    else throw ValidationError("unknown config key '" + key + "'");
  }
};

/// Parse `key = value` lines; '#' starts a comment.
inline void apply_config_text(ExperimentConfig& cfg, std::istream& in) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, "config line " + std::to_string(lineno) + " is not key=value");
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

inline void load_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open config file " + path);
  apply_config_text(cfg, in);
}

struct TrialRecord {
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;
  std::string verdict;  // planted / null for detect and moments; empty otherwise
  bool success = false;
  double statistic = 0.0;
  double threshold = 0.0;
  std::optional<std::int64_t> hamming;
  double wall_ms = 0.0;

  bool operator==(const TrialRecord&) const = default;
};

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// Wilson score interval at 95%.
inline Interval wilson_interval(std::uint64_t successes, std::uint64_t trials) {
  require(trials > 0, "interval needs at least one trial");
  require(successes <= trials, "more successes than trials");
  constexpr double z = 1.959963984540054;
  const double nn = static_cast<double>(trials);
  const double ph = static_cast<double>(successes) / nn;
  const double denom = 1.0 + z * z / nn;
  const double centre = (ph + z * z / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(ph * (1.0 - ph) / nn + z * z / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

struct Aggregates {
  std::uint64_t successes = 0;
  double success_rate = 0.0;
  Interval success_ci;
  double statistic_mean = 0.0;
  double statistic_var = 0.0;  // unbiased; 0 for one trial
  double wall_ms_mean = 0.0;
};

/// Resolved model parameters of a campaign.
struct OperatingPoint {
  double p = 0.0;                // Bernoulli inclusion probability of the whole observation
  std::uint64_t m = 0;           // fixed-size models
  double split = 0.25;           // clean-up fraction for recovery
  double base = 0.0;             // mean-versus-deviation point before scaling
  std::uint64_t family_size = 0;
};

struct Report {
  ExperimentConfig config;
  OperatingPoint point;
  std::vector<TrialRecord> records;
  std::optional<Aggregates> aggregates;
};

// ---------------------------------------------------------------------------

inline unsigned worker_count() {
  if (const char* env = std::getenv("XORLAB_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

/// Run body(i) for i in [0, count) on a bounded pool; rethrows the first error.
template <class F>
void parallel_for(std::uint64_t count, F&& body, unsigned workers = worker_count()) {
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(count, 1)));
  if (workers <= 1) {
    for (std::uint64_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      while (true) {
        const std::uint64_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(count);
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

namespace detail {

inline std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) { return KeyedStream(seed, "trial", trial)(); }

inline ModelParams model_for(const ExperimentConfig& cfg, const OperatingPoint& pt, std::uint64_t seed) {
  ModelParams mp;
  mp.n = cfg.n;
  mp.k = cfg.k;
  mp.delta = cfg.delta;
  mp.seed = seed;
  mp.model = cfg.model == ModelKind::bernoulli ? SamplingModel::bernoulli(pt.p)
                                               : SamplingModel{cfg.model, pt.m, 0.0};
  return mp;
}

inline std::uint64_t density_to_m(int n, int k, double p) {
  const double total = static_cast<double>(binomial(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(k)));
  return static_cast<std::uint64_t>(std::llround(std::min(1.0, p) * total));
}

}  // namespace detail

/// Resolve p / m / split from the config, computing the automatic point when needed.
inline OperatingPoint resolve_operating_point(const ExperimentConfig& cfg, std::uint64_t family_size) {
  OperatingPoint pt;
  pt.family_size = family_size;
  pt.split = cfg.split;
  const int v = cfg.r * cfg.k * cfg.ell;
  const int s = 2 * cfg.r * cfg.ell;
  double p = cfg.p;
  if (cfg.m != 0) p = static_cast<double>(cfg.m) / static_cast<double>(binomial(static_cast<std::uint64_t>(cfg.n),
                                                                                static_cast<std::uint64_t>(cfg.k)));
  if (cfg.auto_density()) {
    if (cfg.task == Task::recover) {
      pt.base = recovery_operating_point(cfg.n, v + 1, s, family_size, cfg.delta);
      const double p_main = std::min(1.0, cfg.scale * pt.base);
      const double p_clean = clean_pool_probability(cfg.n, cfg.k, cfg.clean_votes);
      if (cfg.fresh_clean) {
        p = p_main;
        pt.split = p_clean;  // fresh pool density
      } else {
        p = std::min(1.0, p_main + p_clean);
        pt.split = std::clamp(p_clean / (p_main + p_clean), 1e-6, 1.0 - 1e-6);
      }
    } else {
      pt.base = detection_operating_point(cfg.n, v, s, family_size, cfg.delta);
      p = std::min(1.0, cfg.scale * pt.base);
    }
  } else if (cfg.task == Task::recover && cfg.fresh_clean) {
    pt.split = clean_pool_probability(cfg.n, cfg.k, cfg.clean_votes);
  }
  pt.p = p;
  if (cfg.model != ModelKind::bernoulli) pt.m = cfg.m != 0 ? cfg.m : detail::density_to_m(cfg.n, cfg.k, p);
  return pt;
}

namespace detail {

inline void fill_aggregates(Report& rep) {
  if (rep.records.empty()) return;
  Aggregates a;
  const double cnt = static_cast<double>(rep.records.size());
  for (const auto& r : rep.records) {
    a.successes += r.success ? 1 : 0;
    a.statistic_mean += r.statistic;
    a.wall_ms_mean += r.wall_ms;
  }
  a.statistic_mean /= cnt;
  a.wall_ms_mean /= cnt;
  for (const auto& r : rep.records) a.statistic_var += (r.statistic - a.statistic_mean) * (r.statistic - a.statistic_mean);
  a.statistic_var = rep.records.size() > 1 ? a.statistic_var / (cnt - 1.0) : 0.0;
  a.success_rate = static_cast<double>(a.successes) / cnt;
  a.success_ci = wilson_interval(a.successes, rep.records.size());
  rep.aggregates = a;
}

}  // namespace detail

/// Execute a trial campaign. Deterministic in the config; trials are keyed by
/// index so the worker schedule does not affect any record.
inline Report run(const ExperimentConfig& cfg) {
  cfg.validate();
  Report rep;
  rep.config = cfg;
  const FamilyMode mode = cfg.family_count ? FamilyMode::sample(cfg.family_count, cfg.seed) : FamilyMode::full();
  std::vector<CyclePattern> cycles;
  std::vector<PathPattern> paths;
  if (cfg.task == Task::recover) paths = build_path_family(cfg.r, cfg.k, cfg.ell, mode);
  else cycles = build_cycle_family(cfg.r, cfg.k, cfg.ell, mode);
  rep.point = resolve_operating_point(cfg, cfg.task == Task::recover ? paths.size() : cycles.size());
  const OperatingPoint pt = rep.point;
  rep.records.resize(cfg.trials);

  parallel_for(cfg.trials, [&](std::uint64_t i) {
    const auto start = std::chrono::steady_clock::now();
    TrialRecord rec;
    rec.trial = i;
    rec.seed = detail::trial_seed(cfg.seed, i);
    StatisticConfig stat{cfg.exact, cfg.t_override, KeyedStream(rec.seed, "statistic")()};
    const auto secret = PlantedAssignment::random(cfg.n, KeyedStream(rec.seed, "secret"));
    const ModelParams mp = detail::model_for(cfg, pt, rec.seed);
    switch (cfg.task) {
      case Task::detect:
      case Task::moments: {
        const bool planted = i % 2 == 0;
        const Observation obs = planted ? sample_planted(mp, secret) : sample_null(mp);
        if (cfg.task == Task::detect) {
          const auto d = detect(obs, cycles, stat);
          rec.statistic = d.statistic;
          rec.threshold = d.threshold;
          rec.verdict = verdict_name(d.verdict);
          rec.success = (d.verdict == Verdict::planted) == planted;
        } else {
          LabelIndex labels(obs);
          rec.statistic = static_cast<double>(family_sum_exact(cycles, labels, obs.n()));
          const auto mom = closed_form_moments(cfg.n, cycles.front().v(), cycles.front().s(), cycles.size(),
                                               observed_density(obs), cfg.delta);
          rec.threshold = planted ? mom.mean_planted : mom.mean_null;
          rec.verdict = planted ? "planted" : "null";
          const double sd = std::sqrt(mom.var_null);
          rec.success = std::abs(rec.statistic - rec.threshold) <= 4.0 * sd;
        }
        break;
      }
      case Task::recover: {
        RecoveryConfig rc;
        rc.statistic = stat;
        rc.split = pt.split;
        rc.min_votes = cfg.clean_votes;
        RecoveryResult res;
        const Observation obs = sample_planted(mp, secret);
        if (cfg.fresh_clean) {
          ModelParams cp = detail::model_for(cfg, pt, KeyedStream(rec.seed, "clean")());
          if (cfg.model == ModelKind::bernoulli) cp.model = SamplingModel::bernoulli(pt.split);
          else cp.model.m = detail::density_to_m(cfg.n, cfg.k, pt.split);
          Observation clean = sample_planted(cp, secret);
          clean.set_pool(Pool::clean);
          Observation main = obs;
          main.set_pool(Pool::main);
          res = recover_from_pools(main, clean, paths, rc);
        } else {
          res = recover(obs, paths, rc);
        }
        rec.success = recovery_success(res.assignment, secret.x, cfg.k);
        std::size_t h = hamming(res.assignment, secret.x);
        if (cfg.k % 2 == 0) h = std::min(h, secret.x.size() - h);
        rec.hamming = static_cast<std::int64_t>(h);
        rec.statistic = static_cast<double>(res.cleanup_changed);
        rec.threshold = 0.0;
        break;
      }
      default:
        throw ValidationError("unsupported task");
    }
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    rep.records[i] = rec;
  });
  detail::fill_aggregates(rep);
  return rep;
}

// ---------------------------------------------------------------------------
// Output

inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline constexpr const char* kCsvHeader = "trial,seed,verdict,success,statistic,threshold,hamming,wall_time_ms";

inline void write_csv(std::ostream& os, const Report& rep) {
  os << kCsvHeader << '\n';
  for (const auto& r : rep.records) {
    os << r.trial << ',' << r.seed << ',' << r.verdict << ',' << (r.success ? 1 : 0) << ',' << format_real(r.statistic)
       << ',' << format_real(r.threshold) << ',' << (r.hamming ? std::to_string(*r.hamming) : std::string()) << ','
       << format_real(r.wall_ms) << '\n';
  }
}

inline void emit_csv(const Report& rep, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), "cannot open " + path + " for writing");
  write_csv(out, rep);
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path);
}

inline std::vector<TrialRecord> parse_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "missing CSV header");
  require(line == kCsvHeader, "unexpected CSV header");
  std::vector<TrialRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    require(f.size() == 8, "CSV row must have 8 fields");
    TrialRecord r;
    r.trial = std::stoull(f[0]);
    r.seed = std::stoull(f[1]);
    r.verdict = f[2];
    r.success = f[3] == "1";
    r.statistic = std::strtod(f[4].c_str(), nullptr);
    r.threshold = std::strtod(f[5].c_str(), nullptr);
    if (!f[6].empty()) r.hamming = std::stoll(f[6]);
    r.wall_ms = std::strtod(f[7].c_str(), nullptr);
    out.push_back(r);
  }
  return out;
}

/// Structured text report. Timing is left out unless requested so that
/// repeated runs of one config compare byte for byte.
inline void write_report(std::ostream& os, const Report& rep, bool include_timing = false) {
  os << "[config]\n";
  for (const auto& [key, value] : rep.config.to_pairs()) os << key << " = " << value << '\n';
  os << "[operating-point]\n";
  os << "family_size = " << rep.point.family_size << '\n';
  os << "p = " << format_real(rep.point.p) << '\n';
  os << "m = " << rep.point.m << '\n';
  os << "split = " << format_real(rep.point.split) << '\n';
  os << "base = " << format_real(rep.point.base) << '\n';
  os << "[trials]\n";
  for (const auto& r : rep.records) {
    os << r.trial << " seed=" << r.seed;
    if (!r.verdict.empty()) os << " verdict=" << r.verdict;
    os << " success=" << (r.success ? 1 : 0) << " statistic=" << format_real(r.statistic)
       << " threshold=" << format_real(r.threshold);
    if (r.hamming) os << " hamming=" << *r.hamming;
    if (include_timing) os << " wall_ms=" << format_real(r.wall_ms);
    os << '\n';
  }
  os << "[aggregates]\n";
  if (!rep.aggregates) {
    os << "none\n";
    return;
  }
  const auto& a = *rep.aggregates;
  os << "trials = " << rep.records.size() << '\n';
  os << "successes = " << a.successes << '\n';
  os << "success_rate = " << format_real(a.success_rate) << '\n';
  os << "success_ci95 = [" << format_real(a.success_ci.low) << ", " << format_real(a.success_ci.high) << "]\n";
  os << "statistic_mean = " << format_real(a.statistic_mean) << '\n';
  os << "statistic_var = " << format_real(a.statistic_var) << '\n';
  if (include_timing) os << "wall_ms_mean = " << format_real(a.wall_ms_mean) << '\n';
}

inline std::string report_text(const Report& rep, bool include_timing = false) {
  std::ostringstream os;
  write_report(os, rep, include_timing);
  return os.str();
}

}  // namespace xorlab
