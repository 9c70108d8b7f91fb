// xorlab command-line tool.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "xorlab/xorlab.hpp"

using namespace xorlab;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitCap = 3;

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Writes to a file when a path is given, stdout otherwise.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_.open(path);
    require(static_cast<bool>(file_), "cannot open " + path + " for writing");
  }
  std::ostream& os() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
  void finish() {
    os().flush();
    if (!os()) throw std::runtime_error("write failed");
  }

 private:
  std::ofstream file_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Secret files hold one line of +1/-1 entries.
void write_secret(std::ostream& os, const PlantedAssignment& x) {
  for (std::size_t i = 0; i < x.x.size(); ++i) os << (i ? " " : "") << (x.x[i] > 0 ? "+1" : "-1");
  os << '\n';
}

PlantedAssignment read_secret(const std::string& path, int n) {
  std::istringstream in(slurp(path));
  PlantedAssignment x;
  std::string tok;
  while (in >> tok) {
    require(tok == "+1" || tok == "-1" || tok == "1", "secret entries must be +1 or -1, got '" + tok + "'");
    x.x.push_back(tok == "-1" ? -1 : 1);
  }
  require(x.n() == n, "secret length does not match the instance's n");
  return x;
}

// Key=value options of the experiment schema. Flags are stored as strings
// and applied through ExperimentConfig::set so that config files and flags
// share one parser.
struct ConfigFlags {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  std::string config_path;

  void add(CLI::App* app, const std::string& key, const std::string& help) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    options[key] = app->add_option(flag, values[key], help);
  }

  void add_switch(CLI::App* app, const std::string& key, const std::string& help) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    options[key] = app->add_flag_function(flag, [this, key](std::int64_t) { values[key] = "true"; }, help);
  }

  ExperimentConfig resolve(Task task) const {
    ExperimentConfig cfg;
    cfg.task = task;
    if (!config_path.empty()) load_config_file(cfg, config_path);
    cfg.task = task;
    for (const auto& [key, opt] : options)
      if (opt->count() > 0) cfg.set(key, values.at(key));
    return cfg;
  }
};

void add_experiment_flags(CLI::App* app, ConfigFlags& f) {
  app->add_option("--config", f.config_path, "key=value config file; flags override its entries");
  f.add(app, "n", "number of variables");
  f.add(app, "k", "constraint arity");
  f.add(app, "delta", "label bias in (0, 1]");
  f.add(app, "model", "bernoulli | without-replacement | with-replacement");
  f.add(app, "p", "Bernoulli inclusion probability (0 with m=0 selects the operating point)");
  f.add(app, "m", "number of constraints for fixed-size models");
  f.add(app, "r", "gadget parameter r");
  f.add(app, "l", "number of gadgets per pattern");
  f.add(app, "family_count", "sample this many patterns instead of the full family");
  f.add(app, "t", "color-coding repetitions (default ceil(1/rho))");
  f.add_switch(app, "exact", "use exact embedding sums instead of color coding");
  f.add(app, "scale", "multiple of the operating point in automatic mode");
  f.add(app, "trials", "number of seeded trials");
  f.add(app, "seed", "master seed");
  f.add(app, "output", "CSV path for per-trial records");
}

const char* kSchema = R"(Config schema (key = value, '#' comments):
  task          detect | recover | moments
  n, k          problem size and arity
  delta         label bias in (0, 1]
  model         bernoulli | without-replacement | with-replacement
  p | m         density (bernoulli) or sample count; both 0 = automatic
  r, l          gadget parameter and chain length
  family_count  0 = full family, otherwise a seeded sample of that size
  t             color-coding repetitions, 0 = ceil(1/rho)
  exact         true to use exact embedding sums
  split         clean-up fraction (recover)
  fresh_clean   true to draw the clean-up pool independently (recover)
  scale         multiple of the operating point in automatic mode
  clean_votes   expected clean-up votes per coordinate in automatic mode
  trials, seed  campaign size and master seed
  output        CSV path for per-trial records)";

struct ModelFlags {
  int n = 16;
  int k = 3;
  double delta = 0.9;
  std::string model = "bernoulli";
  double p = 0.0;
  std::uint64_t m = 0;
  std::uint64_t seed = 0;
  bool null_model = false;

  void add(CLI::App* app) {
    app->add_option("--n", n, "number of variables");
    app->add_option("--k", k, "constraint arity");
    app->add_option("--delta", delta, "label bias in (0, 1]");
    app->add_option("--model", model, "bernoulli | without-replacement | with-replacement");
    app->add_option("--p", p, "Bernoulli inclusion probability");
    app->add_option("--m", m, "number of constraints for fixed-size models");
    app->add_option("--seed", seed, "instance seed");
    app->add_flag("--null", null_model, "sample from the null model");
  }

  ModelParams params() const {
    ModelParams mp;
    mp.n = n;
    mp.k = k;
    mp.delta = delta;
    mp.seed = seed;
    const ModelKind kind = parse_model_tag(model);
    if (kind == ModelKind::bernoulli) {
      require(m == 0, "--m applies to fixed-size models; use --p");
      mp.model = SamplingModel::bernoulli(p);
    } else {
      require(p == 0.0, "--p applies to the bernoulli model; use --m");
      mp.model = SamplingModel{kind, m, 0.0};
    }
    mp.validate();
    return mp;
  }

  PlantedAssignment secret() const { return PlantedAssignment::random(n, KeyedStream(seed, "secret")); }

  Observation sample() const {
    const auto mp = params();
    return null_model ? sample_null(mp) : sample_planted(mp, secret());
  }
};

// ---------------------------------------------------------------------------

int cmd_gen(const ModelFlags& mf, const std::string& out, const std::string& secret_out) {
  const auto obs = mf.sample();
  Sink sink(out);
  write_instance(sink.os(), obs);
  sink.finish();
  if (!secret_out.empty()) {
    require(!mf.null_model, "the null model has no secret");
    Sink s(secret_out);
    write_secret(s.os(), mf.secret());
    s.finish();
  }
  return 0;
}

int cmd_patterns(const std::string& kind, int r, int k, int l, std::size_t sample, std::uint64_t seed,
                 const std::string& out) {
  Sink sink(out);
  auto& os = sink.os();
  const FamilyMode mode = sample ? FamilyMode::sample(sample, seed) : FamilyMode::full();
  if (kind == "gadget") {
    const auto gadgets = enumerate_gadgets(r, k);
    os << "# gadgets r=" << r << " k=" << k << " count=" << gadgets.size() << '\n';
    for (const auto& g : gadgets) {
      os << g.graph.v << " ;";
      for (std::size_t i = 0; i < g.graph.edges.size(); ++i) {
        if (i) os << " |";
        for (int u : g.graph.edges[i]) os << ' ' << u + 1;
      }
      os << "\n@ leaves " << g.leaves.first + 1 << ' ' << g.leaves.second + 1 << '\n';
    }
  } else if (kind == "cycle") {
    const auto fam = build_cycle_family(r, k, l, mode);
    os << "# cycle r=" << r << " k=" << k << " l=" << l << " count=" << fam.size() << '\n';
    for (const auto& p : fam) write_pattern(os, p);
  } else if (kind == "path") {
    const auto fam = build_path_family(r, k, l, mode);
    os << "# path r=" << r << " k=" << k << " l=" << l << " count=" << fam.size() << '\n';
    for (const auto& p : fam) write_pattern(os, p);
  } else {
    throw ValidationError("--kind must be gadget, cycle or path");
  }
  sink.finish();
  return 0;
}

void write_census(std::ostream& os, const OverlapCensus& c) {
  os << "[census]\n";
  os << "rooted = " << (c.rooted ? "true" : "false") << '\n';
  os << "v = " << c.v << "\ns = " << c.s << "\nk = " << c.k << '\n';
  os << "diagonal = " << c.diagonal() << '\n';
  os << "violations = " << c.violations().size() << '\n';
  for (const auto& [cell, count] : c.table) os << "N(" << cell.first << ',' << cell.second << ") = " << count << '\n';
}

struct OracleArgs {
  int n = 8;
  int r = 1;
  int k = 3;
  int l = 2;
  std::string kind = "cycle";
  double p = 0.5;
  double delta = 0.9;
  bool census = false;
  int a = 0;
  int b = 1;
  double work_cap = 4e9;
  std::string instance;
  std::string out;
};

int cmd_oracle(const OracleArgs& o) {
  Sink sink(o.out);
  auto& os = sink.os();
  std::optional<Observation> obs;
  if (!o.instance.empty()) obs = from_instance_text(slurp(o.instance));
  const int n = obs ? obs->n() : o.n;
  CensusOptions opts;
  opts.work_cap = static_cast<std::uint64_t>(o.work_cap);
  if (o.kind == "cycle") {
    const auto fam = build_cycle_family(o.r, o.k, o.l);
    const auto& h = fam.front();
    const auto mom = closed_form_moments(n, h.v(), h.s(), fam.size(), o.p, o.delta);
    os << "[moments]\n";
    os << "n = " << n << "\nfamily_size = " << mom.family_size << "\nv = " << mom.v << "\ns = " << mom.s << '\n';
    os << "p = " << format_real(o.p) << "\ndelta = " << format_real(o.delta) << '\n';
    os << "mean_planted = " << format_real(mom.mean_planted) << '\n';
    os << "mean_null = " << format_real(mom.mean_null) << '\n';
    os << "var_null = " << format_real(mom.var_null) << '\n';
    if (obs) os << "exact_statistic = " << family_sum_exact(fam, LabelIndex(*obs), n) << '\n';
    if (o.census) write_census(os, overlap_census(fam, n, opts));
  } else if (o.kind == "path") {
    const auto fam = build_path_family(o.r, o.k, o.l);
    const auto& j = fam.front();
    os << "[moments]\n";
    os << "n = " << n << "\nfamily_size = " << fam.size() << "\nv = " << j.v() << "\ns = " << j.s() << '\n';
    os << "p = " << format_real(o.p) << "\ndelta = " << format_real(o.delta) << '\n';
    os << "mean_planted_per_parity = " << format_real(rooted_closed_form_mean(n, j.v(), j.s(), fam.size(), o.p, o.delta, 1))
       << '\n';
    os << "var_null = " << format_real(rooted_null_variance(n, j.v(), j.s(), fam.size(), o.p)) << '\n';
    if (obs) {
      const LabelIndex labels(*obs);
      std::int64_t total = 0;
      for (const auto& pat : fam) total += rooted_embed_sum_exact(pat, o.a, o.b, labels, n);
      os << "exact_statistic = " << total << '\n';
    }
    if (o.census) write_census(os, overlap_census_rooted(fam, n, o.a, o.b, opts));
  } else {
    throw ValidationError("--kind must be cycle or path");
  }
  sink.finish();
  return 0;
}

struct StatArgs {
  std::string kind = "cycle";
  int r = 1;
  int l = 2;
  std::size_t family_count = 0;
  std::uint64_t t = 0;
  std::uint64_t stat_seed = 0;
  int a = 0;
  int b = 1;
  bool no_exact = false;
  std::string instance;
};

int cmd_stat(const ModelFlags& mf, const StatArgs& s) {
  const Observation obs = s.instance.empty() ? mf.sample() : from_instance_text(slurp(s.instance));
  const LabelIndex labels(obs);
  const int n = obs.n();
  const FamilyMode mode = s.family_count ? FamilyMode::sample(s.family_count, s.stat_seed) : FamilyMode::full();
  double estimate = 0.0;
  std::optional<std::int64_t> exact;
  double est_ms = 0.0, exact_ms = 0.0;
  std::uint64_t reps = 0;
  std::size_t fam_size = 0;
  if (s.kind == "cycle") {
    const auto fam = build_cycle_family(s.r, obs.k(), s.l, mode);
    fam_size = fam.size();
    const auto cfg = EstimatorConfig::for_colors(fam.front().v(), s.stat_seed, s.t);
    reps = cfg.repetitions;
    auto start = Clock::now();
    estimate = estimate_F_detection(fam, labels, n, cfg);
    est_ms = ms_since(start);
    if (!s.no_exact) {
      start = Clock::now();
      exact = family_sum_exact(fam, labels, n);
      exact_ms = ms_since(start);
    }
  } else if (s.kind == "path") {
    const auto fam = build_path_family(s.r, obs.k(), s.l, mode);
    fam_size = fam.size();
    const auto cfg = EstimatorConfig::for_colors(fam.front().v(), s.stat_seed, s.t);
    reps = cfg.repetitions;
    auto start = Clock::now();
    estimate = estimate_F_recovery(fam, s.a, s.b, labels, n, cfg);
    est_ms = ms_since(start);
    if (!s.no_exact) {
      start = Clock::now();
      std::int64_t total = 0;
      for (const auto& pat : fam) total += rooted_embed_sum_exact(pat, s.a, s.b, labels, n);
      exact = total;
      exact_ms = ms_since(start);
    }
  } else {
    throw ValidationError("--kind must be cycle or path");
  }
  std::cout << "[statistic]\n";
  std::cout << "kind = " << s.kind << "\nn = " << n << "\nconstraints = " << obs.size() << '\n';
  std::cout << "family_size = " << fam_size << "\nrepetitions = " << reps << '\n';
  if (s.kind == "path") std::cout << "a = " << s.a << "\nb = " << s.b << '\n';
  std::cout << "estimate = " << format_real(estimate) << '\n';
  if (exact) std::cout << "exact = " << *exact << '\n';
  std::cout << "estimate_ms = " << format_real(est_ms) << '\n';
  if (exact) std::cout << "exact_ms = " << format_real(exact_ms) << '\n';
  return 0;
}

struct SingleArgs {
  std::string instance;
  std::string secret;
  std::string report;
  bool timing = false;
};

int run_campaign(const ExperimentConfig& cfg, const SingleArgs& single) {
  const auto rep = run(cfg);
  if (!cfg.output.empty()) emit_csv(rep, cfg.output);
  Sink sink(single.report);
  write_report(sink.os(), rep, single.timing);
  sink.finish();
  return 0;
}

int cmd_detect(const ConfigFlags& flags, const SingleArgs& single) {
  auto cfg = flags.resolve(Task::detect);
  if (single.instance.empty()) return run_campaign(cfg, single);

  const auto obs = from_instance_text(slurp(single.instance));
  const FamilyMode mode = cfg.family_count ? FamilyMode::sample(cfg.family_count, cfg.seed) : FamilyMode::full();
  const auto fam = build_cycle_family(cfg.r, obs.k(), cfg.ell, mode);
  const auto start = Clock::now();
  const auto d = detect(obs, fam, StatisticConfig{cfg.exact, cfg.t_override, cfg.seed});
  Sink sink(single.report);
  auto& os = sink.os();
  os << "[detect]\n";
  os << "n = " << obs.n() << "\nk = " << obs.k() << "\nconstraints = " << obs.size() << '\n';
  os << "density = " << format_real(observed_density(obs)) << "\nfamily_size = " << fam.size() << '\n';
  os << "statistic = " << format_real(d.statistic) << "\nthreshold = " << format_real(d.threshold) << '\n';
  os << "verdict = " << verdict_name(d.verdict) << '\n';
  if (single.timing) os << "wall_ms = " << format_real(ms_since(start)) << '\n';
  sink.finish();
  return 0;
}

int cmd_recover(const ConfigFlags& flags, const SingleArgs& single) {
  auto cfg = flags.resolve(Task::recover);
  if (single.instance.empty()) return run_campaign(cfg, single);

  const auto obs = from_instance_text(slurp(single.instance));
  const FamilyMode mode = cfg.family_count ? FamilyMode::sample(cfg.family_count, cfg.seed) : FamilyMode::full();
  const auto fam = build_path_family(cfg.r, obs.k(), cfg.ell, mode);
  RecoveryConfig rc;
  rc.statistic = StatisticConfig{cfg.exact, cfg.t_override, cfg.seed};
  rc.split = cfg.split;
  rc.min_votes = cfg.clean_votes;
  const auto start = Clock::now();
  const auto res = recover(obs, fam, rc);
  Sink sink(single.report);
  auto& os = sink.os();
  os << "[recover]\n";
  os << "n = " << obs.n() << "\nk = " << obs.k() << "\nconstraints = " << obs.size() << '\n';
  os << "main_size = " << res.main_size << "\nclean_size = " << res.clean_size << '\n';
  os << "family_size = " << fam.size() << '\n';
  os << "sign_flipped = " << (res.sign_flipped ? "true" : "false") << '\n';
  os << "cleanup_changed = " << res.cleanup_changed << "\ncleanup_silent = " << res.cleanup_silent << '\n';
  os << "assignment =";
  for (int s : res.assignment) os << (s > 0 ? " +1" : " -1");
  os << '\n';
  if (!single.secret.empty()) {
    const auto x = read_secret(single.secret, obs.n());
    std::size_t h = hamming(res.assignment, x.x);
    if (obs.k() % 2 == 0) h = std::min(h, x.x.size() - h);
    // The preliminary estimate is normalized to vertex 0, so it is compared up to sign.
    std::size_t h0 = hamming(res.preliminary, x.x);
    h0 = std::min(h0, x.x.size() - h0);
    os << "preliminary_hamming = " << h0 << "\nhamming = " << h << '\n';
    os << "success = " << (recovery_success(res.assignment, x.x, obs.k()) ? "true" : "false") << '\n';
  }
  for (const auto& w : res.warnings) os << "warning = " << w << '\n';
  if (single.timing) os << "wall_ms = " << format_real(ms_since(start)) << '\n';
  sink.finish();
  return 0;
}

struct LowdegArgs {
  int n = 8;
  int k = 3;
  int D = 6;
  double p = 0.0;
  std::uint64_t m = 0;
  double delta = 0.5;
  std::string mode = "bound";
  std::string csv;
  double max_work = 1e9;
};

int cmd_lowdeg(const LowdegArgs& a) {
  require(!(a.p != 0.0 && a.m != 0), "give one of --p and --m");
  const double universe = static_cast<double>(binomial(static_cast<std::uint64_t>(a.n), static_cast<std::uint64_t>(a.k)));
  const double p = a.m ? static_cast<double>(a.m) / universe : a.p;
  require(a.mode == "exact" || a.mode == "bound", "--mode must be exact or bound");
  EvenCountLimits limits;
  limits.max_work = a.max_work;
  const auto rep = lowdeg_norm(a.n, a.k, a.D, p, a.delta, a.mode == "exact" ? NormMode::exact : NormMode::bound, limits);
  std::cout << "[lowdeg]\n";
  std::cout << "n = " << rep.n << "\nk = " << rep.k << "\nD = " << rep.D << '\n';
  std::cout << "p = " << format_real(rep.p) << "\ndelta = " << format_real(rep.delta) << '\n';
  if (rep.exact_norm) std::cout << "exact_norm = " << format_real(*rep.exact_norm) << '\n';
  std::cout << "bound_norm = " << format_real(rep.bound_norm) << '\n';
  std::cout << "log_bound_norm = " << format_real(rep.log_bound_norm) << '\n';
  if (a.D >= 1) std::cout << "hardness_threshold_m = " << format_real(hardness_threshold_m(a.n, a.k, a.D, a.delta)) << '\n';
  if (!a.csv.empty()) {
    Sink sink(a.csv);
    sink.os() << "t,exact,bound,log_bound\n";
    for (const auto& term : rep.per_term)
      sink.os() << term.t << ',' << (term.exact ? format_real(*term.exact) : std::string()) << ','
                << format_real(term.bound) << ',' << format_real(term.log_bound) << '\n';
    sink.finish();
  }
  return 0;
}

struct BenchArgs {
  std::vector<int> ns{32, 64, 128};
  int r = 1;
  int k = 3;
  double scale = 4.0;
  double delta = 0.9;
  std::uint64_t seed = 0;
  double min_ms = 200.0;
};

int cmd_bench(const BenchArgs& b) {
  const auto fam = build_cycle_family(b.r, b.k, 2);
  const auto& block = fam.front().blocks.front();
  std::cout << "n,p,constraints,nodes,entries,fill_ms,ratio\n";
  double prev = 0.0;
  for (int n : b.ns) {
    const double p =
        std::min(1.0, b.scale * detection_operating_point(n, fam.front().v(), fam.front().s(), fam.size(), b.delta));
    const ModelParams mp{n, b.k, SamplingModel::bernoulli(p), b.delta, KeyedStream(b.seed, "bench", static_cast<std::uint64_t>(n))()};
    const auto obs = sample_planted(mp, PlantedAssignment::random(n, KeyedStream(mp.seed, "secret")));
    const LabelIndex labels(obs);
    const auto tau = sample_coloring(n, fam.front().v(), KeyedStream(mp.seed, "coloring"));
    std::uint64_t nodes = 0;
    const std::size_t entries = fill_base_table(block, labels, tau, -1, &nodes).nonzeros();
    std::vector<double> per_fill;
    for (int batch = 0; batch < 5; ++batch) {
      int reps = 0;
      const auto start = Clock::now();
      double elapsed = 0.0;
      do {
        (void)fill_base_table(block, labels, tau);
        ++reps;
        elapsed = ms_since(start);
      } while (elapsed < b.min_ms / 5.0);
      per_fill.push_back(elapsed / reps);
    }
    std::sort(per_fill.begin(), per_fill.end());
    const double t = per_fill[per_fill.size() / 2];
    std::cout << n << ',' << format_real(p) << ',' << obs.size() << ',' << nodes << ',' << entries << ','
              << format_real(t) << ',' << (prev > 0 ? format_real(t / prev) : std::string()) << '\n';
    prev = t;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"xorlab: planted noisy k-XOR experiments"};
  app.require_subcommand(1);
  app.footer(kSchema);

  // gen
  ModelFlags gen_model;
  std::string gen_out, gen_secret;
  auto* gen = app.add_subcommand("gen", "sample an instance file");
  gen_model.add(gen);
  gen->add_option("--out", gen_out, "instance path (default stdout)");
  gen->add_option("--secret-out", gen_secret, "write the planted assignment here");

  // patterns
  std::string pat_kind = "cycle", pat_out;
  int pat_r = 1, pat_k = 3, pat_l = 2;
  std::size_t pat_sample = 0;
  std::uint64_t pat_seed = 0;
  auto* patterns = app.add_subcommand("patterns", "export gadgets or a pattern family");
  patterns->add_option("--kind", pat_kind, "gadget | cycle | path");
  patterns->add_option("--r", pat_r, "gadget parameter r");
  patterns->add_option("--k", pat_k, "arity");
  patterns->add_option("--l", pat_l, "gadgets per pattern");
  patterns->add_option("--sample", pat_sample, "export a seeded sample of this size");
  patterns->add_option("--seed", pat_seed, "sampling seed");
  patterns->add_option("--out", pat_out, "output path (default stdout)");

  // oracle
  OracleArgs oracle;
  auto* oracle_cmd = app.add_subcommand("oracle", "closed-form moments, exact statistics and overlap census");
  oracle_cmd->add_option("--n", oracle.n, "number of variables");
  oracle_cmd->add_option("--r", oracle.r, "gadget parameter r");
  oracle_cmd->add_option("--k", oracle.k, "arity");
  oracle_cmd->add_option("--l", oracle.l, "gadgets per pattern");
  oracle_cmd->add_option("--kind", oracle.kind, "cycle | path");
  oracle_cmd->add_option("--p", oracle.p, "inclusion probability for the moment formulas");
  oracle_cmd->add_option("--delta", oracle.delta, "bias for the moment formulas");
  oracle_cmd->add_flag("--census", oracle.census, "tabulate the overlap census");
  oracle_cmd->add_option("--a", oracle.a, "first pinned host (path)");
  oracle_cmd->add_option("--b", oracle.b, "second pinned host (path)");
  oracle_cmd->add_option("--work-cap", oracle.work_cap, "census work guard");
  oracle_cmd->add_option("--instance", oracle.instance, "also evaluate the exact statistic on this instance");
  oracle_cmd->add_option("--out", oracle.out, "output path (default stdout)");

  // stat
  ModelFlags stat_model;
  StatArgs stat;
  auto* stat_cmd = app.add_subcommand("stat", "color-coded statistic next to the exact value");
  stat_model.add(stat_cmd);
  stat_cmd->add_option("--instance", stat.instance, "read the observation from this file");
  stat_cmd->add_option("--kind", stat.kind, "cycle | path");
  stat_cmd->add_option("--r", stat.r, "gadget parameter r");
  stat_cmd->add_option("--l", stat.l, "gadgets per pattern");
  stat_cmd->add_option("--family-count", stat.family_count, "sample this many patterns");
  stat_cmd->add_option("--t", stat.t, "color-coding repetitions");
  stat_cmd->add_option("--stat-seed", stat.stat_seed, "coloring seed");
  stat_cmd->add_option("--a", stat.a, "first pinned host (path)");
  stat_cmd->add_option("--b", stat.b, "second pinned host (path)");
  stat_cmd->add_flag("--no-exact", stat.no_exact, "skip the exact evaluation");

  // detect / recover
  ConfigFlags detect_flags, recover_flags;
  SingleArgs detect_single, recover_single;
  auto* detect_cmd = app.add_subcommand("detect", "detection campaign, or one verdict with --instance");
  add_experiment_flags(detect_cmd, detect_flags);
  auto* recover_cmd = app.add_subcommand("recover", "recovery campaign, or one recovery with --instance");
  add_experiment_flags(recover_cmd, recover_flags);
  recover_flags.add(recover_cmd, "split", "clean-up fraction");
  recover_flags.add_switch(recover_cmd, "fresh_clean", "draw the clean-up pool independently");
  recover_flags.add(recover_cmd, "clean_votes", "expected clean-up votes per coordinate");
  for (auto [cmd, single] : {std::pair{detect_cmd, &detect_single}, std::pair{recover_cmd, &recover_single}}) {
    cmd->add_option("--instance", single->instance, "run once on this instance file");
    cmd->add_option("--report", single->report, "structured report path (default stdout)");
    cmd->add_flag("--timing", single->timing, "include wall-clock timing in the report");
  }
  recover_cmd->add_option("--secret", recover_single.secret, "planted assignment for Hamming distance");

  // lowdeg
  LowdegArgs low;
  auto* low_cmd = app.add_subcommand("lowdeg", "low-degree norm and even-hypergraph counts");
  low_cmd->add_option("--n", low.n, "number of variables");
  low_cmd->add_option("--k", low.k, "arity");
  low_cmd->add_option("--D", low.D, "degree");
  low_cmd->add_option("--p", low.p, "inclusion probability");
  low_cmd->add_option("--m", low.m, "sample count, converted to p = m / C(n,k)");
  low_cmd->add_option("--delta", low.delta, "bias");
  low_cmd->add_option("--mode", low.mode, "exact | bound");
  low_cmd->add_option("--csv", low.csv, "per-term CSV path");
  low_cmd->add_option("--max-work", low.max_work, "enumeration work guard");

  // bench
  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "time base-table fills across n");
  bench_cmd->add_option("--ns", bench.ns, "values of n")->delimiter(',');
  bench_cmd->add_option("--r", bench.r, "gadget parameter r");
  bench_cmd->add_option("--k", bench.k, "arity");
  bench_cmd->add_option("--scale", bench.scale, "multiple of the detection operating point");
  bench_cmd->add_option("--delta", bench.delta, "bias");
  bench_cmd->add_option("--seed", bench.seed, "seed");
  bench_cmd->add_option("--min-ms", bench.min_ms, "timing budget per n");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*gen) return cmd_gen(gen_model, gen_out, gen_secret);
    if (*patterns) return cmd_patterns(pat_kind, pat_r, pat_k, pat_l, pat_sample, pat_seed, pat_out);
    if (*oracle_cmd) return cmd_oracle(oracle);
    if (*stat_cmd) return cmd_stat(stat_model, stat);
    if (*detect_cmd) return cmd_detect(detect_flags, detect_single);
    if (*recover_cmd) return cmd_recover(recover_flags, recover_single);
    if (*low_cmd) return cmd_lowdeg(low);
    if (*bench_cmd) return cmd_bench(bench);
  } catch (const CapExceeded& e) {
    std::cerr << "resource cap: " << e.what() << '\n';
    return kExitCap;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
