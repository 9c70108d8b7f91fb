#pragma once

// Planted and null noisy k-XOR observations under the three sampling models,
// model conversion, sample splitting, and the newline-delimited instance file
// format.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "xorlab/combinatorics.hpp"
#include "xorlab/error.hpp"
#include "xorlab/rng.hpp"

namespace xorlab {

enum class ModelKind { with_replacement, without_replacement, bernoulli };

inline const char* model_tag(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::with_replacement: return "with-replacement";
    case ModelKind::without_replacement: return "without-replacement";
    case ModelKind::bernoulli: return "bernoulli";
  }
  return "?";
}

inline ModelKind parse_model_tag(const std::string& tag) {
  if (tag == "with-replacement") return ModelKind::with_replacement;
  if (tag == "without-replacement") return ModelKind::without_replacement;
  if (tag == "bernoulli") return ModelKind::bernoulli;
  throw ValidationError("unknown model tag '" + tag + "'");
}

struct SamplingModel {
  ModelKind kind = ModelKind::bernoulli;
  std::uint64_t m = 0;  // fixed-m models
  double p = 0.0;       // Bernoulli model

  static SamplingModel with_replacement(std::uint64_t m) { return {ModelKind::with_replacement, m, 0.0}; }
  static SamplingModel without_replacement(std::uint64_t m) { return {ModelKind::without_replacement, m, 0.0}; }
  static SamplingModel bernoulli(double p) { return {ModelKind::bernoulli, 0, p}; }

  bool fixed_m() const noexcept { return kind != ModelKind::bernoulli; }

  bool operator==(const SamplingModel&) const = default;
};

struct ModelParams {
  int n = 0;
  int k = 3;
  SamplingModel model;
  double delta = 1.0;
  std::uint64_t seed = 0;

  std::uint64_t universe() const { return binomial(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(k)); }
  double eta() const noexcept { return 0.5 * (1.0 - delta); }

  // Per-constraint inclusion probability: p, or m / C(n,k) for fixed-m models.
  double inclusion_probability() const {
    if (model.kind == ModelKind::bernoulli) return model.p;
    return static_cast<double>(model.m) / static_cast<double>(universe());
  }

  void validate() const {
    require(n >= 1, "n must be positive");
    require(k >= 2, "k must be at least 2");
    require(k <= n, "k must not exceed n");
    require(delta > 0.0 && delta <= 1.0, "delta must lie in (0, 1]");
    const std::uint64_t total = universe();
    require(total != UINT64_MAX, "C(n,k) does not fit in 64 bits");
    switch (model.kind) {
      case ModelKind::bernoulli:
        require(model.p > 0.0 && model.p <= 1.0, "p must lie in (0, 1]");
        break;
      case ModelKind::without_replacement:
        require(model.m <= total, "m exceeds C(n,k) for sampling without replacement");
        break;
      case ModelKind::with_replacement:
        break;
    }
  }
};

/// Hidden +-1 assignment.
struct PlantedAssignment {
  std::vector<int> x;

  static PlantedAssignment all_plus(int n) { return {std::vector<int>(static_cast<std::size_t>(n), 1)}; }

  static PlantedAssignment random(int n, KeyedStream rng) {
    PlantedAssignment out;
    out.x.resize(static_cast<std::size_t>(n));
    for (auto& xi : out.x) xi = rng.rademacher(0.0);
    return out;
  }

  int n() const noexcept { return static_cast<int>(x.size()); }

  void validate() const {
    for (int xi : x) require(xi == 1 || xi == -1, "assignment entries must be +1 or -1");
  }

  // x_alpha = prod_{i in alpha} x_i
  template <class Range>
  int parity(const Range& alpha) const noexcept {
    int s = 1;
    for (int i : alpha) s *= x[static_cast<std::size_t>(i)];
    return s;
  }
};

struct Constraint {
  std::uint64_t key = 0;  // colex rank of the sorted k-set
  int label = 1;

  bool operator==(const Constraint&) const = default;
};

// Provenance of an observation; the clean-up stage refuses the main pool.
enum class Pool { whole, main, clean };

/// Observed constraints with their metadata.
///
/// Vertices are 0-based internally and 1-based in the file format. For the
/// fixed-m without-replacement and Bernoulli models the keys are unique and
/// sorted; the with-replacement model keeps draw order and duplicates.
class Observation {
 public:
  Observation() = default;
  Observation(int n, int k, double delta, SamplingModel model, std::uint64_t seed)
      : n_(n), k_(k), delta_(delta), model_(model), seed_(seed), indexer_(std::make_shared<SubsetIndexer>(n, k)) {}

  int n() const noexcept { return n_; }
  int k() const noexcept { return k_; }
  double delta() const noexcept { return delta_; }
  const SamplingModel& model() const noexcept { return model_; }
  std::uint64_t seed() const noexcept { return seed_; }
  Pool pool() const noexcept { return pool_; }
  void set_pool(Pool pool) noexcept { pool_ = pool; }
  void set_model(SamplingModel model) noexcept { model_ = model; }

  const SubsetIndexer& indexer() const noexcept { return *indexer_; }
  std::uint64_t universe() const noexcept { return indexer_->total(); }

  const std::vector<Constraint>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  std::vector<int> tuple(std::size_t i) const { return indexer_->unrank(entries_[i].key); }

  bool unique_keys() const noexcept { return model_.kind != ModelKind::with_replacement; }

  void push(std::uint64_t key, int label) { entries_.push_back({key, label}); }
  void push_tuple(std::span<const int> sorted, int label) { push(indexer_->rank(sorted), label); }

  // Sort keys; used to canonicalize fixed-support models.
  void canonicalize() {
    std::sort(entries_.begin(), entries_.end(), [](const Constraint& a, const Constraint& b) { return a.key < b.key; });
  }

  bool operator==(const Observation& o) const {
    return n_ == o.n_ && k_ == o.k_ && delta_ == o.delta_ && model_ == o.model_ && seed_ == o.seed_ &&
           entries_ == o.entries_;
  }

 private:
  int n_ = 0;
  int k_ = 0;
  double delta_ = 1.0;
  SamplingModel model_;
  std::uint64_t seed_ = 0;
  Pool pool_ = Pool::whole;
  std::shared_ptr<const SubsetIndexer> indexer_;
  std::vector<Constraint> entries_;
};

inline void require_unique_keys(const Observation& obs) {
  require(obs.unique_keys(), "with-replacement observations must be converted before computing statistics");
}

/// Fast label lookup z(alpha) in {0, -1, +1}; dense for moderate C(n,k).
class LabelIndex {
 public:
  static constexpr std::uint64_t kDenseLimit = std::uint64_t{1} << 27;

  explicit LabelIndex(const Observation& obs) : indexer_(&obs.indexer()) {
    require_unique_keys(obs);
    if (obs.universe() <= kDenseLimit) {
      dense_.assign(static_cast<std::size_t>(obs.universe()), 0);
      for (const auto& c : obs.entries()) dense_[static_cast<std::size_t>(c.key)] = static_cast<std::int8_t>(c.label);
    } else {
      sparse_.reserve(obs.size());
      for (const auto& c : obs.entries()) sparse_.emplace(c.key, static_cast<std::int8_t>(c.label));
    }
  }

  const SubsetIndexer& indexer() const noexcept { return *indexer_; }

  int at_key(std::uint64_t key) const noexcept {
    if (!dense_.empty()) return dense_[static_cast<std::size_t>(key)];
    auto it = sparse_.find(key);
    return it == sparse_.end() ? 0 : it->second;
  }

  // Label of a k-set given in any order (distinct vertices).
  int at(std::span<const int> verts) const noexcept { return at_key(indexer_->rank_unsorted(verts)); }

 private:
  const SubsetIndexer* indexer_;
  std::vector<std::int8_t> dense_;
  std::unordered_map<std::uint64_t, std::int8_t> sparse_;
};

namespace detail {

// Uniform m-subset of [0, total) by Floyd's algorithm, returned sorted.
inline std::vector<std::uint64_t> floyd_subset(std::uint64_t total, std::uint64_t m, KeyedStream& rng) {
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(static_cast<std::size_t>(m) * 2);
  for (std::uint64_t j = total - m; j < total; ++j) {
    const std::uint64_t t = rng.below(j + 1);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<std::uint64_t> out(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

// Shared sampler: `secret == nullptr` draws null labels.
inline Observation sample_impl(const ModelParams& params, const PlantedAssignment* secret) {
  params.validate();
  if (secret) {
    require(secret->n() == params.n, "assignment length must equal n");
    secret->validate();
  }
  Observation obs(params.n, params.k, params.delta, params.model, params.seed);
  const SubsetIndexer& idx = obs.indexer();
  const std::uint64_t total = idx.total();
  auto label_for = [&](std::uint64_t key, KeyedStream& rng) {
    if (!secret) return rng.rademacher(0.0);
    const int noise = rng.rademacher(params.delta);
    return secret->parity(idx.unrank(key)) * noise;
  };

  switch (params.model.kind) {
    case ModelKind::bernoulli: {
      for (std::uint64_t key = 0; key < total; ++key) {
        KeyedStream rng(params.seed, "bernoulli", key);
        if (!rng.bernoulli(params.model.p)) continue;
        obs.push(key, label_for(key, rng));
      }
      break;
    }
    case ModelKind::without_replacement: {
      KeyedStream support(params.seed, "support");
      for (std::uint64_t key : floyd_subset(total, params.model.m, support)) {
        KeyedStream rng(params.seed, "label", key);
        obs.push(key, label_for(key, rng));
      }
      break;
    }
    case ModelKind::with_replacement: {
      for (std::uint64_t t = 0; t < params.model.m; ++t) {
        KeyedStream rng(params.seed, "draw", t);
        const std::uint64_t key = rng.below(total);
        obs.push(key, label_for(key, rng));
      }
      break;
    }
  }
  return obs;
}

}  // namespace detail

/// Draw from the planted law P_x under the configured sampling model.
inline Observation sample_planted(const ModelParams& params, const PlantedAssignment& x) {
  return detail::sample_impl(params, &x);
}

/// Draw from the null law Q: same support law, i.i.d. uniform labels.
inline Observation sample_null(const ModelParams& params) { return detail::sample_impl(params, nullptr); }

/// Condition a Bernoulli observation on having exactly m constraints.
///
/// Surplus constraints are discarded uniformly; a shortfall is filled with
/// constraints drawn uniformly from the unobserved k-sets, labeled by the
/// planted law when `secret` is given and by fair coins otherwise.
inline Observation convert_bernoulli_to_fixed(const Observation& obs, std::uint64_t m, KeyedStream& rng,
                                              const PlantedAssignment* secret = nullptr) {
  require(obs.model().kind == ModelKind::bernoulli, "conversion expects a Bernoulli observation");
  require(m <= obs.universe(), "m exceeds C(n,k)");
  Observation out(obs.n(), obs.k(), obs.delta(), SamplingModel::without_replacement(m), obs.seed());
  const std::uint64_t have = obs.size();
  if (have >= m) {
    std::vector<std::size_t> order(static_cast<std::size_t>(have));
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::uint64_t i = 0; i < m; ++i) {
      const std::uint64_t j = i + rng.below(have - i);
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    for (std::uint64_t i = 0; i < m; ++i) {
      const auto& c = obs.entries()[order[static_cast<std::size_t>(i)]];
      out.push(c.key, c.label);
    }
  } else {
    if (secret) require(secret->n() == obs.n(), "assignment length must equal n");
    std::unordered_set<std::uint64_t> taken;
    for (const auto& c : obs.entries()) {
      taken.insert(c.key);
      out.push(c.key, c.label);
    }
    const std::uint64_t need = m - have;
    const std::uint64_t complement = obs.universe() - have;
    // Uniform `need`-subset of the complement, by index into it.
    std::vector<std::uint64_t> picks = detail::floyd_subset(complement, need, rng);
    std::vector<std::uint64_t> support;
    support.reserve(obs.size());
    for (const auto& c : obs.entries()) support.push_back(c.key);
    std::sort(support.begin(), support.end());
    std::size_t s = 0;
    for (std::uint64_t pick : picks) {
      // The pick-th unobserved key is pick + #support keys at or below it.
      std::uint64_t key = pick + s;
      while (s < support.size() && support[s] <= key) {
        ++s;
        key = pick + s;
      }
      const int label = secret ? secret->parity(obs.indexer().unrank(key)) * rng.rademacher(obs.delta())
                               : rng.rademacher(0.0);
      out.push(key, label);
    }
  }
  out.canonicalize();
  return out;
}

// True if some constraint was drawn more than once.
inline bool has_repeated_constraint(const Observation& obs) {
  std::unordered_set<std::uint64_t> seen;
  for (const auto& c : obs.entries())
    if (!seen.insert(c.key).second) return true;
  return false;
}

/// Model 1 to Model 2: on the no-collision event the draws form a uniform
/// m-subset with the same label law. Returns nullopt when a draw repeats.
inline std::optional<Observation> convert_with_replacement(const Observation& obs) {
  require(obs.model().kind == ModelKind::with_replacement, "conversion expects a with-replacement observation");
  if (has_repeated_constraint(obs)) return std::nullopt;
  Observation out(obs.n(), obs.k(), obs.delta(), SamplingModel::without_replacement(obs.size()), obs.seed());
  for (const auto& c : obs.entries()) out.push(c.key, c.label);
  out.canonicalize();
  return out;
}

/// Bernoulli to fixed m, allowed only when |N - m| <= r. Returns nullopt
/// outside that window, the event the coupling gives up on.
inline std::optional<Observation> convert_bernoulli_truncated(const Observation& obs, std::uint64_t m,
                                                              std::uint64_t r, KeyedStream& rng,
                                                              const PlantedAssignment* secret = nullptr) {
  const std::uint64_t have = obs.size();
  const std::uint64_t gap = have > m ? have - m : m - have;
  if (gap > r) return std::nullopt;
  return convert_bernoulli_to_fixed(obs, m, rng, secret);
}

/// Route each constraint to the clean-up pool with probability rho_split.
/// Returns (main, clean).
inline std::pair<Observation, Observation> split_samples(const Observation& obs, double rho_split,
                                                         KeyedStream& rng) {
  require(obs.unique_keys(), "splitting expects a Bernoulli or without-replacement observation");
  require(rho_split > 0.0 && rho_split < 1.0, "split fraction must lie in (0, 1)");
  Observation main(obs.n(), obs.k(), obs.delta(), obs.model(), obs.seed());
  Observation clean(obs.n(), obs.k(), obs.delta(), obs.model(), obs.seed());
  for (const auto& c : obs.entries()) (rng.bernoulli(rho_split) ? clean : main).push(c.key, c.label);
  if (obs.model().kind == ModelKind::bernoulli) {
    main.set_model(SamplingModel::bernoulli(obs.model().p * (1.0 - rho_split)));
    clean.set_model(SamplingModel::bernoulli(obs.model().p * rho_split));
  } else {
    main.set_model(SamplingModel::without_replacement(main.size()));
    clean.set_model(SamplingModel::without_replacement(clean.size()));
  }
  main.set_pool(Pool::main);
  clean.set_pool(Pool::clean);
  return {std::move(main), std::move(clean)};
}

// ---------------------------------------------------------------------------
// Instance file format:
//   n k delta model-tag param seed
//   i1 i2 ... ik label          (1-based sorted indices, label +1 or -1)

namespace detail {
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}
inline double parse_double(const std::string& s) {
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ValidationError("bad number '" + s + "'");
  return v;
}
}  // namespace detail

inline void write_instance(std::ostream& os, const Observation& obs) {
  os << obs.n() << ' ' << obs.k() << ' ' << detail::format_double(obs.delta()) << ' ' << model_tag(obs.model().kind)
     << ' ';
  if (obs.model().kind == ModelKind::bernoulli)
    os << detail::format_double(obs.model().p);
  else
    os << obs.model().m;
  os << ' ' << obs.seed() << '\n';
  for (const auto& c : obs.entries()) {
    for (int v : obs.indexer().unrank(c.key)) os << v + 1 << ' ';
    os << (c.label > 0 ? "+1" : "-1") << '\n';
  }
}

inline std::string to_instance_text(const Observation& obs) {
  std::ostringstream os;
  write_instance(os, obs);
  return os.str();
}

inline Observation read_instance(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw ValidationError("instance file is empty");
  std::istringstream hs(header);
  int n = 0, k = 0;
  std::string delta_s, tag, param_s;
  std::uint64_t seed = 0;
  if (!(hs >> n >> k >> delta_s >> tag >> param_s >> seed)) throw ValidationError("malformed instance header");
  const ModelKind kind = parse_model_tag(tag);
  SamplingModel model = kind == ModelKind::bernoulli ? SamplingModel::bernoulli(detail::parse_double(param_s))
                                                     : SamplingModel{kind, std::stoull(param_s), 0.0};
  require(n >= 1 && k >= 1 && k <= n, "invalid n/k in instance header");
  Observation obs(n, k, detail::parse_double(delta_s), model, seed);
  std::string line;
  std::vector<int> verts(static_cast<std::size_t>(k));
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    for (int i = 0; i < k; ++i) {
      if (!(ls >> verts[static_cast<std::size_t>(i)])) throw ValidationError("short constraint record: " + line);
      verts[static_cast<std::size_t>(i)] -= 1;
      require(verts[static_cast<std::size_t>(i)] >= 0 && verts[static_cast<std::size_t>(i)] < n,
              "constraint index out of range: " + line);
      require(i == 0 || verts[static_cast<std::size_t>(i)] > verts[static_cast<std::size_t>(i - 1)],
              "constraint indices must be strictly increasing: " + line);
    }
    std::string label;
    if (!(ls >> label) || (label != "+1" && label != "-1")) throw ValidationError("bad label in record: " + line);
    obs.push_tuple(verts, label == "+1" ? 1 : -1);
  }
  if (obs.unique_keys()) {
    std::unordered_set<std::uint64_t> seen;
    for (const auto& c : obs.entries()) require(seen.insert(c.key).second, "duplicate constraint in unique-key model");
  }
  return obs;
}

inline Observation from_instance_text(const std::string& text) {
  std::istringstream is(text);
  return read_instance(is);
}

}  // namespace xorlab
