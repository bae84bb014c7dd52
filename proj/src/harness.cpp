#include "occ/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "occ/rate.hpp"

namespace occ {

PolicyKind parse_policy_kind(const std::string& name) {
  if (name == "ftpl") return PolicyKind::Ftpl;
  if (name == "linear") return PolicyKind::Linear;
  if (name == "uniform") return PolicyKind::Uniform;
  if (name == "local-ftpl") return PolicyKind::LocalFtpl;
  if (name == "local-lru") return PolicyKind::LocalLru;
  throw UsageError("unknown policy '" + name + "' (ftpl, linear, uniform, local-ftpl, local-lru)");
}

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Ftpl: return "ftpl";
    case PolicyKind::Linear: return "linear";
    case PolicyKind::Uniform: return "uniform";
    case PolicyKind::LocalFtpl: return "local-ftpl";
    case PolicyKind::LocalLru: return "local-lru";
  }
  return "?";
}

std::string to_string(Reference ref) {
  return ref == Reference::Stochastic ? "stochastic" : "static";
}

void RunConfig::validate() const {
  if (seeds.empty()) throw DomainError("run config: seed list is empty");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw DomainError("run config: alpha must be >= 0");
  if (reference == Reference::Stochastic && !prefs) {
    throw DomainError("run config: stochastic reference needs a preference profile");
  }
}

std::vector<std::uint64_t> seed_range(std::size_t n) {
  std::vector<std::uint64_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = i;
  return out;
}

OracleReference make_reference(const Trace& trace, Reference kind, const std::optional<PreferenceProfile>& prefs,
                               std::size_t cap) {
  trace.validate();
  OracleReference ref;
  ref.kind = kind;
  if (kind == Reference::Stochastic) {
    if (!prefs) throw DomainError("stochastic reference needs a preference profile");
    ref.gaps = std::make_shared<const GapTable>(stochastic_oracle(*prefs, trace.params, cap));
    ref.config = ref.gaps->oracle_config;
    ref.per_slot.assign(trace.horizon(), ref.gaps->oracle_value);
    return ref;
  }
  const auto best = static_oracle(trace, false, cap);
  ref.config = best.best_config;
  ref.per_slot.reserve(trace.horizon());
  for (const auto& r : trace.slots) {
    ref.per_slot.push_back(expected_rate(best.best_config, profile_to_pattern(r, trace.params), trace.params).total);
  }
  return ref;
}

namespace {

double coded_stochastic_rate(CacheConfig s, const PreferenceProfile& prefs, const GapTable* gaps,
                             const SystemParams& params) {
  return gaps != nullptr ? gaps->rates[gaps->index_of(s)] : stochastic_expected_rate(s, prefs, params);
}

class FtplAdapter final : public OnlinePolicy {
 public:
  FtplAdapter(const SystemParams& params, const RunConfig& cfg, Rng& rng)
      : params_(params),
        policy_(params, cfg.alpha, PerturbationVector::sample(params.n_files, rng), cfg.schedule, {}, cfg.cap) {}

  bool step(const RequestProfile*, const RequestPattern* x_prev, Slot t) override {
    const CacheConfig before = policy_.state().current_config;
    return policy_.step(x_prev, t) != before && t >= 2;
  }
  std::optional<CacheConfig> config() const override { return policy_.state().current_config; }
  double rate(const RequestProfile&, const RequestPattern& x) const override {
    return expected_rate(policy_.state().current_config, x, params_).total;
  }
  double stochastic_rate(const PreferenceProfile& prefs, const GapTable* gaps) const override {
    return coded_stochastic_rate(policy_.state().current_config, prefs, gaps, params_);
  }

 private:
  SystemParams params_;
  FtplPolicy policy_;
};

class LinearAdapter final : public OnlinePolicy {
 public:
  LinearAdapter(const SystemParams& params, const RunConfig& cfg, Rng& rng)
      : params_(params), policy_(params, cfg.alpha, PerturbationVector::sample(params.n_files, rng), cfg.schedule) {}

  bool step(const RequestProfile*, const RequestPattern* x_prev, Slot t) override {
    const CacheConfig before = policy_.state().current_config;
    return policy_.step(x_prev, t) != before && t >= 2;
  }
  std::optional<CacheConfig> config() const override { return policy_.state().current_config; }
  double rate(const RequestProfile&, const RequestPattern& x) const override {
    return expected_rate(policy_.state().current_config, x, params_).total;
  }
  double stochastic_rate(const PreferenceProfile& prefs, const GapTable* gaps) const override {
    return coded_stochastic_rate(policy_.state().current_config, prefs, gaps, params_);
  }

 private:
  SystemParams params_;
  LinearPolicy policy_;
};

class UniformAdapter final : public OnlinePolicy {
 public:
  explicit UniformAdapter(const SystemParams& params) : params_(params), config_(uniform_policy(params)) {}

  bool step(const RequestProfile*, const RequestPattern*, Slot) override { return false; }
  std::optional<CacheConfig> config() const override { return config_; }
  double rate(const RequestProfile&, const RequestPattern& x) const override {
    return expected_rate(config_, x, params_).total;
  }
  double stochastic_rate(const PreferenceProfile& prefs, const GapTable* gaps) const override {
    return coded_stochastic_rate(config_, prefs, gaps, params_);
  }

 private:
  SystemParams params_;
  CacheConfig config_;
};

std::vector<std::vector<FileIndex>> cache_sets(const LocalCacheState& st) {
  auto sets = st.per_user_cache;
  for (auto& z : sets) std::sort(z.begin(), z.end());
  return sets;
}

class LocalAdapter final : public OnlinePolicy {
 public:
  LocalAdapter(const SystemParams& params, const RunConfig& cfg, Rng& rng)
      : lru_(cfg.policy == PolicyKind::LocalLru),
        alpha_(cfg.alpha),
        state_(lru_ ? make_local_lru_state(params) : make_local_ftpl_state(params, rng)) {}

  bool step(const RequestProfile* r_prev, const RequestPattern*, Slot t) override {
    const auto before = cache_sets(state_);
    state_ = lru_ ? local_lru_step(std::move(state_), r_prev) : local_ftpl_step(std::move(state_), r_prev, t, alpha_);
    return t >= 2 && cache_sets(state_) != before;
  }
  std::optional<CacheConfig> config() const override { return std::nullopt; }
  double rate(const RequestProfile& r, const RequestPattern&) const override { return local_delivery_rate(state_, r); }
  double stochastic_rate(const PreferenceProfile& prefs, const GapTable*) const override {
    return local_expected_rate(state_, prefs);
  }

 private:
  bool lru_;
  double alpha_;
  LocalCacheState state_;
};

struct Moments {
  std::vector<double> mean;
  std::vector<double> se;
};

Moments moments(const std::vector<std::vector<double>>& series) {
  Moments m;
  if (series.empty()) return m;
  const std::size_t len = series.front().size();
  const double n = static_cast<double>(series.size());
  m.mean.assign(len, 0.0);
  m.se.assign(len, 0.0);
  for (std::size_t t = 0; t < len; ++t) {
    double sum = 0.0;
    for (const auto& s : series) sum += s[t];
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& s : series) ss += (s[t] - mean) * (s[t] - mean);
    m.mean[t] = mean;
    m.se[t] = series.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  }
  return m;
}

SeedRun run_seed(const Trace& trace, const std::vector<RequestPattern>& patterns, const RunConfig& cfg,
                 const OracleReference& ref, std::uint64_t seed) {
  Rng rng(derive_stream(cfg.master_seed, seed));
  auto policy = make_policy(trace.params, cfg, rng);
  SeedRun run;
  run.seed = seed;
  run.records.reserve(trace.horizon());
  double cum = 0.0;
  double oracle = 0.0;
  for (Slot t = 1; t <= trace.horizon(); ++t) {
    const RequestProfile* r_prev = t >= 2 ? &trace.slots[t - 2] : nullptr;
    const RequestPattern* x_prev = t >= 2 ? &patterns[t - 2] : nullptr;
    SimulationRecord rec;
    rec.t = t;
    rec.switched = policy->step(r_prev, x_prev, t);
    rec.config = policy->config();
    rec.rate = ref.kind == Reference::Stochastic ? policy->stochastic_rate(*cfg.prefs, ref.gaps.get())
                                                 : policy->rate(trace.slots[t - 1], patterns[t - 1]);
    cum += rec.rate;
    oracle += ref.per_slot[t - 1];
    rec.cum_rate = cum;
    rec.oracle_cum = oracle;
    rec.regret = cum - oracle;
    run.records.push_back(rec);
  }
  return run;
}

}  // namespace

std::unique_ptr<OnlinePolicy> make_policy(const SystemParams& params, const RunConfig& cfg, Rng& rng) {
  switch (cfg.policy) {
    case PolicyKind::Ftpl: return std::make_unique<FtplAdapter>(params, cfg, rng);
    case PolicyKind::Linear: return std::make_unique<LinearAdapter>(params, cfg, rng);
    case PolicyKind::Uniform: return std::make_unique<UniformAdapter>(params);
    case PolicyKind::LocalFtpl:
    case PolicyKind::LocalLru: return std::make_unique<LocalAdapter>(params, cfg, rng);
  }
  throw DomainError("unknown policy kind");
}

SimulationResult run_simulation(const Trace& trace, const RunConfig& cfg) {
  cfg.validate();
  return run_simulation(trace, cfg, make_reference(trace, cfg.reference, cfg.prefs, cfg.cap));
}

SimulationResult run_simulation(const Trace& trace, const RunConfig& cfg, const OracleReference& ref) {
  cfg.validate();
  trace.validate();
  cfg.schedule.check_horizon(trace.horizon());
  if (ref.kind != cfg.reference || ref.per_slot.size() != trace.horizon()) {
    throw DomainError("run_simulation: oracle reference does not match the run");
  }
  if (cfg.prefs) cfg.prefs->validate(trace.params);
  const auto patterns = trace.patterns();

  SimulationResult result;
  result.policy = to_string(cfg.policy);
  result.runs.resize(cfg.seeds.size());
  std::size_t workers = cfg.threads != 0 ? cfg.threads : std::max(1U, std::thread::hardware_concurrency());
  workers = std::min(workers, cfg.seeds.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto work = [&] {
    for (std::size_t i = next++; i < cfg.seeds.size(); i = next++) {
      try {
        result.runs[i] = run_seed(trace, patterns, cfg, ref, cfg.seeds[i]);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<std::vector<double>> regret;
  std::vector<std::vector<double>> switches;
  for (const auto& run : result.runs) {
    std::vector<double> r;
    std::vector<double> c;
    double count = 0.0;
    for (const auto& rec : run.records) {
      r.push_back(rec.regret);
      count += rec.switched ? 1.0 : 0.0;
      c.push_back(count);
    }
    regret.push_back(std::move(r));
    switches.push_back(std::move(c));
  }
  auto rm = moments(regret);
  auto cm = moments(switches);
  result.mean_regret = std::move(rm.mean);
  result.se_regret = std::move(rm.se);
  result.mean_switches = std::move(cm.mean);
  result.se_switches = std::move(cm.se);
  return result;
}

Comparison compare_policies(const Trace& trace, const std::vector<RunConfig>& configs) {
  if (configs.empty()) throw DomainError("compare_policies: no run configs");
  for (const auto& c : configs) {
    if (c.reference != configs.front().reference) {
      throw DomainError("compare_policies: all runs must share one regret reference");
    }
  }
  const auto& first = configs.front();
  first.validate();
  const auto ref = make_reference(trace, first.reference, first.prefs, first.cap);
  Comparison cmp;
  for (const auto& c : configs) {
    cmp.results.push_back(run_simulation(trace, c, ref));
    const auto& res = cmp.results.back();
    for (std::size_t i = 0; i < res.mean_regret.size(); ++i) {
      const double t = static_cast<double>(i + 1);
      cmp.rows.push_back({res.policy, i + 1, res.mean_regret[i] / t, res.se_regret[i] / t});
    }
  }
  return cmp;
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_csv(const std::vector<SimulationResult>& results, std::ostream& out,
               const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  out << "t,policy,seed,rate,cum_rate,oracle_cum,regret,switched,config_hex\n";
  for (const auto& res : results) {
    for (const auto& run : res.runs) {
      for (const auto& rec : run.records) {
        out << rec.t << ',' << res.policy << ',' << run.seed << ',' << format_real(rec.rate) << ','
            << format_real(rec.cum_rate) << ',' << format_real(rec.oracle_cum) << ',' << format_real(rec.regret)
            << ',' << (rec.switched ? 1 : 0) << ',' << (rec.config ? rec.config->hex() : std::string("-")) << '\n';
      }
    }
  }
}

void export_csv(const std::vector<SimulationResult>& results, const std::string& path,
                const std::vector<std::string>& comments) {
  std::ostringstream buf;
  write_csv(results, buf, comments);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("csv: cannot open " + path + " for writing");
  out << buf.str();
  out.close();
  if (!out) throw IoError("csv: write failure on " + path);
}

}  // namespace occ
