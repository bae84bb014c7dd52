#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "occ/core.hpp"
#include "occ/oracle.hpp"
#include "occ/policies.hpp"
#include "occ/preferences.hpp"
#include "occ/traces.hpp"

namespace occ {

enum class PolicyKind { Ftpl, Linear, Uniform, LocalFtpl, LocalLru };

PolicyKind parse_policy_kind(const std::string& name);
std::string to_string(PolicyKind kind);

// Regret reference: the best fixed config over the full trace, or the
// stochastic oracle value K_o per slot. Under the stochastic reference every
// per-slot cost is the expectation over the request distribution.
enum class Reference { AdversarialStatic, Stochastic };

std::string to_string(Reference ref);

struct RunConfig {
  PolicyKind policy = PolicyKind::Ftpl;
  double alpha = 1.0;
  SwitchSchedule schedule;
  std::uint64_t master_seed = 0;
  // Seed ids; seed i draws from derive_stream(master_seed, seeds[i]).
  std::vector<std::uint64_t> seeds{0};
  Reference reference = Reference::AdversarialStatic;
  std::optional<PreferenceProfile> prefs;  // required for Reference::Stochastic
  std::size_t cap = kDefaultEnumerationCap;
  std::size_t threads = 0;  // 0: one per hardware thread

  void validate() const;
};

// Seed ids 0..n-1.
std::vector<std::uint64_t> seed_range(std::size_t n);

struct SimulationRecord {
  Slot t = 0;
  double rate = 0.0;
  double cum_rate = 0.0;
  double oracle_cum = 0.0;
  double regret = 0.0;
  bool switched = false;
  std::optional<CacheConfig> config;  // none for per-user policies
};

struct SeedRun {
  std::uint64_t seed = 0;
  std::vector<SimulationRecord> records;
};

struct SimulationResult {
  std::string policy;
  std::vector<SeedRun> runs;
  // Across seeds, per slot t = 1..T.
  std::vector<double> mean_regret;
  std::vector<double> se_regret;
  std::vector<double> mean_switches;  // cumulative switch count C(t)
  std::vector<double> se_switches;
};

// Per-slot oracle increments, computed once per trace and shared.
struct OracleReference {
  Reference kind = Reference::AdversarialStatic;
  std::vector<double> per_slot;
  std::optional<CacheConfig> config;  // s* of the reference
  std::shared_ptr<const GapTable> gaps;  // stochastic only
};

OracleReference make_reference(const Trace& trace, Reference kind, const std::optional<PreferenceProfile>& prefs,
                               std::size_t cap = kDefaultEnumerationCap);

// One online policy instance; step(t) consumes r_{t-1} and fixes the
// placement for slot t.
class OnlinePolicy {
 public:
  virtual ~OnlinePolicy() = default;
  // Returns true when the placement differs from the one used at t - 1.
  virtual bool step(const RequestProfile* r_prev, const RequestPattern* x_prev, Slot t) = 0;
  virtual std::optional<CacheConfig> config() const = 0;
  // Expected rate of the current placement on a realized request.
  virtual double rate(const RequestProfile& r, const RequestPattern& x) const = 0;
  // Expected rate of the current placement under the stochastic model.
  virtual double stochastic_rate(const PreferenceProfile& prefs, const GapTable* gaps) const = 0;
};

std::unique_ptr<OnlinePolicy> make_policy(const SystemParams& params, const RunConfig& cfg, Rng& rng);

SimulationResult run_simulation(const Trace& trace, const RunConfig& cfg);
SimulationResult run_simulation(const Trace& trace, const RunConfig& cfg, const OracleReference& ref);

struct ComparisonRow {
  std::string policy;
  Slot t = 0;
  double mean_regret_per_slot = 0.0;  // R(t)/t
  double se_regret_per_slot = 0.0;
};

struct Comparison {
  std::vector<SimulationResult> results;
  std::vector<ComparisonRow> rows;  // ordered by (policy, t)
};

// Shared trace and shared oracle; every config must use the same reference.
Comparison compare_policies(const Trace& trace, const std::vector<RunConfig>& configs);

// Header t,policy,seed,rate,cum_rate,oracle_cum,regret,switched,config_hex;
// rows ordered (policy, seed, t); reals with 12 significant digits. Each
// comment line is written as "# <line>" before the header.
void write_csv(const std::vector<SimulationResult>& results, std::ostream& out,
               const std::vector<std::string>& comments = {});
void export_csv(const std::vector<SimulationResult>& results, const std::string& path,
                const std::vector<std::string>& comments = {});

// printf("%.12g") formatting used by every CSV writer.
std::string format_real(double v);

}  // namespace occ
