#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "occ/core.hpp"
#include "occ/preferences.hpp"
#include "occ/random.hpp"
#include "occ/rate.hpp"

namespace occ {

// Slots at which the cache configuration may change. Slot numbering is
// 1-based; by convention the horizon T closes the last inter-switch gap.
class SwitchSchedule {
 public:
  enum class Kind { EverySlot, FixedGap, Explicit };

  SwitchSchedule() = default;
  static SwitchSchedule every_slot();
  // {1, 1 + gap, 1 + 2 gap, ...}; gap >= 1.
  static SwitchSchedule fixed_gap(std::size_t gap);
  // Strictly increasing, all >= 1.
  static SwitchSchedule explicit_slots(std::vector<Slot> slots);

  Kind kind() const { return kind_; }
  std::size_t gap() const { return gap_; }
  bool contains(Slot t) const;

  // t_1 < ... < t_L restricted to [1, T], with T appended if absent.
  std::vector<Slot> boundaries(Slot horizon) const;
  // l_k = t_k - t_{k-1} with t_0 = 0; sums to T.
  std::vector<std::size_t> gaps(Slot horizon) const;
  // Throws DomainError if an explicit slot lies beyond the horizon.
  void check_horizon(Slot horizon) const;

  std::string describe() const;

 private:
  Kind kind_ = Kind::EverySlot;
  std::size_t gap_ = 1;
  std::vector<Slot> slots_;
};

// eta_t; must be positive and non-decreasing.
using LearningRate = std::function<double(Slot)>;
LearningRate sqrt_learning_rate(double alpha);

// Feasible configurations with per-config constants used by every scan.
struct FeasibleSet {
  SystemParams params;
  std::vector<CacheConfig> configs;    // ascending mask order
  std::vector<std::uint32_t> stored;   // n_s
  std::vector<double> coded_scale;     // n_s / M - 1

  static std::shared_ptr<const FeasibleSet> build(const SystemParams& params,
                                                  std::size_t cap = kDefaultEnumerationCap);
  std::size_t size() const { return configs.size(); }
};

struct PerturbationVector {
  std::vector<double> gamma;

  static PerturbationVector sample(std::size_t n_files, Rng& rng) { return {rng.normal_vector(n_files)}; }
};

struct FtplState {
  CacheConfig current_config;
  std::vector<std::uint64_t> cum_distinct;  // Y_t = sum_{i<t} y_i
  // Per feasible config (parallel to FeasibleSet::configs):
  // sum_{i<t} (1 - (1 - M/n_s)^{<x_i, s>}). Empty for the linear policy.
  std::vector<double> coded_accumulator;
  Slot slot = 0;
  double alpha = 1.0;
  PerturbationVector gamma;
};

// Follow-The-Perturbed-Leader over feasible cache configurations, using the
// exact expected-rate objective. The perturbation is drawn once and scaled by
// eta_t at each switching slot.
class FtplPolicy {
 public:
  FtplPolicy(const SystemParams& params, double alpha, PerturbationVector gamma,
             SwitchSchedule schedule, LearningRate eta = {},
             std::size_t cap = kDefaultEnumerationCap);

  // Consumes x_{t-1} (required for t >= 2, absent at t = 1), then re-selects
  // if t is a switching slot. Slots must strictly increase across calls.
  CacheConfig step(const RequestPattern* x_prev, Slot t);

  // argmin over feasible s of (n_s/M - 1) acc[s] - <s, Y_t - eta_t gamma>,
  // evaluated at the current slot; ties go to the smallest mask.
  CacheConfig select() const;
  double objective(std::size_t config_index) const;

  const FtplState& state() const { return state_; }
  const FeasibleSet& feasible() const { return *feasible_; }
  const SwitchSchedule& schedule() const { return schedule_; }

 private:
  void absorb(const RequestPattern& x);
  std::vector<double> perturbed_counts() const;

  std::shared_ptr<const FeasibleSet> feasible_;
  CodedFactorTable factors_;
  SwitchSchedule schedule_;
  LearningRate eta_;
  FtplState state_;
};

// FTPL with the coded term replaced by its large-load limit (n_s/M - 1), which
// makes the objective separable per file.
class LinearPolicy {
 public:
  LinearPolicy(const SystemParams& params, double alpha, PerturbationVector gamma,
               SwitchSchedule schedule, LearningRate eta = {});

  CacheConfig step(const RequestPattern* x_prev, Slot t);

  // Include file j iff (t-1)/M - Ybar_t[j] < 0, then pad up to M files with
  // the smallest coefficients (ties by file index).
  CacheConfig select() const;
  // (t - 1)(n_s - M)/M - <s - (M/N)1, Ybar_t>.
  double objective(CacheConfig s) const;

  const FtplState& state() const { return state_; }

 private:
  std::vector<double> coefficients() const;

  SystemParams params_;
  SwitchSchedule schedule_;
  LearningRate eta_;
  FtplState state_;
};

// All files stored, constant over time.
CacheConfig uniform_policy(const SystemParams& params);

// Per-user uncoded caches for the local benchmarks.
struct LocalCacheState {
  std::size_t cache_size = 0;
  std::vector<std::vector<FileIndex>> per_user_cache;        // z^k
  std::vector<std::vector<std::uint32_t>> per_user_counts;   // local FTPL only
  std::vector<std::vector<double>> per_user_gamma;           // local FTPL only
  std::vector<std::vector<FileIndex>> recency;               // LRU only, oldest first
  Slot slot = 0;

  bool caches(std::size_t user, FileIndex j) const;
};

LocalCacheState make_local_ftpl_state(const SystemParams& params, Rng& rng);
LocalCacheState make_local_lru_state(const SystemParams& params);

// User k caches the top M files by count_k[j] + alpha sqrt(t) gamma_k[j].
LocalCacheState local_ftpl_step(LocalCacheState state, const RequestProfile* r_prev, Slot t,
                                double alpha);
// User k caches its M most recently requested distinct files.
LocalCacheState local_lru_step(LocalCacheState state, const RequestProfile* r_prev);

// One broadcast per file that at least one of its requesters does not cache.
double local_delivery_rate(const LocalCacheState& state, const RequestProfile& r);
// Expectation of local_delivery_rate when user k draws from prefs.per_user[k].
double local_expected_rate(const LocalCacheState& state, const PreferenceProfile& prefs);

}  // namespace occ
