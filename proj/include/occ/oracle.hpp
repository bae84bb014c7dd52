#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "occ/core.hpp"
#include "occ/preferences.hpp"
#include "occ/traces.hpp"

namespace occ {

// Values within this relative distance of the running minimum count as ties
// and resolve to the smallest mask, so independently summed paths agree.
inline constexpr double kOracleTieTolerance = 1e-12;

// True when `value` beats `best` by more than the tie tolerance.
inline bool strictly_better(double value, double best) {
  return value < best - kOracleTieTolerance * (1.0 + std::abs(best));
}

struct OracleResult {
  CacheConfig best_config;
  double best_cumulative = 0.0;
  // Every feasible config with its cumulative expected rate, ascending mask.
  std::optional<std::vector<std::pair<CacheConfig, double>>> per_config_cumulative;
};

// Best fixed config in hindsight: one pass accumulates Y_T and, per config,
// the coded factor sum; cumulative(s) = <1 - s, Y_T> + (n_s/M - 1) acc[s].
OracleResult static_oracle(const Trace& trace, bool keep_per_config = false,
                           std::size_t cap = kDefaultEnumerationCap);

// min_s sum_{i<=t} K(s, x_i) for every prefix t = 1..T (the oracle of each
// shorter horizon, not a fixed config).
std::vector<double> prefix_oracle_curve(const Trace& trace, std::size_t cap = kDefaultEnumerationCap);

// E[K(s, x)] when user k draws independently from prefs.per_user[k].
double stochastic_expected_rate(CacheConfig s, const PreferenceProfile& prefs, const SystemParams& params);

struct GapTable {
  std::vector<CacheConfig> configs;  // ascending mask
  std::vector<double> rates;         // K(s)
  std::vector<double> gaps;          // K(s) - K_o
  double oracle_value = 0.0;
  CacheConfig oracle_config;

  // Index of s in configs; throws DomainError when s is not feasible.
  std::size_t index_of(CacheConfig s) const;
};

GapTable stochastic_oracle(const PreferenceProfile& prefs, const SystemParams& params,
                           std::size_t cap = kDefaultEnumerationCap);

}  // namespace occ
