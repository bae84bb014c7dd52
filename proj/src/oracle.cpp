#include "occ/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "occ/rate.hpp"

namespace occ {

namespace {

// Requested files of one slot with their counts.
std::vector<std::pair<FileIndex, std::uint32_t>> hits_of(const RequestProfile& r, std::size_t n_files) {
  std::vector<std::uint32_t> counts(n_files, 0);
  for (FileIndex j : r.requests) ++counts[j];
  std::vector<std::pair<FileIndex, std::uint32_t>> out;
  for (std::size_t j = 0; j < n_files; ++j) {
    if (counts[j] != 0) out.emplace_back(static_cast<FileIndex>(j), counts[j]);
  }
  return out;
}

std::size_t hits_in(std::uint64_t mask, const std::vector<std::pair<FileIndex, std::uint32_t>>& hits) {
  std::size_t k = 0;
  for (const auto& [j, c] : hits) {
    if ((mask >> j) & 1U) k += c;
  }
  return k;
}

}  // namespace

OracleResult static_oracle(const Trace& trace, bool keep_per_config, std::size_t cap) {
  trace.validate();
  const auto& params = trace.params;
  const auto configs = enumerate_feasible(params, cap);
  const CodedFactorTable factors(params);
  std::vector<std::uint64_t> distinct_totals(params.n_files, 0);
  std::vector<double> acc(configs.size(), 0.0);
  for (const auto& r : trace.slots) {
    const auto hits = hits_of(r, params.n_files);
    for (const auto& [j, c] : hits) ++distinct_totals[j];
    for (std::size_t i = 0; i < configs.size(); ++i) {
      const std::size_t k = hits_in(configs[i].mask(), hits);
      if (k != 0) acc[i] += factors(configs[i].stored_count(), k);
    }
  }
  const double m = static_cast<double>(params.cache_size);
  OracleResult result;
  if (keep_per_config) result.per_config_cumulative.emplace();
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const CacheConfig s = configs[i];
    std::uint64_t uncoded = 0;
    for (std::size_t j = 0; j < params.n_files; ++j) {
      if (!s.stores(static_cast<FileIndex>(j))) uncoded += distinct_totals[j];
    }
    const double value =
        static_cast<double>(uncoded) + (static_cast<double>(s.stored_count()) / m - 1.0) * acc[i];
    if (i == 0 || strictly_better(value, result.best_cumulative)) {
      result.best_config = s;
      result.best_cumulative = value;
    }
    if (keep_per_config) result.per_config_cumulative->emplace_back(s, value);
  }
  return result;
}

std::vector<double> prefix_oracle_curve(const Trace& trace, std::size_t cap) {
  trace.validate();
  const auto& params = trace.params;
  const auto configs = enumerate_feasible(params, cap);
  const CodedFactorTable factors(params);
  const double m = static_cast<double>(params.cache_size);
  std::vector<double> scale(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    scale[i] = static_cast<double>(configs[i].stored_count()) / m - 1.0;
  }
  std::vector<double> cumulative(configs.size(), 0.0);
  std::vector<double> curve;
  curve.reserve(trace.horizon());
  for (const auto& r : trace.slots) {
    const auto hits = hits_of(r, params.n_files);
    double best = 0.0;
    for (std::size_t i = 0; i < configs.size(); ++i) {
      const std::uint64_t mask = configs[i].mask();
      std::size_t k = 0;
      std::size_t uncoded = 0;
      for (const auto& [j, c] : hits) {
        if ((mask >> j) & 1U) {
          k += c;
        } else {
          ++uncoded;
        }
      }
      cumulative[i] += static_cast<double>(uncoded) + scale[i] * factors(configs[i].stored_count(), k);
      if (i == 0 || cumulative[i] < best) best = cumulative[i];
    }
    curve.push_back(best);
  }
  return curve;
}

double stochastic_expected_rate(CacheConfig s, const PreferenceProfile& prefs, const SystemParams& params) {
  prefs.validate(params);
  if (!s.feasible(params)) {
    throw DomainError("stochastic rate: cache config 0x" + s.hex() + " is infeasible");
  }
  const double n = static_cast<double>(s.stored_count());
  const double ratio = static_cast<double>(params.cache_size) / n;
  double uncoded = 0.0;
  for (std::size_t j = 0; j < params.n_files; ++j) {
    if (s.stores(static_cast<FileIndex>(j))) continue;
    double nobody = 1.0;
    for (const auto& p : prefs.per_user) nobody *= 1.0 - p[j];
    uncoded += 1.0 - nobody;
  }
  // E[(1 - M/n)^{<x,s>}] factorizes over users: each contributes 1 - q_k M/n.
  double keep = 1.0;
  for (const auto& p : prefs.per_user) {
    double q = 0.0;
    for (std::size_t j = 0; j < params.n_files; ++j) {
      if (s.stores(static_cast<FileIndex>(j))) q += p[j];
    }
    keep *= 1.0 - q * ratio;
  }
  return uncoded + (1.0 / ratio - 1.0) * (1.0 - keep);
}

std::size_t GapTable::index_of(CacheConfig s) const {
  const auto it = std::lower_bound(configs.begin(), configs.end(), s);
  if (it == configs.end() || *it != s) throw DomainError("gap table: config 0x" + s.hex() + " is not feasible");
  return static_cast<std::size_t>(it - configs.begin());
}

GapTable stochastic_oracle(const PreferenceProfile& prefs, const SystemParams& params, std::size_t cap) {
  prefs.validate(params);
  GapTable table;
  table.configs = enumerate_feasible(params, cap);
  table.rates.reserve(table.configs.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < table.configs.size(); ++i) {
    table.rates.push_back(stochastic_expected_rate(table.configs[i], prefs, params));
    if (i == 0 || strictly_better(table.rates[i], table.rates[best])) best = i;
  }
  table.oracle_config = table.configs[best];
  table.oracle_value = table.rates[best];
  table.gaps.reserve(table.rates.size());
  for (double v : table.rates) table.gaps.push_back(std::max(0.0, v - table.oracle_value));
  return table;
}

}  // namespace occ
