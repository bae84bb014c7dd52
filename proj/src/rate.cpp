#include "occ/rate.hpp"

#include <cmath>
#include <cstdint>

namespace occ {

namespace {

void require_feasible(CacheConfig s, const SystemParams& params) {
  params.validate();
  if (!s.feasible(params)) {
    throw DomainError("cache config 0x" + s.hex() + " is infeasible: stores " +
                      std::to_string(s.stored_count()) + " files, needs >= M=" +
                      std::to_string(params.cache_size) + " within N=" +
                      std::to_string(params.n_files));
  }
}

void require_pattern(const RequestPattern& x, const SystemParams& params) {
  if (x.counts.size() != params.n_files || x.distinct.size() != params.n_files) {
    throw DomainError("request pattern length does not match N=" + std::to_string(params.n_files));
  }
}

}  // namespace

double coded_factor(std::size_t stored, std::size_t hits, std::size_t cache_size) {
  if (hits == 0) return 0.0;
  const double keep = 1.0 - static_cast<double>(cache_size) / static_cast<double>(stored);
  return 1.0 - std::pow(keep, static_cast<double>(hits));
}

RateBreakdown expected_rate(CacheConfig s, const RequestPattern& x, const SystemParams& params) {
  require_feasible(s, params);
  require_pattern(x, params);
  RateBreakdown r;
  std::size_t uncoded = 0;
  std::size_t hits = 0;
  for (std::size_t j = 0; j < params.n_files; ++j) {
    if (s.stores(static_cast<FileIndex>(j))) {
      hits += x.counts[j];
    } else {
      uncoded += x.distinct[j];
    }
  }
  const std::size_t n = s.stored_count();
  const double m = static_cast<double>(params.cache_size);
  r.uncoded = static_cast<double>(uncoded);
  r.coded = (static_cast<double>(n) / m - 1.0) * coded_factor(n, hits, params.cache_size);
  r.total = r.uncoded + r.coded;
  return r;
}

RewrittenRate rewrite_rate(CacheConfig s, const RequestPattern& x, const SystemParams& params) {
  require_feasible(s, params);
  require_pattern(x, params);
  const double m = static_cast<double>(params.cache_size);
  const double n = static_cast<double>(s.stored_count());
  const double f = (1.0 - std::pow(1.0 - m / n, static_cast<double>(x.requests_in(s)))) / m;
  // Scaled by N the weights N s_j - M are integers, so <N s - M 1, y> and
  // <N s - M 1, 1> = N (n_s - M) are exact and a zero rate stays exactly zero.
  const auto n_files = static_cast<std::int64_t>(params.n_files);
  const auto cache = static_cast<std::int64_t>(params.cache_size);
  std::int64_t weighted_distinct = 0;
  for (std::size_t j = 0; j < params.n_files; ++j) {
    const std::int64_t w = (s.stores(static_cast<FileIndex>(j)) ? n_files : 0) - cache;
    weighted_distinct += w * static_cast<std::int64_t>(x.distinct[j]);
  }
  const double weight_sum = static_cast<double>(n_files * (static_cast<std::int64_t>(s.stored_count()) - cache));
  const auto h_scaled = (n_files - cache) * static_cast<std::int64_t>(x.distinct_total());
  const double scale = static_cast<double>(n_files);
  RewrittenRate r;
  r.inner = (f * weight_sum - static_cast<double>(weighted_distinct)) / scale;
  r.h = static_cast<double>(h_scaled) / scale;
  r.total = (f * weight_sum + static_cast<double>(h_scaled - weighted_distinct)) / scale;
  return r;
}

IdentityValues coded_sum_identity(unsigned k, double p) {
  if (!(p > 0.0) || p > 1.0) throw DomainError("coded_sum_identity: p must lie in (0, 1]");
  if (k > 64) throw DomainError("coded_sum_identity: k must be <= 64");
  IdentityValues v;
  double binom = 1.0;  // C(k, u), built incrementally
  for (unsigned u = 1; u <= k; ++u) {
    binom = binom * static_cast<double>(k - u + 1) / static_cast<double>(u);
    v.lhs += binom * std::pow(p, static_cast<double>(u) - 1.0) *
             std::pow(1.0 - p, static_cast<double>(k - u + 1));
  }
  v.rhs = (1.0 / p - 1.0) * (1.0 - std::pow(1.0 - p, static_cast<double>(k)));
  return v;
}

CodedFactorTable::CodedFactorTable(const SystemParams& params)
    : stride_(params.n_users + 1), table_((params.n_files + 1) * (params.n_users + 1), 0.0) {
  for (std::size_t n = params.cache_size; n <= params.n_files; ++n) {
    for (std::size_t k = 0; k <= params.n_users; ++k) {
      table_[n * stride_ + k] = coded_factor(n, k, params.cache_size);
    }
  }
}

}  // namespace occ
