#pragma once

#include "occ/core.hpp"

namespace occ {

// Expected delivery load of one slot, in units of one file.
struct RateBreakdown {
  double uncoded = 0.0;
  double coded = 0.0;
  double total = 0.0;
};

// Split of the same load into a config-dependent inner product and the
// config-independent term h(x) = (1 - M/N) * |distinct requests|.
struct RewrittenRate {
  double inner = 0.0;
  double h = 0.0;
  double total = 0.0;
};

// 1 - (1 - M/n)^k, the coded-load factor shared by every placement of n
// stored files for k requests landing inside them. Zero when k == 0; the
// multiplier (n/M - 1) zeroes the coded load when n == M.
double coded_factor(std::size_t stored, std::size_t hits, std::size_t cache_size);

// Direct form: uncoded broadcasts of unstored requested files plus the
// decentralized coded-multicast load (n/M - 1)(1 - (1 - M/n)^<x,s>).
RateBreakdown expected_rate(CacheConfig s, const RequestPattern& x, const SystemParams& params);

// Inner-product form <s - (M/N)1, f(x,s) - y> + h(x). Numerically a separate
// path from expected_rate; the two must agree.
RewrittenRate rewrite_rate(CacheConfig s, const RequestPattern& x, const SystemParams& params);

struct IdentityValues {
  double lhs = 0.0;  // subset sum over multicast group sizes
  double rhs = 0.0;  // closed form
};

// Sum_{u=1}^{k} C(k,u) p^{u-1} (1-p)^{k-u+1} versus (1/p - 1)(1 - (1-p)^k).
// Requires k <= 64 and p in (0, 1].
IdentityValues coded_sum_identity(unsigned k, double p);

// Precomputed coded_factor for n in [M, N] and hits in [0, K].
class CodedFactorTable {
 public:
  explicit CodedFactorTable(const SystemParams& params);
  double operator()(std::size_t stored, std::size_t hits) const {
    return table_[stored * stride_ + hits];
  }

 private:
  std::size_t stride_;
  std::vector<double> table_;
};

}  // namespace occ
