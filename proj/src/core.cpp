#include "occ/core.hpp"

#include <bit>
#include <cstdio>

namespace occ {

void SystemParams::validate() const {
  if (n_users < 1) throw DomainError("system params: K must be >= 1");
  if (cache_size < 1 || cache_size > n_files) {
    throw DomainError("system params: need 1 <= M <= N (N=" + std::to_string(n_files) +
                      ", M=" + std::to_string(cache_size) + ")");
  }
}

CacheConfig CacheConfig::all_files(std::size_t n_files) {
  if (n_files > 64) throw CapacityError("cache config: N=" + std::to_string(n_files) + " exceeds 64 bits");
  return CacheConfig(n_files == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n_files) - 1);
}

CacheConfig CacheConfig::from_files(const std::vector<FileIndex>& files) {
  std::uint64_t m = 0;
  for (FileIndex j : files) {
    if (j >= 64) throw CapacityError("cache config: file index " + std::to_string(j) + " exceeds 64 bits");
    m |= std::uint64_t{1} << j;
  }
  return CacheConfig(m);
}

std::size_t CacheConfig::stored_count() const { return static_cast<std::size_t>(std::popcount(mask_)); }

bool CacheConfig::feasible(const SystemParams& params) const {
  if (params.n_files < 64 && (mask_ >> params.n_files) != 0) return false;
  return stored_count() >= params.cache_size;
}

std::vector<FileIndex> CacheConfig::files() const {
  std::vector<FileIndex> out;
  for (std::uint64_t m = mask_; m != 0; m &= m - 1) {
    out.push_back(static_cast<FileIndex>(std::countr_zero(m)));
  }
  return out;
}

std::string CacheConfig::hex() const {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%llx", static_cast<unsigned long long>(mask_));
  return buf;
}

std::string CacheConfig::letters() const {
  std::string out;
  for (FileIndex j : files()) out.push_back(j < 26 ? static_cast<char>('A' + j) : '?');
  return out;
}

std::size_t RequestPattern::total() const {
  std::size_t sum = 0;
  for (auto c : counts) sum += c;
  return sum;
}

std::size_t RequestPattern::distinct_total() const {
  std::size_t sum = 0;
  for (auto d : distinct) sum += d;
  return sum;
}

std::vector<FileIndex> RequestPattern::requested_files() const {
  std::vector<FileIndex> out;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (counts[j] != 0) out.push_back(static_cast<FileIndex>(j));
  }
  return out;
}

std::size_t RequestPattern::requests_in(CacheConfig s) const {
  std::size_t sum = 0;
  for (std::size_t j = 0; j < counts.size() && j < 64; ++j) {
    if (s.stores(static_cast<FileIndex>(j))) sum += counts[j];
  }
  return sum;
}

std::uint64_t RequestPattern::distinct_mask() const {
  std::uint64_t m = 0;
  for (std::size_t j = 0; j < distinct.size() && j < 64; ++j) {
    if (distinct[j]) m |= std::uint64_t{1} << j;
  }
  return m;
}

void validate_profile(const RequestProfile& r, const SystemParams& params) {
  if (r.requests.size() != params.n_users) {
    throw InvalidRequestError("request profile has " + std::to_string(r.requests.size()) +
                              " entries, expected K=" + std::to_string(params.n_users));
  }
  for (std::size_t k = 0; k < r.requests.size(); ++k) {
    if (r.requests[k] >= params.n_files) {
      throw InvalidRequestError("user " + std::to_string(k) + " requests file " +
                                std::to_string(r.requests[k]) + " >= N=" +
                                std::to_string(params.n_files));
    }
  }
}

RequestPattern profile_to_pattern(const RequestProfile& r, const SystemParams& params) {
  validate_profile(r, params);
  RequestPattern x;
  x.counts.assign(params.n_files, 0);
  x.distinct.assign(params.n_files, 0);
  for (FileIndex j : r.requests) {
    ++x.counts[j];
    x.distinct[j] = 1;
  }
  return x;
}

std::uint64_t feasible_count(const SystemParams& params) {
  params.validate();
  // Pascal row for C(N, m); exact for N <= 63, saturating beyond.
  const std::size_t n = params.n_files;
  if (n > kMaxMaskBits) return ~std::uint64_t{0};
  std::vector<std::uint64_t> exact(n + 1, 0);
  exact[0] = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t m = i; m >= 1; --m) exact[m] += exact[m - 1];
  }
  std::uint64_t total = 0;
  for (std::size_t m = params.cache_size; m <= n; ++m) total += exact[m];
  return total;
}

void check_enumeration_cap(const SystemParams& params, std::size_t cap) {
  params.validate();
  const std::size_t limit = cap < kMaxMaskBits ? cap : kMaxMaskBits;
  if (params.n_files > limit) {
    throw CapacityError("N=" + std::to_string(params.n_files) + " exceeds enumeration cap " +
                        std::to_string(limit));
  }
}

std::vector<CacheConfig> enumerate_feasible(const SystemParams& params, std::size_t cap) {
  check_enumeration_cap(params, cap);
  const std::uint64_t end = std::uint64_t{1} << params.n_files;
  std::vector<CacheConfig> out;
  out.reserve(static_cast<std::size_t>(feasible_count(params)));
  for (std::uint64_t m = 1; m < end; ++m) {
    if (static_cast<std::size_t>(std::popcount(m)) >= params.cache_size) out.emplace_back(m);
  }
  return out;
}

}  // namespace occ
