#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace occ {

// Error hierarchy. The CLI maps every occ::Error to exit code 1 and
// UsageError to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidRequestError : public Error { using Error::Error; };
class CapacityError : public Error { using Error::Error; };
class DomainError : public Error { using Error::Error; };
class StateError : public Error { using Error::Error; };
class ParseError : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };
class DegenerateGapError : public Error { using Error::Error; };
class InsufficientDataError : public Error { using Error::Error; };
class UsageError : public Error { using Error::Error; };

using FileIndex = std::uint32_t;
using Slot = std::size_t;  // 1-based time slot

// Masks are 64 bits wide; the enumeration cap is therefore at most 63.
inline constexpr std::size_t kMaxMaskBits = 63;
inline constexpr std::size_t kDefaultEnumerationCap = 20;

struct SystemParams {
  std::size_t n_files = 0;     // N
  std::size_t n_users = 0;     // K
  std::size_t cache_size = 0;  // M, in normalized file units

  // Throws DomainError unless 1 <= M <= N and K >= 1.
  void validate() const;

  friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

// Set of "stored" files; bit j set means file j is coded-cached at every user.
class CacheConfig {
 public:
  CacheConfig() = default;
  explicit constexpr CacheConfig(std::uint64_t mask) : mask_(mask) {}

  static CacheConfig all_files(std::size_t n_files);
  static CacheConfig from_files(const std::vector<FileIndex>& files);

  constexpr std::uint64_t mask() const { return mask_; }
  std::size_t stored_count() const;
  bool stores(FileIndex j) const { return (mask_ >> j) & 1U; }
  bool feasible(const SystemParams& params) const;
  std::vector<FileIndex> files() const;

  // Lower-case hex without prefix, e.g. "f" for files {0,1,2,3}.
  std::string hex() const;
  // Letters A, B, C, ... for each stored file (only meaningful for N <= 26).
  std::string letters() const;

  friend constexpr bool operator==(CacheConfig, CacheConfig) = default;
  friend constexpr auto operator<=>(CacheConfig a, CacheConfig b) {
    return a.mask_ <=> b.mask_;
  }

 private:
  std::uint64_t mask_ = 0;
};

// One request per user for a single slot.
struct RequestProfile {
  std::vector<FileIndex> requests;

  friend bool operator==(const RequestProfile&, const RequestProfile&) = default;
};

// Per-file request counts x and distinct-request indicator y = min(x, 1).
struct RequestPattern {
  std::vector<std::uint32_t> counts;
  std::vector<std::uint8_t> distinct;

  std::size_t total() const;
  std::size_t distinct_total() const;
  // Files with a nonzero count, ascending.
  std::vector<FileIndex> requested_files() const;
  // <x, s>: number of users whose request lies in s.
  std::size_t requests_in(CacheConfig s) const;
  // Bit mask of y (requires N <= 64).
  std::uint64_t distinct_mask() const;
};

void validate_profile(const RequestProfile& r, const SystemParams& params);

RequestPattern profile_to_pattern(const RequestProfile& r, const SystemParams& params);

// Number of feasible configurations: sum_{m=M}^{N} C(N, m).
std::uint64_t feasible_count(const SystemParams& params);

// Every mask with popcount >= M, in ascending numeric order. Throws
// CapacityError when N exceeds `cap`.
std::vector<CacheConfig> enumerate_feasible(const SystemParams& params,
                                            std::size_t cap = kDefaultEnumerationCap);

void check_enumeration_cap(const SystemParams& params, std::size_t cap);

}  // namespace occ
