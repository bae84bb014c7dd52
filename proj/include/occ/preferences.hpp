#pragma once

#include <vector>

#include "occ/core.hpp"

namespace occ {

// Per-user request distributions over the N files, fixed across slots.
struct PreferenceProfile {
  std::vector<std::vector<double>> per_user;

  std::size_t n_users() const { return per_user.size(); }
  std::size_t n_files() const { return per_user.empty() ? 0 : per_user.front().size(); }

  // Each vector non-negative, length N, summing to 1 within 1e-12.
  void validate(const SystemParams& params) const;
};

// p(j) proportional to 1 / (j + 1)^exponent, identical for every user.
PreferenceProfile zipf_preferences(const SystemParams& params, double exponent = 1.0);

// Point mass on a fixed request profile.
PreferenceProfile deterministic_preferences(const RequestProfile& r, const SystemParams& params);

}  // namespace occ
