#include "occ/preferences.hpp"

#include <cmath>

namespace occ {

void PreferenceProfile::validate(const SystemParams& params) const {
  params.validate();
  if (per_user.size() != params.n_users) {
    throw DomainError("preference profile has " + std::to_string(per_user.size()) +
                      " users, expected K=" + std::to_string(params.n_users));
  }
  for (std::size_t k = 0; k < per_user.size(); ++k) {
    const auto& p = per_user[k];
    if (p.size() != params.n_files) {
      throw DomainError("preference vector of user " + std::to_string(k) + " has wrong length");
    }
    double sum = 0.0;
    for (double v : p) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw DomainError("preference vector of user " + std::to_string(k) + " has a negative entry");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw DomainError("preference vector of user " + std::to_string(k) + " does not sum to 1");
    }
  }
}

PreferenceProfile zipf_preferences(const SystemParams& params, double exponent) {
  params.validate();
  std::vector<double> p(params.n_files);
  double norm = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    p[j] = 1.0 / std::pow(static_cast<double>(j + 1), exponent);
    norm += p[j];
  }
  for (auto& v : p) v /= norm;
  return PreferenceProfile{std::vector<std::vector<double>>(params.n_users, p)};
}

PreferenceProfile deterministic_preferences(const RequestProfile& r, const SystemParams& params) {
  validate_profile(r, params);
  PreferenceProfile prefs;
  for (FileIndex j : r.requests) {
    std::vector<double> p(params.n_files, 0.0);
    p[j] = 1.0;
    prefs.per_user.push_back(std::move(p));
  }
  return prefs;
}

}  // namespace occ
