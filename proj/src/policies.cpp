#include "occ/policies.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "occ/rate.hpp"

namespace occ {

// ---------------------------------------------------------------------------
// SwitchSchedule

SwitchSchedule SwitchSchedule::every_slot() { return SwitchSchedule{}; }

SwitchSchedule SwitchSchedule::fixed_gap(std::size_t gap) {
  if (gap < 1) throw DomainError("switch schedule: gap must be >= 1");
  SwitchSchedule s;
  s.kind_ = gap == 1 ? Kind::EverySlot : Kind::FixedGap;
  s.gap_ = gap;
  return s;
}

SwitchSchedule SwitchSchedule::explicit_slots(std::vector<Slot> slots) {
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i] < 1) throw DomainError("switch schedule: slots are 1-based");
    if (i > 0 && slots[i] <= slots[i - 1]) {
      throw DomainError("switch schedule: slots must be strictly increasing (slot " +
                        std::to_string(slots[i]) + " after " + std::to_string(slots[i - 1]) + ")");
    }
  }
  SwitchSchedule s;
  s.kind_ = Kind::Explicit;
  s.slots_ = std::move(slots);
  return s;
}

bool SwitchSchedule::contains(Slot t) const {
  switch (kind_) {
    case Kind::EverySlot: return t >= 1;
    case Kind::FixedGap: return t >= 1 && (t - 1) % gap_ == 0;
    case Kind::Explicit: return std::binary_search(slots_.begin(), slots_.end(), t);
  }
  return false;
}

std::vector<Slot> SwitchSchedule::boundaries(Slot horizon) const {
  std::vector<Slot> out;
  switch (kind_) {
    case Kind::EverySlot:
      out.resize(horizon);
      std::iota(out.begin(), out.end(), Slot{1});
      break;
    case Kind::FixedGap:
      for (Slot t = 1; t <= horizon; t += gap_) out.push_back(t);
      break;
    case Kind::Explicit:
      for (Slot t : slots_) {
        if (t <= horizon) out.push_back(t);
      }
      break;
  }
  if (horizon >= 1 && (out.empty() || out.back() != horizon)) out.push_back(horizon);
  return out;
}

std::vector<std::size_t> SwitchSchedule::gaps(Slot horizon) const {
  std::vector<std::size_t> out;
  Slot prev = 0;
  for (Slot t : boundaries(horizon)) {
    out.push_back(t - prev);
    prev = t;
  }
  return out;
}

void SwitchSchedule::check_horizon(Slot horizon) const {
  if (kind_ == Kind::Explicit && !slots_.empty() && slots_.back() > horizon) {
    throw DomainError("switch schedule: slot " + std::to_string(slots_.back()) +
                      " lies beyond horizon T=" + std::to_string(horizon));
  }
}

std::string SwitchSchedule::describe() const {
  switch (kind_) {
    case Kind::EverySlot: return "all";
    case Kind::FixedGap: return "every:" + std::to_string(gap_);
    case Kind::Explicit: return "explicit:" + std::to_string(slots_.size()) + "-slots";
  }
  return "?";
}

LearningRate sqrt_learning_rate(double alpha) {
  return [alpha](Slot t) { return alpha * std::sqrt(static_cast<double>(t)); };
}

// ---------------------------------------------------------------------------
// FeasibleSet

std::shared_ptr<const FeasibleSet> FeasibleSet::build(const SystemParams& params, std::size_t cap) {
  auto set = std::make_shared<FeasibleSet>();
  set->params = params;
  set->configs = enumerate_feasible(params, cap);
  set->stored.reserve(set->configs.size());
  set->coded_scale.reserve(set->configs.size());
  const double m = static_cast<double>(params.cache_size);
  for (CacheConfig s : set->configs) {
    const auto n = static_cast<std::uint32_t>(s.stored_count());
    set->stored.push_back(n);
    set->coded_scale.push_back(static_cast<double>(n) / m - 1.0);
  }
  return set;
}

namespace {

void check_alpha(double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw DomainError("learning-rate scale alpha must be >= 0");
}

void check_gamma(const PerturbationVector& gamma, const SystemParams& params) {
  if (gamma.gamma.size() != params.n_files) {
    throw DomainError("perturbation vector length does not match N=" + std::to_string(params.n_files));
  }
}

void check_step(const FtplState& st, const RequestPattern* x_prev, Slot t, std::size_t n_files) {
  if (t <= st.slot) {
    throw StateError("policy step: slot " + std::to_string(t) + " does not follow slot " +
                     std::to_string(st.slot));
  }
  if (t >= 2 && x_prev == nullptr) {
    throw StateError("policy step: slot " + std::to_string(t) + " needs the previous request pattern");
  }
  if (t == 1 && x_prev != nullptr) throw StateError("policy step: no request precedes slot 1");
  if (x_prev != nullptr && x_prev->distinct.size() != n_files) {
    throw DomainError("policy step: request pattern length does not match N");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// FtplPolicy

FtplPolicy::FtplPolicy(const SystemParams& params, double alpha, PerturbationVector gamma,
                       SwitchSchedule schedule, LearningRate eta, std::size_t cap)
    : feasible_(FeasibleSet::build(params, cap)),
      factors_(params),
      schedule_(std::move(schedule)),
      eta_(eta ? std::move(eta) : sqrt_learning_rate(alpha)) {
  check_alpha(alpha);
  check_gamma(gamma, params);
  state_.current_config = CacheConfig::all_files(params.n_files);
  state_.cum_distinct.assign(params.n_files, 0);
  state_.coded_accumulator.assign(feasible_->size(), 0.0);
  state_.alpha = alpha;
  state_.gamma = std::move(gamma);
}

void FtplPolicy::absorb(const RequestPattern& x) {
  const auto& fs = *feasible_;
  const std::size_t n_files = fs.params.n_files;
  std::vector<std::pair<FileIndex, std::uint32_t>> hits;
  for (std::size_t j = 0; j < n_files; ++j) {
    state_.cum_distinct[j] += x.distinct[j];
    if (x.counts[j] != 0) hits.emplace_back(static_cast<FileIndex>(j), x.counts[j]);
  }
  if (hits.empty()) return;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const std::uint64_t mask = fs.configs[i].mask();
    std::size_t k = 0;
    for (const auto& [j, c] : hits) {
      if ((mask >> j) & 1U) k += c;
    }
    if (k != 0) state_.coded_accumulator[i] += factors_(fs.stored[i], k);
  }
}

std::vector<double> FtplPolicy::perturbed_counts() const {
  const double eta = eta_(state_.slot);
  std::vector<double> ybar(state_.cum_distinct.size());
  for (std::size_t j = 0; j < ybar.size(); ++j) {
    ybar[j] = static_cast<double>(state_.cum_distinct[j]) - eta * state_.gamma.gamma[j];
  }
  return ybar;
}

double FtplPolicy::objective(std::size_t i) const {
  const auto ybar = perturbed_counts();
  double dot = 0.0;
  for (std::uint64_t m = feasible_->configs[i].mask(); m != 0; m &= m - 1) dot += ybar[std::countr_zero(m)];
  return feasible_->coded_scale[i] * state_.coded_accumulator[i] - dot;
}

CacheConfig FtplPolicy::select() const {
  const auto& fs = *feasible_;
  const auto ybar = perturbed_counts();
  std::size_t best = 0;
  double best_value = 0.0;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    double dot = 0.0;
    for (std::uint64_t m = fs.configs[i].mask(); m != 0; m &= m - 1) dot += ybar[std::countr_zero(m)];
    const double value = fs.coded_scale[i] * state_.coded_accumulator[i] - dot;
    if (i == 0 || value < best_value) {
      best = i;
      best_value = value;
    }
  }
  return fs.configs[best];
}

CacheConfig FtplPolicy::step(const RequestPattern* x_prev, Slot t) {
  check_step(state_, x_prev, t, feasible_->params.n_files);
  if (x_prev != nullptr) absorb(*x_prev);
  state_.slot = t;
  if (schedule_.contains(t)) state_.current_config = select();
  return state_.current_config;
}

// ---------------------------------------------------------------------------
// LinearPolicy

LinearPolicy::LinearPolicy(const SystemParams& params, double alpha, PerturbationVector gamma,
                           SwitchSchedule schedule, LearningRate eta)
    : params_(params), schedule_(std::move(schedule)), eta_(eta ? std::move(eta) : sqrt_learning_rate(alpha)) {
  params.validate();
  check_alpha(alpha);
  check_gamma(gamma, params);
  state_.current_config = CacheConfig::all_files(params.n_files);
  state_.cum_distinct.assign(params.n_files, 0);
  state_.alpha = alpha;
  state_.gamma = std::move(gamma);
}

std::vector<double> LinearPolicy::coefficients() const {
  const double m = static_cast<double>(params_.cache_size);
  const double elapsed = static_cast<double>(state_.slot) - 1.0;
  const double eta = eta_(state_.slot);
  std::vector<double> c(params_.n_files);
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double ybar = static_cast<double>(state_.cum_distinct[j]) - eta * state_.gamma.gamma[j];
    c[j] = elapsed / m - ybar;
  }
  return c;
}

double LinearPolicy::objective(CacheConfig s) const {
  const double m = static_cast<double>(params_.cache_size);
  const double ratio = m / static_cast<double>(params_.n_files);
  const double elapsed = static_cast<double>(state_.slot) - 1.0;
  const double eta = eta_(state_.slot);
  double dot = 0.0;
  for (std::size_t j = 0; j < params_.n_files; ++j) {
    const double ybar = static_cast<double>(state_.cum_distinct[j]) - eta * state_.gamma.gamma[j];
    dot += ((s.stores(static_cast<FileIndex>(j)) ? 1.0 : 0.0) - ratio) * ybar;
  }
  return elapsed * (static_cast<double>(s.stored_count()) - m) / m - dot;
}

CacheConfig LinearPolicy::select() const {
  const auto c = coefficients();
  std::vector<FileIndex> order(c.size());
  std::iota(order.begin(), order.end(), FileIndex{0});
  std::stable_sort(order.begin(), order.end(), [&](FileIndex a, FileIndex b) { return c[a] < c[b]; });
  std::uint64_t mask = 0;
  std::size_t taken = 0;
  for (FileIndex j : order) {
    if (taken < params_.cache_size || c[j] < 0.0) {
      mask |= std::uint64_t{1} << j;
      ++taken;
    } else {
      break;
    }
  }
  return CacheConfig(mask);
}

CacheConfig LinearPolicy::step(const RequestPattern* x_prev, Slot t) {
  check_step(state_, x_prev, t, params_.n_files);
  if (x_prev != nullptr) {
    for (std::size_t j = 0; j < params_.n_files; ++j) state_.cum_distinct[j] += x_prev->distinct[j];
  }
  state_.slot = t;
  if (schedule_.contains(t)) state_.current_config = select();
  return state_.current_config;
}

CacheConfig uniform_policy(const SystemParams& params) {
  params.validate();
  return CacheConfig::all_files(params.n_files);
}

// ---------------------------------------------------------------------------
// Local benchmarks

bool LocalCacheState::caches(std::size_t user, FileIndex j) const {
  const auto& z = per_user_cache[user];
  return std::find(z.begin(), z.end(), j) != z.end();
}

LocalCacheState make_local_ftpl_state(const SystemParams& params, Rng& rng) {
  params.validate();
  LocalCacheState st;
  st.cache_size = params.cache_size;
  st.per_user_cache.assign(params.n_users, {});
  st.per_user_counts.assign(params.n_users, std::vector<std::uint32_t>(params.n_files, 0));
  for (std::size_t k = 0; k < params.n_users; ++k) st.per_user_gamma.push_back(rng.normal_vector(params.n_files));
  return st;
}

LocalCacheState make_local_lru_state(const SystemParams& params) {
  params.validate();
  LocalCacheState st;
  st.cache_size = params.cache_size;
  st.per_user_cache.assign(params.n_users, {});
  st.recency.assign(params.n_users, {});
  return st;
}

LocalCacheState local_ftpl_step(LocalCacheState state, const RequestProfile* r_prev, Slot t, double alpha) {
  if (t <= state.slot) throw StateError("local FTPL: slots must strictly increase");
  const std::size_t users = state.per_user_counts.size();
  if (r_prev != nullptr) {
    if (r_prev->requests.size() != users) throw InvalidRequestError("local FTPL: profile size mismatch");
    for (std::size_t k = 0; k < users; ++k) {
      const FileIndex j = r_prev->requests[k];
      if (j >= state.per_user_counts[k].size()) throw InvalidRequestError("local FTPL: file index out of range");
      ++state.per_user_counts[k][j];
    }
  }
  state.slot = t;
  const double eta = alpha * std::sqrt(static_cast<double>(t));
  for (std::size_t k = 0; k < users; ++k) {
    const auto& counts = state.per_user_counts[k];
    const auto& gamma = state.per_user_gamma[k];
    std::vector<double> score(counts.size());
    for (std::size_t j = 0; j < counts.size(); ++j) score[j] = static_cast<double>(counts[j]) + eta * gamma[j];
    std::vector<FileIndex> order(counts.size());
    std::iota(order.begin(), order.end(), FileIndex{0});
    const std::size_t keep = std::min(state.cache_size, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                      [&](FileIndex a, FileIndex b) { return score[a] > score[b] || (score[a] == score[b] && a < b); });
    order.resize(keep);
    std::sort(order.begin(), order.end());
    state.per_user_cache[k] = std::move(order);
  }
  return state;
}

LocalCacheState local_lru_step(LocalCacheState state, const RequestProfile* r_prev) {
  if (r_prev != nullptr) {
    if (r_prev->requests.size() != state.recency.size()) throw InvalidRequestError("local LRU: profile size mismatch");
    for (std::size_t k = 0; k < state.recency.size(); ++k) {
      auto& rec = state.recency[k];
      const FileIndex j = r_prev->requests[k];
      rec.erase(std::remove(rec.begin(), rec.end(), j), rec.end());
      rec.push_back(j);
      if (rec.size() > state.cache_size) rec.erase(rec.begin());
      state.per_user_cache[k] = rec;
    }
  }
  ++state.slot;
  return state;
}

double local_delivery_rate(const LocalCacheState& state, const RequestProfile& r) {
  std::vector<FileIndex> missing;
  for (std::size_t k = 0; k < r.requests.size(); ++k) {
    if (!state.caches(k, r.requests[k])) missing.push_back(r.requests[k]);
  }
  std::sort(missing.begin(), missing.end());
  missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
  return static_cast<double>(missing.size());
}

double local_expected_rate(const LocalCacheState& state, const PreferenceProfile& prefs) {
  // File j is broadcast unless every user either does not request it or caches it.
  const std::size_t n_files = prefs.n_files();
  double total = 0.0;
  for (std::size_t j = 0; j < n_files; ++j) {
    double none_missing = 1.0;
    for (std::size_t k = 0; k < prefs.n_users(); ++k) {
      if (!state.caches(k, static_cast<FileIndex>(j))) none_missing *= 1.0 - prefs.per_user[k][j];
    }
    total += 1.0 - none_missing;
  }
  return total;
}

}  // namespace occ
