#include "doctest.h"

#include <cmath>
#include <limits>

#include "occ/core.hpp"
#include "occ/policies.hpp"
#include "occ/random.hpp"
#include "occ/rate.hpp"
#include "occ/traces.hpp"

using namespace occ;

namespace {

std::vector<RequestPattern> random_history(Rng& rng, const SystemParams& p, std::size_t len) {
  std::vector<RequestPattern> out;
  for (std::size_t t = 0; t < len; ++t) {
    RequestProfile r;
    for (std::size_t k = 0; k < p.n_users; ++k) r.requests.push_back(static_cast<FileIndex>(rng.below(p.n_files)));
    out.push_back(profile_to_pattern(r, p));
  }
  return out;
}

// Runs a policy through slots 1..len+1 so that its state reflects `history`.
template <typename Policy>
CacheConfig feed(Policy& policy, const std::vector<RequestPattern>& history) {
  CacheConfig s = policy.step(nullptr, 1);
  for (std::size_t i = 0; i < history.size(); ++i) s = policy.step(&history[i], i + 2);
  return s;
}

// <(s - (M/N)1), sum_i f(x_i, s) - Ybar_t> recomputed from scratch.
double naive_objective(CacheConfig s, const std::vector<RequestPattern>& history, const SystemParams& p,
                       const std::vector<double>& gamma, double eta) {
  const double m = static_cast<double>(p.cache_size);
  const double n = static_cast<double>(s.stored_count());
  double f = 0.0;
  for (const auto& x : history) f += (1.0 - std::pow(1.0 - m / n, static_cast<double>(x.requests_in(s)))) / m;
  double value = 0.0;
  for (std::size_t j = 0; j < p.n_files; ++j) {
    double y = -eta * gamma[j];
    for (const auto& x : history) y += x.distinct[j];
    value += ((s.stores(static_cast<FileIndex>(j)) ? 1.0 : 0.0) - m / static_cast<double>(p.n_files)) * (f - y);
  }
  return value;
}

CacheConfig naive_argmin(const SystemParams& p, const std::function<double(CacheConfig)>& objective) {
  CacheConfig best;
  double best_value = std::numeric_limits<double>::infinity();
  for (auto s : enumerate_feasible(p)) {
    const double v = objective(s);
    if (v < best_value) {
      best = s;
      best_value = v;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("switch schedules") {
  const auto every = SwitchSchedule::fixed_gap(10);
  CHECK(every.contains(1));
  CHECK(every.contains(11));
  CHECK_FALSE(every.contains(10));
  CHECK(every.boundaries(25) == std::vector<Slot>{1, 11, 21, 25});
  CHECK(every.gaps(25) == std::vector<std::size_t>{1, 10, 10, 4});
  CHECK(SwitchSchedule::fixed_gap(1).kind() == SwitchSchedule::Kind::EverySlot);
  CHECK_THROWS_AS(SwitchSchedule::fixed_gap(0), DomainError);
  CHECK_THROWS_AS(SwitchSchedule::explicit_slots({3, 3}), DomainError);
  CHECK_THROWS_AS(SwitchSchedule::explicit_slots({0, 3}), DomainError);
  const auto ex = SwitchSchedule::explicit_slots({2, 5});
  CHECK(ex.boundaries(9) == std::vector<Slot>{2, 5, 9});
  CHECK_THROWS_AS(ex.check_horizon(4), DomainError);
  std::size_t total = 0;
  for (auto l : SwitchSchedule::every_slot().gaps(17)) {
    CHECK(l == 1);
    total += l;
  }
  CHECK(total == 17);
}

TEST_CASE("ftpl at t=1 minimizes the perturbation inner product") {
  const SystemParams p{5, 3, 2};
  Rng rng(5);
  auto gamma = PerturbationVector::sample(5, rng);
  FtplPolicy policy(p, 1.0, gamma, SwitchSchedule::every_slot());
  const auto chosen = policy.step(nullptr, 1);
  const auto expect = naive_argmin(p, [&](CacheConfig s) {
    double v = 0.0;
    for (auto j : s.files()) v += gamma.gamma[j];
    return v;
  });
  CHECK(chosen == expect);
}

TEST_CASE("ftpl without perturbation follows the single requested file") {
  const SystemParams p{3, 1, 1};
  FtplPolicy policy(p, 0.0, PerturbationVector{{0.3, -0.2, 0.9}}, SwitchSchedule::every_slot());
  const auto x = profile_to_pattern(RequestProfile{{0}}, p);
  const std::vector<RequestPattern> history(8, x);
  CHECK(feed(policy, history) == CacheConfig(0b001));
}

TEST_CASE("ftpl accumulator argmin equals naive recomputation") {
  const SystemParams p{4, 2, 2};
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    const auto gamma = PerturbationVector::sample(p.n_files, rng);
    const auto history = random_history(rng, p, 10);
    FtplPolicy policy(p, 1.0, gamma, SwitchSchedule::every_slot());
    CacheConfig s = policy.step(nullptr, 1);
    for (std::size_t i = 0; i < history.size(); ++i) {
      s = policy.step(&history[i], i + 2);
      const std::vector<RequestPattern> prefix(history.begin(), history.begin() + static_cast<std::ptrdiff_t>(i + 1));
      const double eta = std::sqrt(static_cast<double>(i + 2));
      CHECK(s == naive_argmin(p, [&](CacheConfig c) { return naive_objective(c, prefix, p, gamma.gamma, eta); }));
    }
  }
}

TEST_CASE("ftpl keeps its config outside the schedule but still learns") {
  const SystemParams p{5, 3, 2};
  Rng rng(17);
  const auto gamma = PerturbationVector::sample(5, rng);
  const auto history = random_history(rng, p, 30);
  FtplPolicy restricted(p, 1.0, gamma, SwitchSchedule::fixed_gap(7));
  FtplPolicy free(p, 1.0, gamma, SwitchSchedule::every_slot());
  CacheConfig prev = restricted.step(nullptr, 1);
  free.step(nullptr, 1);
  for (std::size_t i = 0; i < history.size(); ++i) {
    const Slot t = i + 2;
    const CacheConfig s = restricted.step(&history[i], t);
    const CacheConfig u = free.step(&history[i], t);
    if (!restricted.schedule().contains(t)) {
      CHECK(s == prev);
    } else {
      CHECK(s == u);
    }
    CHECK(restricted.state().cum_distinct == free.state().cum_distinct);
    CHECK(restricted.state().coded_accumulator == free.state().coded_accumulator);
    prev = s;
  }
}

TEST_CASE("ftpl with alpha 0 is follow-the-leader on cumulative expected rate") {
  const SystemParams p{5, 3, 2};
  Rng rng(23);
  const auto history = random_history(rng, p, 25);
  FtplPolicy policy(p, 0.0, PerturbationVector{std::vector<double>(5, 0.0)}, SwitchSchedule::every_slot());
  policy.step(nullptr, 1);
  for (std::size_t i = 0; i < history.size(); ++i) {
    const CacheConfig s = policy.step(&history[i], i + 2);
    const auto cumulative = [&](CacheConfig c) {
      double v = 0.0;
      for (std::size_t h = 0; h <= i; ++h) v += expected_rate(c, history[h], p).total;
      return v;
    };
    const double best = cumulative(naive_argmin(p, cumulative));
    CHECK(cumulative(s) == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("ftpl accumulators match from-scratch sums") {
  for (std::size_t n = 2; n <= 8; ++n) {
    const SystemParams p{n, 4, 1 + n / 3};
    Rng rng(100 + n);
    const auto history = random_history(rng, p, 40);
    FtplPolicy policy(p, 1.0, PerturbationVector::sample(n, rng), SwitchSchedule::every_slot());
    feed(policy, history);
    const auto& fs = policy.feasible();
    const double m = static_cast<double>(p.cache_size);
    for (std::size_t i = 0; i < fs.size(); ++i) {
      const double ns = static_cast<double>(fs.configs[i].stored_count());
      double expect = 0.0;
      for (const auto& x : history) expect += 1.0 - std::pow(1.0 - m / ns, static_cast<double>(x.requests_in(fs.configs[i])));
      CHECK(std::abs(policy.state().coded_accumulator[i] - expect) <= 1e-9);
      CHECK(policy.state().coded_accumulator[i] >= 0.0);
      CHECK(policy.state().coded_accumulator[i] <= static_cast<double>(history.size()));
    }
    for (auto y : policy.state().cum_distinct) CHECK(y <= history.size());
  }
}

TEST_CASE("ftpl selection is invariant to scaling the objective") {
  const SystemParams p{6, 3, 2};
  Rng rng(8);
  const auto history = random_history(rng, p, 12);
  FtplPolicy policy(p, 1.0, PerturbationVector::sample(6, rng), SwitchSchedule::every_slot());
  const CacheConfig s = feed(policy, history);
  for (double c : {0.5, 3.0, 1e3}) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < policy.feasible().size(); ++i) {
      if (c * policy.objective(i) < c * policy.objective(best)) best = i;
    }
    CHECK(policy.feasible().configs[best] == s);
  }
}

TEST_CASE("ftpl is deterministic given the trace and seed") {
  const SystemParams p{10, 6, 3};
  const auto trace = gen_stochastic(zipf_preferences(p), p, 60, 3);
  const auto patterns = trace.patterns();
  const auto run = [&] {
    Rng rng(77);
    FtplPolicy policy(p, 1.0, PerturbationVector::sample(10, rng), SwitchSchedule::every_slot());
    std::vector<CacheConfig> seq{policy.step(nullptr, 1)};
    for (std::size_t i = 1; i < patterns.size(); ++i) seq.push_back(policy.step(&patterns[i - 1], i + 1));
    return seq;
  };
  CHECK(run() == run());
}

TEST_CASE("policy steps enforce slot order and history") {
  const SystemParams p{4, 2, 2};
  const auto x = profile_to_pattern(RequestProfile{{0, 1}}, p);
  FtplPolicy policy(p, 1.0, PerturbationVector{std::vector<double>(4, 0.0)}, SwitchSchedule::every_slot());
  CHECK_THROWS_AS(policy.step(&x, 1), StateError);
  policy.step(nullptr, 1);
  CHECK_THROWS_AS(policy.step(nullptr, 2), StateError);
  CHECK_THROWS_AS(policy.step(&x, 1), StateError);
  policy.step(&x, 2);
  CHECK_THROWS_AS(policy.step(&x, 2), StateError);
  LinearPolicy lin(p, 1.0, PerturbationVector{std::vector<double>(4, 0.0)}, SwitchSchedule::every_slot());
  CHECK_THROWS_AS(lin.step(nullptr, 2), StateError);
  CHECK_THROWS_AS(FtplPolicy(p, 1.0, PerturbationVector{{1.0}}, SwitchSchedule::every_slot()), DomainError);
}

TEST_CASE("linear closed form equals brute force over every feasible config") {
  for (std::size_t n = 1; n <= 10; ++n) {
    for (std::size_t m = 1; m <= n; ++m) {
      const SystemParams p{n, 3, m};
      Rng rng(n * 31 + m);
      const auto history = random_history(rng, p, rng.below(12));
      LinearPolicy policy(p, 0.7, PerturbationVector::sample(n, rng), SwitchSchedule::every_slot());
      const CacheConfig s = feed(policy, history);
      CHECK(s == naive_argmin(p, [&](CacheConfig c) { return policy.objective(c); }));
    }
  }
}

TEST_CASE("linear policy at t=1 without perturbation picks the first M files") {
  const SystemParams p{6, 2, 3};
  LinearPolicy policy(p, 0.0, PerturbationVector{std::vector<double>(6, 0.0)}, SwitchSchedule::every_slot());
  CHECK(policy.step(nullptr, 1) == CacheConfig(0b000111));
}

TEST_CASE("linear policy on five random vectors with N=5, M=2") {
  const SystemParams p{5, 4, 2};
  CHECK(enumerate_feasible(p).size() == 26);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    LinearPolicy policy(p, 1.5, PerturbationVector::sample(5, rng), SwitchSchedule::every_slot());
    const CacheConfig s = feed(policy, random_history(rng, p, 1 + rng.below(20)));
    CHECK(s == naive_argmin(p, [&](CacheConfig c) { return policy.objective(c); }));
  }
}

TEST_CASE("linear policy settles on file A in the cyclic trace") {
  const auto trace = gen_adversarial_cycle(10, 20);
  const auto patterns = trace.patterns();
  Rng rng(1);
  LinearPolicy policy(trace.params, 0.1, PerturbationVector::sample(7, rng), SwitchSchedule::every_slot());
  CacheConfig s = policy.step(nullptr, 1);
  for (std::size_t i = 1; i < patterns.size(); ++i) s = policy.step(&patterns[i - 1], i + 1);
  CHECK(s == CacheConfig(0b1));
}

TEST_CASE("uniform policy stores everything") {
  const SystemParams p{5, 3, 2};
  CHECK(uniform_policy(p) == CacheConfig(0b11111));
  const auto x = profile_to_pattern(RequestProfile{{0, 1, 1}}, p);
  const double expect = (5.0 / 2.0 - 1.0) * (1.0 - std::pow(1.0 - 2.0 / 5.0, 3.0));
  CHECK(expected_rate(uniform_policy(p), x, p).total == doctest::Approx(expect).epsilon(1e-14));
  const SystemParams full{4, 2, 4};
  CHECK(expected_rate(uniform_policy(full), profile_to_pattern(RequestProfile{{0, 3}}, full), full).total == 0.0);
}

TEST_CASE("local ftpl without perturbation is LFU") {
  const SystemParams p{3, 1, 1};
  Rng rng(4);
  auto st = make_local_ftpl_state(p, rng);
  const std::vector<FileIndex> reqs{0, 0, 1, 0, 0, 0};
  st = local_ftpl_step(std::move(st), nullptr, 1, 0.0);
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    const RequestProfile r{{reqs[i]}};
    st = local_ftpl_step(std::move(st), &r, i + 2, 0.0);
  }
  CHECK(st.per_user_counts[0] == std::vector<std::uint32_t>{5, 1, 0});
  CHECK(st.per_user_cache[0] == std::vector<FileIndex>{0});
}

TEST_CASE("local ftpl caches follow each user's own history") {
  const SystemParams p{6, 2, 2};
  Rng rng(9);
  auto st = make_local_ftpl_state(p, rng);
  st = local_ftpl_step(std::move(st), nullptr, 1, 0.01);
  for (Slot t = 2; t <= 30; ++t) {
    const RequestProfile r{{static_cast<FileIndex>(t % 2), static_cast<FileIndex>(4 + t % 2)}};
    st = local_ftpl_step(std::move(st), &r, t, 0.01);
  }
  CHECK(st.per_user_cache[0] == std::vector<FileIndex>{0, 1});
  CHECK(st.per_user_cache[1] == std::vector<FileIndex>{4, 5});
  for (const auto& z : st.per_user_cache) CHECK(z.size() <= p.cache_size);
}

TEST_CASE("local ftpl is deterministic given the seed") {
  const SystemParams p{8, 3, 2};
  const auto trace = gen_stochastic(zipf_preferences(p), p, 40, 12);
  const auto run = [&] {
    Rng rng(5);
    auto st = make_local_ftpl_state(p, rng);
    std::vector<std::vector<std::vector<FileIndex>>> seq;
    for (Slot t = 1; t <= trace.horizon(); ++t) {
      st = local_ftpl_step(std::move(st), t >= 2 ? &trace.slots[t - 2] : nullptr, t, 1.0);
      seq.push_back(st.per_user_cache);
    }
    return seq;
  };
  CHECK(run() == run());
}

TEST_CASE("local lru eviction and touch") {
  const SystemParams p{4, 1, 2};
  auto st = make_local_lru_state(p);
  for (FileIndex j : {0U, 1U, 2U}) {
    const RequestProfile r{{j}};
    st = local_lru_step(std::move(st), &r);
  }
  CHECK(st.recency[0] == std::vector<FileIndex>{1, 2});

  auto touch = make_local_lru_state(p);
  for (FileIndex j : {0U, 1U, 0U}) {
    const RequestProfile r{{j}};
    touch = local_lru_step(std::move(touch), &r);
  }
  CHECK(touch.recency[0] == std::vector<FileIndex>{1, 0});
}

TEST_CASE("local lru with one slot misses an alternating stream") {
  const SystemParams p{2, 1, 1};
  auto st = make_local_lru_state(p);
  double misses = 0.0;
  const std::vector<FileIndex> reqs{0, 1, 0, 1};
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    const RequestProfile prev{{i > 0 ? reqs[i - 1] : 0U}};
    st = local_lru_step(std::move(st), i > 0 ? &prev : nullptr);
    misses += local_delivery_rate(st, RequestProfile{{reqs[i]}});
    if (i > 0) CHECK(st.per_user_cache[0] == std::vector<FileIndex>{reqs[i - 1]});
  }
  CHECK(misses == 4.0);
}

TEST_CASE("local delivery rate broadcasts each missing file once") {
  LocalCacheState st;
  st.cache_size = 1;
  st.per_user_cache = {{0}, {1}, {2}};
  CHECK(local_delivery_rate(st, RequestProfile{{0, 1, 2}}) == 0.0);
  st.per_user_cache = {{3}, {4}, {5}};
  CHECK(local_delivery_rate(st, RequestProfile{{0, 1, 2}}) == 3.0);
  LocalCacheState pair;
  pair.cache_size = 1;
  pair.per_user_cache = {{2}, {0}};
  CHECK(local_delivery_rate(pair, RequestProfile{{2, 2}}) == 1.0);
}

TEST_CASE("local expected rate matches point-mass and sampled requests") {
  const SystemParams p{5, 3, 2};
  LocalCacheState st;
  st.cache_size = 2;
  st.per_user_cache = {{0, 1}, {1, 2}, {3, 4}};
  const RequestProfile r{{1, 0, 0}};
  CHECK(local_expected_rate(st, deterministic_preferences(r, p)) == local_delivery_rate(st, r));

  const auto prefs = zipf_preferences(p);
  const auto trace = gen_stochastic(prefs, p, 100000, 42);
  double sum = 0.0;
  double sq = 0.0;
  for (const auto& slot : trace.slots) {
    const double v = local_delivery_rate(st, slot);
    sum += v;
    sq += v * v;
  }
  const double n = static_cast<double>(trace.horizon());
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  CHECK(std::abs(mean - local_expected_rate(st, prefs)) <= 4.0 * se);
}
