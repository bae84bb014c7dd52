#include "doctest.h"

#include <cmath>
#include <sstream>

#include "occ/harness.hpp"
#include "occ/oracle.hpp"
#include "occ/rate.hpp"
#include "occ/traces.hpp"

using namespace occ;

namespace {

RunConfig config(PolicyKind kind, std::size_t seeds = 3) {
  RunConfig cfg;
  cfg.policy = kind;
  cfg.seeds = seed_range(seeds);
  cfg.master_seed = 12345;
  return cfg;
}

Trace zipf_trace(std::size_t horizon, std::uint64_t seed) {
  const SystemParams p{6, 4, 2};
  return gen_stochastic(zipf_preferences(p), p, horizon, seed);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

}  // namespace

TEST_CASE("policy names round trip") {
  for (auto k : {PolicyKind::Ftpl, PolicyKind::Linear, PolicyKind::Uniform, PolicyKind::LocalFtpl, PolicyKind::LocalLru})
    CHECK(parse_policy_kind(to_string(k)) == k);
  CHECK_THROWS_AS(parse_policy_kind("lfu"), UsageError);
}

TEST_CASE("uniform policy has zero regret when every file fits") {
  const SystemParams p{4, 3, 4};
  const auto tr = gen_stochastic(zipf_preferences(p), p, 50, 1);
  const auto res = run_simulation(tr, config(PolicyKind::Uniform, 2));
  for (const auto& run : res.runs) {
    for (const auto& rec : run.records) {
      CHECK(rec.regret == 0.0);
      CHECK_FALSE(rec.switched);
    }
  }
}

TEST_CASE("follow-the-leader locks onto the oracle on a constant trace") {
  Trace tr;
  tr.params = SystemParams{5, 3, 2};
  tr.slots.assign(40, RequestProfile{{0, 3, 3}});
  auto cfg = config(PolicyKind::Ftpl, 2);
  cfg.alpha = 0.0;
  const auto res = run_simulation(tr, cfg);
  const double oracle_rate = static_oracle(tr).best_cumulative / 40.0;
  for (const auto& run : res.runs) {
    for (std::size_t i = 1; i < run.records.size(); ++i) {
      CHECK(run.records[i].rate == doctest::Approx(oracle_rate).epsilon(1e-12));
    }
  }
}

TEST_CASE("linear policy loses a constant amount per cycle") {
  const auto tr = gen_adversarial_cycle(10, 200);
  auto cfg = config(PolicyKind::Linear, 2);
  cfg.alpha = 0.1;
  const auto res = run_simulation(tr, cfg);
  for (const auto& run : res.runs) {
    const auto& rec = run.records;
    const std::size_t len = 11;
    const std::size_t end = rec.size();
    const std::size_t start = end - 100 * len;
    const double policy_rate = rec[end - 1].cum_rate - rec[start - 1].cum_rate;
    const double oracle_rate = rec[end - 1].oracle_cum - rec[start - 1].oracle_cum;
    CHECK(policy_rate / 100.0 == doctest::Approx(33.0).epsilon(1e-12));
    CHECK(oracle_rate / 100.0 == doctest::Approx(24.2578125).epsilon(1e-12));
  }
}

TEST_CASE("records satisfy the accounting identities") {
  const auto tr = zipf_trace(300, 4);
  const double oracle_total = static_oracle(tr).best_cumulative;
  for (auto kind : {PolicyKind::Ftpl, PolicyKind::Linear, PolicyKind::Uniform, PolicyKind::LocalFtpl, PolicyKind::LocalLru}) {
    const auto res = run_simulation(tr, config(kind));
    CHECK(res.policy == to_string(kind));
    for (const auto& run : res.runs) {
      double cum = 0.0;
      double prev_regret = 0.0;
      double prev_oracle = 0.0;
      for (const auto& rec : run.records) {
        cum += rec.rate;
        CHECK(rec.cum_rate == doctest::Approx(cum).epsilon(1e-12));
        CHECK(rec.regret == doctest::Approx(rec.cum_rate - rec.oracle_cum).epsilon(1e-12));
        CHECK(rec.regret - prev_regret ==
              doctest::Approx(rec.rate - (rec.oracle_cum - prev_oracle)).epsilon(1e-9).scale(1.0));
        prev_regret = rec.regret;
        prev_oracle = rec.oracle_cum;
        CHECK(rec.config.has_value() == (kind != PolicyKind::LocalFtpl && kind != PolicyKind::LocalLru));
      }
      CHECK(std::abs(run.records.back().oracle_cum - oracle_total) <= 1e-9);
      CHECK_FALSE(run.records.front().switched);
    }
  }
}

TEST_CASE("aggregates are the seed mean and standard error") {
  const auto tr = zipf_trace(100, 6);
  const auto res = run_simulation(tr, config(PolicyKind::Ftpl, 5));
  REQUIRE(res.mean_regret.size() == 100);
  for (std::size_t t = 0; t < 100; t += 9) {
    double sum = 0.0;
    for (const auto& run : res.runs) sum += run.records[t].regret;
    const double mean = sum / 5.0;
    double ss = 0.0;
    for (const auto& run : res.runs) ss += std::pow(run.records[t].regret - mean, 2.0);
    CHECK(res.mean_regret[t] == doctest::Approx(mean).epsilon(1e-12));
    CHECK(res.se_regret[t] == doctest::Approx(std::sqrt(ss / 4.0 / 5.0)).epsilon(1e-9).scale(1.0));
    double switches = 0.0;
    for (const auto& run : res.runs) {
      for (std::size_t i = 0; i <= t; ++i) switches += run.records[i].switched ? 1.0 : 0.0;
    }
    CHECK(res.mean_switches[t] == doctest::Approx(switches / 5.0).epsilon(1e-12));
  }
}

TEST_CASE("parallel and sequential seeds give identical results") {
  const auto tr = zipf_trace(200, 8);
  for (auto kind : {PolicyKind::Ftpl, PolicyKind::LocalFtpl}) {
    auto seq = config(kind, 6);
    seq.threads = 1;
    auto par = seq;
    par.threads = 4;
    const auto a = run_simulation(tr, seq);
    const auto b = run_simulation(tr, par);
    std::ostringstream sa, sb;
    write_csv({a}, sa);
    write_csv({b}, sb);
    CHECK(sa.str() == sb.str());
    CHECK(a.mean_regret == b.mean_regret);
    CHECK(a.se_switches == b.se_switches);
  }
}

TEST_CASE("different seeds draw different perturbations") {
  const auto tr = zipf_trace(200, 8);
  const auto res = run_simulation(tr, config(PolicyKind::Ftpl, 4));
  bool any_diff = false;
  for (std::size_t i = 0; i < tr.horizon(); ++i) {
    any_diff = any_diff || res.runs[0].records[i].config != res.runs[1].records[i].config;
  }
  CHECK(any_diff);
}

TEST_CASE("restricted runs switch only at schedule slots") {
  const auto tr = zipf_trace(300, 10);
  for (auto kind : {PolicyKind::Ftpl, PolicyKind::Linear}) {
    auto cfg = config(kind, 4);
    cfg.schedule = SwitchSchedule::fixed_gap(10);
    const auto res = run_simulation(tr, cfg);
    for (const auto& run : res.runs) {
      for (const auto& rec : run.records) {
        if (rec.switched) CHECK(cfg.schedule.contains(rec.t));
      }
    }
  }
  auto cfg = config(PolicyKind::Ftpl);
  cfg.schedule = SwitchSchedule::explicit_slots({5, 400});
  CHECK_THROWS_AS(run_simulation(tr, cfg), DomainError);
}

TEST_CASE("stochastic reference adds the oracle value every slot") {
  const SystemParams p{6, 4, 2};
  const auto prefs = zipf_preferences(p);
  const auto tr = gen_stochastic(prefs, p, 120, 2);
  auto cfg = config(PolicyKind::Ftpl, 2);
  cfg.reference = Reference::Stochastic;
  cfg.prefs = prefs;
  const auto res = run_simulation(tr, cfg);
  const auto gaps = stochastic_oracle(prefs, p);
  for (const auto& run : res.runs) {
    for (const auto& rec : run.records) {
      CHECK(rec.oracle_cum == doctest::Approx(static_cast<double>(rec.t) * gaps.oracle_value).epsilon(1e-12));
      CHECK(rec.rate == doctest::Approx(stochastic_expected_rate(*rec.config, prefs, p)).epsilon(1e-12));
      CHECK(rec.regret >= -1e-9);
    }
  }
  auto missing = cfg;
  missing.prefs.reset();
  CHECK_THROWS_AS(run_simulation(tr, missing), DomainError);
  auto local = cfg;
  local.policy = PolicyKind::LocalLru;
  CHECK_NOTHROW(run_simulation(tr, local));
}

TEST_CASE("compare_policies shares the oracle") {
  const auto tr = zipf_trace(150, 12);
  const auto cmp = compare_policies(tr, {config(PolicyKind::Ftpl), config(PolicyKind::Ftpl)});
  REQUIRE(cmp.rows.size() == 300);
  for (std::size_t i = 0; i < 150; ++i) {
    CHECK(cmp.rows[i].mean_regret_per_slot == cmp.rows[150 + i].mean_regret_per_slot);
    CHECK(cmp.rows[i].t == i + 1);
  }
  const auto single = compare_policies(tr, {config(PolicyKind::Uniform)});
  const auto direct = run_simulation(tr, config(PolicyKind::Uniform));
  for (std::size_t i = 0; i < 150; ++i) {
    CHECK(single.rows[i].mean_regret_per_slot == direct.mean_regret[i] / static_cast<double>(i + 1));
  }
  auto stoch = config(PolicyKind::Uniform);
  stoch.reference = Reference::Stochastic;
  stoch.prefs = zipf_preferences(tr.params);
  CHECK_THROWS_AS(compare_policies(tr, {config(PolicyKind::Ftpl), stoch}), DomainError);
}

TEST_CASE("csv layout") {
  std::ostringstream empty;
  write_csv({}, empty);
  CHECK(empty.str() == "t,policy,seed,rate,cum_rate,oracle_cum,regret,switched,config_hex\n");

  std::istringstream in("5 4 1\n4 0 2 4\n");
  const auto tr = parse_trace(in);
  const auto res = run_simulation(tr, config(PolicyKind::Uniform, 1));
  std::ostringstream out;
  write_csv({res}, out, {"note"});
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "# note");
  std::getline(lines, line);
  std::getline(lines, line);
  const auto f = split(line, ',');
  REQUIRE(f.size() == 9);
  CHECK(f[0] == "1");
  CHECK(f[1] == "uniform");
  CHECK(f[2] == "0");
  CHECK(std::stod(f[3]) == doctest::Approx(4.0 * (1.0 - std::pow(0.8, 4.0))).epsilon(1e-11));
  CHECK(std::stod(f[3]) == doctest::Approx(2.3616).epsilon(1e-11));
  CHECK(f[7] == "0");
  CHECK(f[8] == "1f");
  CHECK_FALSE(std::getline(lines, line));
}

TEST_CASE("csv numbers round trip to 12 significant digits") {
  const auto tr = zipf_trace(60, 14);
  const auto res = run_simulation(tr, config(PolicyKind::LocalLru, 2));
  std::ostringstream out;
  write_csv({res}, out);
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  std::size_t row = 0;
  while (std::getline(lines, line)) {
    const auto f = split(line, ',');
    const auto& rec = res.runs[row / 60].records[row % 60];
    CHECK(std::stoul(f[0]) == rec.t);
    CHECK(std::stoul(f[2]) == res.runs[row / 60].seed);
    CHECK(std::stod(f[4]) == doctest::Approx(rec.cum_rate).epsilon(1e-11));
    CHECK(std::stod(f[6]) == doctest::Approx(rec.regret).epsilon(1e-11).scale(1.0));
    CHECK(f[8] == "-");
    ++row;
  }
  CHECK(row == 120);
  CHECK(format_real(0.1) == "0.1");
  CHECK(format_real(1.0 / 3.0) == "0.333333333333");
  CHECK_THROWS_AS(export_csv({res}, "/nonexistent/dir/out.csv"), IoError);
}
