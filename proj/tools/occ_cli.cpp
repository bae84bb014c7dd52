// occ: command-line front end for the online coded caching simulator.
//
// Exit codes: 0 success, 1 model/domain error, 2 usage error.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "occ/bounds.hpp"
#include "occ/harness.hpp"
#include "occ/oracle.hpp"
#include "occ/traces.hpp"

#ifndef OCC_VERSION
#define OCC_VERSION "0.0.0"
#endif

namespace {

using namespace occ;

struct ParamFlags {
  std::size_t n_files = 0;
  std::size_t n_users = 0;
  std::size_t cache_size = 0;

  void add(CLI::App* app, bool required) {
    auto* n = app->add_option("-N,--files", n_files, "Number of files N")->check(CLI::PositiveNumber);
    auto* k = app->add_option("-K,--users", n_users, "Number of users K")->check(CLI::PositiveNumber);
    auto* m = app->add_option("-M,--cache", cache_size, "Cache size M in files")->check(CLI::PositiveNumber);
    if (required) {
      n->required();
      k->required();
      m->required();
    }
  }
  SystemParams params() const {
    SystemParams p{n_files, n_users, cache_size};
    try {
      p.validate();
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
    return p;
  }
};

SwitchSchedule parse_schedule(const std::string& text) {
  if (text == "all") return SwitchSchedule::every_slot();
  if (text.rfind("every:", 0) == 0) {
    const std::string num = text.substr(6);
    std::size_t pos = 0;
    long long gap = 0;
    try {
      gap = std::stoll(num, &pos);
    } catch (const std::exception&) {
      pos = std::string::npos;
    }
    if (pos != num.size() || num.empty()) throw UsageError("--schedule every:<l> needs an integer gap");
    if (gap < 1) throw UsageError("--schedule every:<l> needs a gap l >= 1, got " + num);
    return SwitchSchedule::fixed_gap(static_cast<std::size_t>(gap));
  }
  if (text.rfind("file:", 0) == 0) {
    const std::string path = text.substr(5);
    std::ifstream in(path);
    if (!in) throw UsageError("--schedule file not found: " + path);
    std::vector<Slot> slots;
    std::string token;
    while (in >> token) {
      if (token.front() == '#') {
        std::getline(in, token);
        continue;
      }
      std::size_t pos = 0;
      unsigned long long v = 0;
      try {
        v = std::stoull(token, &pos);
      } catch (const std::exception&) {
        pos = std::string::npos;
      }
      if (pos != token.size()) throw ParseError(path + ": bad slot '" + token + "'");
      slots.push_back(static_cast<Slot>(v));
    }
    return SwitchSchedule::explicit_slots(std::move(slots));
  }
  throw UsageError("--schedule must be all, every:<l> or file:<path>");
}

std::string join_args(int argc, char** argv) {
  std::string out;
  for (int i = 1; i < argc; ++i) {
    if (i > 1) out += ' ';
    out += argv[i];
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  out.close();
  if (!out) throw IoError("write failure on " + path);
}

std::string bound_csv(const BoundReport& rep) {
  std::ostringstream out;
  out << "t,kind,value,switching,width,stability,constant\n";
  for (const auto& p : rep.per_t) {
    out << p.t << ',' << to_string(rep.kind) << ',' << format_real(p.value) << ',' << format_real(p.switching) << ','
        << format_real(p.width) << ',' << format_real(p.stability) << ',' << format_real(p.constant) << '\n';
  }
  return out.str();
}

int dispatch(int argc, char** argv) {
  CLI::App app{"Online coded caching simulator"};
  app.set_version_flag("--version", std::string(OCC_VERSION));
  app.set_config("--config", "", "TOML/INI file with flag values");
  app.require_subcommand(1);
  app.fallthrough();  // --seed and --config are accepted after the subcommand

  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "Master seed")->envname("OCC_SEED");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Ratings log to trace file");
  std::string ingest_in;
  std::string ingest_out;
  ParamFlags ingest_params;
  IngestOptions ingest_opts;
  ingest->add_option("--input", ingest_in, "Ratings file (user, item, rating, timestamp)")
      ->required()
      ->check(CLI::ExistingFile);
  ingest->add_option("--out", ingest_out, "Trace file to write ('-' for stdout)")->required();
  ingest->add_option("--delimiter", ingest_opts.delimiter, "Field delimiter")->capture_default_str();
  ingest->add_option("--min-requests", ingest_opts.min_requests, "Minimum events per kept item")
      ->capture_default_str();
  ingest_params.add(ingest, true);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic trace");
  gen->require_subcommand(1);
  auto* gen_stoch = gen->add_subcommand("stochastic", "Independent requests from fixed preferences");
  ParamFlags gen_params;
  gen_params.add(gen_stoch, true);
  std::size_t gen_horizon = 0;
  double gen_zipf = 1.0;
  bool gen_dirichlet = false;
  std::string gen_out;
  gen_stoch->add_option("-T,--horizon", gen_horizon, "Number of slots")->required()->check(CLI::PositiveNumber);
  gen_stoch->add_option("--zipf", gen_zipf, "Zipf exponent of the shared preference")->capture_default_str();
  gen_stoch->add_flag("--dirichlet", gen_dirichlet, "Random Dirichlet(1) preference per user");
  gen_stoch->add_option("--out", gen_out, "Trace file to write ('-' for stdout)")->required();
  auto* gen_cycle = gen->add_subcommand("cycle", "Cyclic counterexample trace (N=7, K=4, M=1)");
  std::size_t cycle_k = 10;
  std::size_t cycle_count = 1;
  std::string cycle_out;
  gen_cycle->add_option("--k", cycle_k, "Repeats of (A,B,C,D) per cycle")->capture_default_str()->check(
      CLI::PositiveNumber);
  gen_cycle->add_option("--cycles", cycle_count, "Number of cycles")->capture_default_str()->check(
      CLI::PositiveNumber);
  gen_cycle->add_option("--out", cycle_out, "Trace file to write ('-' for stdout)")->required();

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run a policy over a trace");
  std::string sim_policy = "ftpl";
  std::string sim_trace;
  std::string sim_out;
  std::string sim_schedule = "all";
  std::string sim_reference = "static";
  double sim_alpha = 1.0;
  double sim_zipf = 1.0;
  std::size_t sim_seeds = 20;
  std::size_t sim_threads = 0;
  std::size_t sim_cap = kDefaultEnumerationCap;
  sim->add_option("--policy", sim_policy, "ftpl | linear | uniform | local-ftpl | local-lru")
      ->capture_default_str()
      ->check(CLI::IsMember({"ftpl", "linear", "uniform", "local-ftpl", "local-lru"}));
  sim->add_option("--trace", sim_trace, "Trace file")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", sim_out, "CSV file to write ('-' for stdout)")->required();
  sim->add_option("--alpha", sim_alpha, "Learning-rate scale")->capture_default_str()->check(
      CLI::NonNegativeNumber);
  sim->add_option("--seeds", sim_seeds, "Number of perturbation seeds")->capture_default_str()->check(
      CLI::PositiveNumber);
  sim->add_option("--schedule", sim_schedule, "all | every:<l> | file:<path>")->capture_default_str();
  sim->add_option("--reference", sim_reference, "Regret reference: static | stochastic")
      ->capture_default_str()
      ->check(CLI::IsMember({"static", "stochastic"}));
  sim->add_option("--zipf", sim_zipf, "Zipf exponent of the stochastic reference")->capture_default_str();
  sim->add_option("--threads", sim_threads, "Worker threads (0: all cores)")->capture_default_str();
  sim->add_option("--cap", sim_cap, "Enumeration cap on N")->capture_default_str();

  // oracle
  auto* orc = app.add_subcommand("oracle", "Best fixed configuration in hindsight");
  std::string orc_trace;
  orc->add_option("--trace", orc_trace, "Trace file")->required()->check(CLI::ExistingFile);

  // bounds
  auto* bnd = app.add_subcommand("bounds", "Evaluate regret and switching bounds");
  std::string bnd_kind = "t1";
  std::string bnd_out = "-";
  std::string bnd_schedule = "all";
  std::string bnd_trace;
  ParamFlags bnd_params;
  bnd_params.add(bnd, false);
  double bnd_alpha = 1.0;
  double bnd_zipf = 1.0;
  std::size_t bnd_horizon = 0;
  std::size_t bnd_samples = 10000;
  double bnd_rmax = -1.0;
  double bnd_rmax_coded = -1.0;
  bnd->add_option("--kind", bnd_kind, "t1 | t2 | t3 | stoch")
      ->capture_default_str()
      ->check(CLI::IsMember({"t1", "t2", "t3", "stoch"}));
  bnd->add_option("--trace", bnd_trace, "Take N, K, M and T from a trace file")->check(CLI::ExistingFile);
  bnd->add_option("--alpha", bnd_alpha, "Learning-rate scale")->capture_default_str()->check(CLI::PositiveNumber);
  bnd->add_option("-T,--horizon", bnd_horizon, "Horizon");
  bnd->add_option("--schedule", bnd_schedule, "all | every:<l> | file:<path>")->capture_default_str();
  bnd->add_option("--width-samples", bnd_samples, "Monte Carlo samples for the Gaussian width")
      ->capture_default_str();
  bnd->add_option("--r-max", bnd_rmax, "Per-slot rate ceiling (default K)");
  bnd->add_option("--r-max-coded", bnd_rmax_coded, "Coded rate ceiling (default K)");
  bnd->add_option("--zipf", bnd_zipf, "Zipf exponent of the stochastic preference")->capture_default_str();
  bnd->add_option("--out", bnd_out, "CSV file to write ('-' for stdout)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "occ: " << e.what() << '\n';
    return 2;
  }

  const std::string version = OCC_VERSION;

  if (ingest->parsed()) {
    ingest_opts.seed = seed;
    const auto trace = ingest_ratings(ingest_in, ingest_params.params(), ingest_opts);
    std::ostringstream text;
    format_trace(trace, text);
    write_text(ingest_out, text.str());
    std::cerr << "occ: wrote " << trace.horizon() << " slots\n";
    return 0;
  }

  if (gen_stoch->parsed()) {
    const auto params = gen_params.params();
    PreferenceProfile prefs;
    if (gen_dirichlet) {
      Rng rng(derive_stream(seed, 0xD1));
      prefs = random_dirichlet_preferences(params, rng);
    } else {
      prefs = zipf_preferences(params, gen_zipf);
    }
    std::ostringstream text;
    format_trace(gen_stochastic(prefs, params, gen_horizon, seed), text);
    write_text(gen_out, text.str());
    return 0;
  }

  if (gen_cycle->parsed()) {
    std::ostringstream text;
    format_trace(gen_adversarial_cycle(cycle_k, cycle_count), text);
    write_text(cycle_out, text.str());
    return 0;
  }

  if (sim->parsed()) {
    RunConfig cfg;
    cfg.policy = parse_policy_kind(sim_policy);
    cfg.alpha = sim_alpha;
    cfg.schedule = parse_schedule(sim_schedule);
    cfg.master_seed = seed;
    cfg.seeds = seed_range(sim_seeds);
    cfg.threads = sim_threads;
    cfg.cap = sim_cap;
    const auto trace = read_trace(sim_trace);
    if (sim_reference == "stochastic") {
      cfg.reference = Reference::Stochastic;
      cfg.prefs = zipf_preferences(trace.params, sim_zipf);
    }
    const auto result = run_simulation(trace, cfg);
    std::vector<std::string> comments{
        "occ " + version + " simulate",
        "policy=" + sim_policy + " alpha=" + format_real(sim_alpha) + " seeds=" + std::to_string(sim_seeds) +
            " master_seed=" + std::to_string(seed) + " schedule=" + sim_schedule,
        "reference=" + sim_reference +
            (cfg.reference == Reference::Stochastic ? " zipf=" + format_real(sim_zipf) : std::string()) +
            " cap=" + std::to_string(sim_cap),
        "trace=" + sim_trace + " N=" + std::to_string(trace.params.n_files) + " K=" +
            std::to_string(trace.params.n_users) + " M=" + std::to_string(trace.params.cache_size) +
            " T=" + std::to_string(trace.horizon()),
        "argv: " + join_args(argc, argv)};
    std::ostringstream text;
    write_csv({result}, text, comments);
    write_text(sim_out, text.str());
    return 0;
  }

  if (orc->parsed()) {
    const auto res = static_oracle(read_trace(orc_trace));
    std::cout << "best_config " << res.best_config.letters() << '\n'
              << "mask 0x" << res.best_config.hex() << '\n'
              << "cumulative " << format_real(res.best_cumulative) << '\n';
    return 0;
  }

  if (bnd->parsed()) {
    SystemParams params;
    Slot horizon = bnd_horizon;
    if (!bnd_trace.empty()) {
      const auto trace = read_trace(bnd_trace);
      params = trace.params;
      if (horizon == 0) horizon = trace.horizon();
    } else {
      if (bnd_params.n_files == 0 || bnd_params.n_users == 0 || bnd_params.cache_size == 0) {
        throw UsageError("bounds needs --trace or all of -N, -K, -M");
      }
      params = bnd_params.params();
    }
    if (horizon == 0 && bnd_kind != "stoch") throw UsageError("bounds needs -T/--horizon or --trace");
    double width = 0.0;
    std::string width_note;
    if (bnd_kind == "t1" || bnd_kind == "t3") {
      const auto w = gaussian_width_estimate(params, bnd_samples, derive_stream(seed, 0x6A));
      width = w.mean;
      width_note = "gaussian_width=" + format_real(w.mean) + " std_err=" + format_real(w.std_err) +
                   " samples=" + std::to_string(bnd_samples);
    }
    auto in = BoundInputs::defaults(params, bnd_alpha, width);
    if (bnd_rmax >= 0.0) in.r_max = bnd_rmax;
    if (bnd_rmax_coded >= 0.0) in.r_max_coded = bnd_rmax_coded;
    in.validate();
    const auto schedule = parse_schedule(bnd_schedule);
    std::ostringstream text;
    text << "# occ " << version << " bounds kind=" << bnd_kind << " alpha=" << format_real(bnd_alpha)
         << " N=" << params.n_files << " K=" << params.n_users << " M=" << params.cache_size << " T=" << horizon
         << " schedule=" << bnd_schedule << " r_max=" << format_real(in.r_max)
         << " r_max_coded=" << format_real(in.r_max_coded) << " seed=" << seed << '\n';
    if (!width_note.empty()) text << "# " << width_note << '\n';
    if (bnd_kind == "t1") {
      text << bound_csv(unrestricted_regret_bound(in, horizon));
    } else if (bnd_kind == "t2") {
      text << bound_csv(switching_bound(in, horizon));
    } else if (bnd_kind == "t3") {
      text << bound_csv(restricted_regret_curve(in, schedule, horizon));
    } else {
      const auto gaps = stochastic_oracle(zipf_preferences(params, bnd_zipf), params);
      const auto b = stochastic_bounds(gaps, in, schedule, horizon);
      text << "# zipf=" << format_real(bnd_zipf) << " oracle_config=" << gaps.oracle_config.hex()
           << " oracle_value=" << format_real(gaps.oracle_value) << '\n';
      text << "kind,regret,switches,restricted,beta\n";
      text << "stoch," << format_real(b.regret) << ',' << format_real(b.switches) << ','
           << (b.restricted ? format_real(*b.restricted) : std::string("nan")) << ',' << format_real(b.beta) << '\n';
    }
    write_text(bnd_out, text.str());
    return 0;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const occ::UsageError& e) {
    std::cerr << "occ: usage: " << e.what() << '\n';
    return 2;
  } catch (const occ::Error& e) {
    std::cerr << "occ: error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "occ: error: " << e.what() << '\n';
    return 1;
  }
}
