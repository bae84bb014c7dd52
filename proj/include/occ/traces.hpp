#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "occ/core.hpp"
#include "occ/preferences.hpp"
#include "occ/random.hpp"

namespace occ {

struct Trace {
  SystemParams params;
  std::vector<RequestProfile> slots;  // r_1 .. r_T
  std::string provenance;             // not persisted by write_trace

  std::size_t horizon() const { return slots.size(); }
  // Throws unless T >= 1 and every profile is valid against params.
  void validate() const;
  std::vector<RequestPattern> patterns() const;
};

struct IngestOptions {
  std::string delimiter = "::";
  std::size_t min_requests = 1;
  std::uint64_t seed = 0;
};

// Ratings log (user, item, rating, timestamp) to a trace of N items and K
// virtual users. Slot t pairs the t-th event of every virtual user; T is the
// shortest virtual-user stream.
Trace ingest_ratings(const std::string& path, const SystemParams& params, const IngestOptions& opts);
Trace ingest_ratings(std::istream& in, const SystemParams& params, const IngestOptions& opts,
                     const std::string& source = "<stream>");

// r_t^k drawn independently from prefs.per_user[k].
Trace gen_stochastic(const PreferenceProfile& prefs, const SystemParams& params, std::size_t horizon,
                     std::uint64_t seed);

// N=7, K=4, M=1; each cycle is one slot (A,E,F,G) then k slots (A,B,C,D).
Trace gen_adversarial_cycle(std::size_t k, std::size_t cycles);

// Independent Dirichlet(1, ..., 1) vector per user.
PreferenceProfile random_dirichlet_preferences(const SystemParams& params, Rng& rng);

// Text format: "N K M" header, then one line of K zero-based indices per
// slot. Lines starting with '#' are skipped on read; write emits none.
Trace parse_trace(std::istream& in, const std::string& source = "<stream>");
Trace read_trace(const std::string& path);
void format_trace(const Trace& trace, std::ostream& out);
void write_trace(const Trace& trace, const std::string& path);

}  // namespace occ
