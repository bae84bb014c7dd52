#include "occ/traces.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string_view>

namespace occ {

void Trace::validate() const {
  params.validate();
  if (slots.empty()) throw DomainError("trace has no slots");
  for (const auto& r : slots) validate_profile(r, params);
}

std::vector<RequestPattern> Trace::patterns() const {
  std::vector<RequestPattern> out;
  out.reserve(slots.size());
  for (const auto& r : slots) out.push_back(profile_to_pattern(r, params));
  return out;
}

namespace {

std::string at(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line) + ": ";
}

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::vector<std::string_view> split_on(std::string_view line, std::string_view delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + delim.size();
  }
}

std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct RatingEvent {
  std::uint64_t virtual_user;
  std::int64_t item;
  std::int64_t timestamp;
};

}  // namespace

Trace ingest_ratings(std::istream& in, const SystemParams& params, const IngestOptions& opts,
                     const std::string& source) {
  params.validate();
  if (opts.delimiter.empty()) throw DomainError("ingest: delimiter must be non-empty");
  std::vector<RatingEvent> events;
  std::map<std::int64_t, std::size_t> item_counts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = strip_cr(line);
    if (view.empty()) continue;
    const auto fields = split_on(view, opts.delimiter);
    if (fields.size() != 4) {
      throw ParseError(at(source, line_no) + "expected 4 fields (user, item, rating, timestamp), got " +
                       std::to_string(fields.size()));
    }
    RatingEvent ev{};
    if (fields[0].empty()) throw ParseError(at(source, line_no) + "empty user id");
    if (!parse_int(fields[1], ev.item)) throw ParseError(at(source, line_no) + "item id is not an integer");
    if (!parse_int(fields[3], ev.timestamp)) throw ParseError(at(source, line_no) + "timestamp is not an integer");
    ev.virtual_user = fnv1a64(fields[0]) % params.n_users;
    ++item_counts[ev.item];
    events.push_back(ev);
  }
  if (in.bad()) throw IoError("ingest: read failure on " + source);

  std::vector<std::int64_t> qualifying;  // ascending, from the ordered map
  for (const auto& [item, count] : item_counts) {
    if (count >= opts.min_requests) qualifying.push_back(item);
  }
  if (qualifying.size() < params.n_files) {
    throw InsufficientDataError("ingest: insufficient catalog: " + std::to_string(qualifying.size()) +
                                " items have >= " + std::to_string(opts.min_requests) +
                                " events, need N=" + std::to_string(params.n_files));
  }
  Rng rng(opts.seed);
  for (std::size_t i = 0; i < params.n_files; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(qualifying.size() - i));
    std::swap(qualifying[i], qualifying[j]);
  }
  qualifying.resize(params.n_files);
  std::sort(qualifying.begin(), qualifying.end());

  std::vector<std::vector<RatingEvent>> streams(params.n_users);
  for (const auto& ev : events) {
    if (std::binary_search(qualifying.begin(), qualifying.end(), ev.item)) streams[ev.virtual_user].push_back(ev);
  }
  std::size_t horizon = events.size();
  for (std::size_t k = 0; k < streams.size(); ++k) {
    if (streams[k].empty()) {
      throw InsufficientDataError("ingest: insufficient users: virtual user " + std::to_string(k) +
                                  " has no events on the selected items");
    }
    std::stable_sort(streams[k].begin(), streams[k].end(),
                     [](const RatingEvent& a, const RatingEvent& b) { return a.timestamp < b.timestamp; });
    horizon = std::min(horizon, streams[k].size());
  }

  Trace trace;
  trace.params = params;
  trace.provenance = "ingest:" + source;
  trace.slots.resize(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    auto& r = trace.slots[t].requests;
    r.resize(params.n_users);
    for (std::size_t k = 0; k < params.n_users; ++k) {
      const auto it = std::lower_bound(qualifying.begin(), qualifying.end(), streams[k][t].item);
      r[k] = static_cast<FileIndex>(it - qualifying.begin());
    }
  }
  return trace;
}

Trace ingest_ratings(const std::string& path, const SystemParams& params, const IngestOptions& opts) {
  std::ifstream in(path);
  if (!in) throw IoError("ingest: cannot open " + path);
  return ingest_ratings(in, params, opts, path);
}

Trace gen_stochastic(const PreferenceProfile& prefs, const SystemParams& params, std::size_t horizon,
                     std::uint64_t seed) {
  prefs.validate(params);
  if (horizon < 1) throw DomainError("gen_stochastic: T must be >= 1");
  std::vector<std::vector<double>> cdf(params.n_users);
  std::vector<FileIndex> last_positive(params.n_users, 0);
  for (std::size_t k = 0; k < params.n_users; ++k) {
    const auto& p = prefs.per_user[k];
    cdf[k].resize(p.size());
    std::partial_sum(p.begin(), p.end(), cdf[k].begin());
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (p[j] > 0.0) last_positive[k] = static_cast<FileIndex>(j);
    }
  }
  Rng rng(seed);
  Trace trace;
  trace.params = params;
  trace.provenance = "stochastic:seed=" + std::to_string(seed);
  trace.slots.resize(horizon);
  for (auto& slot : trace.slots) {
    slot.requests.resize(params.n_users);
    for (std::size_t k = 0; k < params.n_users; ++k) {
      const double u = rng.unit();
      const auto it = std::upper_bound(cdf[k].begin(), cdf[k].end(), u);
      const auto j = static_cast<FileIndex>(it - cdf[k].begin());
      // u can exceed the rounded total mass; fall back to the last live file.
      slot.requests[k] = std::min(j, last_positive[k]);
    }
  }
  return trace;
}

Trace gen_adversarial_cycle(std::size_t k, std::size_t cycles) {
  if (k < 1 || cycles < 1) throw DomainError("gen_adversarial_cycle: need k >= 1 and cycles >= 1");
  Trace trace;
  trace.params = SystemParams{7, 4, 1};
  trace.provenance = "cycle:k=" + std::to_string(k) + ",cycles=" + std::to_string(cycles);
  trace.slots.reserve(cycles * (k + 1));
  for (std::size_t c = 0; c < cycles; ++c) {
    trace.slots.push_back(RequestProfile{{0, 4, 5, 6}});
    for (std::size_t i = 0; i < k; ++i) trace.slots.push_back(RequestProfile{{0, 1, 2, 3}});
  }
  return trace;
}

PreferenceProfile random_dirichlet_preferences(const SystemParams& params, Rng& rng) {
  params.validate();
  PreferenceProfile prefs;
  for (std::size_t k = 0; k < params.n_users; ++k) {
    std::vector<double> p(params.n_files);
    double sum = 0.0;
    for (auto& v : p) {
      v = -std::log1p(-rng.unit());  // Exp(1), i.e. Gamma(1)
      sum += v;
    }
    for (auto& v : p) v /= sum;
    prefs.per_user.push_back(std::move(p));
  }
  return prefs;
}

Trace parse_trace(std::istream& in, const std::string& source) {
  Trace trace;
  trace.provenance = "file:" + source;
  bool have_header = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = strip_cr(line);
    if (!view.empty() && view.front() == '#') continue;
    const auto tokens = split_ws(view);
    if (!have_header) {
      if (tokens.size() != 3) throw ParseError(at(source, line_no) + "header must be 'N K M'");
      auto& p = trace.params;
      if (!parse_int(tokens[0], p.n_files) || !parse_int(tokens[1], p.n_users) ||
          !parse_int(tokens[2], p.cache_size)) {
        throw ParseError(at(source, line_no) + "header fields must be non-negative integers");
      }
      try {
        p.validate();
      } catch (const DomainError& e) {
        throw ParseError(at(source, line_no) + e.what());
      }
      have_header = true;
      continue;
    }
    if (tokens.size() != trace.params.n_users) {
      throw ParseError(at(source, line_no) + "expected " + std::to_string(trace.params.n_users) +
                       " requests, got " + std::to_string(tokens.size()));
    }
    RequestProfile r;
    r.requests.resize(tokens.size());
    for (std::size_t k = 0; k < tokens.size(); ++k) {
      if (!parse_int(tokens[k], r.requests[k])) {
        throw ParseError(at(source, line_no) + "request " + std::to_string(k) + " is not an integer");
      }
      if (r.requests[k] >= trace.params.n_files) {
        throw ParseError(at(source, line_no) + "request index " + std::to_string(r.requests[k]) +
                         " out of range for N=" + std::to_string(trace.params.n_files));
      }
    }
    trace.slots.push_back(std::move(r));
  }
  if (in.bad()) throw IoError("trace: read failure on " + source);
  if (!have_header) throw ParseError(source + ": missing header");
  if (trace.slots.empty()) throw ParseError(source + ": trace has no slots");
  return trace;
}

Trace read_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("trace: cannot open " + path);
  return parse_trace(in, path);
}

void format_trace(const Trace& trace, std::ostream& out) {
  trace.validate();
  const auto& p = trace.params;
  out << p.n_files << ' ' << p.n_users << ' ' << p.cache_size << '\n';
  for (const auto& r : trace.slots) {
    for (std::size_t k = 0; k < r.requests.size(); ++k) {
      if (k > 0) out << ' ';
      out << r.requests[k];
    }
    out << '\n';
  }
}

void write_trace(const Trace& trace, const std::string& path) {
  std::ostringstream buf;
  format_trace(trace, buf);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("trace: cannot open " + path + " for writing");
  out << buf.str();
  out.close();
  if (!out) throw IoError("trace: write failure on " + path);
}

}  // namespace occ
