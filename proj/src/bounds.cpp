#include "occ/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

namespace occ {

namespace {

const double kSqrt2Pi = std::sqrt(2.0 * std::numbers::pi);
const double kSqrtPi = std::sqrt(std::numbers::pi);

void check_etas(const std::vector<double>& etas, Slot horizon) {
  if (etas.size() < horizon) throw DomainError("bounds: learning-rate sequence shorter than T");
  for (std::size_t i = 0; i < horizon; ++i) {
    if (!(etas[i] > 0.0)) throw DomainError("bounds: learning rates must be positive");
    if (i > 0 && etas[i] < etas[i - 1]) throw DomainError("bounds: learning rates must be non-decreasing");
  }
}

}  // namespace

BoundInputs BoundInputs::defaults(const SystemParams& params, double alpha, double gaussian_width) {
  params.validate();
  BoundInputs in;
  in.params = params;
  in.alpha = alpha;
  in.r_max = static_cast<double>(params.n_users);
  in.r_max_coded = in.r_max;
  in.cardinality = static_cast<double>(feasible_count(params));
  in.gaussian_width = gaussian_width;
  return in;
}

void BoundInputs::validate() const {
  params.validate();
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("bounds: alpha must be > 0");
  const double k = static_cast<double>(params.n_users);
  if (!(r_max_coded >= 0.0) || r_max_coded > r_max || r_max > k) {
    throw DomainError("bounds: need 0 <= r_max_coded <= r_max <= K");
  }
  if (!(cardinality >= 1.0)) throw DomainError("bounds: |S| must be >= 1");
  if (!std::isfinite(gaussian_width)) throw DomainError("bounds: Gaussian width must be finite");
}

WidthEstimate gaussian_width_estimate(const SystemParams& params, std::size_t samples, std::uint64_t seed,
                                      std::size_t cap) {
  params.validate();
  check_enumeration_cap(params, cap);
  if (samples < 100) throw DomainError("gaussian_width_estimate: need >= 100 samples");
  Rng rng(seed);
  const std::size_t m = params.cache_size;
  double mean = 0.0;
  double m2 = 0.0;
  std::vector<double> g;
  for (std::size_t i = 0; i < samples; ++i) {
    g = rng.normal_vector(params.n_files);
    std::sort(g.begin(), g.end(), std::greater<>());
    // The maximizer takes the top M entries and then every remaining positive one.
    double best = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (j < m || g[j] > 0.0) best += g[j];
    }
    const double delta = best - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (best - mean);
  }
  const double var = samples > 1 ? m2 / static_cast<double>(samples - 1) : 0.0;
  return {mean, std::sqrt(var / static_cast<double>(samples))};
}

std::string to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::Unrestricted: return "t1";
    case BoundKind::Switching: return "t2";
    case BoundKind::Restricted: return "t3";
    case BoundKind::Stochastic: return "stoch";
  }
  return "?";
}

BoundReport unrestricted_regret_bound(const BoundInputs& in, Slot horizon,
                                      const std::optional<std::vector<double>>& etas) {
  in.validate();
  if (etas) check_etas(*etas, horizon);
  const double k = static_cast<double>(in.params.n_users);
  const double ratio = static_cast<double>(in.params.cache_size) / static_cast<double>(in.params.n_files);
  const double others = in.cardinality - 1.0;
  const double stability_scale = k * k * std::max(ratio, 1.0 - ratio) / kSqrt2Pi;
  const auto eta = [&](Slot t) {
    return etas ? (*etas)[t - 1] : in.alpha * std::sqrt(static_cast<double>(t));
  };
  // sum 1/sqrt(i) for the default rate, sum 1/eta_i for a general schedule.
  const double switch_scale = etas ? std::sqrt(2.0) * in.r_max * in.r_max_coded * others / kSqrtPi
                                   : 3.0 * in.r_max * in.r_max_coded * others / (2.0 * kSqrt2Pi * in.alpha);
  BoundReport report;
  report.kind = BoundKind::Unrestricted;
  report.per_t.reserve(horizon);
  double sum_switch = 0.0;
  double sum_inv_eta = 0.0;
  for (Slot t = 1; t <= horizon; ++t) {
    sum_switch += etas ? 1.0 / eta(t) : 1.0 / std::sqrt(static_cast<double>(t));
    sum_inv_eta += 1.0 / eta(t);
    BoundPoint p;
    p.t = t;
    p.switching = switch_scale * sum_switch;
    p.width = eta(t) * in.gaussian_width;
    p.stability = stability_scale * sum_inv_eta;
    p.constant = eta(1) * in.gaussian_width + in.r_max_coded;
    p.value = p.switching + p.width + p.stability + p.constant;
    report.per_t.push_back(p);
  }
  return report;
}

BoundReport switching_bound(const BoundInputs& in, Slot horizon, SwitchingScale scale,
                            const std::optional<std::vector<double>>& etas) {
  in.validate();
  if (etas) check_etas(*etas, horizon);
  const double others = in.cardinality - 1.0;
  const double lead = scale == SwitchingScale::Users ? static_cast<double>(in.params.n_users) : in.r_max;
  const double coeff = etas ? 2.0 * in.r_max * others / kSqrt2Pi : 3.0 * lead * others / (2.0 * kSqrt2Pi * in.alpha);
  BoundReport report;
  report.kind = BoundKind::Switching;
  report.per_t.reserve(horizon);
  double sum = 0.0;
  for (Slot t = 1; t <= horizon; ++t) {
    sum += etas ? 1.0 / (*etas)[t - 1] : 1.0 / std::sqrt(static_cast<double>(t));
    BoundPoint p;
    p.t = t;
    p.switching = coeff * sum;
    p.value = p.switching;
    report.per_t.push_back(p);
  }
  return report;
}

namespace {

double gap_penalty(const BoundInputs& in, const std::vector<Slot>& boundaries) {
  const double coeff = 3.0 * in.r_max * in.r_max * (in.cardinality - 1.0) / (4.0 * in.alpha * kSqrtPi);
  double sum = 0.0;
  Slot prev = 0;
  for (Slot b : boundaries) {
    const double l = static_cast<double>(b - prev);
    sum += l * (l - 1.0) / std::sqrt(static_cast<double>(prev) + 1.0);
    prev = b;
  }
  return coeff * sum;
}

}  // namespace

RestrictedBound restricted_regret_bound(const BoundInputs& in, const SwitchSchedule& schedule, Slot horizon) {
  if (horizon < 1) throw DomainError("restricted bound: T must be >= 1");
  schedule.check_horizon(horizon);
  RestrictedBound out;
  out.unrestricted = unrestricted_regret_bound(in, horizon).per_t.back().value;
  out.gap_penalty = gap_penalty(in, schedule.boundaries(horizon));
  out.total = out.unrestricted + out.gap_penalty;
  return out;
}

BoundReport restricted_regret_curve(const BoundInputs& in, const SwitchSchedule& schedule, Slot horizon) {
  schedule.check_horizon(horizon);
  BoundReport report = unrestricted_regret_bound(in, horizon);
  report.kind = BoundKind::Restricted;
  const auto full = schedule.boundaries(horizon);
  std::vector<Slot> prefix;
  std::size_t next = 0;
  for (auto& p : report.per_t) {
    while (next < full.size() && full[next] <= p.t) ++next;
    prefix.assign(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(next));
    if (prefix.empty() || prefix.back() != p.t) prefix.push_back(p.t);
    p.constant += gap_penalty(in, prefix);
    p.value = p.switching + p.width + p.stability + p.constant;
  }
  return report;
}

StochasticBounds stochastic_bounds(const GapTable& gaps, const BoundInputs& in,
                                   const std::optional<SwitchSchedule>& schedule, Slot horizon) {
  in.validate();
  const auto& params = in.params;
  const double n = static_cast<double>(params.n_files);
  const double m = static_cast<double>(params.cache_size);
  const double k = static_cast<double>(params.n_users);
  StochasticBounds out;
  out.beta = in.alpha * in.alpha * std::max(m * m / n, (n - m) * (n - m) / n);
  const double rc2 = in.r_max_coded * in.r_max_coded;
  const double scale = rc2 + k * k + out.beta;
  std::vector<double> live;  // gaps of s != s*
  for (std::size_t i = 0; i < gaps.configs.size(); ++i) {
    if (gaps.configs[i] == gaps.oracle_config) continue;
    if (!(gaps.gaps[i] > kDegenerateGap)) {
      throw DegenerateGapError("stochastic bounds: config 0x" + gaps.configs[i].hex() +
                               " ties the oracle (gap " + std::to_string(gaps.gaps[i]) + ")");
    }
    live.push_back(gaps.gaps[i]);
  }
  for (double d : live) {
    out.regret += 64.0 / d * scale;
    out.switches += 64.0 / (d * d) * scale;
  }
  if (horizon >= 1) {
    const SwitchSchedule sched = schedule.value_or(SwitchSchedule::every_slot());
    sched.check_horizon(horizon);
    const auto bounds = sched.boundaries(horizon);
    double restricted = in.r_max * static_cast<double>(bounds.front());
    Slot prev = 0;
    for (Slot tk : bounds) {
      const double l = static_cast<double>(tk - prev);
      const double t = static_cast<double>(tk);
      for (double d : live) {
        const double d2 = d * d;
        restricted += 2.0 * l * d *
                      (std::exp(-t * d2 / (32.0 * rc2)) + std::exp(-t * d2 / (32.0 * k * k)) +
                       std::exp(-t * d2 / (32.0 * out.beta)));
      }
      prev = tk;
    }
    out.restricted = restricted;
  }
  return out;
}

}  // namespace occ
