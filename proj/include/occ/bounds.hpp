#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "occ/core.hpp"
#include "occ/oracle.hpp"
#include "occ/policies.hpp"

namespace occ {

struct BoundInputs {
  SystemParams params;
  double alpha = 1.0;
  double r_max = 0.0;        // per-slot rate ceiling
  double r_max_coded = 0.0;  // coded-part ceiling
  double cardinality = 0.0;  // |S|
  double gaussian_width = 0.0;

  // r_max = r_max_coded = K and |S| from feasible_count.
  static BoundInputs defaults(const SystemParams& params, double alpha, double gaussian_width);
  // alpha > 0 and r_max_coded <= r_max <= K.
  void validate() const;
};

struct WidthEstimate {
  double mean = 0.0;
  double std_err = 0.0;
};

// Monte Carlo E[max_{s feasible} <s, gamma>], gamma ~ N(0, I_N).
WidthEstimate gaussian_width_estimate(const SystemParams& params, std::size_t samples, std::uint64_t seed,
                                      std::size_t cap = kDefaultEnumerationCap);

enum class BoundKind { Unrestricted, Switching, Restricted, Stochastic };
std::string to_string(BoundKind kind);

// value = switching + width + stability + constant; unused parts are zero.
struct BoundPoint {
  Slot t = 0;
  double value = 0.0;
  double switching = 0.0;
  double width = 0.0;
  double stability = 0.0;
  double constant = 0.0;
};

struct BoundReport {
  BoundKind kind = BoundKind::Unrestricted;
  std::vector<BoundPoint> per_t;  // t = 1..T

  double at(Slot t) const { return per_t.at(t - 1).value; }
};

// Adversarial regret envelope for t = 1..T. Without `etas` the learning rate
// is alpha sqrt(t); with etas (eta_1..eta_T, positive, non-decreasing) the
// general-schedule form is used.
BoundReport unrestricted_regret_bound(const BoundInputs& in, Slot horizon,
                                      const std::optional<std::vector<double>>& etas = std::nullopt);

enum class SwitchingScale { Users, RMax };

// Expected switch count envelope. Users: 3K(|S|-1)/(2 sqrt(2 pi) alpha)
// sum 1/sqrt(t); RMax replaces K by r_max. With etas the general-schedule
// form 2 r_max (|S|-1)/sqrt(2 pi) sum 1/eta_t is used.
BoundReport switching_bound(const BoundInputs& in, Slot horizon, SwitchingScale scale = SwitchingScale::Users,
                            const std::optional<std::vector<double>>& etas = std::nullopt);

struct RestrictedBound {
  double unrestricted = 0.0;
  double gap_penalty = 0.0;
  double total = 0.0;
};

// Unrestricted bound at T plus sum_k 3 r_max^2 (|S|-1) l_k (l_k - 1) /
// (4 alpha sqrt(pi) sqrt(t_{k-1} + 1)).
RestrictedBound restricted_regret_bound(const BoundInputs& in, const SwitchSchedule& schedule, Slot horizon);

// Per-slot restricted envelope: at each t the schedule truncated to [1, t].
BoundReport restricted_regret_curve(const BoundInputs& in, const SwitchSchedule& schedule, Slot horizon);

struct StochasticBounds {
  double regret = 0.0;
  double switches = 0.0;
  std::optional<double> restricted;  // needs a horizon
  double beta = 0.0;
};

// Gaps below this (for s != s*) make the stochastic bounds meaningless.
inline constexpr double kDegenerateGap = 1e-12;

// Throws DegenerateGapError if a non-oracle config has a (near) zero gap.
// The restricted value is computed when horizon >= 1; the schedule defaults
// to every slot.
StochasticBounds stochastic_bounds(const GapTable& gaps, const BoundInputs& in,
                                   const std::optional<SwitchSchedule>& schedule = std::nullopt,
                                   Slot horizon = 0);

}  // namespace occ
