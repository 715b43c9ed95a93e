#include "fleetdim/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fleetdim/bounds.hpp"
#include "fleetdim/model.hpp"
#include "fleetdim/solver.hpp"

namespace fleetdim {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> normalized(std::vector<double> w, double total) {
  double sum = 0.0;
  for (double v : w) sum += v;
  for (double& v : w) v = total * v / sum;
  return w;
}

}  // namespace

const char* to_string(SocKind kind) {
  return kind == SocKind::decreasing ? "decreasing" : "gaussian";
}

const char* to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::optimal:
      return "optimal";
    case PolicyKind::always_charge:
      return "always_charge";
    default:
      return "equal_split";
  }
}

const char* to_string(SweepParameter parameter) {
  switch (parameter) {
    case SweepParameter::total_demand:
      return "total_demand";
    case SweepParameter::response_limit:
      return "T";
    case SweepParameter::class_count:
      return "n";
    default:
      return "C";
  }
}

std::vector<double> soc_distribution(SocKind kind, int class_count,
                                     double sigma_scale) {
  if (class_count < 1)
    throw ConfigError("charge class count must be at least 1");
  if (sigma_scale <= 0.0) throw ConfigError("sigma scale must be positive");
  const int n = class_count;
  std::vector<double> w(n);
  if (kind == SocKind::decreasing) {
    for (int i = 0; i < n; ++i) w[i] = static_cast<double>(n - i);
  } else {
    const double center = (n - 1) / 2.0;
    const double sigma = sigma_scale * n;
    for (int i = 0; i < n; ++i) {
      const double z = (i - center) / sigma;
      w[i] = std::exp(-0.5 * z * z);
    }
  }
  return normalized(std::move(w), 1.0);
}

std::vector<double> demand_distribution(double total, int class_count,
                                        double sigma_scale) {
  if (class_count < 1)
    throw ConfigError("charge class count must be at least 1");
  if (total < 0.0) throw ConfigError("total demand must be nonnegative");
  if (sigma_scale <= 0.0) throw ConfigError("sigma scale must be positive");
  const int n = class_count;
  std::vector<double> w(n);
  const double center = (n + 1) / 2.0;
  const double sigma = sigma_scale * n;
  for (int i = 1; i <= n; ++i) {
    const double z = (i - center) / sigma;
    w[i - 1] = std::exp(-0.5 * z * z);
  }
  return normalized(std::move(w), total);
}

DispatchPolicy baseline_policy(PolicyKind kind, int class_count) {
  if (class_count < 1)
    throw ConfigError("charge class count must be at least 1");
  switch (kind) {
    case PolicyKind::always_charge:
      return DispatchPolicy::uniform(class_count, 0.0);
    case PolicyKind::equal_split:
      return DispatchPolicy::uniform(class_count, 0.5);
    default:
      throw ConfigError("the optimal policy is computed, not a preset");
  }
}

std::optional<double> baseline_min_inflow(const ZoneConfig& zone,
                                          const DispatchPolicy& policy) {
  {
    const auto problems = validate_zone(zone);
    if (!problems.empty()) throw ConfigError(problems.front());
  }
  if (policy.size() != zone.class_count)
    throw ConfigError("policy length does not match class count");
  for (double v : policy.probs) {
    if (v < 0.0 || v > 1.0)
      throw ConfigError("dispatch probabilities must lie in [0,1]");
  }

  const int n = zone.class_count;
  const auto& p = zone.soc;
  const auto& q = policy.probs;
  const double inv_t = 1.0 / zone.response_limit;

  // With the policy frozen, every constraint is affine in the in-flow:
  // response constraints force it up, charging capacities cap it, so the
  // feasible set is the interval [low, high].
  double low = min_vehicle_inflow(zone);
  for (int i = 1; i <= n; ++i) {
    const double needed = zone.demand_rate(i) + inv_t;
    const double direct = i <= n - 1 ? p[i] * q[i] : p[0] * q[0];
    const double gain = p[i - 1] * (1.0 - q[i - 1]) + direct;
    if (gain <= 0.0) return std::nullopt;
    low = std::max(low, needed / gain);
  }

  const double pole_cap =
      zone.poles * n * zone.full_charge_rate - partial_charge_margin(zone);
  const double full_cap = zone.full_charge_rate - full_charge_margin(zone);
  double partial_share = 0.0;
  for (int i = 0; i < n; ++i) partial_share += p[i] * (1.0 - q[i]);
  const double full_share = p[0] * q[0];
  double high = kInf;
  if (partial_share > 0.0) high = std::min(high, pole_cap / partial_share);
  if (full_share > 0.0) high = std::min(high, full_cap / full_share);

  if (low > high) return std::nullopt;
  const FeasibilityReport rep = check_feasible(zone, low, policy);
  return rep.feasible ? std::optional<double>(low) : std::nullopt;
}

ZoneConfig make_zone(const ZoneTemplate& tpl, int poles,
                     int class_count_override) {
  if (tpl.total_demand < 0.0)
    throw ConfigError("total demand must be nonnegative");
  if (tpl.response_limit <= 0.0)
    throw ConfigError("response limit must be positive");
  if (tpl.full_charge_rate <= 0.0)
    throw ConfigError("full charge rate must be positive");
  if (poles < 1) throw ConfigError("pole count must be at least 1");
  if (class_count_override < 0)
    throw ConfigError("class count override must be positive when given");

  int n = class_count_override;
  if (n == 0) {
    const auto chosen =
        optimal_class_count(tpl.total_demand, tpl.response_limit, poles,
                            tpl.full_charge_rate);
    if (!chosen) {
      throw InfeasibleError(
          "no class count can keep charging stable for this zone");
    }
    n = *chosen;
  }

  ZoneConfig zone;
  zone.class_count = n;
  zone.response_limit = tpl.response_limit;
  zone.poles = poles;
  zone.full_charge_rate = tpl.full_charge_rate;
  zone.soc = soc_distribution(tpl.soc_kind, n, tpl.soc_sigma_scale);
  zone.demand = demand_distribution(tpl.total_demand, n,
                                    tpl.demand_sigma_scale);
  return zone;
}

std::vector<SweepRow> sweep(const SweepSpec& spec) {
  if (spec.grid.empty()) throw ConfigError("sweep grid must not be empty");
  const bool integral = spec.parameter == SweepParameter::class_count ||
                        spec.parameter == SweepParameter::poles;
  for (double v : spec.grid) {
    if (!(v > 0.0)) throw ConfigError("sweep grid values must be positive");
    if (integral && v != std::floor(v))
      throw ConfigError("class and pole counts must be whole numbers");
  }

  std::vector<SweepRow> rows;
  rows.reserve(spec.grid.size());
  for (double value : spec.grid) {
    ZoneTemplate tpl = spec.base;
    int poles = spec.poles;
    int override_n = 0;
    switch (spec.parameter) {
      case SweepParameter::total_demand:
        tpl.total_demand = value;
        break;
      case SweepParameter::response_limit:
        tpl.response_limit = value;
        break;
      case SweepParameter::class_count:
        override_n = static_cast<int>(std::llround(value));
        break;
      case SweepParameter::poles:
        poles = static_cast<int>(std::llround(value));
        break;
    }

    SweepRow row;
    row.value = value;
    try {
      const ZoneConfig zone = make_zone(tpl, poles, override_n);
      row.classes = zone.class_count;
      row.bound = min_vehicle_inflow(zone);
      if (spec.policy_kind == PolicyKind::optimal) {
        const DimensionResult res = dimension(zone);
        row.feasible = true;
        row.min_inflow = res.min_inflow;
        row.candidate_was_feasible = res.candidate_was_feasible;
        row.policy = res.policy;
      } else {
        row.policy = baseline_policy(spec.policy_kind, zone.class_count);
        if (const auto inflow = baseline_min_inflow(zone, row.policy)) {
          row.feasible = true;
          row.min_inflow = *inflow;
        }
      }
    } catch (const InfeasibleError&) {
      // row already marked infeasible; keep sweeping
    }
    rows.push_back(std::move(row));
  }

  std::stable_sort(rows.begin(), rows.end(),
                   [](const SweepRow& a, const SweepRow& b) {
                     return a.value < b.value;
                   });
  return rows;
}

std::optional<double> max_transient_response(const ZoneConfig& zone,
                                             double inflow, int poles) {
  {
    const auto problems = validate_zone(zone);
    if (!problems.empty()) throw ConfigError(problems.front());
  }
  if (inflow <= 0.0) throw ConfigError("in-flow must be positive");
  if (poles < 1) throw ConfigError("pole count must be at least 1");

  const double total = zone.total_demand();
  if (inflow <= total) return std::nullopt;  // demand alone exceeds supply

  ZoneConfig probe = zone;
  probe.poles = poles;
  auto feasible_at = [&](double limit) {
    probe.response_limit = limit;
    return detail::inflow_admits_policy(probe, inflow);
  };

  // No limit below n/(inflow - demand) can work: summing the response
  // constraints leaves inflow >= demand + n/limit regardless of policy.
  const double floor_limit = zone.class_count / (inflow - total);
  if (feasible_at(floor_limit)) return floor_limit;

  double hi = floor_limit;
  do {
    hi *= 2.0;
    if (hi > 1e12) return std::nullopt;
  } while (!feasible_at(hi));
  double lo = hi / 2.0;
  while (hi - lo > 1e-9 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (feasible_at(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

std::vector<RestorationRow> restoration_inflow(
    const ZoneConfig& zone, const std::vector<int>& poles_grid) {
  {
    const auto problems = validate_zone(zone);
    if (!problems.empty()) throw ConfigError(problems.front());
  }
  if (poles_grid.empty()) throw ConfigError("pole grid must not be empty");
  for (int c : poles_grid) {
    if (c < 1) throw ConfigError("pole counts must be at least 1");
  }

  std::vector<int> grid = poles_grid;
  std::sort(grid.begin(), grid.end());

  const double total = zone.total_demand();
  const double inv_t = 1.0 / zone.response_limit;
  std::vector<RestorationRow> rows;
  rows.reserve(2 * grid.size());

  for (SocKind kind : {SocKind::decreasing, SocKind::gaussian}) {
    ZoneTemplate tpl;
    tpl.total_demand = total;
    tpl.response_limit = zone.response_limit;
    tpl.full_charge_rate = zone.full_charge_rate;
    tpl.soc_kind = kind;

    // The charging-stability minimum is where the count search starts, not
    // where it ends: with few poles the minimal count is often the worst
    // admissible one (capacity scales with C*n), so each row scans upward
    // for the count that actually minimizes the in-flow. Carrying the
    // previous row's winner keeps the column non-increasing: more poles
    // never hurt at a fixed count.
    int hint = 0;
    for (int poles : grid) {
      RestorationRow row;
      row.poles = poles;
      row.soc_kind = kind;
      const auto floor_count = optimal_class_count(
          total, zone.response_limit, poles, zone.full_charge_rate);
      if (floor_count) {
        double best = kInf;
        int best_n = 0;
        const auto probe = [&](int n) {
          if (total + n * inv_t >= best) return;  // bound alone rules it out
          try {
            const DimensionResult res = dimension(make_zone(tpl, poles, n));
            if (res.min_inflow < best) {
              best = res.min_inflow;
              best_n = n;
            }
          } catch (const InfeasibleError&) {
            // this count cannot carry the zone; neighbors may
          }
        };

        constexpr int kPatience = 8;
        int last_win = *floor_count;
        for (int n = *floor_count; n - std::max(last_win, hint) <= kPatience;
             ++n) {
          if (total + n * inv_t >= best) break;
          probe(n);
          if (best_n == n) last_win = n;
          if (n - *floor_count > 4096) break;
        }
        if (hint >= *floor_count) probe(hint);

        row.classes = best_n > 0 ? best_n : *floor_count;
        if (best_n > 0) {
          row.feasible = true;
          row.min_inflow = best;
          hint = best_n;
        }
      }
      rows.push_back(row);
    }
  }

  std::stable_sort(rows.begin(), rows.end(),
                   [](const RestorationRow& a, const RestorationRow& b) {
                     if (a.poles != b.poles) return a.poles < b.poles;
                     return static_cast<int>(a.soc_kind) <
                            static_cast<int>(b.soc_kind);
                   });
  return rows;
}

}  // namespace fleetdim
