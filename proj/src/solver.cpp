#include "fleetdim/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "fleetdim/bounds.hpp"
#include "fleetdim/model.hpp"

namespace fleetdim {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBoxTol = 1e-12;

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

struct CapLimits {
  double partial_raw = 0.0;  // C*n*mu_c
  double full_raw = 0.0;     // mu_c
  double partial = 0.0;      // raw minus strictness margin
  double full = 0.0;
};

CapLimits cap_limits(const ZoneConfig& zone) {
  CapLimits c;
  c.partial_raw = static_cast<double>(zone.poles) * zone.class_count *
                  zone.full_charge_rate;
  c.full_raw = zone.full_charge_rate;
  c.partial = c.partial_raw - partial_charge_margin(zone);
  c.full = c.full_raw - full_charge_margin(zone);
  return c;
}

// Works in flow space: d_i = inflow*p_i*q_i is the direct-dispatch flow of
// class i (d_0 the central-station flow), which makes every constraint
// affine. For a given d_0 the admissible (d_1..d_{n-1}) form a lattice
// between a minimal chain (forward pass, lower bounds) and a maximal chain
// (backward pass, upper bounds); the point is feasible iff the chains do
// not cross and the maximal chain carries enough total flow to unload the
// partial-charging poles. The returned margin is the smallest of those
// gaps; it is concave in d_0, which the window search below relies on.
double completion_margin(const ZoneConfig& zone, double inflow, double d0,
                         std::vector<double>* chain_out, double* sum_out) {
  const int n = zone.class_count;
  const auto& p = zone.soc;
  const CapLimits cl = cap_limits(zone);
  const double inv_limit = 1.0 / zone.response_limit;

  if (n == 1) {
    // The single class is fed by the whole in-flow regardless of d0; d0
    // only shifts load between the two charging facilities.
    double margin = inflow - (zone.demand[0] + inv_limit);
    margin = std::min(margin, d0 + cl.partial - inflow);
    if (chain_out) chain_out->clear();
    if (sum_out) *sum_out = 0.0;
    return margin;
  }

  std::vector<double> lo(n - 1), hi(n - 1);
  {
    double running = d0;
    for (int i = 1; i <= n - 1; ++i) {
      const double delta =
          (zone.demand[i - 1] + inv_limit) - inflow * p[i - 1];
      running = std::max(0.0, running + delta);
      lo[i - 1] = running;
    }
  }
  {
    const double delta_last =
        (zone.demand[n - 1] + inv_limit) - inflow * p[n - 1];
    double running = d0 - delta_last;
    for (int i = n - 1; i >= 1; --i) {
      running = std::min(inflow * p[i], running);
      hi[i - 1] = running;
      if (i >= 2) {
        running -= (zone.demand[i - 1] + inv_limit) - inflow * p[i - 1];
      }
    }
  }

  double margin = kInf;
  double total = 0.0;
  for (int k = 0; k < n - 1; ++k) {
    margin = std::min(margin, hi[k] - lo[k]);
    total += hi[k];
  }
  margin = std::min(margin, d0 + total + cl.partial - inflow);
  if (chain_out) *chain_out = hi;
  if (sum_out) *sum_out = total;
  return margin;
}

// Concave-maximization of the completion margin over the admissible d0 box.
double max_completion_margin(const ZoneConfig& zone, double inflow,
                             double* d0_out) {
  const CapLimits cl = cap_limits(zone);
  const double ub = std::max(0.0, std::min(cl.full, inflow * zone.soc[0]));
  double a = 0.0, b = ub;
  for (int it = 0; it < 160 && b - a > 0.0; ++it) {
    const double m1 = a + (b - a) / 3.0;
    const double m2 = b - (b - a) / 3.0;
    if (completion_margin(zone, inflow, m1, nullptr, nullptr) <
        completion_margin(zone, inflow, m2, nullptr, nullptr)) {
      a = m1;
    } else {
      b = m2;
    }
  }
  const double mid = 0.5 * (a + b);
  if (d0_out) *d0_out = mid;
  return completion_margin(zone, inflow, mid, nullptr, nullptr);
}

double needed_rate(const ZoneConfig& zone, int customer_class) {
  return zone.demand[customer_class - 1] + 1.0 / zone.response_limit;
}

// Smallest in-flow at which the response constraints hold for this fixed
// policy (charging loads only shrink when the in-flow drops).
double min_inflow_for_policy(const ZoneConfig& zone,
                             const DispatchPolicy& q) {
  const int n = zone.class_count;
  const auto& p = zone.soc;
  double lowest = 0.0;
  for (int j = 1; j <= n; ++j) {
    const double direct =
        (j <= n - 1) ? p[j] * q.probs[j] : p[0] * q.probs[0];
    const double gain = p[j - 1] * (1.0 - q.probs[j - 1]) + direct;
    const double needed = needed_rate(zone, j);
    if (gain <= 0.0) return kInf;
    lowest = std::max(lowest, needed / gain);
  }
  return lowest;
}

struct EdgeSearch {
  double inflow = 0.0;
  double d0 = 0.0;
  bool feasible = false;
};

// Lower edge of the feasible in-flow interval inside [lo_infeasible, hi
// feasible], resolved to 1e-9 relative, keeping the feasible endpoint.
EdgeSearch bisect_inflow_edge(const ZoneConfig& zone, double lo, double hi,
                              double hi_d0, int* probes) {
  while (hi - lo > 1e-9 * hi) {
    const double mid = 0.5 * (lo + hi);
    double d0 = 0.0;
    if (probes) ++*probes;
    if (max_completion_margin(zone, mid, &d0) >= 0.0) {
      hi = mid;
      hi_d0 = d0;
    } else {
      lo = mid;
    }
  }
  return {hi, hi_d0, true};
}

// Locates the feasible in-flow interval at or above `start` by maximizing
// the (concave) feasibility margin over the in-flow, then bisecting the
// lower edge. Empty result when no in-flow up to the cap is feasible.
EdgeSearch lowest_feasible_inflow(const ZoneConfig& zone, double start,
                                  int* probes) {
  const CapLimits cl = cap_limits(zone);
  double hi = 1e6 * start;
  if (zone.soc[0] > 0.0) {
    // Any feasible point keeps at least inflow*p0 - cap_full on the poles.
    hi = std::min(hi, (cl.partial + cl.full) / zone.soc[0] * (1.0 + 1e-12));
  }
  if (hi < start) hi = start;

  double d0_start = 0.0;
  if (probes) ++*probes;
  if (max_completion_margin(zone, start, &d0_start) >= 0.0) {
    return {start, d0_start, true};
  }

  double a = start, b = hi;
  for (int it = 0; it < 200 && b - a > 0.0; ++it) {
    const double m1 = a + (b - a) / 3.0;
    const double m2 = b - (b - a) / 3.0;
    if (probes) *probes += 2;
    if (max_completion_margin(zone, m1, nullptr) <
        max_completion_margin(zone, m2, nullptr)) {
      a = m1;
    } else {
      b = m2;
    }
  }
  const double peak = 0.5 * (a + b);
  double d0_peak = 0.0;
  if (probes) ++*probes;
  if (max_completion_margin(zone, peak, &d0_peak) < 0.0) {
    return {0.0, 0.0, false};
  }
  return bisect_inflow_edge(zone, start, peak, d0_peak, probes);
}

// One coordinate-descent move: reposition q[i] inside its feasible interval
// to maximize the smallest relative margin of the constraints it touches.
void reposition(const ZoneConfig& zone, double inflow, DispatchPolicy& q,
                int i) {
  const int n = zone.class_count;
  const auto& p = zone.soc;
  if (p[i] <= 0.0 || inflow <= 0.0) return;
  const CapLimits cl = cap_limits(zone);

  struct Aff {
    double c0, c1, scale;  // margin(x) = (c0 + c1*x) / scale
  };
  std::vector<Aff> margins;
  double lo = 0.0, hi = 1.0;

  if (n >= 2) {
    const int fed = (i >= 1) ? i : n;
    const int drained = (i >= 1) ? i + 1 : 1;

    const double base_fed =
        inflow * p[fed - 1] * (1.0 - q.probs[fed - 1]);
    const double needed_fed = needed_rate(zone, fed);
    margins.push_back({base_fed - needed_fed, inflow * p[i], needed_fed});
    lo = std::max(lo, (needed_fed - base_fed) / (inflow * p[i]));

    const double feed_term = (drained <= n - 1)
                                 ? p[drained] * q.probs[drained]
                                 : p[0] * q.probs[0];
    const double needed_dr = needed_rate(zone, drained);
    margins.push_back({inflow * (p[i] + feed_term) - needed_dr,
                       -inflow * p[i], needed_dr});
    hi = std::min(hi,
                  (inflow * (p[i] + feed_term) - needed_dr) / (inflow * p[i]));
  }

  double partial_other = 0.0;
  for (int k = 0; k < n; ++k) {
    if (k != i) partial_other += p[k] * (1.0 - q.probs[k]);
  }
  margins.push_back({cl.partial_raw - inflow * (partial_other + p[i]),
                     inflow * p[i], cl.partial_raw});
  lo = std::max(lo, 1.0 - (cl.partial / inflow - partial_other) / p[i]);

  if (i == 0) {
    margins.push_back({cl.full_raw, -inflow * p[0], cl.full_raw});
    hi = std::min(hi, cl.full / (inflow * p[0]));
  }

  if (!(lo <= hi)) return;

  auto score = [&](double x) {
    double s = kInf;
    for (const Aff& m : margins) s = std::min(s, (m.c0 + m.c1 * x) / m.scale);
    return s;
  };
  double best_x = lo;
  double best_s = score(lo);
  auto consider = [&](double x) {
    if (x < lo || x > hi) return;
    const double s = score(x);
    if (s > best_s + 1e-15) {
      best_s = s;
      best_x = x;
    } else if (s >= best_s - 1e-15 && x < best_x) {
      best_x = x;  // deterministic tie-break toward smaller q
    }
  };
  consider(hi);
  for (size_t a = 0; a < margins.size(); ++a) {
    for (size_t b = a + 1; b < margins.size(); ++b) {
      const double sa = margins[a].c1 / margins[a].scale;
      const double sb = margins[b].c1 / margins[b].scale;
      if (sa == sb) continue;
      const double x = (margins[b].c0 / margins[b].scale -
                        margins[a].c0 / margins[a].scale) /
                       (sa - sb);
      consider(x);
    }
  }
  q.probs[i] = clamp01(best_x);
}

std::pair<double, DispatchPolicy> improve_impl(const ZoneConfig& zone,
                                               double inflow,
                                               DispatchPolicy q,
                                               int* probes) {
  const int n = zone.class_count;
  if (q.size() != n)
    throw ConfigError("policy length does not match class count");
  const double bound = min_vehicle_inflow(zone);
  double lam = std::max(inflow, 0.0);
  for (auto& v : q.probs) v = clamp01(v);

  if (!check_feasible(zone, lam, q).feasible) {
    const EdgeSearch restored =
        lowest_feasible_inflow(zone, std::max(lam, bound), probes);
    if (!restored.feasible) {
      throw InfeasibleError(
          "no stable vehicle in-flow exists for this zone within 1e6x the "
          "dimensioning lower bound");
    }
    lam = restored.inflow;
    auto cert = detail::complete_policy(zone, lam, restored.d0);
    if (cert) q = *cert;
  }

  for (int sweep = 0; sweep < 500; ++sweep) {
    const double before = lam;
    for (int i = 0; i < n; ++i) reposition(zone, lam, q, i);
    const double target = std::max(bound, min_inflow_for_policy(zone, q));
    if (target < lam) lam = target;

    if (before - lam < 1e-9 * std::max(1.0, lam)) {
      // Coordinate moves stalled; jump to the exact lower edge of the
      // feasible in-flow interval below the current point, if it helps.
      if (probes) ++*probes;
      double d0_cur = 0.0;
      if (max_completion_margin(zone, lam, &d0_cur) < 0.0) break;
      double d0_b = 0.0;
      if (probes) ++*probes;
      EdgeSearch edge;
      if (max_completion_margin(zone, bound, &d0_b) >= 0.0) {
        edge = {bound, d0_b, true};
      } else {
        edge = bisect_inflow_edge(zone, bound, lam, d0_cur, probes);
      }
      if (lam - edge.inflow >= 1e-9 * std::max(1.0, lam)) {
        auto cert = detail::complete_policy(zone, edge.inflow, edge.d0);
        if (cert) {
          lam = edge.inflow;
          q = *cert;
          continue;
        }
      }
      break;
    }
  }

  if (!check_feasible(zone, lam, q).feasible) {
    // Rounding pushed the point a hair outside; re-certify, nudging the
    // in-flow upward if needed.
    for (int attempt = 0; attempt < 64; ++attempt) {
      double d0 = 0.0;
      if (probes) ++*probes;
      if (max_completion_margin(zone, lam, &d0) >= 0.0) {
        auto cert = detail::complete_policy(zone, lam, d0);
        if (cert && check_feasible(zone, lam, *cert).feasible) {
          q = *cert;
          break;
        }
      }
      lam *= 1.0 + 1e-12;
    }
  }
  return {lam, q};
}

}  // namespace

namespace detail {

FlowWindow flow_window(const ZoneConfig& zone, double inflow) {
  FlowWindow win;
  const CapLimits cl = cap_limits(zone);
  const double ub = std::max(0.0, std::min(cl.full, inflow * zone.soc[0]));

  double d0_peak = 0.0;
  if (max_completion_margin(zone, inflow, &d0_peak) < 0.0) return win;
  win.feasible = true;

  auto margin_at = [&](double d0) {
    return completion_margin(zone, inflow, d0, nullptr, nullptr);
  };
  const double tol = 1e-12 * std::max(1.0, ub);

  if (margin_at(0.0) >= 0.0) {
    win.d0_low = 0.0;
  } else {
    double bad = 0.0, good = d0_peak;
    while (good - bad > tol) {
      const double mid = 0.5 * (bad + good);
      (margin_at(mid) >= 0.0 ? good : bad) = mid;
    }
    win.d0_low = good;
  }
  if (margin_at(ub) >= 0.0) {
    win.d0_high = ub;
  } else {
    double good = d0_peak, bad = ub;
    while (bad - good > tol) {
      const double mid = 0.5 * (good + bad);
      (margin_at(mid) >= 0.0 ? good : bad) = mid;
    }
    win.d0_high = good;
  }

  // Tie-break: maximize the smaller of the two raw station margins. The
  // full-charge margin falls with d0 while the pole margin (evaluated at
  // the maximal completion) rises, so the optimum is at the crossing or at
  // a window edge.
  auto pole_margin = [&](double d0) {
    double total = 0.0;
    completion_margin(zone, inflow, d0, nullptr, &total);
    return cl.partial_raw - (inflow - d0 - total);
  };
  auto full_margin = [&](double d0) { return cl.full_raw - d0; };
  if (full_margin(win.d0_low) <= pole_margin(win.d0_low)) {
    win.d0_best = win.d0_low;
  } else if (full_margin(win.d0_high) >= pole_margin(win.d0_high)) {
    win.d0_best = win.d0_high;
  } else {
    double a = win.d0_low, b = win.d0_high;
    while (b - a > tol) {
      const double mid = 0.5 * (a + b);
      (full_margin(mid) >= pole_margin(mid) ? a : b) = mid;
    }
    win.d0_best = 0.5 * (a + b);
    if (completion_margin(zone, inflow, win.d0_best, nullptr, nullptr) <
        0.0) {
      win.d0_best = a;  // keep a certified-feasible point
    }
  }
  return win;
}

std::optional<DispatchPolicy> complete_policy(const ZoneConfig& zone,
                                              double inflow, double d0) {
  const int n = zone.class_count;
  const auto& p = zone.soc;
  std::vector<double> chain;
  if (completion_margin(zone, inflow, d0, &chain, nullptr) < 0.0) {
    return std::nullopt;
  }
  DispatchPolicy q;
  q.probs.resize(n);
  q.probs[0] = p[0] > 0.0 ? clamp01(d0 / (inflow * p[0])) : 0.5;
  for (int i = 1; i <= n - 1; ++i) {
    q.probs[i] = p[i] > 0.0 ? clamp01(chain[i - 1] / (inflow * p[i])) : 0.0;
  }
  return q;
}

bool inflow_admits_policy(const ZoneConfig& zone, double inflow) {
  return max_completion_margin(zone, inflow, nullptr) >= 0.0;
}

}  // namespace detail

std::optional<DispatchPolicy> kkt_chain_candidate(const ZoneConfig& zone,
                                                  double inflow, double q0) {
  const int n = zone.class_count;
  const auto& p = zone.soc;
  if (inflow <= 0.0) throw ConfigError("in-flow must be positive");
  if (q0 < -kBoxTol || q0 > 1.0 + kBoxTol)
    throw ConfigError("q0 must lie in [0,1]");

  DispatchPolicy q;
  q.probs.resize(n);
  q.probs[0] = clamp01(q0);
  const double inv_limit = 1.0 / zone.response_limit;
  for (int i = 1; i <= n - 1; ++i) {
    // Each step holds the class-i response constraint with equality: the
    // direct dispatch of class i tops up whatever the class-(i-1) partial
    // chargers do not supply.
    const double carry = p[i - 1] * q.probs[i - 1] - p[i - 1];
    const double needed = zone.demand[i - 1] + inv_limit;
    if (p[i] > 0.0) {
      const double qi = carry / p[i] + needed / (inflow * p[i]);
      // Above 1 the class cannot be fed even with every class-i arrival
      // dispatching, so no completion passes through this q0. Below 0 the
      // carry flow alone overfeeds the class; the constraint then holds
      // with slack at the box edge instead of with equality.
      if (qi > 1.0 + kBoxTol) return std::nullopt;
      q.probs[i] = clamp01(qi);
    } else {
      // No class-i arrivals: the class-(i-1) partial flow alone must cover
      // the class; otherwise no completion through this class exists.
      if (-inflow * carry < needed - slack_tolerance(needed))
        return std::nullopt;
      q.probs[i] = 0.0;
    }
  }
  return q;
}

std::optional<double> select_q0(const ZoneConfig& zone, double inflow) {
  if (inflow <= 0.0) throw ConfigError("in-flow must be positive");
  const auto win = detail::flow_window(zone, inflow);
  if (!win.feasible) return std::nullopt;
  if (zone.soc[0] <= 0.0) return 0.5;
  return clamp01(win.d0_best / (inflow * zone.soc[0]));
}

FeasibilityReport check_feasible(const ZoneConfig& zone, double inflow,
                                 const DispatchPolicy& policy) {
  FeasibilityReport report = check_stability(zone, policy, inflow);
  report.inflow_bound_slack = min_vehicle_inflow(zone) - inflow;
  report.feasible = slacks_within_tolerance(report, zone);
  return report;
}

DimensionResult dimension(const ZoneConfig& zone) {
  {
    const auto problems = validate_zone(zone);
    if (!problems.empty()) {
      std::ostringstream msg;
      for (size_t k = 0; k < problems.size(); ++k) {
        if (k) msg << "; ";
        msg << problems[k];
      }
      throw ConfigError(msg.str());
    }
  }
  const auto n_min =
      min_class_count(zone.total_demand(), zone.response_limit, zone.poles,
                      zone.full_charge_rate);
  if (!n_min) {
    throw InfeasibleError(
        "charging can never keep up with this demand at any class count "
        "(pole capacity per response window does not exceed one vehicle)");
  }
  if (zone.class_count < *n_min) {
    std::ostringstream msg;
    msg << "class count " << zone.class_count
        << " is below the dimensioning minimum " << *n_min
        << " for this zone";
    throw InfeasibleError(msg.str());
  }

  int probes = 0;
  const double bound = min_vehicle_inflow(zone);

  // Candidate at the lower bound: there every response constraint is forced
  // tight, so the chain completion is the only possible policy shape.
  ++probes;
  const auto win0 = detail::flow_window(zone, bound);
  if (win0.feasible) {
    const double q0 =
        zone.soc[0] > 0.0 ? clamp01(win0.d0_best / (bound * zone.soc[0]))
                          : 0.5;
    auto cand = kkt_chain_candidate(zone, bound, q0);
    if (!cand) cand = detail::complete_policy(zone, bound, win0.d0_best);
    if (cand) {
      const auto report = check_feasible(zone, bound, *cand);
      if (report.feasible) {
        return {bound, *cand, report, true, probes};
      }
    }
  }

  // The candidate failed, so the optimum sits strictly above the bound.
  const EdgeSearch edge = lowest_feasible_inflow(zone, bound, &probes);
  if (!edge.feasible) {
    throw InfeasibleError(
        "no stable vehicle in-flow exists for this zone within 1e6x the "
        "dimensioning lower bound");
  }

  auto cert = detail::complete_policy(zone, edge.inflow, edge.d0);
  double lam = edge.inflow;
  DispatchPolicy policy =
      cert ? *cert : DispatchPolicy::uniform(zone.class_count, 0.0);
  auto polished = improve_impl(zone, lam, policy, &probes);
  if (polished.first <= lam) {
    lam = polished.first;
    policy = polished.second;
  }

  auto report = check_feasible(zone, lam, policy);
  for (int attempt = 0; attempt < 64 && !report.feasible; ++attempt) {
    lam *= 1.0 + 1e-12;
    ++probes;
    double d0 = 0.0;
    if (max_completion_margin(zone, lam, &d0) >= 0.0) {
      if (auto fixed = detail::complete_policy(zone, lam, d0)) {
        policy = *fixed;
      }
    }
    report = check_feasible(zone, lam, policy);
  }
  return {lam, policy, report, lam == bound, probes};
}

double lagrangian(const ZoneConfig& zone, const DispatchPolicy& policy,
                  double inflow, const Multipliers& m) {
  const int n = zone.class_count;
  const auto& p = zone.soc;
  const auto& q = policy.probs;
  if (policy.size() != n || static_cast<int>(m.alpha.size()) != n ||
      static_cast<int>(m.gamma.size()) != n ||
      static_cast<int>(m.omega.size()) != n) {
    throw ConfigError("multiplier dimensions do not match the zone");
  }
  const double inv_limit = 1.0 / zone.response_limit;

  double value = inflow;
  for (int i = 1; i <= n - 1; ++i) {
    value += m.alpha[i - 1] *
             (inflow * (p[i - 1] * q[i - 1] - p[i] * q[i] - p[i - 1]) +
              zone.demand[i - 1] + inv_limit);
  }
  value += m.alpha[n - 1] *
           (inflow * (p[n - 1] * q[n - 1] - p[0] * q[0] - p[n - 1]) +
            zone.demand[n - 1] + inv_limit);

  double partial_load = 0.0;
  for (int i = 0; i < n; ++i) partial_load += inflow * (p[i] - p[i] * q[i]);
  const double pole_capacity =
      static_cast<double>(zone.poles) * n * zone.full_charge_rate;
  value += m.beta0 *
           (partial_load - pole_capacity + partial_charge_margin(zone));
  value += m.beta1 * (inflow * p[0] * q[0] - zone.full_charge_rate +
                      full_charge_margin(zone));

  for (int i = 0; i < n; ++i) {
    value += m.gamma[i] * (q[i] - 1.0);
    value -= m.omega[i] * q[i];
  }
  value -= m.omega_n * (inflow - min_vehicle_inflow(zone));
  return value;
}

std::pair<double, DispatchPolicy> improve(const ZoneConfig& zone,
                                          double inflow,
                                          const DispatchPolicy& policy) {
  return improve_impl(zone, inflow, policy, nullptr);
}

namespace {

// Dense least squares for the multiplier recovery: solves the ridge-damped
// normal equations of min ||A x - b|| by Gaussian elimination.
std::vector<double> solve_least_squares(
    const std::vector<std::vector<double>>& cols,
    const std::vector<double>& b) {
  const size_t k = cols.size();
  std::vector<std::vector<double>> m(k, std::vector<double>(k + 1, 0.0));
  for (size_t i = 0; i < k; ++i) {
    for (size_t j = 0; j < k; ++j) {
      double s = 0.0;
      for (size_t r = 0; r < b.size(); ++r) s += cols[i][r] * cols[j][r];
      m[i][j] = s;
    }
    m[i][i] += 1e-12;
    double s = 0.0;
    for (size_t r = 0; r < b.size(); ++r) s += cols[i][r] * b[r];
    m[i][k] = s;
  }
  for (size_t c = 0; c < k; ++c) {
    size_t piv = c;
    for (size_t r = c + 1; r < k; ++r) {
      if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
    }
    std::swap(m[c], m[piv]);
    if (m[c][c] == 0.0) continue;
    for (size_t r = 0; r < k; ++r) {
      if (r == c) continue;
      const double f = m[r][c] / m[c][c];
      for (size_t j = c; j <= k; ++j) m[r][j] -= f * m[c][j];
    }
  }
  std::vector<double> x(k, 0.0);
  for (size_t c = 0; c < k; ++c) {
    if (m[c][c] != 0.0) x[c] = m[c][k] / m[c][c];
  }
  return x;
}

// Lawson-Hanson nonnegative least squares, small and deterministic.
std::vector<double> solve_nnls(const std::vector<std::vector<double>>& cols,
                               const std::vector<double>& b) {
  const size_t k = cols.size();
  const size_t rows = b.size();
  std::vector<double> x(k, 0.0);
  std::vector<bool> in_set(k, false);
  std::vector<double> resid = b;

  for (int outer = 0; outer < static_cast<int>(30 * k + 30); ++outer) {
    double best_w = 0.0;
    size_t best_j = k;
    for (size_t j = 0; j < k; ++j) {
      if (in_set[j]) continue;
      double w = 0.0;
      for (size_t r = 0; r < rows; ++r) w += cols[j][r] * resid[r];
      if (w > best_w + 1e-12) {
        best_w = w;
        best_j = j;
      }
    }
    if (best_j == k) break;
    in_set[best_j] = true;

    for (int inner = 0; inner < static_cast<int>(30 * k + 30); ++inner) {
      std::vector<size_t> active;
      for (size_t j = 0; j < k; ++j) {
        if (in_set[j]) active.push_back(j);
      }
      std::vector<std::vector<double>> sub;
      sub.reserve(active.size());
      for (size_t j : active) sub.push_back(cols[j]);
      const std::vector<double> z = solve_least_squares(sub, b);

      bool all_positive = true;
      for (double v : z) {
        if (v <= 0.0) all_positive = false;
      }
      if (all_positive) {
        for (size_t t = 0; t < active.size(); ++t) x[active[t]] = z[t];
        break;
      }
      double alpha = 1.0;
      for (size_t t = 0; t < active.size(); ++t) {
        if (z[t] <= 0.0) {
          const double xt = x[active[t]];
          if (xt - z[t] > 0.0) alpha = std::min(alpha, xt / (xt - z[t]));
        }
      }
      for (size_t t = 0; t < active.size(); ++t) {
        x[active[t]] += alpha * (z[t] - x[active[t]]);
        if (x[active[t]] <= 1e-14) {
          x[active[t]] = 0.0;
          in_set[active[t]] = false;
        }
      }
    }

    resid = b;
    for (size_t j = 0; j < k; ++j) {
      if (x[j] == 0.0) continue;
      for (size_t r = 0; r < rows; ++r) resid[r] -= cols[j][r] * x[j];
    }
  }
  return x;
}

}  // namespace

Multipliers recover_multipliers(const ZoneConfig& zone,
                                const DispatchPolicy& policy, double inflow) {
  const int n = zone.class_count;
  const auto& p = zone.soc;
  const auto& q = policy.probs;
  if (policy.size() != n)
    throw ConfigError("policy length does not match class count");
  const auto report = check_feasible(zone, inflow, policy);
  const CapLimits cl = cap_limits(zone);

  // Complementary slackness: only constraints active at the point may carry
  // a multiplier. Everything inactive is pinned to zero.
  std::vector<bool> resp_active(n, false);
  for (int j = 1; j <= n; ++j) {
    resp_active[j - 1] =
        std::abs(report.response_slack[j - 1]) <= 1e-6 * needed_rate(zone, j);
  }
  const bool partial_active =
      std::abs(report.partial_charge_slack + partial_charge_margin(zone)) <=
      1e-6 * std::max(1.0, cl.partial_raw);
  const bool full_active =
      std::abs(report.full_charge_slack + full_charge_margin(zone)) <=
      1e-6 * std::max(1.0, cl.full_raw);
  std::vector<bool> upper_active(n, false), lower_active(n, false);
  for (int i = 0; i < n; ++i) {
    upper_active[i] = q[i] >= 1.0 - 1e-9;
    lower_active[i] = q[i] <= 1e-9;
  }
  const double bound = min_vehicle_inflow(zone);
  const bool bound_active =
      std::abs(inflow - bound) <= 1e-9 * std::max(1.0, bound);

  // Stationarity rows: d/dq_i for i = 0..n-1, then d/dlambda. Unknowns are
  // the active multipliers; the lambda row carries the constant 1 from the
  // objective, moved to the right-hand side.
  const int rows = n + 1;
  std::vector<std::vector<double>> cols;
  struct ColRef {
    enum Kind { Alpha, Beta0, Beta1, Gamma, OmegaQ, OmegaN } kind;
    int index;
  };
  std::vector<ColRef> refs;

  auto add_col = [&](ColRef ref, const std::vector<double>& col) {
    refs.push_back(ref);
    cols.push_back(col);
  };

  for (int j = 1; j <= n; ++j) {
    if (!resp_active[j - 1]) continue;
    std::vector<double> col(rows, 0.0);
    // alpha_j multiplies (needed_j - rate_j); rate_j gains inflow*p_i from
    // the class that feeds j directly and loses inflow*p_{j-1} via q_{j-1}.
    if (n >= 2) {
      const int direct = (j <= n - 1) ? j : 0;  // q index feeding class j
      col[direct] -= inflow * p[direct];
      const int upstream = j - 1;  // q index draining class j
      col[upstream] += inflow * p[upstream];
    }
    const double direct_feed =
        (j <= n - 1) ? p[j] * q[j] : p[0] * q[0];
    col[n] = -(p[j - 1] * (1.0 - q[j - 1]) + direct_feed);
    add_col({ColRef::Alpha, j - 1}, col);
  }
  if (partial_active) {
    std::vector<double> col(rows, 0.0);
    double load = 0.0;
    for (int i = 0; i < n; ++i) {
      col[i] = -inflow * p[i];
      load += p[i] * (1.0 - q[i]);
    }
    col[n] = load;
    add_col({ColRef::Beta0, 0}, col);
  }
  if (full_active) {
    std::vector<double> col(rows, 0.0);
    col[0] = inflow * p[0];
    col[n] = p[0] * q[0];
    add_col({ColRef::Beta1, 0}, col);
  }
  for (int i = 0; i < n; ++i) {
    if (upper_active[i]) {
      std::vector<double> col(rows, 0.0);
      col[i] = 1.0;
      add_col({ColRef::Gamma, i}, col);
    }
    if (lower_active[i]) {
      std::vector<double> col(rows, 0.0);
      col[i] = -1.0;
      add_col({ColRef::OmegaQ, i}, col);
    }
  }
  if (bound_active) {
    std::vector<double> col(rows, 0.0);
    col[n] = -1.0;
    add_col({ColRef::OmegaN, 0}, col);
  }

  std::vector<double> rhs(rows, 0.0);
  rhs[n] = -1.0;

  const std::vector<double> sol =
      cols.empty() ? std::vector<double>{} : solve_nnls(cols, rhs);

  Multipliers m;
  m.alpha.assign(n, 0.0);
  m.gamma.assign(n, 0.0);
  m.omega.assign(n, 0.0);
  for (size_t c = 0; c < refs.size(); ++c) {
    const double v = std::max(0.0, sol[c]);
    switch (refs[c].kind) {
      case ColRef::Alpha:
        m.alpha[refs[c].index] = v;
        break;
      case ColRef::Beta0:
        m.beta0 = v;
        break;
      case ColRef::Beta1:
        m.beta1 = v;
        break;
      case ColRef::Gamma:
        m.gamma[refs[c].index] = v;
        break;
      case ColRef::OmegaQ:
        m.omega[refs[c].index] = v;
        break;
      case ColRef::OmegaN:
        m.omega_n = v;
        break;
    }
  }
  return m;
}

}  // namespace fleetdim
