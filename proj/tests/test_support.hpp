#ifndef FLEETDIM_TEST_SUPPORT_HPP
#define FLEETDIM_TEST_SUPPORT_HPP

// Shared fixtures and independent oracles for the unit suites. Everything
// here recomputes model quantities from first principles on purpose: the
// tests must not certify the library with the library.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "fleetdim/types.hpp"

namespace testsup {

// Two-class zone solved by hand throughout the suites: demand [3,2] per
// minute, T=5, one pole, central rate 2.5. In-flow floor 3+2+2/5 = 5.4.
inline fleetdim::ZoneConfig sample_zone() {
  fleetdim::ZoneConfig z;
  z.class_count = 2;
  z.response_limit = 5.0;
  z.poles = 1;
  z.full_charge_rate = 2.5;
  z.demand = {3.0, 2.0};
  z.soc = {0.4, 0.6};
  return z;
}

// Same shape with uniform demand [2,2]; floor 4.4. Mirrors
// tests/data/uniform_small.json.
inline fleetdim::ZoneConfig uniform_small_zone() {
  fleetdim::ZoneConfig z = sample_zone();
  z.demand = {2.0, 2.0};
  return z;
}

inline std::vector<double> random_simplex(std::mt19937_64& gen, int n) {
  std::exponential_distribution<double> exp1(1.0);
  std::vector<double> w(static_cast<size_t>(n));
  double sum = 0.0;
  for (double& x : w) {
    x = exp1(gen) + 1e-3;  // keep entries bounded away from zero
    sum += x;
  }
  for (double& x : w) x /= sum;
  return w;
}

inline fleetdim::DispatchPolicy random_policy(std::mt19937_64& gen, int n) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  fleetdim::DispatchPolicy q;
  q.probs.resize(static_cast<size_t>(n));
  for (double& x : q.probs) x = u01(gen);
  return q;
}

inline fleetdim::ZoneConfig random_zone(std::mt19937_64& gen, int n) {
  std::uniform_real_distribution<double> t_draw(2.0, 15.0);
  std::uniform_int_distribution<int> c_draw(1, 40);
  std::uniform_real_distribution<double> mu_draw(0.05, 3.0);
  std::uniform_real_distribution<double> dem_draw(0.1, 2.0);
  fleetdim::ZoneConfig z;
  z.class_count = n;
  z.response_limit = t_draw(gen);
  z.poles = c_draw(gen);
  z.full_charge_rate = mu_draw(gen);
  z.soc = random_simplex(gen, n);
  z.demand.resize(static_cast<size_t>(n));
  for (double& d : z.demand) d = dem_draw(gen);
  return z;
}

// Per-class service coefficients of a frozen policy: rate_i = lambda * g[i].
// Recomputed from the flow balance directly, independent of the library.
inline std::vector<double> rate_coefficients(const fleetdim::ZoneConfig& z,
                                             const fleetdim::DispatchPolicy& q) {
  const int n = z.class_count;
  std::vector<double> g(static_cast<size_t>(n));
  for (int i = 1; i <= n - 1; ++i) {
    g[static_cast<size_t>(i - 1)] =
        z.soc[static_cast<size_t>(i - 1)] *
            (1.0 - q.probs[static_cast<size_t>(i - 1)]) +
        z.soc[static_cast<size_t>(i)] * q.probs[static_cast<size_t>(i)];
  }
  g[static_cast<size_t>(n - 1)] =
      z.soc[static_cast<size_t>(n - 1)] *
          (1.0 - q.probs[static_cast<size_t>(n - 1)]) +
      z.soc[0] * q.probs[0];
  return g;
}

// Closed feasible in-flow interval of a frozen policy. All constraints are
// linear in lambda: responses force lambda up, the two charging capacities
// cap it. Empty when the interval is.
struct InflowWindow {
  bool any = false;
  double lo = 0.0;
  double hi = 0.0;
};

inline InflowWindow policy_inflow_window(const fleetdim::ZoneConfig& z,
                                         const fleetdim::DispatchPolicy& q) {
  const int n = z.class_count;
  const auto g = rate_coefficients(z, q);
  const double inv_t = 1.0 / z.response_limit;

  double lo = 0.0;
  for (int i = 0; i < n; ++i) {
    const double needed = z.demand[static_cast<size_t>(i)] + inv_t;
    if (g[static_cast<size_t>(i)] <= 0.0) return {};
    lo = std::max(lo, needed / g[static_cast<size_t>(i)]);
  }

  double charge_share = 0.0;  // sum p_i (1 - q_i)
  for (int i = 0; i < n; ++i)
    charge_share +=
        z.soc[static_cast<size_t>(i)] * (1.0 - q.probs[static_cast<size_t>(i)]);
  const double cap_poles = static_cast<double>(z.poles) * n * z.full_charge_rate;
  const double cap_full = z.full_charge_rate;
  const double eps0 = 1e-6 * cap_poles;
  const double eps1 = 1e-6 * cap_full;

  double hi = std::numeric_limits<double>::infinity();
  if (charge_share > 0.0) hi = std::min(hi, (cap_poles - eps0) / charge_share);
  const double full_share = z.soc[0] * q.probs[0];
  if (full_share > 0.0) hi = std::min(hi, (cap_full - eps1) / full_share);

  if (lo > hi) return {};
  return {true, lo, hi};
}

}  // namespace testsup

#endif  // FLEETDIM_TEST_SUPPORT_HPP
