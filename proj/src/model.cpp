#include "fleetdim/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fleetdim {

double partial_charge_margin(const ZoneConfig& zone) {
  return 1e-6 * zone.poles * zone.class_count * zone.full_charge_rate;
}

double full_charge_margin(const ZoneConfig& zone) {
  return 1e-6 * zone.full_charge_rate;
}

double slack_tolerance(double rhs_scale) {
  return 1e-9 * std::max(1.0, std::abs(rhs_scale));
}

ClassRates class_inflow_rates(const ZoneConfig& zone,
                              const DispatchPolicy& policy, double lambda_v) {
  const int n = zone.class_count;
  if (policy.size() != n)
    throw ConfigError("policy length does not match class count");
  if (lambda_v < 0.0) throw ConfigError("vehicle in-flow must be nonnegative");
  const auto& p = zone.soc;
  const auto& q = policy.probs;
  ClassRates out;
  out.rates.resize(n);
  for (int i = 1; i < n; ++i) {
    out.rates[i - 1] = lambda_v * (p[i - 1] - p[i - 1] * q[i - 1] + p[i] * q[i]);
  }
  // Class n receives the partial-charge flow of class n-1 plus vehicles that
  // finished a full charge at the central station.
  out.rates[n - 1] =
      lambda_v * (p[n - 1] - p[n - 1] * q[n - 1] + p[0] * q[0]);
  return out;
}

std::optional<double> mean_response_time(const ZoneConfig& zone,
                                         const ClassRates& rates,
                                         int customer_class) {
  if (customer_class < 1 || customer_class > zone.class_count)
    throw ConfigError("customer class index out of range");
  const double service = rates.rate(customer_class);
  const double arrivals = zone.demand_rate(customer_class);
  if (service <= arrivals) return std::nullopt;
  return 1.0 / (service - arrivals);
}

FeasibilityReport check_stability(const ZoneConfig& zone,
                                  const DispatchPolicy& policy,
                                  double lambda_v) {
  const int n = zone.class_count;
  const auto& p = zone.soc;
  const auto& q = policy.probs;
  FeasibilityReport report;
  report.response_slack.resize(n);

  const ClassRates rates = class_inflow_rates(zone, policy, lambda_v);
  const double inv_limit = 1.0 / zone.response_limit;
  for (int i = 1; i <= n; ++i) {
    // Response limit holds when rate - demand >= 1/T; slack is the excess of
    // the requirement over what the class receives.
    report.response_slack[i - 1] =
        zone.demand_rate(i) + inv_limit - rates.rate(i);
  }

  // Slacks report raw load minus capacity; the strictness margins enter only
  // in the feasibility test below.
  double partial_load = 0.0;
  for (int i = 0; i < n; ++i) partial_load += lambda_v * p[i] * (1.0 - q[i]);
  const double pole_capacity =
      static_cast<double>(zone.poles) * n * zone.full_charge_rate;
  report.partial_charge_slack = partial_load - pole_capacity;
  report.full_charge_slack = lambda_v * p[0] * q[0] - zone.full_charge_rate;

  double box = 0.0;
  for (int i = 0; i < n; ++i) {
    box = std::max(box, std::max(-q[i], q[i] - 1.0));
  }
  box = std::max(box, 0.0);
  report.box_violation = box;

  report.inflow_bound_slack = -std::numeric_limits<double>::infinity();
  report.feasible = slacks_within_tolerance(report, zone);
  return report;
}

bool slacks_within_tolerance(const FeasibilityReport& report,
                             const ZoneConfig& zone) {
  const int n = zone.class_count;
  const double inv_limit = 1.0 / zone.response_limit;
  for (int i = 1; i <= n; ++i) {
    const double needed = zone.demand_rate(i) + inv_limit;
    if (report.response_slack[i - 1] > slack_tolerance(needed)) return false;
  }
  const double pole_capacity =
      static_cast<double>(zone.poles) * n * zone.full_charge_rate;
  if (report.partial_charge_slack >
      -partial_charge_margin(zone) + slack_tolerance(pole_capacity))
    return false;
  if (report.full_charge_slack >
      -full_charge_margin(zone) + slack_tolerance(zone.full_charge_rate))
    return false;
  if (report.box_violation > slack_tolerance(1.0)) return false;
  if (std::isfinite(report.inflow_bound_slack)) {
    double bound = n / zone.response_limit;
    for (int i = 1; i <= n; ++i) bound += zone.demand_rate(i);
    if (report.inflow_bound_slack > slack_tolerance(bound)) return false;
  }
  return true;
}

std::vector<std::string> validate_zone(const ZoneConfig& zone) {
  std::vector<std::string> problems;
  const int n = zone.class_count;
  if (n < 1) problems.push_back("class_count must be at least 1");
  if (!(zone.response_limit > 0.0))
    problems.push_back("response_limit must be positive");
  if (zone.poles < 1) problems.push_back("poles must be at least 1");
  if (!(zone.full_charge_rate > 0.0))
    problems.push_back("full_charge_rate must be positive");
  if (n >= 1) {
    if (static_cast<int>(zone.demand.size()) != n) {
      std::ostringstream msg;
      msg << "demand must have " << n << " entries, got "
          << zone.demand.size();
      problems.push_back(msg.str());
    } else {
      for (int i = 0; i < n; ++i) {
        if (zone.demand[i] < 0.0) {
          std::ostringstream msg;
          msg << "demand for class " << (i + 1) << " is negative";
          problems.push_back(msg.str());
        }
      }
    }
    if (static_cast<int>(zone.soc.size()) != n) {
      std::ostringstream msg;
      msg << "soc must have " << n << " entries, got " << zone.soc.size();
      problems.push_back(msg.str());
    } else {
      double total = 0.0;
      bool negative = false;
      for (int i = 0; i < n; ++i) {
        if (zone.soc[i] < 0.0) negative = true;
        total += zone.soc[i];
      }
      if (negative) problems.push_back("soc probabilities must be nonnegative");
      if (std::abs(total - 1.0) > 1e-9) {
        std::ostringstream msg;
        msg << "soc probabilities must sum to 1, got " << total;
        problems.push_back(msg.str());
      }
    }
  }
  return problems;
}

}  // namespace fleetdim
