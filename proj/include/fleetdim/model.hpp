#ifndef FLEETDIM_MODEL_HPP
#define FLEETDIM_MODEL_HPP

#include <optional>
#include <string>
#include <vector>

#include "fleetdim/types.hpp"

namespace fleetdim {

// Strictness margins that turn the strict charging-stability inequalities
// into closed constraints, scaled to the capacity they guard.
double partial_charge_margin(const ZoneConfig& zone);  // 1e-6 * C * n * mu_c
double full_charge_margin(const ZoneConfig& zone);     // 1e-6 * mu_c

// A slack counts as satisfied when it is at most this tolerance, which is
// relative to the magnitude of the constraint's right-hand side.
double slack_tolerance(double rhs_scale);

/// Splits a vehicle in-flow of lambda_v across the n customer classes under
/// the given policy. Class i is fed by class-i vehicles that dispatch
/// directly plus class-(i-1) vehicles that partially charge; class n is fed
/// by class-(n-1) partial charges plus depleted vehicles leaving the central
/// station. The rates always sum to lambda_v.
ClassRates class_inflow_rates(const ZoneConfig& zone,
                              const DispatchPolicy& policy, double lambda_v);

/// Mean response time of one customer class modeled as an M/M/1 queue with
/// the class in-flow as service rate: 1 / (rate - demand). Empty when the
/// queue is unstable (rate <= demand).
std::optional<double> mean_response_time(const ZoneConfig& zone,
                                         const ClassRates& rates,
                                         int customer_class);

/// Evaluates every physical constraint (response limits, both charging
/// capacities, probability box) at the point and returns the signed slacks.
/// The in-flow lower bound is not evaluated at this layer; the solver's
/// check_feasible adds it.
FeasibilityReport check_stability(const ZoneConfig& zone,
                                  const DispatchPolicy& policy,
                                  double lambda_v);

/// Returns human-readable violations of the ZoneConfig invariants, empty
/// when the zone is well formed.
std::vector<std::string> validate_zone(const ZoneConfig& zone);

// Aggregates the slack fields of a report into the feasible flag. Shared by
// check_stability and the solver's check_feasible.
bool slacks_within_tolerance(const FeasibilityReport& report,
                             const ZoneConfig& zone);

}  // namespace fleetdim

#endif  // FLEETDIM_MODEL_HPP
