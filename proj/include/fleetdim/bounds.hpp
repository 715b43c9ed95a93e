#ifndef FLEETDIM_BOUNDS_HPP
#define FLEETDIM_BOUNDS_HPP

#include <optional>

#include "fleetdim/types.hpp"

namespace fleetdim {

/// Lower bound on the vehicle in-flow of any feasible operating point:
/// total demand plus n/T. Summing the response constraints over all classes
/// telescopes the policy terms away, so no policy can do better.
double min_vehicle_inflow(const ZoneConfig& zone);

/// Smallest class count for which the charging side can keep up, i.e. the
/// least n >= 1 with n >= T * (total_demand - mu_c) / (T * C * mu_c - 1).
/// Empty when no finite n works (T * C * mu_c <= 1 while demand exceeds the
/// central station rate).
std::optional<int> min_class_count(double total_demand, double response_limit,
                                   int poles, double full_charge_rate);

/// Class count used when a scenario generator is free to choose n. Currently
/// the minimal stable count; kept separate so the policy can evolve without
/// touching feasibility checks.
std::optional<int> optimal_class_count(double total_demand,
                                       double response_limit, int poles,
                                       double full_charge_rate);

}  // namespace fleetdim

#endif  // FLEETDIM_BOUNDS_HPP
