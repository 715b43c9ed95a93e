#include "fleetdim/bounds.hpp"

#include <cmath>

namespace fleetdim {

double min_vehicle_inflow(const ZoneConfig& zone) {
  return zone.total_demand() +
         static_cast<double>(zone.class_count) / zone.response_limit;
}

std::optional<int> min_class_count(double total_demand, double response_limit,
                                   int poles, double full_charge_rate) {
  const double excess = total_demand - full_charge_rate;
  if (excess <= 0.0) return 1;
  const double denom =
      response_limit * poles * full_charge_rate - 1.0;
  if (denom <= 0.0) return std::nullopt;
  const double raw = response_limit * excess / denom;
  int n = static_cast<int>(std::ceil(raw));
  // Guard against ceil landing a hair under the bound after rounding.
  if (static_cast<double>(n) < raw) ++n;
  if (n < 1) n = 1;
  return n;
}

std::optional<int> optimal_class_count(double total_demand,
                                       double response_limit, int poles,
                                       double full_charge_rate) {
  return min_class_count(total_demand, response_limit, poles,
                         full_charge_rate);
}

}  // namespace fleetdim
