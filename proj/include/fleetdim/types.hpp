#ifndef FLEETDIM_TYPES_HPP
#define FLEETDIM_TYPES_HPP

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace fleetdim {

/// Thrown when an input document or argument set cannot be interpreted.
/// The CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Thrown when a model instance admits no stable operating point
/// (for example a class count below the dimensioning lower bound).
/// The CLI maps this to exit code 2.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Parameters of one service zone.
///
/// Classes are numbered 0..n for vehicles (0 = depleted battery, n = full
/// charge) and 1..n for customers. Boundary entries that are identically
/// zero are never stored: `demand[k]` is the demand rate of customer class
/// k+1 (class 0 has no customers) and `soc[k]` is the probability that an
/// arriving vehicle carries a class-k state of charge (no vehicle arrives
/// fully charged, so class n has probability 0).
struct ZoneConfig {
  int class_count = 0;            // n
  double response_limit = 0.0;    // T, minutes
  int poles = 0;                  // C, rapid charging poles
  double full_charge_rate = 0.0;  // mu_c, 1/minutes, central station
  std::vector<double> demand;     // size n, demand[k] = rate of class k+1
  std::vector<double> soc;        // size n, soc[k]   = P(vehicle class k)

  double demand_rate(int customer_class) const {  // customer_class in 1..n
    return demand[static_cast<size_t>(customer_class - 1)];
  }
  double soc_prob(int vehicle_class) const {  // vehicle_class in 0..n-1
    return soc[static_cast<size_t>(vehicle_class)];
  }
  double total_demand() const {
    double s = 0.0;
    for (double d : demand) s += d;
    return s;
  }
};

/// Per-class dispatch/charge decision probabilities.
///
/// probs[i] for i >= 1 is the probability that a class-i vehicle dispatches
/// directly to a class-i customer (otherwise it partially charges one class
/// upward). probs[0] is the probability that a depleted vehicle takes the
/// central full charge (otherwise it partially charges into class 1).
struct DispatchPolicy {
  std::vector<double> probs;

  static DispatchPolicy uniform(int n, double value) {
    DispatchPolicy p;
    p.probs.assign(static_cast<size_t>(n), value);
    return p;
  }
  int size() const { return static_cast<int>(probs.size()); }
};

/// Vehicle in-flow rates feeding the n customer-class queues.
/// rates[k] is the service rate of customer class k+1.
struct ClassRates {
  std::vector<double> rates;

  double rate(int customer_class) const {  // customer_class in 1..n
    return rates[static_cast<size_t>(customer_class - 1)];
  }
  double total() const {
    double s = 0.0;
    for (double r : rates) s += r;
    return s;
  }
};

/// Signed slack of every constraint of the dimensioning problem at one
/// candidate point. Negative slack means the constraint is satisfied.
struct FeasibilityReport {
  // response_slack[k] = lambda_c^(k+1) - lambda_v^(k+1) + 1/T, classes 1..n.
  std::vector<double> response_slack;
  // Partial-charge pole load minus C*n*mu_c. Must stay below -eps0.
  double partial_charge_slack = 0.0;
  // Central-station load minus mu_c. Must stay below -eps1.
  double full_charge_slack = 0.0;
  // Largest distance of any dispatch probability outside [0,1].
  double box_violation = 0.0;
  // Dimensioning lower bound minus lambda_v. -inf when the producing layer
  // does not evaluate the bound (stability checks evaluate physical
  // constraints only; the solver layer fills this in).
  double inflow_bound_slack = -std::numeric_limits<double>::infinity();
  bool feasible = false;
};

}  // namespace fleetdim

#endif  // FLEETDIM_TYPES_HPP
