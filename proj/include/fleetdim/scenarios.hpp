#ifndef FLEETDIM_SCENARIOS_HPP
#define FLEETDIM_SCENARIOS_HPP

#include <limits>
#include <optional>
#include <vector>

#include "fleetdim/types.hpp"

namespace fleetdim {

enum class SocKind { decreasing, gaussian };
enum class PolicyKind { optimal, always_charge, equal_split };
enum class SweepParameter { total_demand, response_limit, class_count, poles };

const char* to_string(SocKind kind);
const char* to_string(PolicyKind kind);
const char* to_string(SweepParameter parameter);

/// Arrival charge-class distribution over classes 0..n-1 (class n never
/// arrives). decreasing: weights n-i. gaussian: discretized normal centered
/// on the middle class with sigma = sigma_scale * n.
std::vector<double> soc_distribution(SocKind kind, int class_count,
                                     double sigma_scale = 0.25);

/// Per-class demand rates for classes 1..n: discretized normal centered
/// between the middle classes, scaled so the rates sum to total.
std::vector<double> demand_distribution(double total, int class_count,
                                        double sigma_scale = 0.25);

/// The two non-optimized reference policies: always_charge is all zeros,
/// equal_split all one-half. PolicyKind::optimal has no preset vector.
DispatchPolicy baseline_policy(PolicyKind kind, int class_count);

/// Smallest vehicle in-flow at which the FIXED policy satisfies every
/// constraint, or empty when no in-flow does. For a frozen policy the
/// feasible in-flow set is a closed interval, so both edges come out in
/// closed form.
std::optional<double> baseline_min_inflow(const ZoneConfig& zone,
                                          const DispatchPolicy& policy);

/// Zone recipe: aggregate numbers plus distribution shapes, turned into a
/// concrete ZoneConfig once the pole count and class count are known.
struct ZoneTemplate {
  double total_demand = 0.0;
  double response_limit = 0.0;
  double full_charge_rate = 0.0;
  SocKind soc_kind = SocKind::decreasing;
  double soc_sigma_scale = 0.25;
  double demand_sigma_scale = 0.25;
};

/// Instantiates the template. class_count_override = 0 picks the smallest
/// count that can stabilize charging (throws InfeasibleError when no count
/// can); explicit overrides are taken as given, even below that minimum.
ZoneConfig make_zone(const ZoneTemplate& tpl, int poles,
                     int class_count_override = 0);

struct SweepSpec {
  ZoneTemplate base;
  int poles = 0;
  SweepParameter parameter = SweepParameter::response_limit;
  std::vector<double> grid;
  PolicyKind policy_kind = PolicyKind::optimal;
};

struct SweepRow {
  double value = 0.0;  // swept parameter value
  int classes = 0;
  bool feasible = false;
  double min_inflow = std::numeric_limits<double>::infinity();
  double bound = 0.0;  // in-flow lower bound for the row's zone
  bool candidate_was_feasible = false;
  DispatchPolicy policy;
};

/// One dimensioning (or fixed-policy sizing) run per grid value, rows sorted
/// by value. Infeasible grid points are marked, never fatal.
std::vector<SweepRow> sweep(const SweepSpec& spec);

/// Smallest sustainable mean-response bound at a fixed in-flow and pole
/// count, ignoring the zone's own response_limit and poles. Empty when no
/// bound works ("unstable").
std::optional<double> max_transient_response(const ZoneConfig& zone,
                                             double inflow, int poles);

struct RestorationRow {
  int poles = 0;
  SocKind soc_kind = SocKind::decreasing;
  int classes = 0;  // 0 when no class count can stabilize charging
  bool feasible = false;
  double min_inflow = std::numeric_limits<double>::infinity();
};

/// Re-dimensions the zone for each surviving pole count, both SoC shapes.
/// Only the zone's aggregates (total demand, response limit, charge rate)
/// carry over: the class count is re-chosen per pole count and the
/// distributions regenerated, since losing poles changes the class count a
/// zone needs. Rows sorted by pole count, decreasing shape first.
std::vector<RestorationRow> restoration_inflow(const ZoneConfig& zone,
                                               const std::vector<int>& poles_grid);

}  // namespace fleetdim

#endif  // FLEETDIM_SCENARIOS_HPP
