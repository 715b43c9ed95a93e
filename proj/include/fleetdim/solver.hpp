#ifndef FLEETDIM_SOLVER_HPP
#define FLEETDIM_SOLVER_HPP

#include <optional>
#include <utility>
#include <vector>

#include "fleetdim/types.hpp"

namespace fleetdim {

/// Lagrange multipliers of the dimensioning problem. alpha[i-1] pairs with
/// the class-i response constraint, beta0/beta1 with the partial/full
/// charging capacities, gamma[i]/omega[i] with the q_i <= 1 / q_i >= 0 box
/// sides, and omega_n with the in-flow lower bound.
struct Multipliers {
  std::vector<double> alpha;  // size n
  double beta0 = 0.0;
  double beta1 = 0.0;
  std::vector<double> gamma;  // size n
  std::vector<double> omega;  // size n (box lower sides)
  double omega_n = 0.0;       // in-flow bound
};

struct DimensionResult {
  double min_inflow = 0.0;
  DispatchPolicy policy;
  FeasibilityReport report;
  // True when the closed-form candidate at the in-flow lower bound was
  // already feasible, in which case min_inflow equals the bound exactly.
  bool candidate_was_feasible = false;
  // Number of feasibility probes spent.
  int iterations = 0;
};

/// Builds the policy that makes every class-i response constraint
/// (i = 1..n-1) hold with equality, given q0: each q_i follows from q_{i-1}
/// by an affine recursion. A step whose equality point falls below 0 is
/// clamped there (the carry flow already overfeeds that class, so the
/// constraint holds with slack). Empty when a step lands above 1 by more
/// than tolerance or a zero-probability class would need direct dispatch.
std::optional<DispatchPolicy> kkt_chain_candidate(const ZoneConfig& zone,
                                                  double inflow, double q0);

/// Picks the central-charge probability q0 for which a policy completing it
/// keeps every constraint satisfiable at the given in-flow, preferring the
/// q0 that maximizes the smaller of the two charging-capacity margins.
/// Empty when no q0 in [0,1] admits a feasible completion.
std::optional<double> select_q0(const ZoneConfig& zone, double inflow);

/// Full constraint evaluation: physical stability plus the dimensioning
/// lower bound on the in-flow.
FeasibilityReport check_feasible(const ZoneConfig& zone, double inflow,
                                 const DispatchPolicy& policy);

/// Minimum feasible vehicle in-flow and a policy attaining it. Tries the
/// closed-form candidate at the lower bound first, then searches upward and
/// polishes with coordinate descent. Throws InfeasibleError when the class
/// count is below the dimensioning minimum or no stable in-flow exists.
DimensionResult dimension(const ZoneConfig& zone);

/// Lagrangian of the dimensioning problem at a point, for the diagnostic
/// duality and stationarity checks.
double lagrangian(const ZoneConfig& zone, const DispatchPolicy& policy,
                  double inflow, const Multipliers& m);

/// Feasibility restoration plus local improvement: raises the in-flow if
/// the start point is infeasible, then alternates per-coordinate policy
/// moves with in-flow reduction until a sweep gains less than 1e-9
/// relative. Returns the improved (in-flow, policy).
std::pair<double, DispatchPolicy> improve(const ZoneConfig& zone,
                                          double inflow,
                                          const DispatchPolicy& policy);

/// Least-squares multiplier recovery from the active constraints at a
/// point, for the stationarity diagnostic. Not on the solve path.
Multipliers recover_multipliers(const ZoneConfig& zone,
                                const DispatchPolicy& policy, double inflow);

namespace detail {

/// Interval of central-station flow values d0 = inflow*p0*q0 for which some
/// full policy satisfies every constraint, plus the canonical completion at
/// a given d0. Exact up to bisection tolerance; used by select_q0 and the
/// in-flow search.
struct FlowWindow {
  bool feasible = false;
  double d0_low = 0.0;
  double d0_high = 0.0;
  double d0_best = 0.0;  // max-min charging margin point
};

FlowWindow flow_window(const ZoneConfig& zone, double inflow);

/// The canonical feasible policy at a given central flow d0 (found by
/// flow_window), or empty when d0 admits none.
std::optional<DispatchPolicy> complete_policy(const ZoneConfig& zone,
                                              double inflow, double d0);

/// True when some policy is feasible at this in-flow. Counts one probe.
bool inflow_admits_policy(const ZoneConfig& zone, double inflow);

}  // namespace detail

}  // namespace fleetdim

#endif  // FLEETDIM_SOLVER_HPP
