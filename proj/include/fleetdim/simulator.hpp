#ifndef FLEETDIM_SIMULATOR_HPP
#define FLEETDIM_SIMULATOR_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "fleetdim/types.hpp"

namespace fleetdim {

enum class SimMode {
  // Each customer class runs as the literal single-server queue the
  // analytic layer assumes: arrivals at the class demand rate, service at
  // the class in-flow rate.
  analytic,
  // The whole zone: vehicles arrive, draw a charge class, dispatch or
  // charge per the policy, and are matched first-in-first-out to customers.
  network,
};

struct SimConfig {
  ZoneConfig zone;
  DispatchPolicy policy;
  double inflow = 0.0;
  long long horizon = 0;  // customers to serve
  long long warmup = -1;  // customers excluded up front; -1 = horizon/10
  std::uint64_t seed = 0;
  SimMode mode = SimMode::analytic;
};

struct ClassStats {
  long long served = 0;
  double mean_response = 0.0;   // minutes, arrival to vehicle assignment
  double ci_half_width = 0.0;   // 95%, batch means; 0 when served < 20
  double max_queue = 0.0;       // largest observed customer backlog
  double time_avg_queue = 0.0;  // time-average customer backlog
  double observed_time = 0.0;   // minutes covered by the statistics
};

struct SimReport {
  std::vector<ClassStats> classes;      // index k = customer class k+1
  double partial_utilization = 0.0;     // busy-pole time fraction
  double full_utilization = 0.0;        // central station busy fraction
  double total_time = 0.0;              // simulated minutes
  bool truncated = false;               // stopped before serving horizon
  long long vehicles_entered = 0;       // network mode flow accounting
  long long vehicles_matched = 0;
  long long vehicles_idle = 0;          // buffered or charging at the end
  std::vector<double> max_vehicle_buffer;  // per class, network mode
};

/// Runs the configured simulation. Deterministic: identical configs
/// (including seed) give identical reports. Every stochastic stream
/// (vehicle arrivals, class draws, routing, each charging server, each
/// customer class) draws from its own substream of the seed, so editing one
/// parameter does not reshuffle the rest.
SimReport simulate(const SimConfig& cfg);

/// Mean sojourn of a single-server memoryless queue: 1/(service - arrival).
/// Empty when the queue is unstable.
std::optional<double> mm1_mean_response(double arrival, double service);

}  // namespace fleetdim

#endif  // FLEETDIM_SIMULATOR_HPP
