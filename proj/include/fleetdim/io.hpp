#ifndef FLEETDIM_IO_HPP
#define FLEETDIM_IO_HPP

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fleetdim/scenarios.hpp"
#include "fleetdim/simulator.hpp"
#include "fleetdim/solver.hpp"
#include "fleetdim/types.hpp"

namespace fleetdim {

enum class OutputFormat { csv, json };

/// One number, at most 9 significant digits, C locale, no trailing zeros.
std::string format_number(double v);

// ---- config documents -------------------------------------------------
// Each parser consumes a whole JSON document and rejects unknown fields.
// A zone is given either explicitly (demand/soc arrays) or generatively
// (total_demand + soc_kind, class count chosen automatically when absent).

ZoneConfig parse_zone_config(const std::string& text);

struct SimulateSpec {
  ZoneConfig zone;
  std::optional<DispatchPolicy> policy;  // absent: use the optimal policy
  std::optional<double> inflow;          // absent: use the dimensioning rate
  long long horizon = 0;
  long long warmup = -1;
};
SimulateSpec parse_simulate_config(const std::string& text);

SweepSpec parse_sweep_config(const std::string& text);

ZoneConfig parse_compare_config(const std::string& text);

struct ResilienceSpec {
  ZoneConfig zone;
  std::vector<int> poles_grid;
  std::optional<double> transient_inflow;  // absent: skip the transient table
  bool restoration = true;
};
ResilienceSpec parse_resilience_config(const std::string& text);

// ---- experiment drivers ------------------------------------------------

struct CompareResult {
  int classes = 0;
  double bound = 0.0;
  bool optimal_feasible = false;
  double optimal_inflow = std::numeric_limits<double>::infinity();
  bool always_charge_feasible = false;
  double always_charge_inflow = std::numeric_limits<double>::infinity();
  double always_charge_gap_pct = std::numeric_limits<double>::infinity();
  bool equal_split_feasible = false;
  double equal_split_inflow = std::numeric_limits<double>::infinity();
  double equal_split_gap_pct = std::numeric_limits<double>::infinity();
};
CompareResult run_compare(const ZoneConfig& zone);

struct TransientRow {
  int poles = 0;
  bool stable = false;
  double max_response = std::numeric_limits<double>::infinity();
};
struct ResilienceResult {
  int zone_classes = 0;
  std::vector<TransientRow> transient;
  std::vector<RestorationRow> restoration;
};
ResilienceResult run_resilience(const ResilienceSpec& spec);

// ---- rendering -----------------------------------------------------------
// JSON output keeps every number to at most 9 significant digits and maps
// non-finite values to null; CSV leaves those cells empty. Both are byte
// stable across runs.

std::string render_dimension(const ZoneConfig& zone,
                             const DimensionResult& result,
                             OutputFormat format);

struct SimulationRecord {
  ZoneConfig zone;
  DispatchPolicy policy;
  double inflow = 0.0;
  std::uint64_t seed = 0;
  SimMode mode = SimMode::analytic;
  long long horizon = 0;
  long long warmup = -1;
  SimReport report;
};
std::string render_simulation(const SimulationRecord& record,
                              OutputFormat format);

std::string render_sweep(const SweepSpec& spec,
                         const std::vector<SweepRow>& rows,
                         OutputFormat format);

std::string render_compare(const CompareResult& result, OutputFormat format);

std::string render_resilience(const ResilienceResult& result,
                              OutputFormat format);

}  // namespace fleetdim

#endif  // FLEETDIM_IO_HPP
