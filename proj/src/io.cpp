#include "fleetdim/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <initializer_list>
#include <string>

#include <json.hpp>

#include "fleetdim/bounds.hpp"
#include "fleetdim/model.hpp"

namespace fleetdim {
namespace {

using nlohmann::json;

// Re-rounding through the 9-digit text form before handing the value to the
// JSON serializer caps its shortest round-trip representation at 9
// significant digits as well.
json json_number(double v) {
  if (!std::isfinite(v)) return json(nullptr);
  return json(std::strtod(format_number(v).c_str(), nullptr));
}

json json_number_array(const std::vector<double>& xs) {
  json arr = json::array();
  for (double v : xs) arr.push_back(json_number(v));
  return arr;
}

std::string csv_cell(double v) {
  return std::isfinite(v) ? format_number(v) : std::string();
}

std::string joined(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ';';
    out += format_number(xs[i]);
  }
  return out;
}

[[noreturn]] void fail(const std::string& message) {
  throw ConfigError(message);
}

void check_fields(const json& j, const char* where,
                  std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(std::string(where) + " must be a JSON object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* name : allowed) {
      if (item.key() == name) {
        known = true;
        break;
      }
    }
    if (!known) fail("unknown field '" + item.key() + "' in " + where);
  }
}

const json& require(const json& j, const char* key, const char* where) {
  const auto it = j.find(key);
  if (it == j.end())
    fail(std::string(where) + " is missing required field '" + key + "'");
  return *it;
}

double get_number(const json& j, const char* key, const char* where) {
  const json& v = require(j, key, where);
  if (!v.is_number())
    fail(std::string("field '") + key + "' in " + where + " must be a number");
  return v.get<double>();
}

long long get_integer(const json& j, const char* key, const char* where) {
  const json& v = require(j, key, where);
  if (!v.is_number_integer() && !v.is_number_unsigned())
    fail(std::string("field '") + key + "' in " + where +
         " must be an integer");
  return v.get<long long>();
}

std::string get_string(const json& j, const char* key, const char* where) {
  const json& v = require(j, key, where);
  if (!v.is_string())
    fail(std::string("field '") + key + "' in " + where + " must be a string");
  return v.get<std::string>();
}

std::vector<double> get_number_array(const json& j, const char* key,
                                     const char* where) {
  const json& v = require(j, key, where);
  if (!v.is_array())
    fail(std::string("field '") + key + "' in " + where + " must be an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number())
      fail(std::string("field '") + key + "' in " + where +
           " must contain only numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

SocKind parse_soc_kind(const std::string& text) {
  if (text == "decreasing") return SocKind::decreasing;
  if (text == "gaussian") return SocKind::gaussian;
  fail("soc_kind must be 'decreasing' or 'gaussian', got '" + text + "'");
}

PolicyKind parse_policy_kind(const std::string& text) {
  if (text == "optimal") return PolicyKind::optimal;
  if (text == "always_charge" || text == "always-charge")
    return PolicyKind::always_charge;
  if (text == "equal_split" || text == "equal-split")
    return PolicyKind::equal_split;
  fail("policy must be 'optimal', 'always_charge' or 'equal_split', got '" +
       text + "'");
}

SweepParameter parse_sweep_parameter(const std::string& text) {
  if (text == "total_demand") return SweepParameter::total_demand;
  if (text == "T") return SweepParameter::response_limit;
  if (text == "n") return SweepParameter::class_count;
  if (text == "C") return SweepParameter::poles;
  fail("parameter must be one of total_demand, T, n, C; got '" + text + "'");
}

json parse_document(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("config is not valid JSON: ") + e.what());
  }
}

ZoneConfig parse_zone(const json& j) {
  check_fields(j, "zone config",
               {"classes", "response_limit", "poles", "full_charge_rate",
                "demand", "soc", "total_demand", "soc_kind", "soc_sigma_scale",
                "demand_sigma_scale"});

  const bool has_arrays = j.contains("demand") || j.contains("soc");
  const bool has_template = j.contains("total_demand") ||
                            j.contains("soc_kind") ||
                            j.contains("soc_sigma_scale") ||
                            j.contains("demand_sigma_scale");
  if (has_arrays && has_template)
    fail("zone config mixes explicit demand/soc arrays with "
         "generated-distribution fields");
  if (!has_arrays && !has_template)
    fail("zone config needs either demand and soc arrays or total_demand "
         "with soc_kind");

  const double response_limit = get_number(j, "response_limit", "zone config");
  const long long poles = get_integer(j, "poles", "zone config");
  const double full_charge_rate =
      get_number(j, "full_charge_rate", "zone config");

  if (has_arrays) {
    ZoneConfig zone;
    zone.response_limit = response_limit;
    zone.poles = static_cast<int>(poles);
    zone.full_charge_rate = full_charge_rate;
    zone.demand = get_number_array(j, "demand", "zone config");
    zone.soc = get_number_array(j, "soc", "zone config");
    zone.class_count = static_cast<int>(zone.demand.size());
    if (j.contains("classes") &&
        get_integer(j, "classes", "zone config") != zone.class_count)
      fail("zone config field 'classes' does not match the demand array");

    // Nine-digit output rounding can leave a re-read distribution a hair off
    // the simplex; snap it back when the drift is small enough to be
    // rounding rather than a typo.
    double sum = 0.0;
    for (double v : zone.soc) sum += v;
    if (std::abs(sum - 1.0) <= 1e-6 && sum > 0.0) {
      for (double& v : zone.soc) v /= sum;
    }
    const auto problems = validate_zone(zone);
    if (!problems.empty()) {
      std::string message = "invalid zone config: " + problems.front();
      for (std::size_t k = 1; k < problems.size(); ++k)
        message += "; " + problems[k];
      fail(message);
    }
    return zone;
  }

  ZoneTemplate tpl;
  tpl.total_demand = get_number(j, "total_demand", "zone config");
  tpl.response_limit = response_limit;
  tpl.full_charge_rate = full_charge_rate;
  tpl.soc_kind = parse_soc_kind(get_string(j, "soc_kind", "zone config"));
  if (j.contains("soc_sigma_scale"))
    tpl.soc_sigma_scale = get_number(j, "soc_sigma_scale", "zone config");
  if (j.contains("demand_sigma_scale"))
    tpl.demand_sigma_scale =
        get_number(j, "demand_sigma_scale", "zone config");
  int classes = 0;
  if (j.contains("classes"))
    classes = static_cast<int>(get_integer(j, "classes", "zone config"));
  return make_zone(tpl, static_cast<int>(poles), classes);
}

json zone_json(const ZoneConfig& zone) {
  json j;
  j["classes"] = zone.class_count;
  j["response_limit"] = json_number(zone.response_limit);
  j["poles"] = zone.poles;
  j["full_charge_rate"] = json_number(zone.full_charge_rate);
  j["demand"] = json_number_array(zone.demand);
  j["soc"] = json_number_array(zone.soc);
  return j;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

ZoneConfig parse_zone_config(const std::string& text) {
  return parse_zone(parse_document(text));
}

SimulateSpec parse_simulate_config(const std::string& text) {
  const json j = parse_document(text);
  check_fields(j, "simulate config",
               {"zone", "policy", "inflow", "horizon", "warmup"});

  SimulateSpec spec;
  spec.zone = parse_zone(require(j, "zone", "simulate config"));
  spec.horizon = get_integer(j, "horizon", "simulate config");
  if (j.contains("warmup"))
    spec.warmup = get_integer(j, "warmup", "simulate config");
  if (j.contains("policy")) {
    DispatchPolicy policy;
    policy.probs = get_number_array(j, "policy", "simulate config");
    if (policy.size() != spec.zone.class_count)
      fail("policy length does not match the zone's class count");
    spec.policy = std::move(policy);
  }
  if (j.contains("inflow"))
    spec.inflow = get_number(j, "inflow", "simulate config");
  if (spec.policy && !spec.inflow)
    fail("simulate config gives a policy but no inflow to run it at");
  return spec;
}

SweepSpec parse_sweep_config(const std::string& text) {
  const json j = parse_document(text);
  check_fields(j, "sweep config",
               {"template", "poles", "parameter", "grid", "policy",
                "demand_kind"});

  SweepSpec spec;
  spec.parameter =
      parse_sweep_parameter(get_string(j, "parameter", "sweep config"));

  const json& tpl = require(j, "template", "sweep config");
  check_fields(tpl, "sweep template",
               {"total_demand", "response_limit", "full_charge_rate",
                "soc_kind", "soc_sigma_scale", "demand_sigma_scale"});
  // The swept field may be omitted from the template; its per-row values
  // come from the grid.
  if (spec.parameter == SweepParameter::total_demand &&
      !tpl.contains("total_demand")) {
    spec.base.total_demand = 1.0;
  } else {
    spec.base.total_demand = get_number(tpl, "total_demand", "sweep template");
  }
  if (spec.parameter == SweepParameter::response_limit &&
      !tpl.contains("response_limit")) {
    spec.base.response_limit = 1.0;
  } else {
    spec.base.response_limit =
        get_number(tpl, "response_limit", "sweep template");
  }
  spec.base.full_charge_rate =
      get_number(tpl, "full_charge_rate", "sweep template");
  spec.base.soc_kind =
      parse_soc_kind(get_string(tpl, "soc_kind", "sweep template"));
  if (tpl.contains("soc_sigma_scale"))
    spec.base.soc_sigma_scale =
        get_number(tpl, "soc_sigma_scale", "sweep template");
  if (tpl.contains("demand_sigma_scale"))
    spec.base.demand_sigma_scale =
        get_number(tpl, "demand_sigma_scale", "sweep template");

  if (spec.parameter == SweepParameter::poles && !j.contains("poles")) {
    spec.poles = 1;
  } else {
    spec.poles = static_cast<int>(get_integer(j, "poles", "sweep config"));
  }
  spec.grid = get_number_array(j, "grid", "sweep config");
  if (j.contains("policy"))
    spec.policy_kind =
        parse_policy_kind(get_string(j, "policy", "sweep config"));
  if (j.contains("demand_kind") &&
      get_string(j, "demand_kind", "sweep config") != "gaussian")
    fail("demand_kind only supports 'gaussian'");
  return spec;
}

ZoneConfig parse_compare_config(const std::string& text) {
  const json j = parse_document(text);
  check_fields(j, "compare config", {"zone"});
  return parse_zone(require(j, "zone", "compare config"));
}

ResilienceSpec parse_resilience_config(const std::string& text) {
  const json j = parse_document(text);
  check_fields(j, "resilience config",
               {"zone", "poles_grid", "transient_inflow", "restoration"});

  ResilienceSpec spec;
  spec.zone = parse_zone(require(j, "zone", "resilience config"));
  const json& grid = require(j, "poles_grid", "resilience config");
  if (!grid.is_array() || grid.empty())
    fail("poles_grid must be a non-empty array");
  for (const auto& e : grid) {
    if (!e.is_number_integer() && !e.is_number_unsigned())
      fail("poles_grid must contain only integers");
    spec.poles_grid.push_back(e.get<int>());
  }
  if (j.contains("transient_inflow"))
    spec.transient_inflow =
        get_number(j, "transient_inflow", "resilience config");
  if (j.contains("restoration")) {
    const json& v = j["restoration"];
    if (!v.is_boolean()) fail("field 'restoration' must be a boolean");
    spec.restoration = v.get<bool>();
  }
  return spec;
}

CompareResult run_compare(const ZoneConfig& zone) {
  CompareResult out;
  out.classes = zone.class_count;
  out.bound = min_vehicle_inflow(zone);
  try {
    const DimensionResult res = dimension(zone);
    out.optimal_feasible = true;
    out.optimal_inflow = res.min_inflow;
  } catch (const InfeasibleError&) {
    // comparison still reports the baselines
  }

  const auto run_baseline = [&](PolicyKind kind, bool& feasible,
                                double& inflow, double& gap) {
    const DispatchPolicy policy = baseline_policy(kind, zone.class_count);
    if (const auto rate = baseline_min_inflow(zone, policy)) {
      feasible = true;
      inflow = *rate;
      if (out.optimal_feasible)
        gap = 100.0 * (1.0 - out.optimal_inflow / *rate);
    }
  };
  run_baseline(PolicyKind::always_charge, out.always_charge_feasible,
               out.always_charge_inflow, out.always_charge_gap_pct);
  run_baseline(PolicyKind::equal_split, out.equal_split_feasible,
               out.equal_split_inflow, out.equal_split_gap_pct);
  return out;
}

ResilienceResult run_resilience(const ResilienceSpec& spec) {
  ResilienceResult out;
  out.zone_classes = spec.zone.class_count;
  if (spec.transient_inflow) {
    std::vector<int> grid = spec.poles_grid;
    std::sort(grid.begin(), grid.end());
    for (int poles : grid) {
      TransientRow row;
      row.poles = poles;
      if (const auto limit =
              max_transient_response(spec.zone, *spec.transient_inflow,
                                     poles)) {
        row.stable = true;
        row.max_response = *limit;
      }
      out.transient.push_back(row);
    }
  }
  if (spec.restoration)
    out.restoration = restoration_inflow(spec.zone, spec.poles_grid);
  return out;
}

std::string render_dimension(const ZoneConfig& zone,
                             const DimensionResult& result,
                             OutputFormat format) {
  const double bound = min_vehicle_inflow(zone);
  if (format == OutputFormat::json) {
    json j;
    j["min_inflow"] = json_number(result.min_inflow);
    j["bound"] = json_number(bound);
    j["candidate_was_feasible"] = result.candidate_was_feasible;
    j["feasible"] = result.report.feasible;
    j["iterations"] = result.iterations;
    j["policy"] = json_number_array(result.policy.probs);
    json slacks;
    slacks["response"] = json_number_array(result.report.response_slack);
    slacks["partial_charge"] = json_number(result.report.partial_charge_slack);
    slacks["full_charge"] = json_number(result.report.full_charge_slack);
    slacks["box"] = json_number(result.report.box_violation);
    slacks["inflow_bound"] = json_number(result.report.inflow_bound_slack);
    j["slacks"] = slacks;
    j["zone"] = zone_json(zone);
    return j.dump(2) + "\n";
  }

  std::string out =
      "classes,min_inflow,bound,candidate_was_feasible,feasible,"
      "partial_charge_slack,full_charge_slack,box_violation,"
      "inflow_bound_slack,policy,response_slack\n";
  out += std::to_string(zone.class_count) + ',';
  out += csv_cell(result.min_inflow) + ',';
  out += csv_cell(bound) + ',';
  out += (result.candidate_was_feasible ? "1," : "0,");
  out += (result.report.feasible ? "1," : "0,");
  out += csv_cell(result.report.partial_charge_slack) + ',';
  out += csv_cell(result.report.full_charge_slack) + ',';
  out += csv_cell(result.report.box_violation) + ',';
  out += csv_cell(result.report.inflow_bound_slack) + ',';
  out += joined(result.policy.probs) + ',';
  out += joined(result.report.response_slack) + '\n';
  return out;
}

std::string render_simulation(const SimulationRecord& record,
                              OutputFormat format) {
  const ClassRates rates =
      class_inflow_rates(record.zone, record.policy, record.inflow);
  const int n = record.zone.class_count;

  std::vector<std::optional<double>> analytic(n);
  for (int cls = 1; cls <= n; ++cls) {
    analytic[cls - 1] =
        mm1_mean_response(record.zone.demand_rate(cls), rates.rate(cls));
  }
  const char* mode =
      record.mode == SimMode::analytic ? "analytic" : "network";

  if (format == OutputFormat::json) {
    json j;
    j["mode"] = mode;
    j["seed"] = record.seed;
    j["inflow"] = json_number(record.inflow);
    j["horizon"] = record.horizon;
    j["warmup"] = record.warmup;
    j["policy"] = json_number_array(record.policy.probs);
    j["total_time"] = json_number(record.report.total_time);
    j["truncated"] = record.report.truncated;
    j["partial_utilization"] = json_number(record.report.partial_utilization);
    j["full_utilization"] = json_number(record.report.full_utilization);
    json vehicles;
    vehicles["entered"] = record.report.vehicles_entered;
    vehicles["matched"] = record.report.vehicles_matched;
    vehicles["idle"] = record.report.vehicles_idle;
    j["vehicles"] = vehicles;
    j["max_vehicle_buffer"] =
        json_number_array(record.report.max_vehicle_buffer);
    json classes = json::array();
    for (int cls = 1; cls <= n; ++cls) {
      const ClassStats& st = record.report.classes[cls - 1];
      json c;
      c["class"] = cls;
      c["served"] = st.served;
      c["mean_response"] = json_number(st.mean_response);
      c["ci_half_width"] = json_number(st.ci_half_width);
      c["max_queue"] = json_number(st.max_queue);
      c["time_avg_queue"] = json_number(st.time_avg_queue);
      c["observed_time"] = json_number(st.observed_time);
      const auto& an = analytic[cls - 1];
      c["analytic_response"] = an ? json_number(*an) : json(nullptr);
      c["abs_error"] = an && st.served > 0 &&
                               std::isfinite(st.mean_response)
                           ? json_number(std::abs(st.mean_response - *an))
                           : json(nullptr);
      classes.push_back(c);
    }
    j["classes"] = classes;
    j["zone"] = zone_json(record.zone);
    return j.dump(2) + "\n";
  }

  std::string out =
      "class,served,mean_response,ci_half_width,max_queue,time_avg_queue,"
      "observed_time,analytic_response,abs_error,mode,seed,inflow,horizon,"
      "warmup,total_time,truncated,partial_utilization,full_utilization,"
      "vehicles_entered,vehicles_matched,vehicles_idle,max_vehicle_buffer\n";
  for (int cls = 1; cls <= n; ++cls) {
    const ClassStats& st = record.report.classes[cls - 1];
    const auto& an = analytic[cls - 1];
    out += std::to_string(cls) + ',';
    out += std::to_string(st.served) + ',';
    out += csv_cell(st.mean_response) + ',';
    out += csv_cell(st.ci_half_width) + ',';
    out += csv_cell(st.max_queue) + ',';
    out += csv_cell(st.time_avg_queue) + ',';
    out += csv_cell(st.observed_time) + ',';
    out += (an ? csv_cell(*an) : std::string()) + ',';
    out += (an && st.served > 0 && std::isfinite(st.mean_response)
                ? csv_cell(std::abs(st.mean_response - *an))
                : std::string()) +
           ',';
    out += std::string(mode) + ',';
    out += std::to_string(record.seed) + ',';
    out += csv_cell(record.inflow) + ',';
    out += std::to_string(record.horizon) + ',';
    out += std::to_string(record.warmup) + ',';
    out += csv_cell(record.report.total_time) + ',';
    out += (record.report.truncated ? "1," : "0,");
    out += csv_cell(record.report.partial_utilization) + ',';
    out += csv_cell(record.report.full_utilization) + ',';
    out += std::to_string(record.report.vehicles_entered) + ',';
    out += std::to_string(record.report.vehicles_matched) + ',';
    out += std::to_string(record.report.vehicles_idle) + ',';
    out += (record.report.max_vehicle_buffer.empty()
                ? std::string()
                : csv_cell(record.report.max_vehicle_buffer[cls - 1])) +
           '\n';
  }
  return out;
}

std::string render_sweep(const SweepSpec& spec,
                         const std::vector<SweepRow>& rows,
                         OutputFormat format) {
  if (format == OutputFormat::json) {
    json j;
    j["parameter"] = to_string(spec.parameter);
    j["soc_kind"] = to_string(spec.base.soc_kind);
    j["policy_kind"] = to_string(spec.policy_kind);
    json out_rows = json::array();
    for (const SweepRow& row : rows) {
      json r;
      r["value"] = json_number(row.value);
      r["classes"] = row.classes;
      r["feasible"] = row.feasible;
      r["min_inflow"] = json_number(row.min_inflow);
      r["bound"] = json_number(row.bound);
      r["candidate_was_feasible"] = row.candidate_was_feasible;
      r["policy"] = json_number_array(row.policy.probs);
      out_rows.push_back(r);
    }
    j["rows"] = out_rows;
    return j.dump(2) + "\n";
  }

  std::string out =
      "parameter,value,soc_kind,policy_kind,classes,feasible,min_inflow,"
      "bound,candidate_was_feasible,policy\n";
  for (const SweepRow& row : rows) {
    out += std::string(to_string(spec.parameter)) + ',';
    out += format_number(row.value) + ',';
    out += std::string(to_string(spec.base.soc_kind)) + ',';
    out += std::string(to_string(spec.policy_kind)) + ',';
    out += std::to_string(row.classes) + ',';
    out += (row.feasible ? "1," : "0,");
    out += csv_cell(row.min_inflow) + ',';
    out += csv_cell(row.bound) + ',';
    out += (row.candidate_was_feasible ? "1," : "0,");
    out += joined(row.policy.probs) + '\n';
  }
  return out;
}

std::string render_compare(const CompareResult& result, OutputFormat format) {
  if (format == OutputFormat::json) {
    json j;
    j["classes"] = result.classes;
    j["bound"] = json_number(result.bound);
    json optimal;
    optimal["feasible"] = result.optimal_feasible;
    optimal["min_inflow"] = json_number(result.optimal_inflow);
    j["optimal"] = optimal;
    json ac;
    ac["feasible"] = result.always_charge_feasible;
    ac["min_inflow"] = json_number(result.always_charge_inflow);
    ac["gap_pct"] = json_number(result.always_charge_gap_pct);
    j["always_charge"] = ac;
    json es;
    es["feasible"] = result.equal_split_feasible;
    es["min_inflow"] = json_number(result.equal_split_inflow);
    es["gap_pct"] = json_number(result.equal_split_gap_pct);
    j["equal_split"] = es;
    return j.dump(2) + "\n";
  }

  std::string out =
      "classes,bound,optimal_feasible,optimal_inflow,always_charge_feasible,"
      "always_charge_inflow,always_charge_gap_pct,equal_split_feasible,"
      "equal_split_inflow,equal_split_gap_pct\n";
  out += std::to_string(result.classes) + ',';
  out += csv_cell(result.bound) + ',';
  out += (result.optimal_feasible ? "1," : "0,");
  out += csv_cell(result.optimal_inflow) + ',';
  out += (result.always_charge_feasible ? "1," : "0,");
  out += csv_cell(result.always_charge_inflow) + ',';
  out += csv_cell(result.always_charge_gap_pct) + ',';
  out += (result.equal_split_feasible ? "1," : "0,");
  out += csv_cell(result.equal_split_inflow) + ',';
  out += csv_cell(result.equal_split_gap_pct) + '\n';
  return out;
}

std::string render_resilience(const ResilienceResult& result,
                              OutputFormat format) {
  if (format == OutputFormat::json) {
    json j;
    json transient = json::array();
    for (const TransientRow& row : result.transient) {
      json r;
      r["poles"] = row.poles;
      r["stable"] = row.stable;
      r["max_response"] = json_number(row.max_response);
      transient.push_back(r);
    }
    json restoration = json::array();
    for (const RestorationRow& row : result.restoration) {
      json r;
      r["poles"] = row.poles;
      r["soc_kind"] = to_string(row.soc_kind);
      r["classes"] = row.classes;
      r["feasible"] = row.feasible;
      r["min_inflow"] = json_number(row.min_inflow);
      restoration.push_back(r);
    }
    j["transient"] = transient;
    j["restoration"] = restoration;
    return j.dump(2) + "\n";
  }

  std::string out = "analysis,poles,soc_kind,classes,value,feasible\n";
  for (const TransientRow& row : result.transient) {
    out += "transient," + std::to_string(row.poles) + ",,";
    out += std::to_string(result.zone_classes) + ',';
    out += csv_cell(row.max_response) + ',';
    out += (row.stable ? "1\n" : "0\n");
  }
  for (const RestorationRow& row : result.restoration) {
    out += "restoration," + std::to_string(row.poles) + ',';
    out += std::string(to_string(row.soc_kind)) + ',';
    out += std::to_string(row.classes) + ',';
    out += csv_cell(row.min_inflow) + ',';
    out += (row.feasible ? "1\n" : "0\n");
  }
  return out;
}

}  // namespace fleetdim
