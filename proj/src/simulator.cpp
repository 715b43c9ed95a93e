#include "fleetdim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <random>
#include <vector>

#include "fleetdim/model.hpp"

namespace fleetdim {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Substream tags.
constexpr std::uint64_t kTagVehicle = 1;
constexpr std::uint64_t kTagClassDraw = 2;
constexpr std::uint64_t kTagRouting = 3;
constexpr std::uint64_t kTagFullServer = 4;
constexpr std::uint64_t kTagPartialServer = 100;  // + pole index
constexpr std::uint64_t kTagCustomer = 1000;      // + customer class
constexpr std::uint64_t kTagClassService = 2000;  // + customer class

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t tag) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(tag)));
}

double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Drawn by hand instead of std::exponential_distribution so outputs are
// stable across standard-library versions.
double exp_draw(std::mt19937_64& gen, double rate) {
  return -std::log1p(-uniform01(gen)) / rate;
}

struct BatchStats {
  double mean = 0.0;
  double half_width = 0.0;
};

// 95% interval from 20 batch means; t quantile for 19 degrees of freedom.
BatchStats batch_means(const std::vector<double>& xs) {
  BatchStats out;
  const std::size_t m = xs.size();
  if (m == 0) return out;
  double total = 0.0;
  for (double v : xs) total += v;
  out.mean = total / static_cast<double>(m);
  if (m < 20) return out;  // too few samples for an interval

  const std::size_t batches = 20;
  const std::size_t base = m / batches;
  const std::size_t extra = m % batches;
  std::vector<double> bm(batches, 0.0);
  std::size_t pos = 0;
  for (std::size_t b = 0; b < batches; ++b) {
    const std::size_t len = base + (b < extra ? 1 : 0);
    double s = 0.0;
    for (std::size_t k = 0; k < len; ++k) s += xs[pos++];
    bm[b] = s / static_cast<double>(len);
  }
  double mb = 0.0;
  for (double v : bm) mb += v;
  mb /= static_cast<double>(batches);
  double var = 0.0;
  for (double v : bm) var += (v - mb) * (v - mb);
  var /= static_cast<double>(batches - 1);
  constexpr double kT19 = 2.093;
  out.half_width = kT19 * std::sqrt(var / static_cast<double>(batches));
  return out;
}

// Time integral of a step function. Tracks the value from t=0 but only
// accumulates area (and the running peak) once started.
struct Integrator {
  double value = 0.0;
  double area = 0.0;
  double last_t = 0.0;
  double peak = 0.0;
  bool collecting = false;

  void start(double t) {
    collecting = true;
    last_t = t;
    peak = value;
  }
  void set(double t, double v) {
    if (collecting) {
      area += value * (t - last_t);
      last_t = t;
      if (v > peak) peak = v;
    }
    value = v;
  }
  void finish(double t) {
    if (collecting) {
      area += value * (t - last_t);
      last_t = t;
    }
  }
};

SimReport simulate_analytic(const SimConfig& cfg, long long warmup) {
  const int n = cfg.zone.class_count;
  const ClassRates rates = class_inflow_rates(cfg.zone, cfg.policy, cfg.inflow);

  SimReport report;
  report.classes.resize(n);

  std::vector<double> arr(cfg.horizon), dep(cfg.horizon);
  std::vector<double> responses;
  responses.reserve(static_cast<std::size_t>(cfg.horizon - warmup));

  for (int cls = 1; cls <= n; ++cls) {
    ClassStats& st = report.classes[cls - 1];
    const double arrival = cfg.zone.demand_rate(cls);
    const double service = rates.rate(cls);
    if (arrival <= 0.0) continue;  // no customers, nothing to measure
    if (service <= 0.0) {
      st.mean_response = kInf;
      continue;
    }
    auto arr_gen = make_stream(cfg.seed, kTagCustomer + cls);
    auto svc_gen = make_stream(cfg.seed, kTagClassService + cls);

    double t = 0.0, free_at = 0.0;
    for (long long k = 0; k < cfg.horizon; ++k) {
      t += exp_draw(arr_gen, arrival);
      arr[k] = t;
      const double start = std::max(t, free_at);
      free_at = start + exp_draw(svc_gen, service);
      dep[k] = free_at;
    }

    responses.clear();
    for (long long k = warmup; k < cfg.horizon; ++k) {
      responses.push_back(dep[k] - arr[k]);
    }
    const BatchStats bs = batch_means(responses);
    st.served = cfg.horizon - warmup;
    st.mean_response = bs.mean;
    st.ci_half_width = bs.half_width;

    // Queue statistics count customers in the system over the window from
    // the departure that closes the warmup to the final departure.
    const double t0 = warmup > 0 ? dep[warmup - 1] : 0.0;
    const double t1 = dep[cfg.horizon - 1];
    st.observed_time = t1 - t0;
    double area = 0.0;
    for (long long k = 0; k < cfg.horizon; ++k) {
      const double lo = std::max(arr[k], t0);
      const double hi = std::min(dep[k], t1);
      if (hi > lo) area += hi - lo;
    }
    st.time_avg_queue = st.observed_time > 0.0 ? area / st.observed_time : 0.0;

    // Peak occupancy via a sweep over the merged arrival/departure order.
    long long in_system = 0, peak = 0;
    long long ia = 0, id = 0;
    while (id < cfg.horizon) {
      if (ia < cfg.horizon && arr[ia] <= dep[id]) {
        ++in_system;
        ++ia;
        if (in_system > peak) peak = in_system;
      } else {
        --in_system;
        ++id;
      }
    }
    st.max_queue = static_cast<double>(peak);
    report.total_time = std::max(report.total_time, t1);
  }
  return report;
}

struct Event {
  double time;
  long long seq;
  int kind;   // 0 vehicle arrival, 1 customer arrival, 2 pole done, 3 full done
  int which;  // customer class or pole index
};
struct EventLater {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    return a.seq > b.seq;  // insertion order breaks timestamp ties
  }
};

SimReport simulate_network(const SimConfig& cfg, long long warmup) {
  const int n = cfg.zone.class_count;
  const auto& p = cfg.zone.soc;
  const auto& q = cfg.policy.probs;
  const int poles = cfg.zone.poles;
  const double pole_rate = n * cfg.zone.full_charge_rate;
  const double full_rate = cfg.zone.full_charge_rate;

  SimReport report;
  report.classes.resize(n);
  report.max_vehicle_buffer.assign(n, 0.0);
  if (cfg.zone.total_demand() <= 0.0 || cfg.inflow <= 0.0) {
    report.truncated = true;  // nothing can ever be matched
    return report;
  }

  std::vector<double> cum(n);
  {
    double c = 0.0;
    for (int i = 0; i < n; ++i) {
      c += p[i];
      cum[i] = c;
    }
    cum[n - 1] = 1.0;  // guard against rounding drift in the last bin
  }

  auto vehicle_gen = make_stream(cfg.seed, kTagVehicle);
  auto class_gen = make_stream(cfg.seed, kTagClassDraw);
  auto route_gen = make_stream(cfg.seed, kTagRouting);
  auto full_gen = make_stream(cfg.seed, kTagFullServer);
  std::vector<std::mt19937_64> pole_gen;
  pole_gen.reserve(poles);
  for (int j = 0; j < poles; ++j) {
    pole_gen.push_back(make_stream(cfg.seed, kTagPartialServer + j));
  }
  std::vector<std::mt19937_64> cust_gen;
  cust_gen.reserve(n);
  for (int cls = 1; cls <= n; ++cls) {
    cust_gen.push_back(make_stream(cfg.seed, kTagCustomer + cls));
  }

  std::priority_queue<Event, std::vector<Event>, EventLater> fel;
  long long seq = 0;
  auto push = [&](double time, int kind, int which) {
    fel.push({time, seq++, kind, which});
  };

  push(exp_draw(vehicle_gen, cfg.inflow), 0, 0);
  for (int cls = 1; cls <= n; ++cls) {
    const double rate = cfg.zone.demand_rate(cls);
    if (rate > 0.0) push(exp_draw(cust_gen[cls - 1], rate), 1, cls);
  }

  std::vector<long long> buffer(n + 1, 0);         // idle vehicles, class 1..n
  std::vector<std::queue<double>> waiting(n + 1);  // customer arrival times
  std::queue<int> pole_queue;  // target class of each vehicle awaiting a pole
  std::vector<int> pole_target(poles, 0);
  std::vector<bool> pole_busy(poles, false);
  int poles_in_use = 0;
  long long full_queue = 0;
  bool full_busy = false;

  Integrator pole_util, full_util;
  std::vector<Integrator> queue_len(n + 1), buffer_len(n + 1);

  long long matched = 0, customer_arrivals = 0, events = 0;
  std::vector<std::vector<double>> responses(n + 1);
  const long long event_cap = 200 * cfg.horizon + 1000000;
  const long long arrival_cap = 10 * cfg.horizon;
  double now = 0.0;
  double collect_start = 0.0;
  bool collecting = false;

  auto begin_collection = [&](double t) {
    collecting = true;
    collect_start = t;
    pole_util.start(t);
    full_util.start(t);
    for (int cls = 1; cls <= n; ++cls) {
      queue_len[cls].start(t);
      buffer_len[cls].start(t);
    }
  };
  if (warmup == 0) begin_collection(0.0);

  auto try_match = [&](int cls) {
    while (buffer[cls] > 0 && !waiting[cls].empty()) {
      const double arrived = waiting[cls].front();
      waiting[cls].pop();
      --buffer[cls];
      queue_len[cls].set(now, static_cast<double>(waiting[cls].size()));
      buffer_len[cls].set(now, static_cast<double>(buffer[cls]));
      ++matched;
      if (matched > warmup) responses[cls].push_back(now - arrived);
      if (matched == warmup && !collecting) begin_collection(now);
    }
  };

  auto vehicle_to_buffer = [&](int cls) {
    ++buffer[cls];
    buffer_len[cls].set(now, static_cast<double>(buffer[cls]));
    try_match(cls);
  };

  auto enter_pole_station = [&](int target) {
    if (poles_in_use < poles) {
      int j = 0;
      while (pole_busy[j]) ++j;  // lowest free pole
      pole_busy[j] = true;
      pole_target[j] = target;
      ++poles_in_use;
      pole_util.set(now, static_cast<double>(poles_in_use));
      push(now + exp_draw(pole_gen[j], pole_rate), 2, j);
    } else {
      pole_queue.push(target);
    }
  };

  auto enter_full_station = [&]() {
    if (!full_busy) {
      full_busy = true;
      full_util.set(now, 1.0);
      push(now + exp_draw(full_gen, full_rate), 3, 0);
    } else {
      ++full_queue;
    }
  };

  while (!fel.empty() && matched < cfg.horizon) {
    if (++events > event_cap || customer_arrivals > arrival_cap) {
      report.truncated = true;
      break;
    }
    const Event ev = fel.top();
    fel.pop();
    now = ev.time;
    switch (ev.kind) {
      case 0: {  // vehicle arrival
        ++report.vehicles_entered;
        push(now + exp_draw(vehicle_gen, cfg.inflow), 0, 0);
        const double u = uniform01(class_gen);
        int cls = 0;
        while (cls < n - 1 && u >= cum[cls]) ++cls;
        const double r = uniform01(route_gen);
        if (cls >= 1) {
          if (r < q[cls]) {
            vehicle_to_buffer(cls);  // dispatch at the current charge level
          } else {
            enter_pole_station(cls + 1);  // one partial charge, one class up
          }
        } else {
          if (r < q[0]) {
            enter_full_station();  // full recharge, joins the top class
          } else {
            enter_pole_station(1);
          }
        }
        break;
      }
      case 1: {  // customer arrival
        ++customer_arrivals;
        const int cls = ev.which;
        push(now + exp_draw(cust_gen[cls - 1], cfg.zone.demand_rate(cls)), 1,
             cls);
        waiting[cls].push(now);
        queue_len[cls].set(now, static_cast<double>(waiting[cls].size()));
        try_match(cls);
        break;
      }
      case 2: {  // pole charge finished
        const int j = ev.which;
        const int target = pole_target[j];
        if (!pole_queue.empty()) {
          pole_target[j] = pole_queue.front();
          pole_queue.pop();
          push(now + exp_draw(pole_gen[j], pole_rate), 2, j);
        } else {
          pole_busy[j] = false;
          --poles_in_use;
          pole_util.set(now, static_cast<double>(poles_in_use));
        }
        vehicle_to_buffer(target);
        break;
      }
      case 3: {  // full charge finished
        if (full_queue > 0) {
          --full_queue;
          push(now + exp_draw(full_gen, full_rate), 3, 0);
        } else {
          full_busy = false;
          full_util.set(now, 0.0);
        }
        vehicle_to_buffer(n);
        break;
      }
    }
  }
  if (matched < cfg.horizon) report.truncated = true;

  pole_util.finish(now);
  full_util.finish(now);
  for (int cls = 1; cls <= n; ++cls) {
    queue_len[cls].finish(now);
    buffer_len[cls].finish(now);
  }

  report.total_time = now;
  report.vehicles_matched = matched;
  report.vehicles_idle = report.vehicles_entered - matched;

  const double window = collecting ? now - collect_start : 0.0;
  if (window > 0.0) {
    report.partial_utilization = pole_util.area / (window * poles);
    report.full_utilization = full_util.area / window;
  }
  for (int cls = 1; cls <= n; ++cls) {
    ClassStats& st = report.classes[cls - 1];
    const BatchStats bs = batch_means(responses[cls]);
    st.served = static_cast<long long>(responses[cls].size());
    st.mean_response = bs.mean;
    st.ci_half_width = bs.half_width;
    st.observed_time = window;
    if (window > 0.0) st.time_avg_queue = queue_len[cls].area / window;
    st.max_queue = queue_len[cls].peak;
    report.max_vehicle_buffer[cls - 1] = buffer_len[cls].peak;
  }
  return report;
}

}  // namespace

SimReport simulate(const SimConfig& cfg) {
  {
    const auto problems = validate_zone(cfg.zone);
    if (!problems.empty()) throw ConfigError(problems.front());
  }
  if (cfg.policy.size() != cfg.zone.class_count)
    throw ConfigError("policy length does not match class count");
  for (double v : cfg.policy.probs) {
    if (v < 0.0 || v > 1.0)
      throw ConfigError("dispatch probabilities must lie in [0,1]");
  }
  if (cfg.inflow < 0.0) throw ConfigError("in-flow must be nonnegative");
  if (cfg.horizon <= 0) throw ConfigError("horizon must be positive");
  const long long warmup = cfg.warmup < 0 ? cfg.horizon / 10 : cfg.warmup;
  if (warmup >= cfg.horizon)
    throw ConfigError("warmup must be smaller than the horizon");

  if (cfg.mode == SimMode::analytic) return simulate_analytic(cfg, warmup);
  return simulate_network(cfg, warmup);
}

std::optional<double> mm1_mean_response(double arrival, double service) {
  if (service <= arrival) return std::nullopt;
  return 1.0 / (service - arrival);
}

}  // namespace fleetdim
