#include <cmath>
#include <limits>
#include <random>

#include <doctest.h>

#include "fleetdim/model.hpp"
#include "test_support.hpp"

using namespace fleetdim;
using testsup::sample_zone;
using testsup::uniform_small_zone;

TEST_SUITE("model") {

TEST_CASE("class rates combine direct dispatch with one-step charging") {
  const ZoneConfig z = sample_zone();
  DispatchPolicy q;
  q.probs = {1.0, 0.9877};
  const double lambda = 5.4;
  const ClassRates r = class_inflow_rates(z, q, lambda);

  // Class 1: no class-0 carry (q0 = 1) plus direct class-1 dispatch.
  const double want1 = lambda * (0.4 * (1.0 - 1.0) + 0.6 * 0.9877);
  // Class 2: class-1 carry plus central-station output.
  const double want2 = lambda * (0.6 * (1.0 - 0.9877) + 0.4 * 1.0);
  CHECK(r.rate(1) == doctest::Approx(want1).epsilon(1e-12));
  CHECK(r.rate(2) == doctest::Approx(want2).epsilon(1e-12));
  CHECK(r.total() == doctest::Approx(lambda).epsilon(1e-12));
}

TEST_CASE("rates sum to the in-flow and stay non-negative") {
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<int> n_draw(1, 8);
  std::uniform_real_distribution<double> lam_draw(0.0, 30.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = n_draw(gen);
    const ZoneConfig z = testsup::random_zone(gen, n);
    const DispatchPolicy q = testsup::random_policy(gen, n);
    const double lambda = lam_draw(gen);
    const ClassRates r = class_inflow_rates(z, q, lambda);
    REQUIRE(static_cast<int>(r.rates.size()) == n);
    double sum = 0.0;
    for (double x : r.rates) {
      REQUIRE(x >= -1e-15);
      sum += x;
    }
    REQUIRE(std::abs(sum - lambda) <= 1e-9 * std::max(1.0, lambda));
  }
}

TEST_CASE("mean response follows the single-server law") {
  ZoneConfig z = sample_zone();
  z.demand = {1.0, 1.0};
  ClassRates r;
  r.rates = {2.0, 1.0};
  const auto w1 = mean_response_time(z, r, 1);
  REQUIRE(w1.has_value());
  CHECK(*w1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(mean_response_time(z, r, 2).has_value());  // rate == demand

  r.rates = {2.5, 0.5};
  const auto faster = mean_response_time(z, r, 1);
  REQUIRE(faster.has_value());
  CHECK(*faster < *w1);                                   // decreasing in rate
  CHECK_FALSE(mean_response_time(z, r, 2).has_value());  // rate < demand
}

TEST_CASE("accepted points keep every class within the response limit") {
  std::mt19937_64 gen(23);
  std::uniform_int_distribution<int> n_draw(2, 6);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int accepted = 0;
  for (int trial = 0; trial < 40000 && accepted < 300; ++trial) {
    const int n = n_draw(gen);
    const ZoneConfig z = testsup::random_zone(gen, n);
    const DispatchPolicy q = testsup::random_policy(gen, n);
    const auto win = testsup::policy_inflow_window(z, q);
    if (!win.any) continue;
    const double lambda = win.lo + (win.hi - win.lo) * 0.99 * u01(gen);
    const FeasibilityReport rep = check_stability(z, q, lambda);
    if (!rep.feasible) continue;  // boundary rounding; not under test here
    ++accepted;
    const ClassRates r = class_inflow_rates(z, q, lambda);
    for (int i = 1; i <= n; ++i) {
      const auto w = mean_response_time(z, r, i);
      REQUIRE(w.has_value());
      REQUIRE(*w <= z.response_limit + 1e-9);
    }
  }
  REQUIRE(accepted >= 300);
}

TEST_CASE("violated response constraints show as positive slack") {
  const ZoneConfig z = sample_zone();
  // Everything dispatches; class 2 is then fed only by the central station.
  DispatchPolicy q;
  q.probs = {1.0, 1.0};
  const double lambda = 5.4;
  FeasibilityReport rep = check_stability(z, q, lambda);
  CHECK_FALSE(rep.feasible);
  // rate_2 = lambda*p0 = 2.16 against demand 2 + 1/T: slack 0.04.
  CHECK(rep.response_slack[1] ==
        doctest::Approx(2.0 + 0.2 - 5.4 * 0.4).epsilon(1e-12));
}

TEST_CASE("charging loads are measured against their capacities") {
  const ZoneConfig z = uniform_small_zone();  // pole capacity 1*2*2.5 = 5

  DispatchPolicy all_charge = DispatchPolicy::uniform(2, 0.0);
  FeasibilityReport rep = check_stability(z, all_charge, 8.0);
  CHECK_FALSE(rep.feasible);
  CHECK(rep.partial_charge_slack == doctest::Approx(8.0 - 5.0).epsilon(1e-12));

  DispatchPolicy central;
  central.probs = {1.0, 1.0};
  rep = check_stability(z, central, 8.0);
  // Full-station load 8*0.4 = 3.2 against rate 2.5.
  CHECK(rep.full_charge_slack == doctest::Approx(3.2 - 2.5).epsilon(1e-12));
  CHECK_FALSE(rep.feasible);
}

TEST_CASE("box violations are reported as distance, not clamped") {
  const ZoneConfig z = sample_zone();
  DispatchPolicy q;
  q.probs = {1.3, -0.2};
  const FeasibilityReport rep = check_stability(z, q, 6.0);
  CHECK(rep.box_violation == doctest::Approx(0.3).epsilon(1e-12));
  CHECK_FALSE(rep.feasible);
}

TEST_CASE("stability check leaves the in-flow bound to the solver layer") {
  const ZoneConfig z = sample_zone();
  const FeasibilityReport rep =
      check_stability(z, DispatchPolicy::uniform(2, 0.5), 6.0);
  CHECK(rep.inflow_bound_slack == -std::numeric_limits<double>::infinity());
}

TEST_CASE("zone validation lists every defect") {
  CHECK(validate_zone(sample_zone()).empty());

  ZoneConfig bad = sample_zone();
  bad.soc = {0.7, 0.5};
  auto problems = validate_zone(bad);
  REQUIRE_FALSE(problems.empty());
  bool mentions_sum = false;
  for (const auto& msg : problems)
    if (msg.find("1.2") != std::string::npos) mentions_sum = true;
  CHECK(mentions_sum);

  bad = sample_zone();
  bad.response_limit = 0.0;
  CHECK_FALSE(validate_zone(bad).empty());

  bad = sample_zone();
  bad.demand = {-1.0, 2.0};
  CHECK_FALSE(validate_zone(bad).empty());

  bad = sample_zone();
  bad.class_count = 0;
  CHECK_FALSE(validate_zone(bad).empty());

  bad = sample_zone();
  bad.demand = {1.0};
  CHECK_FALSE(validate_zone(bad).empty());

  bad = sample_zone();
  bad.poles = 0;
  CHECK_FALSE(validate_zone(bad).empty());

  bad = sample_zone();
  bad.full_charge_rate = 0.0;
  CHECK_FALSE(validate_zone(bad).empty());
}

TEST_CASE("margins scale with the capacity they guard") {
  const ZoneConfig z = sample_zone();
  CHECK(partial_charge_margin(z) ==
        doctest::Approx(1e-6 * 1 * 2 * 2.5).epsilon(1e-12));
  CHECK(full_charge_margin(z) == doctest::Approx(1e-6 * 2.5).epsilon(1e-12));
  CHECK(slack_tolerance(0.5) == doctest::Approx(1e-9).epsilon(1e-12));
  CHECK(slack_tolerance(3.0) == doctest::Approx(3e-9).epsilon(1e-12));
}

}  // TEST_SUITE
