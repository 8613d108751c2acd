#include <cmath>

#include "doctest.h"
#include "ehglue/model.hpp"
#include "support.hpp"

using namespace ehglue;

namespace {

Scenario tiny() {
  Scenario s;
  s.durations = {1.0};
  s.energy = {1.0};
  s.data = {0.0};
  s.gains = Eigen::MatrixXd::Constant(1, 1, 1.0);
  s.battery_capacity = Capacity::finite(10.0);
  return s;
}

bool has(const ValidationReport& r, ErrorCode c) {
  for (const auto& i : r.issues)
    if (i.code == c) return true;
  return false;
}

}  // namespace

TEST_CASE("validation accepts well-formed scenarios") {
  CHECK(validate_scenario(tiny(), ProblemKind::throughput).ok());
  CHECK(validate_scenario(ref::golden({9, 8, 5}, 0.25), ProblemKind::throughput).ok());
  CHECK(validate_scenario(ref::golden_energy(0.25), ProblemKind::energy).ok());
}

TEST_CASE("validation rejects bad scenarios") {
  Scenario s = ref::golden({11, 8, 5}, 0.0);
  CHECK(has(validate_scenario(s, ProblemKind::throughput), ErrorCode::ArrivalExceedsCapacity));

  s = tiny();
  s.durations[0] = 0.0;
  CHECK(has(validate_scenario(s, ProblemKind::throughput), ErrorCode::NonPositiveDuration));

  s = tiny();
  s.gains(0, 0) = 0.0;
  CHECK(has(validate_scenario(s, ProblemKind::throughput), ErrorCode::GainNonPositive));

  s = tiny();
  s.energy[0] = -1.0;
  CHECK(has(validate_scenario(s, ProblemKind::throughput), ErrorCode::NegativeQuantity));

  s = tiny();
  CHECK(has(validate_scenario(s, ProblemKind::energy), ErrorCode::KindMismatch));

  s = tiny();
  s.energy.push_back(1.0);
  CHECK(has(validate_scenario(s, ProblemKind::throughput), ErrorCode::ShapeMismatch));

  CHECK_THROWS_AS(validate_scenario(s, ProblemKind::throughput).throw_if_failed(), Error);
}

TEST_CASE("rate") {
  CHECK(rate(1.0, 0.0) == 0.0);
  CHECK(rate(0.8, 1.18) == doctest::Approx(0.5 * std::log(1.944)).epsilon(1e-12));
  CHECK(rate(1.0, std::exp(2.0) - 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  // strictly increasing and concave
  for (double p = 0.0; p < 5.0; p += 0.25) {
    CHECK(rate(0.7, p + 0.25) > rate(0.7, p));
    CHECK(rate(0.7, p + 0.125) > 0.5 * (rate(0.7, p) + rate(0.7, p + 0.25)));
  }
}

TEST_CASE("scenario bookkeeping") {
  Scenario s = ref::golden_energy(0.0);
  CHECK(s.deadline() == doctest::Approx(10.0));
  CHECK(s.start_time(2) == doctest::Approx(7.5));
  CHECK(s.total_energy() == doctest::Approx(22.0));
  CHECK(s.total_data() == doctest::Approx(4.0));
  CHECK(with_unbounded_battery(ref::golden_throughput(0)).battery_capacity.is_unbounded());
  CHECK(with_processing_cost(s, 0.3).processing_cost == 0.3);
}

TEST_CASE("audit of the zero policy") {
  Scenario s = ref::golden({9, 8, 5}, 0.25);
  auto led = audit_policy(s, Policy::zeros(3, 4), ProblemKind::throughput);
  // 9 + 8 = 17 > 10 would overflow at the second arrival
  CHECK_FALSE(led.feasible());
  CHECK(led.violations[0].constraint == ConstraintId::BatteryOverflow);
  CHECK(led.delivered() == 0.0);

  Scenario u = with_unbounded_battery(ref::golden_energy(0.0));
  u.data = {0, 0, 0};
  auto l2 = audit_policy(u, Policy::zeros(3, 4), ProblemKind::energy);
  CHECK(l2.feasible());
  CHECK(l2.final_residual() == doctest::Approx(22.0));
}

TEST_CASE("audit flags overspending and early data") {
  Scenario s = tiny();
  Policy p = Policy::zeros(1, 1);
  p.power(0, 0) = 2.0;
  p.duration(0, 0) = 1.0;  // 2 uJ against 1 uJ harvested
  auto led = audit_policy(s, p, ProblemKind::throughput);
  REQUIRE_FALSE(led.feasible());
  CHECK(led.violations[0].constraint == ConstraintId::EnergyCausality);
  CHECK(led.violations[0].magnitude == doctest::Approx(1.0));

  Scenario e = with_unbounded_battery(tiny());
  e.data = {0.1};
  p.power(0, 0) = 1.0;
  auto l2 = audit_policy(e, p, ProblemKind::energy);  // sends 0.5 ln 2 > 0.1 nats
  bool data_flag = false;
  for (const auto& v : l2.violations) data_flag = data_flag || v.constraint == ConstraintId::DataCausality;
  CHECK(data_flag);
}

TEST_CASE("audit scales with durations") {
  Scenario s = ref::golden_throughput(0.25);
  Policy p = Policy::zeros(3, 4);
  p.power.setConstant(0.5);
  p.duration.setConstant(1.0);
  auto a = audit_policy(s, p, ProblemKind::throughput);
  Policy q = p;
  q.duration *= 0.5;
  auto b = audit_policy(s, q, ProblemKind::throughput);
  CHECK(b.consumed() == doctest::Approx(0.5 * a.consumed()));
  CHECK(b.delivered() == doctest::Approx(0.5 * a.delivered()));
}

TEST_CASE("canonical form and total duration") {
  Policy p = Policy::zeros(2, 2);
  p.duration(0, 1) = 1.0;  // zero power, positive duration
  p.power(1, 0) = 1.0;
  p.duration(1, 0) = 0.5;
  p.power(1, 1) = 1.0;
  p.duration(1, 1) = 0.75;
  Policy c = p.canonical();
  CHECK(c.duration(0, 1) == 0.0);
  CHECK(total_transmission_duration(c) == doctest::Approx(0.75));
  // a zero-power cell that is left on still pays the processing cost
  Scenario s = tiny();
  s.processing_cost = 0.5;
  Policy z = Policy::zeros(1, 1);
  z.duration(0, 0) = 1.0;
  CHECK(audit_policy(s, z, ProblemKind::throughput).consumed() == doctest::Approx(0.5));
}
