#include <cmath>
#include <random>

#include "doctest.h"
#include "ehglue/gluekernel.hpp"
#include "ehglue/harness.hpp"
#include "ehglue/offline_energy.hpp"
#include "ehglue/offline_throughput.hpp"
#include "ehglue/online.hpp"
#include "support.hpp"

using namespace ehglue;

namespace {

OnlineState state(double battery, double buffer, std::vector<double> gains, double horizon) {
  OnlineState st;
  st.battery = battery;
  st.data_buffer = buffer;
  st.gains = std::move(gains);
  st.remaining_horizon = horizon;
  return st;
}

}  // namespace

TEST_CASE("myopic throughput step") {
  auto a = online_throughput_step(state(0.0, 0.0, {1.0, 0.5}, 10.0), 1.0, 10.0);
  for (double p : a.power) CHECK(p == 0.0);
  auto b = online_throughput_step(state(1.0, 0.0, {1.0}, 10.0), 1.0, 10.0);
  double v = ref::vstar(1.0, 1.0);
  CHECK(b.power[0] == doctest::Approx(v).epsilon(1e-9));
  CHECK(b.duration[0] == doctest::Approx(1.0 / (v + 1.0)).epsilon(1e-9));
}

TEST_CASE("myopic energy step and its fallback") {
  bool short_of = true;
  auto a = online_energy_step(state(100.0, 0.5, {1.0, 0.4}, 5.0), 0.5, &short_of);
  CHECK_FALSE(short_of);
  double sent = 0.0, used = 0.0;
  for (std::size_t k = 0; k < 2; ++k) {
    sent += a.duration[k] * rate(k == 0 ? 1.0 : 0.4, a.power[k]);
    if (a.duration[k] > 0) used += a.duration[k] * (a.power[k] + 0.5);
  }
  CHECK(sent == doctest::Approx(0.5).epsilon(1e-9));
  auto b = online_energy_step(state(0.2, 5.0, {1.0, 0.4}, 5.0), 0.5, &short_of);
  CHECK(short_of);
  double spent = 0.0;
  for (std::size_t k = 0; k < 2; ++k)
    if (b.duration[k] > 0) spent += b.duration[k] * (b.power[k] + 0.5);
  CHECK(spent == doctest::Approx(0.2).epsilon(1e-9));
}

TEST_CASE("replaying an offline policy reproduces its ledger") {
  Scenario s = ref::golden_throughput(0.25);
  auto sol = solve_offline_throughput(s);
  auto tr = simulate(s, replay_policy(sol.policy), ProblemKind::throughput);
  CHECK(tr.throughput == doctest::Approx(sol.throughput).epsilon(1e-9));
  CHECK(tr.overflow == doctest::Approx(0.0).epsilon(0).scale(1).epsilon(1e-9));
  CHECK(tr.conservation_error <= 1e-9);

  Scenario e = ref::golden_energy(0.25);
  auto es = solve_offline_energy(e);
  auto te = simulate(e, replay_policy(es.policy), ProblemKind::energy);
  CHECK(te.feasible);
  CHECK(te.remaining_energy == doctest::Approx(es.remaining_energy).epsilon(1e-9));
}

TEST_CASE("zero arrivals") {
  Scenario s = ref::golden({0, 0, 0}, 0.25);
  s.energy[0] = 0.0;
  auto tr = simulate(s, [](const OnlineState& st) { return online_throughput_step(st, 0.25, 10.0); },
                     ProblemKind::throughput);
  CHECK(tr.throughput == 0.0);
  CHECK(tr.remaining_energy == 0.0);
}

TEST_CASE("simulator conservation on random fading runs") {
  FadingParams p;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    Scenario s = gen_fading_scenario(seed, p);
    auto tr = simulate(s, [](const OnlineState& st) { return online_throughput_step(st, 1.0, 10.0); },
                       ProblemKind::throughput);
    CHECK(tr.conservation_error <= 1e-9);
    CHECK(tr.throughput <= solve_offline_throughput(s).throughput + 1e-9);
  }
}

TEST_CASE("one-block DP equals the myopic rule") {
  DpConfig cfg;
  cfg.blocks = 1;
  DpPolicy dp = dp_solve(cfg);
  FadingParams p;
  p.blocks = 1;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    Scenario s = gen_fading_scenario(seed, p);
    double a = simulate(s, dp.step(), ProblemKind::throughput).throughput;
    double b = simulate(s, [](const OnlineState& st) { return online_throughput_step(st, 1.0, 10.0); },
                        ProblemKind::throughput)
                   .throughput;
    CHECK(a == doctest::Approx(b).epsilon(1e-9));
  }
}

TEST_CASE("DP on a deterministic model tracks the offline optimum") {
  DpConfig cfg;
  cfg.blocks = 4;
  cfg.channels = 1;
  cfg.gain_values = {1.0};
  cfg.energy_min = cfg.energy_max = 4.0;
  DpPolicy dp = dp_solve(cfg);
  Scenario s;
  s.durations.assign(4, 1.0);
  s.energy.assign(4, 4.0);
  s.data.assign(4, 0.0);
  s.gains = Eigen::MatrixXd::Constant(4, 1, 1.0);
  s.processing_cost = 1.0;
  s.battery_capacity = Capacity::finite(10.0);
  double off = solve_offline_throughput(s).throughput;
  double got = simulate(s, dp.step(), ProblemKind::throughput).throughput;
  CHECK(got <= off + 1e-9);
  CHECK(got >= 0.98 * off);
  CHECK(dp.expected_value(0, 0.0) == doctest::Approx(off).epsilon(0.03));
}

TEST_CASE("DP refuses an oversized state space") {
  DpConfig cfg;
  cfg.battery_capacity = 1e6;
  cfg.battery_step = 1e-3;
  cfg.state_cap = 1000;
  try {
    dp_solve(cfg);
    FAIL("expected StateSpaceTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::StateSpaceTooLarge);
  }
}
