#include <cmath>
#include <random>

#include "doctest.h"
#include "ehglue/gluekernel.hpp"
#include "support.hpp"

using namespace ehglue;

TEST_CASE("v* against the reference root") {
  CHECK(v_star(1.0, 0.0) == 0.0);
  CHECK(v_star(1.0, 0.25) == doctest::Approx(ref::vstar(1.0, 0.25)).epsilon(1e-12));
  CHECK(v_star(1.0, 0.25) == doctest::Approx(0.786273).epsilon(1e-6));
  CHECK(v_star(2.0, 0.25) < v_star(1.0, 0.25));
  CHECK(glue_threshold(0.5, 0.25) == doctest::Approx(2.0 + v_star(0.5, 0.25)));
}

TEST_CASE("v* residual and monotonicity on grids") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> g(0.01, 10.0), e(0.0, 5.0);
  for (int n = 0; n < 2000; ++n) {
    double gg = g(rng), ee = e(rng), v = v_star(gg, ee);
    CHECK(std::abs((v + ee) - (1.0 / gg + v) * std::log1p(gg * v)) <= 1e-9);
  }
  double prev = -1.0;
  for (int j = 1; j <= 100; ++j) {
    double v = v_star(1.0, 0.05 * j);
    CHECK(v > prev);
    prev = v;
  }
  prev = INFINITY;
  for (int j = 1; j <= 100; ++j) {
    double v = v_star(0.1 * j, 0.5);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("glue pour: empty budget") {
  auto a = epoch_glue_pour({1.0, 0.5}, 2.0, 0.25, 0.0);
  CHECK(std::isnan(a.glue_level));
  CHECK(a.power == std::vector<double>{0.0, 0.0});
  CHECK(a.duration == std::vector<double>{0.0, 0.0});
  CHECK(epoch_glue_pour({1.0}, 2.0, 0.0, 1e-13).energy_used == 0.0);
}

TEST_CASE("glue pour: single channel bursty regime") {
  auto a = epoch_glue_pour({1.0}, 10.0, 0.25, 1.0);
  double v = ref::vstar(1.0, 0.25);
  CHECK(a.power[0] == doctest::Approx(v).epsilon(1e-10));
  CHECK(a.duration[0] == doctest::Approx(1.0 / (v + 0.25)).epsilon(1e-10));
  CHECK(a.duration[0] == doctest::Approx(0.9650).epsilon(1e-4));
  CHECK(a.energy_used == doctest::Approx(1.0));
}

TEST_CASE("glue pour: saturation is water-filling") {
  std::vector<double> g{1.2, 0.7, 0.3};
  auto a = epoch_glue_pour(g, 2.0, 0.0, 6.0);
  auto w = ref::waterfill(g, 2.0, 6.0);
  CHECK(a.data(g) == doctest::Approx(w.data).epsilon(1e-10));
  for (std::size_t k = 0; k < g.size(); ++k)
    if (a.power[k] > 0) CHECK(1.0 / g[k] + a.power[k] == doctest::Approx(w.level).epsilon(1e-10));
}

TEST_CASE("glue pour: epoch-one column of the golden example") {
  auto a = epoch_glue_pour({0.8, 0.35}, 3.5, 0.25, 9.0);
  // the rich channel saturates alone at the budget
  CHECK(a.duration[0] == doctest::Approx(3.5));
  CHECK(a.power[0] == doctest::Approx(9.0 / 3.5 - 0.25));
  CHECK(a.power[1] == 0.0);
}

TEST_CASE("glue pour: structural invariants on random instances") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> g(0.1, 3.0), e(0.0, 1.0), b(0.0, 12.0), t(0.2, 4.0);
  for (int n = 0; n < 500; ++n) {
    std::vector<double> gains{g(rng), g(rng), g(rng)};
    double eps = n % 5 == 0 ? 0.0 : e(rng), tau = t(rng), budget = b(rng);
    auto a = epoch_glue_pour(gains, tau, eps, budget);
    CHECK(a.energy_used <= budget + 1e-9);
    bool partial = false;
    for (std::size_t k = 0; k < 3; ++k) {
      if (a.power[k] <= 0.0) continue;
      CHECK(1.0 / gains[k] + a.power[k] == doctest::Approx(a.glue_level).epsilon(1e-9));
      CHECK(a.power[k] >= v_star(gains[k], eps) - 1e-9);
      if (a.duration[k] < tau - 1e-12) {
        partial = true;
        CHECK(a.power[k] == doctest::Approx(v_star(gains[k], eps)).epsilon(1e-9));
      }
      for (std::size_t j = 0; j < 3; ++j)
        if (gains[j] > gains[k]) CHECK(a.power[j] > 0.0);
    }
    if (partial) CHECK(a.energy_used == doctest::Approx(budget).epsilon(1e-9));
  }
}

TEST_CASE("glue pour: brute-force agreement on two channels") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> g(0.2, 2.0), b(0.05, 3.0);
  const double eps = 0.3, tau = 1.0;
  for (int n = 0; n < 10; ++n) {
    std::vector<double> gains{g(rng), g(rng)};
    double budget = b(rng);
    double glue = epoch_glue_pour(gains, tau, eps, budget).data(gains);
    // grid over the energy split and each channel's on-time
    double best = 0.0;
    for (int s = 0; s <= 200; ++s) {
      double e0 = budget * s / 200.0, e[2] = {e0, budget - e0};
      double tot = 0.0;
      for (int k = 0; k < 2; ++k) {
        double bestk = 0.0;
        for (int j = 1; j <= 200; ++j) {
          double th = tau * j / 200.0, p = e[k] / th - eps;
          if (p > 0) bestk = std::max(bestk, th * rate(gains[k], p));
        }
        tot += bestk;
      }
      best = std::max(best, tot);
    }
    CHECK(best <= glue + 1e-12);
    CHECK(glue - best <= 1e-3 * std::max(glue, 1e-3));
  }
}

TEST_CASE("glue cells: data and energy pours invert each other") {
  GlueCells gc({{0.9, 2.0}, {0.4, 1.0}, {1.5, 0.5}}, 0.2);
  for (double e : {0.1, 0.7, 2.0, 5.0}) {
    CellPour a = gc.pour_energy(e);
    CellPour b = gc.pour_data(a.data);
    CHECK(b.energy == doctest::Approx(a.energy).epsilon(1e-9));
  }
}

TEST_CASE("two-level reference") {
  const double eps = 0.25;
  double p1 = v_star(1.0, eps), p2 = v_star(0.5, eps);
  SUBCASE("bursty on the better epoch") {
    double E1 = 1.0 * (p1 + eps) / 2.0;
    Policy p = two_level_reference(1.0, 0.5, 1.0, 1.0, eps, E1);
    CHECK(p.duration(0, 0) == doctest::Approx(0.5));
    CHECK(p.power(0, 0) == doctest::Approx(p1));
    CHECK(p.duration(1, 0) == 0.0);
  }
  SUBCASE("case boundary is continuous") {
    Policy p = two_level_reference(1.0, 0.5, 1.0, 1.0, eps, p1 + eps);
    CHECK(p.duration(0, 0) == doctest::Approx(1.0));
    CHECK(p.power(0, 0) == doctest::Approx(p1));
  }
  SUBCASE("both epochs used with the second bursty") {
    // just past the level where the second epoch opens
    double E1 = (p2 + 2.0 - 1.0) + eps + 0.3 * (p2 + eps);
    Policy p = two_level_reference(1.0, 0.5, 1.0, 1.0, eps, E1);
    CHECK(p.duration(0, 0) == doctest::Approx(1.0));
    CHECK(p.power(0, 0) == doctest::Approx(p2 + 2.0 - 1.0));
    CHECK(p.power(1, 0) == doctest::Approx(p2));
    CHECK(p.duration(1, 0) == doctest::Approx(0.3));
  }
  SUBCASE("large budget is water-filling over both") {
    Policy p = two_level_reference(1.0, 0.5, 1.0, 1.0, eps, 10.0);
    CHECK(p.duration(1, 0) == doctest::Approx(1.0));
    CHECK(1.0 + p.power(0, 0) == doctest::Approx(2.0 + p.power(1, 0)));
    CHECK(p.power(0, 0) + p.power(1, 0) + 2 * eps == doctest::Approx(10.0));
  }
  CHECK_THROWS_AS(two_level_reference(0.5, 1.0, 1.0, 1.0, eps, 1.0), Error);
  try {
    two_level_reference(1.0, 1.0, 1.0, 1.0, eps, 1.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GainOrderViolation);
  }
}
