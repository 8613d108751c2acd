#pragma once

// Test-only reference implementations. Nothing here calls into the solvers
// it is used to check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "ehglue/model.hpp"

namespace ref {

using ehglue::Scenario;

inline Scenario golden(std::vector<double> energy, double eps, bool finite_battery = true) {
  Scenario s;
  s.durations = {3.5, 4.0, 2.5};
  s.energy = std::move(energy);
  s.data = {0.5, 2.0, 1.5};
  s.gains.resize(3, 4);
  s.gains << 0.8, 0.35, 0.6, 0.55,
             0.55, 0.9, 0.4, 0.35,
             0.45, 0.6, 0.5, 0.4;
  s.processing_cost = eps;
  s.battery_capacity = finite_battery ? ehglue::Capacity::finite(10.0) : ehglue::Capacity::unbounded();
  return s;
}

inline Scenario golden_throughput(double eps) { return golden({9, 9, 7}, eps); }
inline Scenario golden_energy(double eps) { return golden({9, 8, 5}, eps, false); }

// Root of ln(1 + g p) = (p + eps) / (1/g + p) by plain bisection.
inline double vstar(double g, double eps) {
  if (eps <= 0.0) return 0.0;
  auto f = [&](double p) { return std::log1p(g * p) - (p + eps) / (1.0 / g + p); };
  double lo = 0.0, hi = 1.0;
  while (f(hi) < 0.0) hi *= 2.0;
  for (int it = 0; it < 400 && hi - lo > 1e-15 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Classical water-filling of `energy` over one epoch (no processing cost).
struct Fill {
  double level;
  double data;
};

inline Fill waterfill(const std::vector<double>& gains, double tau, double energy) {
  double floor_ = std::numeric_limits<double>::infinity();
  for (double g : gains) floor_ = std::min(floor_, 1.0 / g);
  auto used = [&](double nu) {
    double e = 0.0;
    for (double g : gains) e += tau * std::max(nu - 1.0 / g, 0.0);
    return e;
  };
  double lo = floor_, hi = floor_ + 1.0;
  while (used(hi) < energy) hi = floor_ + 2.0 * (hi - floor_);
  for (int it = 0; it < 300; ++it) {
    double mid = 0.5 * (lo + hi);
    (used(mid) < energy ? lo : hi) = mid;
  }
  double nu = 0.5 * (lo + hi), d = 0.0;
  for (double g : gains) d += 0.5 * tau * std::max(std::log(g * nu), 0.0);
  return {nu, d};
}

inline std::vector<double> row(const Scenario& s, std::size_t i) {
  std::vector<double> g;
  for (Eigen::Index k = 0; k < s.gains.cols(); ++k) g.push_back(s.gains(static_cast<Eigen::Index>(i), k));
  return g;
}

// eps = 0 throughput optimum with a finite battery. Coordinate ascent on the
// cumulative consumption S_i: each S_i sits where the levels of epochs i and
// i+1 meet, clamped to its causality / overflow / monotonicity interval.
inline double directional_waterfill(const Scenario& s) {
  const std::size_t n = s.num_epochs();
  const double cap = s.battery_capacity.value();
  std::vector<double> U(n), L(n), S(n + 1, 0.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += s.energy[i];
    U[i] = acc;
  }
  for (std::size_t i = 0; i + 1 < n; ++i) L[i] = std::isinf(cap) ? -1.0 : U[i + 1] - cap;
  // start from "spend at arrival", which is feasible
  for (std::size_t i = 0; i < n; ++i) S[i + 1] = U[i];
  auto level = [&](std::size_t i, double e) { return waterfill(row(s, i), s.durations[i], std::max(e, 0.0)).level; };
  for (int sweep = 0; sweep < 20000; ++sweep) {
    double moved = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
      double lo = std::max(L[i - 1], S[i - 1]), hi = std::min(U[i - 1], S[i + 1]);
      if (hi <= lo) {
        moved = std::max(moved, std::abs(S[i] - lo));
        S[i] = lo;
        continue;
      }
      auto g = [&](double x) { return level(i - 1, x - S[i - 1]) - level(i, S[i + 1] - x); };
      double x;
      if (g(lo) >= 0.0) x = lo;
      else if (g(hi) <= 0.0) x = hi;
      else {
        double a = lo, b = hi;
        for (int it = 0; it < 200; ++it) {
          double m = 0.5 * (a + b);
          (g(m) < 0.0 ? a : b) = m;
        }
        x = 0.5 * (a + b);
      }
      moved = std::max(moved, std::abs(S[i] - x));
      S[i] = x;
    }
    if (moved < 1e-14) break;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    total += waterfill(row(s, i), s.durations[i], std::max(S[i + 1] - S[i], 0.0)).data;
  return total;
}

// Random small instance; gains in [0.2, 2] per uW.
inline Scenario random_scenario(std::mt19937_64& rng, std::size_t max_epochs, std::size_t max_channels,
                                bool finite_battery, double eps) {
  std::uniform_int_distribution<std::size_t> ni(1, max_epochs), nk(1, max_channels);
  std::uniform_real_distribution<double> tau(0.5, 4.0), gain(0.2, 2.0), en(0.0, 8.0), dat(0.0, 1.5);
  std::size_t n = ni(rng), k = nk(rng);
  Scenario s;
  s.gains.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  double emax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s.durations.push_back(tau(rng));
    s.energy.push_back(en(rng));
    s.data.push_back(dat(rng));
    emax = std::max(emax, s.energy.back());
    for (std::size_t c = 0; c < k; ++c) s.gains(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = gain(rng);
  }
  s.energy[0] = std::max(s.energy[0], 0.5);
  emax = std::max(emax, 0.5);
  s.processing_cost = eps;
  s.battery_capacity = finite_battery
                           ? ehglue::Capacity::finite(emax * std::uniform_real_distribution<double>(1.0, 2.0)(rng))
                           : ehglue::Capacity::unbounded();
  return s;
}

}  // namespace ref
