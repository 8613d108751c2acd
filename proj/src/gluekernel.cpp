#include "ehglue/gluekernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ehglue {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kMinBudget = 1e-12;

double root_residual(double p, double gamma, double eps) {
  return (1.0 / gamma + p) * std::log1p(gamma * p) - (p + eps);
}

}  // namespace

double v_star(double gamma, double eps) {
  if (eps <= 0.0) return 0.0;
  // residual is -eps at 0 and strictly increasing
  double lo = 0.0, hi = 1.0;
  while (root_residual(hi, gamma, eps) < 0.0) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (root_residual(mid, gamma, eps) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double glue_threshold(double gamma, double eps) { return 1.0 / gamma + v_star(gamma, eps); }

GlueCells::GlueCells(std::vector<Cell> cells, double eps) : cells_(std::move(cells)), eps_(eps) {
  const std::size_t n = cells_.size();
  vstar_.resize(n);
  thr_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    vstar_[i] = ehglue::v_star(cells_[i].gain, eps);
    thr_[i] = 1.0 / cells_[i].gain + vstar_[i];
  }
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::stable_sort(order_.begin(), order_.end(),
                   [&](std::size_t a, std::size_t b) { return thr_[a] < thr_[b]; });
}

double GlueCells::min_threshold() const {
  return order_.empty() ? std::numeric_limits<double>::infinity() : thr_[order_.front()];
}

double GlueCells::energy_at(double xi, bool upper) const {
  double e = 0.0;
  for (std::size_t i = 0; i < cells_.size(); ++i)
    if (thr_[i] < xi || (upper && thr_[i] == xi))
      e += cells_[i].tau * (xi - 1.0 / cells_[i].gain + eps_);
  return e;
}

double GlueCells::data_at(double xi, bool upper) const {
  double d = 0.0;
  for (std::size_t i = 0; i < cells_.size(); ++i)
    if (thr_[i] < xi || (upper && thr_[i] == xi))
      d += 0.5 * cells_[i].tau * std::log(cells_[i].gain * xi);
  return d;
}

CellPour GlueCells::finish(double xi, std::size_t filled, std::size_t partial,
                           double partial_theta) const {
  const std::size_t n = cells_.size();
  CellPour out{xi, std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (std::size_t r = 0; r < filled; ++r) {
    const std::size_t i = order_[r];
    const double p = std::max(0.0, xi - 1.0 / cells_[i].gain);
    if (p <= 0.0) continue;
    out.power[i] = p;
    out.duration[i] = cells_[i].tau;
  }
  if (partial < n && partial_theta > 0.0 && vstar_[partial] > 0.0) {
    out.power[partial] = vstar_[partial];
    out.duration[partial] = std::min(partial_theta, cells_[partial].tau);
  }
  for (std::size_t i = 0; i < n; ++i) {
    out.energy += out.duration[i] * (out.power[i] + (out.power[i] > 0.0 ? eps_ : 0.0));
    out.data += out.duration[i] * rate(cells_[i].gain, out.power[i]);
  }
  return out;
}

CellPour GlueCells::pour_energy(double budget) const {
  const std::size_t n = cells_.size();
  if (!(budget >= kMinBudget) || n == 0)
    return CellPour{kNaN, std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};

  // F = cells already full; energy of F at level xi is xi*S - C
  double S = 0.0, C = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t i = order_[r];
    const double h = thr_[i];
    const double base = S > 0.0 ? h * S - C : 0.0;
    if (S > 0.0 && budget <= base) return finish((budget + C) / S, r, n, 0.0);
    const double cap = cells_[i].tau * (vstar_[i] + eps_);
    if (cap > 0.0 && budget <= base + cap) {
      if (budget >= base + cap) return finish(h, r + 1, n, 0.0);
      return finish(h, r, i, (budget - base) / (vstar_[i] + eps_));
    }
    S += cells_[i].tau;
    C += cells_[i].tau * (1.0 / cells_[i].gain - eps_);
  }
  return finish((budget + C) / S, n, n, 0.0);
}

CellPour GlueCells::pour_data(double target) const {
  const std::size_t n = cells_.size();
  if (!(target >= kMinBudget) || n == 0)
    return CellPour{kNaN, std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};

  // data of F at level xi is (S ln xi + L)/2
  double S = 0.0, L = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t i = order_[r];
    const double h = thr_[i];
    const double base = S > 0.0 ? 0.5 * (S * std::log(h) + L) : 0.0;
    if (S > 0.0 && target <= base) return finish(std::exp((2.0 * target - L) / S), r, n, 0.0);
    const double r_star = rate(cells_[i].gain, vstar_[i]);
    const double cap = cells_[i].tau * r_star;
    if (cap > 0.0 && target <= base + cap) {
      if (target >= base + cap) return finish(h, r + 1, n, 0.0);
      return finish(h, r, i, (target - base) / r_star);
    }
    S += cells_[i].tau;
    L += cells_[i].tau * std::log(cells_[i].gain);
  }
  return finish(std::exp((2.0 * target - L) / S), n, n, 0.0);
}

double GlueAllocation::data(const std::vector<double>& gains) const {
  double d = 0.0;
  for (std::size_t k = 0; k < power.size(); ++k) d += duration[k] * rate(gains[k], power[k]);
  return d;
}

GlueAllocation epoch_glue_pour(const std::vector<double>& gains, double tau, double eps,
                               double budget) {
  std::vector<Cell> cells;
  cells.reserve(gains.size());
  for (double g : gains) cells.push_back({g, tau});
  const GlueCells gc(std::move(cells), eps);
  CellPour pour = gc.pour_energy(budget);

  GlueAllocation out;
  out.glue_level = pour.glue_level;
  out.v_star.resize(gains.size());
  for (std::size_t k = 0; k < gains.size(); ++k) out.v_star[k] = gc.v_star(k);
  out.power = std::move(pour.power);
  out.duration = std::move(pour.duration);
  out.energy_used = pour.energy;
  return out;
}

Policy two_level_reference(double gamma1, double gamma2, double tau1, double tau2, double eps,
                           double E1) {
  if (!(gamma1 > gamma2) || !(gamma2 > 0.0))
    throw Error(ErrorCode::GainOrderViolation, "two_level_reference needs gamma1 > gamma2 > 0");

  Policy pol = Policy::zeros(2, 1);
  if (E1 <= 0.0) return pol;
  const double p1s = v_star(gamma1, eps);
  const double p2s = v_star(gamma2, eps);
  const double shift = p2s + 1.0 / gamma2 - 1.0 / gamma1;

  if (E1 <= tau1 * (p1s + eps)) {
    pol.duration(0, 0) = E1 / (p1s + eps);
    pol.power(0, 0) = p1s;
  } else if (E1 <= tau1 * (shift + eps)) {
    pol.duration(0, 0) = tau1;
    pol.power(0, 0) = E1 / tau1 - eps;
  } else if (E1 <= tau1 * (shift + eps) + tau2 * (p2s + eps)) {
    pol.duration(0, 0) = tau1;
    pol.power(0, 0) = shift;
    pol.duration(1, 0) = (E1 - tau1 * (shift + eps)) / (p2s + eps);
    pol.power(1, 0) = p2s;
  } else {
    // classical water-filling with both slots full
    const double level = (E1 + tau1 / gamma1 + tau2 / gamma2 - eps * (tau1 + tau2)) / (tau1 + tau2);
    pol.duration(0, 0) = tau1;
    pol.duration(1, 0) = tau2;
    pol.power(0, 0) = level - 1.0 / gamma1;
    pol.power(1, 0) = level - 1.0 / gamma2;
  }
  return pol.canonical();
}

}  // namespace ehglue
