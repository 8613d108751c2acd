#include "ehglue/offline_throughput.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ehglue/gluekernel.hpp"

namespace ehglue {

namespace {

constexpr double kBatteryTol = 1e-6;

std::vector<Cell> epoch_cells(const Scenario& s, std::size_t i) {
  std::vector<Cell> cells;
  for (Eigen::Index k = 0; k < s.gains.cols(); ++k)
    cells.push_back({s.gains(static_cast<Eigen::Index>(i), k), s.durations[i]});
  return cells;
}

// H_i(xi): energy that must be in the battery at the start of epoch i for
// epoch i to run at glue level xi, counting what is carried forward to keep
// later epochs at the same level. Left-continuous in xi.
class BackwardChain {
 public:
  explicit BackwardChain(const Scenario& s)
      : E_(s.energy), cap_(s.battery_capacity.value()), g_(s.num_epochs(), 0.0) {
    for (std::size_t i = 0; i < s.num_epochs(); ++i)
      epochs_.emplace_back(epoch_cells(s, i), s.processing_cost);
    for (std::size_t i = s.num_epochs(); i-- > 0;) g_[i] = level(i, E_[i]).first;
  }

  double need(std::size_t i, double xi) const {
    return epochs_[i].energy_at(xi, false) + carry(i, xi);
  }

  double carry(std::size_t i, double xi) const {
    if (i + 1 >= epochs_.size() || !(xi > g_[i + 1])) return 0.0;
    return std::min(cap_ - E_[i + 1], need(i + 1, xi) - E_[i + 1]);
  }

  // Bracket [lo, hi] around sup{xi : need(i, xi) <= e}.
  std::pair<double, double> level(std::size_t i, double e) const {
    double lo = 0.0, hi = 1.0;
    while (need(i, hi) <= e) {
      lo = hi;
      hi *= 2.0;
    }
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (need(i, mid) <= e)
        lo = mid;
      else
        hi = mid;
    }
    return {lo, hi};
  }

  const GlueCells& cells(std::size_t i) const { return epochs_[i]; }

 private:
  std::vector<double> E_;
  double cap_;
  std::vector<GlueCells> epochs_;
  std::vector<double> g_;
};

}  // namespace

ThroughputSolution solve_offline_throughput(const Scenario& s) {
  validate_scenario(s, ProblemKind::throughput).throw_if_failed();
  const std::size_t I = s.num_epochs(), K = s.num_channels();
  const double cap = s.battery_capacity.value();

  ThroughputSolution sol;
  sol.policy = Policy::zeros(I, K);
  sol.glue_levels.assign(I, std::numeric_limits<double>::quiet_NaN());
  sol.battery_residual.assign(I, 0.0);

  const BackwardChain chain(s);
  double e = s.energy[0];
  for (std::size_t i = 0; i < I; ++i) {
    double spend = e;
    if (i + 1 < I) {
      const auto [lo, hi] = chain.level(i, e);
      const double a_lo = chain.cells(i).energy_at(lo, false);
      const double a_hi = chain.cells(i).energy_at(hi, false);
      const double x_lo = chain.carry(i, lo);
      // inside a jump the earlier epoch is filled first
      spend = std::clamp(e - x_lo, a_lo, std::max(a_lo, a_hi));
      spend = std::clamp(spend, std::max(0.0, e - (cap - s.energy[i + 1])), e);
    }
    const CellPour pour = chain.cells(i).pour_energy(spend);
    for (std::size_t k = 0; k < K; ++k) {
      sol.policy.power(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = pour.power[k];
      sol.policy.duration(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          pour.duration[k];
    }
    sol.glue_levels[i] = pour.glue_level;
    const double left = std::max(0.0, e - pour.energy);
    sol.battery_residual[i] = left;
    if (i + 1 < I) e = s.energy[i + 1] + left;
  }
  sol.policy = sol.policy.canonical();
  const auto d = sol.policy.epoch_data(s.gains);
  for (double x : d) sol.throughput += x;
  return sol;
}

StructureReport verify_throughput_structure(const Scenario& s, const Policy& pol, double tol) {
  StructureReport rep;
  check_epoch_structure(s, pol, tol, rep);
  const LedgerReport led = audit_policy(s, pol, ProblemKind::throughput, kBatteryTol);
  const auto levels = policy_glue_levels(s, pol);
  const double cap = s.battery_capacity.value();

  // clause (b) between consecutive active epochs
  std::size_t prev = s.num_epochs();
  for (std::size_t i = 0; i < s.num_epochs(); ++i) {
    if (std::isnan(levels[i])) continue;
    if (prev < i) {
      const double d = levels[i] - levels[prev];
      bool empty = false, full = false;
      for (std::size_t j = prev; j < i; ++j) {
        empty = empty || led.battery_residual[j] <= kBatteryTol;
        full = full || led.battery_residual[j] + s.energy[j + 1] >= cap - kBatteryTol;
      }
      std::ostringstream os;
      if (d > tol && !empty) {
        os << "level rises " << levels[prev] << " -> " << levels[i] << " without an empty battery";
        rep.issues.push_back({'b', prev, os.str()});
      } else if (d < -tol && !full) {
        os << "level falls " << levels[prev] << " -> " << levels[i] << " without a full battery";
        rep.issues.push_back({'b', prev, os.str()});
      }
    }
    prev = i;
  }

  if (s.total_energy() > 0.0 && led.final_residual() > kBatteryTol) {
    std::ostringstream os;
    os << "battery ends with " << led.final_residual() << " uJ";
    rep.issues.push_back({'d', s.num_epochs() - 1, os.str()});
  }
  return rep;
}

}  // namespace ehglue
