#include "ehglue/offline_energy.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ehglue/gluekernel.hpp"

namespace ehglue {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kResidualTol = 1e-6;

struct Sweep {
  Policy policy;
  std::vector<double> levels;
  double delivered = 0.0;
  double consumed = 0.0;
  double undelivered = 0.0;
};

// Cells latest epoch first, so that cells sharing a threshold fill late
// epochs before early ones and prefix ceilings are loosest.
GlueCells segment_cells(const Scenario& s, std::size_t first, std::size_t last) {
  std::vector<Cell> cells;
  for (std::size_t i = last + 1; i-- > first;)
    for (Eigen::Index k = 0; k < s.gains.cols(); ++k)
      cells.push_back({s.gains(static_cast<Eigen::Index>(i), k), s.durations[i]});
  return GlueCells(std::move(cells), s.processing_cost);
}

double level_or_floor(const CellPour& pour, const GlueCells& gc) {
  return std::isnan(pour.glue_level) ? gc.min_threshold() : pour.glue_level;
}

// Forward sweep over constant-level segments. Each segment runs at the lowest
// level any prefix ceiling (energy or data available by epoch n) allows;
// the segment ends where that ceiling is hit. With open_end the data ceiling
// of the last epoch is dropped, so the sweep sends as much as energy allows.
Sweep forward_sweep(const Scenario& s, bool open_end) {
  const std::size_t I = s.num_epochs();
  const auto K = static_cast<Eigen::Index>(s.num_channels());
  Sweep out{Policy::zeros(I, s.num_channels()),
            std::vector<double>(I, std::numeric_limits<double>::quiet_NaN())};

  double battery = 0.0, buffer = 0.0;
  std::size_t start = 0;
  while (start < I) {
    struct Candidate {
      std::size_t n;
      double level;
      bool data_bound;
      double e_av, d_av;
    };
    std::vector<Candidate> cand;
    std::vector<double> e_prefix, d_prefix;  // available through epoch n
    double e_av = battery, d_av = buffer;
    double best = kInf;
    for (std::size_t n = start; n < I; ++n) {
      e_av += s.energy[n];
      d_av += s.data[n];
      e_prefix.push_back(e_av);
      d_prefix.push_back(d_av);
      const GlueCells gc = segment_cells(s, start, n);
      const double xi_e = level_or_floor(gc.pour_energy(e_av), gc);
      const double xi_d =
          (open_end && n + 1 == I) ? kInf : level_or_floor(gc.pour_data(d_av), gc);
      cand.push_back({n, std::min(xi_e, xi_d), xi_d <= xi_e, e_av, d_av});
      best = std::min(best, cand.back().level);
    }

    auto pour_for = [&](const Candidate& c) {
      const GlueCells gc = segment_cells(s, start, c.n);
      CellPour p = c.data_bound ? gc.pour_data(c.d_av) : gc.pour_energy(c.e_av);
      if (c.data_bound && p.energy > c.e_av) p = gc.pour_energy(c.e_av);
      return p;
    };
    // per-epoch (data, energy) of a pour laid out by segment_cells
    auto per_epoch = [&](const CellPour& p, std::size_t end, std::size_t i) {
      double d = 0.0, e = 0.0;
      std::size_t c = (end - i) * static_cast<std::size_t>(K);
      for (Eigen::Index k = 0; k < K; ++k, ++c) {
        d += p.duration[c] * rate(s.gains(static_cast<Eigen::Index>(i), k), p.power[c]);
        e += p.duration[c] * (p.power[c] + s.processing_cost);
      }
      return std::pair{d, e};
    };
    auto respects_prefixes = [&](const CellPour& p, std::size_t end) {
      double d = 0.0, e = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        auto [di, ei] = per_epoch(p, end, i);
        d += di;
        e += ei;
        double dcap = d_prefix[i - start], ecap = e_prefix[i - start];
        if (d > dcap + 1e-12 * (1.0 + dcap) || e > ecap + 1e-12 * (1.0 + ecap)) return false;
      }
      return true;
    };

    std::size_t end;
    CellPour pour;
    double best_e, best_d;
    if (!std::isfinite(best)) {
      // open end with nothing constraining: spend everything that arrives
      end = I - 1;
      best_e = cand.back().e_av;
      best_d = cand.back().d_av;
      pour = segment_cells(s, start, end).pour_energy(best_e);
    } else {
      // Several ends can share the minimum level when it sits on a cell
      // threshold; the longest one whose prefixes stay within the arrivals wins.
      const double tie = 1e-12 * std::max(1.0, std::abs(best));
      const Candidate* pick = nullptr;
      for (auto it = cand.rbegin(); it != cand.rend(); ++it) {
        if (it->level > best + tie) continue;
        CellPour p = pour_for(*it);
        pick = &*it;
        pour = std::move(p);
        if (respects_prefixes(pour, it->n)) break;
      }
      end = pick->n;
      best_e = pick->e_av;
      best_d = pick->d_av;
    }

    std::size_t c = 0;
    for (std::size_t i = end + 1; i-- > start;) {
      for (Eigen::Index k = 0; k < K; ++k, ++c) {
        out.policy.power(static_cast<Eigen::Index>(i), k) = pour.power[c];
        out.policy.duration(static_cast<Eigen::Index>(i), k) = pour.duration[c];
      }
    }
    out.delivered += pour.data;
    out.consumed += pour.energy;
    battery = std::max(0.0, best_e - pour.energy);
    buffer = std::max(0.0, best_d - pour.data);
    start = end + 1;
  }
  out.undelivered = buffer;
  out.policy = out.policy.canonical();
  out.levels = policy_glue_levels(s, out.policy);
  return out;
}

}  // namespace

FeasibilityReport check_feasibility(const Scenario& s) {
  validate_scenario(s, ProblemKind::energy).throw_if_failed();
  const Sweep sw = forward_sweep(s, true);
  FeasibilityReport rep;
  rep.slack = sw.delivered - s.total_data();
  rep.feasible = rep.slack >= -kFeasibilityTol;
  return rep;
}

EnergySolution solve_offline_energy(const Scenario& s) {
  validate_scenario(s, ProblemKind::energy).throw_if_failed();
  const Sweep sw = forward_sweep(s, false);
  if (sw.undelivered > kFeasibilityTol) {
    std::ostringstream os;
    os << "cannot deliver all data by the deadline (" << sw.undelivered << " nats short)";
    throw Error(ErrorCode::Infeasible, os.str());
  }
  EnergySolution sol;
  sol.policy = sw.policy;
  sol.glue_levels = sw.levels;
  sol.remaining_energy = s.total_energy() - sw.consumed;
  return sol;
}

StructureReport verify_energy_structure(const Scenario& s, const Policy& pol, double tol) {
  StructureReport rep;
  check_epoch_structure(s, pol, tol, rep);
  const LedgerReport led = audit_policy(s, pol, ProblemKind::energy, kResidualTol);
  const auto levels = policy_glue_levels(s, pol);

  double arrived = 0.0;
  std::vector<double> buffer(s.num_epochs());
  for (std::size_t i = 0; i < s.num_epochs(); ++i) {
    arrived += s.data[i];
    buffer[i] = arrived - led.cumulative_data[i];
  }

  std::size_t prev = s.num_epochs();
  for (std::size_t i = 0; i < s.num_epochs(); ++i) {
    if (std::isnan(levels[i])) continue;
    if (prev < i) {
      const double d = levels[i] - levels[prev];
      bool tight = false;
      for (std::size_t j = prev; j < i; ++j) {
        tight = tight || (led.battery_residual[j] <= kResidualTol && s.energy[j + 1] > 0.0);
        tight = tight || (buffer[j] <= kResidualTol && s.data[j + 1] > 0.0);
      }
      std::ostringstream os;
      if (d < -tol) {
        os << "level falls " << levels[prev] << " -> " << levels[i];
        rep.issues.push_back({'b', prev, os.str()});
      } else if (d > tol && !tight) {
        os << "level rises " << levels[prev] << " -> " << levels[i]
           << " with neither battery nor buffer empty";
        rep.issues.push_back({'b', prev, os.str()});
      }
    }
    prev = i;
  }

  if (std::abs(led.delivered() - s.total_data()) > kResidualTol) {
    std::ostringstream os;
    os << "delivers " << led.delivered() << " of " << s.total_data() << " nats";
    rep.issues.push_back({'d', s.num_epochs() - 1, os.str()});
  }
  return rep;
}

}  // namespace ehglue
