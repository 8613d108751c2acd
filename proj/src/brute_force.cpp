#include <algorithm>
#include <cmath>
#include <numeric>

#include "ehglue/gluekernel.hpp"
#include "ehglue/oracle.hpp"

namespace ehglue {

namespace {

struct Option {
  double energy;
  double data;
  double power;
  double duration;
};

// Options sorted by energy, keeping only those that send strictly more data
// than every cheaper option.
std::vector<Option> frontier(std::vector<Option> opts) {
  std::sort(opts.begin(), opts.end(), [](const Option& a, const Option& b) {
    return a.energy < b.energy || (a.energy == b.energy && a.data > b.data);
  });
  std::vector<Option> out;
  for (const auto& o : opts)
    if (out.empty() || o.data > out.back().data) out.push_back(o);
  return out;
}

}  // namespace

BruteForceResult brute_force_small(const Scenario& s, ProblemKind kind, double grid_step,
                                   std::size_t max_evaluations) {
  if (kind == ProblemKind::tct)
    throw Error(ErrorCode::KindMismatch, "grid search covers throughput and energy only");
  validate_scenario(s, kind).throw_if_failed();
  const std::size_t I = s.num_epochs(), K = s.num_channels(), n = I * K;
  if (n > 4) throw Error(ErrorCode::TooLarge, "grid search needs I*K <= 4");
  if (!(grid_step > 0.0 && grid_step <= 1.0))
    throw Error(ErrorCode::ValidationFailed, "grid step must lie in (0, 1]");

  const double eps = s.processing_cost;
  const double e_total = s.total_energy();
  const double d_total = s.total_data();
  const auto steps = static_cast<std::size_t>(std::llround(1.0 / grid_step));

  std::vector<double> e_cum(I), d_cum(I);
  std::partial_sum(s.energy.begin(), s.energy.end(), e_cum.begin());
  std::partial_sum(s.data.begin(), s.data.end(), d_cum.begin());
  const double cap = s.battery_capacity.value();
  const double tol = 1e-12 * (1.0 + e_total);

  // prefix rows that bound a prefix from the "wrong" side (energy from
  // below, data from above) make per-cell dominance pruning unsafe unless the
  // prefix is a single cell.
  bool prunable = true;
  for (std::size_t i = 0; i + 1 < I; ++i) {
    const bool awkward = kind == ProblemKind::throughput
                             ? (e_cum[i + 1] - cap > 0.0)
                             : true;
    if (awkward && !(i == 0 && K == 1)) prunable = false;
  }

  // per-cell option lists
  std::vector<std::vector<Option>> opts(n);
  std::size_t combos = 1;
  for (std::size_t c = 0; c < n; ++c) {
    const std::size_t i = c / K, k = c % K;
    const double g = s.gains(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
    const double tau = s.durations[i];
    // an optimal cell is either partial at v* or full, so its power is bounded
    const double p_max = std::max(v_star(g, eps), e_total / tau) + grid_step;
    std::size_t count = 1;
    for (std::size_t j = 1; j <= steps; ++j) {
      const double th = tau * static_cast<double>(j) / static_cast<double>(steps);
      count += static_cast<std::size_t>(std::min(p_max, std::max(0.0, e_total / th - eps)) / grid_step);
    }
    if (count > max_evaluations) throw Error(ErrorCode::TooLarge, "per-cell grid too large");

    auto& list = opts[c];
    list.reserve(count);
    list.push_back({0.0, 0.0, 0.0, 0.0});
    for (std::size_t j = 1; j <= steps; ++j) {
      const double th = tau * static_cast<double>(j) / static_cast<double>(steps);
      for (std::size_t l = 1;; ++l) {
        const double p = grid_step * static_cast<double>(l);
        if (p > p_max) break;
        const double e = th * (p + eps);
        if (e > e_total + tol) break;
        const Option o{e, th * rate(g, p), p, th};
        // single-cell prefix rows act as box constraints
        if (c == 0 && K == 1 && I > 1) {
          if (e > e_cum[0] + tol) continue;
          if (kind == ProblemKind::throughput && e < e_cum[1] - cap - tol) continue;
          if (kind != ProblemKind::throughput && o.data > d_cum[0] + tol) continue;
        }
        list.push_back(o);
      }
    }
    if (prunable) list = frontier(std::move(list));
    if (c + 1 < n) {
      combos *= list.size();
      if (combos > max_evaluations) throw Error(ErrorCode::TooLarge, "grid search too large");
    }
  }

  // last cell: sorted lookup
  auto& last = opts[n - 1];
  std::vector<double> best_val;
  std::vector<std::size_t> best_idx;
  if (kind == ProblemKind::throughput) {
    std::sort(last.begin(), last.end(),
              [](const Option& a, const Option& b) { return a.energy < b.energy; });
    best_val.resize(last.size());
    best_idx.resize(last.size());
    for (std::size_t j = 0; j < last.size(); ++j) {
      const bool better = j == 0 || last[j].data > best_val[j - 1];
      best_val[j] = better ? last[j].data : best_val[j - 1];
      best_idx[j] = better ? j : best_idx[j - 1];
    }
  } else {
    std::sort(last.begin(), last.end(),
              [](const Option& a, const Option& b) { return a.data < b.data; });
    best_val.resize(last.size());
    best_idx.resize(last.size());
    for (std::size_t j = last.size(); j-- > 0;) {
      const bool better = j + 1 == last.size() || last[j].energy < best_val[j + 1];
      best_val[j] = better ? last[j].energy : best_val[j + 1];
      best_idx[j] = better ? j : best_idx[j + 1];
    }
  }

  BruteForceResult res;
  res.objective = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> pick(n, 0), best_pick;
  std::size_t best_last = 0;

  auto epoch_ok = [&](std::size_t i, double e, double d) {
    if (e > e_cum[i] + tol) return false;
    if (i + 1 < I) {
      if (kind == ProblemKind::throughput && e < e_cum[i + 1] - cap - tol) return false;
      if (kind != ProblemKind::throughput && d > d_cum[i] + tol) return false;
    }
    return true;
  };

  auto finish = [&](double e, double d) {
    ++res.evaluated;
    std::size_t j;
    double value;
    if (kind == ProblemKind::throughput) {
      const double room = e_total - e + tol;
      auto it = std::upper_bound(last.begin(), last.end(), room,
                                 [](double r, const Option& o) { return r < o.energy; });
      if (it == last.begin()) return;
      j = best_idx[static_cast<std::size_t>(it - last.begin()) - 1];
      value = d + last[j].data;
    } else {
      const double need = d_total - d - tol;
      auto it = std::lower_bound(last.begin(), last.end(), need,
                                 [](const Option& o, double r) { return o.data < r; });
      if (it == last.end()) return;
      j = best_idx[static_cast<std::size_t>(it - last.begin())];
      if (e + last[j].energy > e_total + tol) return;
      value = e_total - e - last[j].energy;
    }
    if (value > res.objective) {
      res.objective = value;
      best_pick = pick;
      best_last = j;
    }
  };

  // depth-first over all cells but the last
  std::vector<double> se(n + 1, 0.0), sd(n + 1, 0.0);
  std::size_t c = 0;
  if (n == 1) {
    finish(0.0, 0.0);
  } else {
    pick[0] = 0;
    while (true) {
      const Option& o = opts[c][pick[c]];
      se[c + 1] = se[c] + o.energy;
      sd[c + 1] = sd[c] + o.data;
      bool ok = se[c + 1] <= e_total + tol;
      if (ok && (c + 1) % K == 0) ok = epoch_ok(c / K, se[c + 1], sd[c + 1]);
      if (ok && c + 2 == n) {
        finish(se[c + 1], sd[c + 1]);
      } else if (ok) {
        ++c;
        pick[c] = 0;
        continue;
      }
      // advance
      while (true) {
        if (++pick[c] < opts[c].size()) break;
        if (c == 0) goto done;
        --c;
      }
    }
  }
done:
  if (!std::isfinite(res.objective))
    throw Error(ErrorCode::InfeasibleInstance, "no grid point satisfies the constraints");

  res.policy = Policy::zeros(I, K);
  for (std::size_t cc = 0; cc < n; ++cc) {
    const Option& o = cc + 1 < n ? opts[cc][best_pick[cc]] : last[best_last];
    res.policy.power(static_cast<Eigen::Index>(cc / K), static_cast<Eigen::Index>(cc % K)) = o.power;
    res.policy.duration(static_cast<Eigen::Index>(cc / K), static_cast<Eigen::Index>(cc % K)) =
        o.duration;
  }

  // rounding the optimum to the grid moves each cell by at most one step in
  // power and duration; bound the objective change with the local slopes
  double gap = 0.0;
  for (std::size_t cc = 0; cc < n; ++cc) {
    const std::size_t i = cc / K, k = cc % K;
    const double g = s.gains(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
    const double tau = s.durations[i];
    const double p_hi = std::max(v_star(g, eps), e_total / tau) + grid_step;
    if (kind == ProblemKind::throughput)
      gap += 0.5 * tau * g * grid_step + rate(g, p_hi) * grid_step * tau;
    else
      gap += tau * grid_step + (p_hi + eps) * grid_step * tau;
  }
  res.gap_bound = gap;
  return res;
}

}  // namespace ehglue
