#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ehglue/gluekernel.hpp"
#include "ehglue/online.hpp"

namespace ehglue {

namespace {

// Conditional means of an Exp(rate) variable over `levels` equiprobable bins.
std::vector<double> exp_quantile_means(double rate_, int levels) {
  std::vector<double> out;
  auto tail = [&](double a) {  // integral of x f(x) over [a, inf)
    return std::isinf(a) ? 0.0 : (a + 1.0 / rate_) * std::exp(-rate_ * a);
  };
  for (int j = 0; j < levels; ++j) {
    double a = -std::log1p(-static_cast<double>(j) / levels) / rate_;
    double b = j + 1 == levels ? std::numeric_limits<double>::infinity()
                               : -std::log1p(-static_cast<double>(j + 1) / levels) / rate_;
    out.push_back(levels * (tail(a) - tail(b)));
  }
  return out;
}

std::vector<double> midpoints(double lo, double hi, int q) {
  if (hi <= lo) return {lo};
  std::vector<double> x;
  for (int j = 0; j < q; ++j) x.push_back(lo + (hi - lo) * (j + 0.5) / q);
  return x;
}

// Linear interpolation on a uniform grid starting at 0, clamped at the ends.
double lerp_grid(const double* v, std::size_t n, std::size_t stride, double step, double x) {
  if (n == 1) return v[0];
  double pos = std::clamp(x / step, 0.0, static_cast<double>(n - 1));
  auto j = static_cast<std::size_t>(pos);
  if (j >= n - 1) return v[(n - 1) * stride];
  double f = pos - j;
  return (1.0 - f) * v[j * stride] + f * v[(j + 1) * stride];
}

struct Combos {
  std::size_t count = 1;
  std::vector<std::vector<int>> idx;
};

Combos gain_combos(std::size_t k, std::size_t levels) {
  Combos c;
  for (std::size_t i = 0; i < k; ++i) c.count *= levels;
  c.idx.resize(c.count, std::vector<int>(k));
  for (std::size_t m = 0; m < c.count; ++m) {
    std::size_t r = m;
    for (std::size_t i = 0; i < k; ++i) {
      c.idx[m][i] = static_cast<int>(r % levels);
      r /= levels;
    }
  }
  return c;
}

// Visits every vector of k non-negative integers summing to at most `total`.
template <class F>
void for_each_split(std::size_t k, int total, std::vector<int>& e, std::size_t pos, int used, F&& f) {
  if (pos == k) {
    f(e, used);
    return;
  }
  for (int u = 0; u + used <= total; ++u) {
    e[pos] = u;
    for_each_split(k, total, e, pos + 1, used + u, f);
  }
  e[pos] = 0;
}

}  // namespace

double DpPolicy::continuation(std::size_t next, double battery, double buffer) const {
  const auto& cfg = cfg_;
  if (next >= cfg.blocks) {
    if (cfg.kind == ProblemKind::throughput) return 0.0;
    return buffer <= 1e-9 ? battery : -cfg.penalty;
  }
  const auto& u = u_[next];
  if (nq_ == 1) return lerp_grid(u.data(), nb_, 1, cfg.battery_step, battery);
  double pos = std::clamp(buffer / cfg.buffer_step, 0.0, static_cast<double>(nq_ - 1));
  auto l = std::min(static_cast<std::size_t>(pos), nq_ - 2);
  double f = pos - l;
  double a = lerp_grid(u.data() + l, nb_, nq_, cfg.battery_step, battery);
  double b = lerp_grid(u.data() + l + 1, nb_, nq_, cfg.battery_step, battery);
  return (1.0 - f) * a + f * b;
}

double DpPolicy::expected_value(std::size_t block, double battery, double buffer) const {
  return continuation(block, battery, buffer);
}

DpPolicy dp_solve(const DpConfig& in) {
  DpPolicy dp;
  DpConfig& cfg = dp.cfg_;
  cfg = in;
  if (cfg.blocks == 0 || cfg.channels == 0 || cfg.battery_step <= 0.0 || cfg.block_s <= 0.0)
    throw Error(ErrorCode::ValidationFailed, "dp: blocks, channels, steps must be positive");
  dp.levels_ = cfg.gain_values.empty() ? exp_quantile_means(cfg.fading_rate, cfg.gain_levels)
                                       : cfg.gain_values;
  const bool energy_kind = cfg.kind != ProblemKind::throughput;
  if (energy_kind && cfg.buffer_max <= 0.0) cfg.buffer_max = cfg.blocks * cfg.data_max;

  dp.nb_ = static_cast<std::size_t>(std::floor(cfg.battery_capacity / cfg.battery_step + 1e-9)) + 1;
  dp.nq_ = energy_kind
               ? static_cast<std::size_t>(std::floor(cfg.buffer_max / cfg.buffer_step + 1e-9)) + 1
               : 1;
  if (energy_kind && dp.nq_ < 2) dp.nq_ = 2;
  const std::size_t nb = dp.nb_, nq = dp.nq_;
  Combos combos = gain_combos(cfg.channels, dp.levels_.size());
  double states = static_cast<double>(cfg.blocks) * nb * nq * combos.count;
  if (states > static_cast<double>(cfg.state_cap))
    throw Error(ErrorCode::StateSpaceTooLarge,
                "dp: " + std::to_string(static_cast<long long>(states)) + " states exceed the cap");

  auto e_arr = midpoints(cfg.energy_min, cfg.energy_max, cfg.quadrature);
  auto d_arr = energy_kind ? midpoints(cfg.data_min, cfg.data_max, cfg.quadrature)
                           : std::vector<double>{0.0};
  const double top = (nb - 1) * cfg.battery_step;
  const double inv_combos = 1.0 / combos.count;

  dp.w_.assign(cfg.blocks, std::vector<double>(nb * nq, 0.0));
  dp.u_.assign(cfg.blocks, std::vector<double>(nb * nq, 0.0));

  // per-level reward of spending j battery steps on one channel for a block
  std::vector<std::vector<double>> reward;
  // per-combo energy cost of sending m buffer steps
  std::vector<std::vector<double>> cost;
  if (!energy_kind) {
    reward.assign(dp.levels_.size(), std::vector<double>(nb, 0.0));
    for (std::size_t g = 0; g < dp.levels_.size(); ++g)
      for (std::size_t j = 0; j < nb; ++j) {
        double p, th;
        single_channel_use(dp.levels_[g], cfg.eps, cfg.block_s, j * cfg.battery_step, p, th);
        reward[g][j] = th * rate(dp.levels_[g], p);
      }
  } else {
    cost.assign(combos.count, std::vector<double>(nq, 0.0));
    for (std::size_t m = 0; m < combos.count; ++m) {
      std::vector<Cell> cells;
      for (int g : combos.idx[m]) cells.push_back({dp.levels_[g], cfg.block_s});
      GlueCells gc(cells, cfg.eps);
      for (std::size_t l = 1; l < nq; ++l) cost[m][l] = gc.pour_data(l * cfg.buffer_step).energy;
    }
  }

  std::vector<int> e(cfg.channels, 0);
  for (std::size_t n = cfg.blocks; n-- > 0;) {
    auto& w = dp.w_[n];
    for (std::size_t j = 0; j < nb; ++j) {
      const double b = j * cfg.battery_step;
      for (std::size_t l = 0; l < nq; ++l) {
        double acc = 0.0;
        for (std::size_t m = 0; m < combos.count; ++m) {
          double best = -std::numeric_limits<double>::infinity();
          if (!energy_kind) {
            for_each_split(cfg.channels, static_cast<int>(j), e, 0, 0, [&](const std::vector<int>& ev, int used) {
              double r = 0.0;
              for (std::size_t c = 0; c < cfg.channels; ++c) r += reward[combos.idx[m][c]][ev[c]];
              best = std::max(best, r + dp.continuation(n + 1, b - used * cfg.battery_step, 0.0));
            });
          } else {
            const bool last = n + 1 >= cfg.blocks;
            for (std::size_t s = 0; s <= l; ++s) {
              if (cost[m][s] > b + 1e-12) break;
              double v;
              if (last)
                v = s == l ? b - cost[m][s] : -cfg.penalty;
              else  // the buffer lands on the grid here
                v = lerp_grid(dp.u_[n + 1].data() + (l - s), nb, nq, cfg.battery_step, b - cost[m][s]);
              best = std::max(best, v);
            }
          }
          acc += best;
        }
        w[j * nq + l] = acc * inv_combos;
      }
    }
    // expectation over this block's arrivals, indexed by the pre-arrival state
    auto& u = dp.u_[n];
    for (std::size_t j = 0; j < nb; ++j)
      for (std::size_t l = 0; l < nq; ++l) {
        double acc = 0.0;
        for (double ae : e_arr) {
          double x = std::min(j * cfg.battery_step + ae, top);
          for (double ad : d_arr) {
            double y = l * cfg.buffer_step + ad;
            if (nq == 1) {
              acc += lerp_grid(w.data(), nb, 1, cfg.battery_step, x);
            } else {
              double pos = std::clamp(y / cfg.buffer_step, 0.0, static_cast<double>(nq - 1));
              auto li = std::min(static_cast<std::size_t>(pos), nq - 2);
              double f = pos - li;
              acc += (1.0 - f) * lerp_grid(w.data() + li, nb, nq, cfg.battery_step, x) +
                     f * lerp_grid(w.data() + li + 1, nb, nq, cfg.battery_step, x);
            }
          }
        }
        u[j * nq + l] = acc / (e_arr.size() * d_arr.size());
      }
  }
  return dp;
}

ChannelAction DpPolicy::act(const OnlineState& st) const {
  const auto& cfg = cfg_;
  const std::size_t k = st.gains.size();
  const std::size_t n = st.block;
  const double tau = cfg.block_s;
  ChannelAction out{std::vector<double>(k, 0.0), std::vector<double>(k, 0.0)};

  if (cfg.kind == ProblemKind::throughput) {
    if (st.battery <= 0.0) return out;
    GlueAllocation all = epoch_glue_pour(st.gains, tau, cfg.eps, st.battery);
    double best = all.data(st.gains) + continuation(n + 1, 0.0, 0.0);
    out.power = all.power;
    out.duration = all.duration;
    int units = static_cast<int>(std::floor(st.battery / cfg.battery_step + 1e-12));
    std::vector<int> e(k, 0);
    for_each_split(k, units, e, 0, 0, [&](const std::vector<int>& ev, int used) {
      double r = 0.0;
      std::vector<double> p(k), th(k);
      for (std::size_t c = 0; c < k; ++c) {
        single_channel_use(st.gains[c], cfg.eps, tau, ev[c] * cfg.battery_step, p[c], th[c]);
        r += th[c] * rate(st.gains[c], p[c]);
      }
      double v = r + continuation(n + 1, st.battery - used * cfg.battery_step, 0.0);
      if (v > best + 1e-12) {
        best = v;
        out.power = p;
        out.duration = th;
      }
    });
    return out;
  }

  std::vector<Cell> cells;
  for (double g : st.gains) cells.push_back({g, tau});
  GlueCells gc(cells, cfg.eps);
  const double q = st.data_buffer;
  auto apply = [&](const CellPour& p) {
    out.power = p.power;
    out.duration = p.duration;
    out.power.resize(k, 0.0);
    out.duration.resize(k, 0.0);
  };
  if (q <= 0.0) return out;
  if (n + 1 >= cfg.blocks) {
    CellPour all = gc.pour_data(q);
    apply(all.energy <= st.battery + kFeasibilityTol ? all : gc.pour_energy(st.battery));
    return out;
  }
  double best = continuation(n + 1, st.battery, q);
  double best_d = 0.0;
  auto consider = [&](double d) {
    double c = gc.pour_data(d).energy;
    if (c > st.battery + 1e-12) return false;
    double v = continuation(n + 1, st.battery - c, q - d);
    if (v > best + 1e-12) {
      best = v;
      best_d = d;
    }
    return true;
  };
  auto steps = static_cast<std::size_t>(std::floor(q / cfg.buffer_step + 1e-12));
  for (std::size_t m = 1; m <= steps; ++m)
    if (!consider(m * cfg.buffer_step)) break;
  consider(q);
  if (best_d > 0.0) apply(gc.pour_data(best_d));
  return out;
}

StepFunction DpPolicy::step() const {
  return [this](const OnlineState& st) { return act(st); };
}

}  // namespace ehglue
