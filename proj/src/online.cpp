#include "ehglue/online.hpp"

#include <algorithm>
#include <cmath>

#include "ehglue/gluekernel.hpp"

namespace ehglue {

namespace {

std::vector<Cell> horizon_cells(const OnlineState& st) {
  std::vector<Cell> cells;
  cells.reserve(st.gains.size());
  for (double g : st.gains) cells.push_back({g, st.remaining_horizon});
  return cells;
}

ChannelAction from_pour(const CellPour& p, std::size_t k) {
  ChannelAction a;
  a.power = p.power;
  a.duration = p.duration;
  a.power.resize(k, 0.0);
  a.duration.resize(k, 0.0);
  return a;
}

}  // namespace

void single_channel_use(double gain, double eps, double tau, double energy, double& power,
                        double& duration) {
  power = 0.0;
  duration = 0.0;
  if (energy <= 0.0 || tau <= 0.0) return;
  double vs = v_star(gain, eps);
  if (vs > 0.0 && energy <= tau * (vs + eps)) {
    power = vs;
    duration = energy / (vs + eps);
  } else {
    power = std::max(energy / tau - eps, 0.0);
    duration = power > 0.0 ? tau : 0.0;
  }
}

ChannelAction online_throughput_step(const OnlineState& st, double eps, double e_max) {
  double budget = std::min(st.battery, e_max);
  if (st.remaining_horizon <= 0.0 || budget <= 0.0) {
    return {std::vector<double>(st.gains.size(), 0.0), std::vector<double>(st.gains.size(), 0.0)};
  }
  GlueAllocation a = epoch_glue_pour(st.gains, st.remaining_horizon, eps, budget);
  return {a.power, a.duration};
}

ChannelAction online_energy_step(const OnlineState& st, double eps, bool* short_of_energy) {
  if (short_of_energy) *short_of_energy = false;
  std::size_t k = st.gains.size();
  if (st.remaining_horizon <= 0.0 || st.data_buffer <= 0.0) {
    return {std::vector<double>(k, 0.0), std::vector<double>(k, 0.0)};
  }
  GlueCells cells(horizon_cells(st), eps);
  CellPour p = cells.pour_data(st.data_buffer);
  if (p.energy > st.battery + kFeasibilityTol) {
    if (short_of_energy) *short_of_energy = true;
    p = cells.pour_energy(st.battery);
  }
  return from_pour(p, k);
}

StepFunction replay_policy(const Policy& pol) {
  return [pol](const OnlineState& st) {
    ChannelAction a;
    auto k = static_cast<Eigen::Index>(st.gains.size());
    auto i = static_cast<Eigen::Index>(st.block);
    for (Eigen::Index c = 0; c < k; ++c) {
      bool have = i < pol.power.rows() && c < pol.power.cols();
      a.power.push_back(have ? pol.power(i, c) : 0.0);
      a.duration.push_back(have ? pol.duration(i, c) : 0.0);
    }
    return a;
  };
}

Trace simulate(const Scenario& s, const StepFunction& step, ProblemKind kind) {
  validate_scenario(s, kind == ProblemKind::throughput ? ProblemKind::throughput
                                                       : ProblemKind::energy)
      .throw_if_failed();
  const std::size_t n = s.num_epochs(), k = s.num_channels();
  const double cap = s.battery_capacity.value();
  const double eps = s.processing_cost;
  const bool backlogged = kind == ProblemKind::throughput;

  Trace tr;
  tr.realized = Policy::zeros(n, k);
  double battery = 0.0, buffer = 0.0;
  double in = 0.0, out = 0.0;  // running totals for the conservation check
  double deadline = s.deadline();

  for (std::size_t i = 0; i < n; ++i) {
    TraceEvent ev;
    battery += s.energy[i];
    in += s.energy[i];
    if (battery > cap) {
      ev.overflow = battery - cap;
      battery = cap;
      out += ev.overflow;
      tr.overflow += ev.overflow;
    }
    if (!backlogged) buffer += s.data[i];

    ev.state.block = i;
    ev.state.time = s.start_time(i);
    ev.state.battery = battery;
    ev.state.data_buffer = buffer;
    for (std::size_t c = 0; c < k; ++c)
      ev.state.gains.push_back(s.gains(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)));
    ev.state.remaining_horizon = deadline - ev.state.time;

    ev.action = step(ev.state);
    ev.action.power.resize(k, 0.0);
    ev.action.duration.resize(k, 0.0);

    std::vector<double> p(k), th(k);
    double use = 0.0, sent = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      p[c] = std::max(ev.action.power[c], 0.0);
      th[c] = p[c] > 0.0 ? std::clamp(ev.action.duration[c], 0.0, s.durations[i]) : 0.0;
      use += th[c] * (p[c] + eps);
      sent += th[c] * rate(ev.state.gains[c], p[c]);
    }
    // the hardware stops when the battery or the buffer runs dry
    double scale = 1.0;
    if (use > battery && use > 0.0) scale = std::min(scale, battery / use);
    if (!backlogged && sent > buffer && sent > 0.0) scale = std::min(scale, buffer / sent);
    if (scale < 1.0) {
      for (double& t : th) t *= scale;
      use *= scale;
      sent *= scale;
    }
    use = std::min(use, battery);
    battery -= use;
    out += use;
    if (!backlogged) buffer = std::max(buffer - sent, 0.0);

    for (std::size_t c = 0; c < k; ++c) {
      tr.realized.power(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = th[c] > 0 ? p[c] : 0.0;
      tr.realized.duration(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = th[c];
    }
    ev.consumed = use;
    ev.delivered = sent;
    tr.throughput += sent;
    tr.conservation_error = std::max(tr.conservation_error, std::abs(in - out - battery));
    tr.events.push_back(std::move(ev));
  }
  tr.remaining_energy = battery;
  tr.final_buffer = buffer;
  tr.feasible = backlogged || buffer <= kFeasibilityTol * (1.0 + s.total_data());
  return tr;
}

}  // namespace ehglue
