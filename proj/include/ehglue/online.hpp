#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "ehglue/model.hpp"

namespace ehglue {

/// What a causal policy sees at an event.
struct OnlineState {
  std::size_t block = 0;  // index of the current event
  double time = 0.0;      // s
  double battery = 0.0;   // uJ, after this event's arrival
  double data_buffer = 0.0;  // nats, after this event's arrival
  std::vector<double> gains;  // current per-uW gains
  double remaining_horizon = 0.0;  // s until the deadline
};

/// Per-channel power and on-time, counted from the current event. The
/// simulator cuts on-times at the next event.
struct ChannelAction {
  std::vector<double> power;
  std::vector<double> duration;
};

/// Glue-pours the whole battery over one synthetic epoch spanning the
/// remaining horizon at the current gains.
ChannelAction online_throughput_step(const OnlineState& st, double eps, double e_max);

/// Minimum-energy allocation sending the whole buffer by the deadline at the
/// current gains; falls back to spending the whole battery when that is not
/// enough (then *short_of_energy is set).
ChannelAction online_energy_step(const OnlineState& st, double eps, bool* short_of_energy = nullptr);

using StepFunction = std::function<ChannelAction(const OnlineState&)>;

struct TraceEvent {
  OnlineState state;
  ChannelAction action;
  double consumed = 0.0;   // uJ during the block
  double delivered = 0.0;  // nats during the block
  double overflow = 0.0;   // uJ lost at the arrival
};

struct Trace {
  std::vector<TraceEvent> events;
  Policy realized;  // what actually ran, per block
  double throughput = 0.0;  // nats delivered
  double remaining_energy = 0.0;  // uJ at the deadline
  double overflow = 0.0;
  double final_buffer = 0.0;
  bool feasible = true;  // all data delivered (energy kind)
  double conservation_error = 0.0;  // worst battery bookkeeping mismatch, uJ
};

/// Event-driven run of a causal policy over a realisation. Arrivals are
/// clipped at the battery capacity; overflow is recorded.
Trace simulate(const Scenario& realization, const StepFunction& step, ProblemKind kind);

/// Step function replaying a fixed policy block by block.
StepFunction replay_policy(const Policy& pol);

struct DpConfig {
  ProblemKind kind = ProblemKind::throughput;
  std::size_t blocks = 10;
  double block_s = 1.0;
  std::size_t channels = 2;
  double fading_rate = 1.0;
  int gain_levels = 8;
  std::vector<double> gain_values;  // explicit equiprobable levels; overrides fading
  double energy_min = 0.0;  // arrivals ~ U[energy_min, energy_max]
  double energy_max = 10.0;
  double data_min = 0.0;
  double data_max = 0.0;
  double eps = 1.0;
  double battery_capacity = 10.0;  // grid top; a real cap for the throughput kind
  double battery_step = 1.0;
  double buffer_step = 0.01;
  double buffer_max = 0.0;  // 0 means blocks * data_max
  double penalty = 100.0;   // terminal value with data left over
  int quadrature = 16;
  std::size_t state_cap = 50'000'000;
};

/// Quantised backward induction; the stored tables hold the expected value
/// from each block onward, and act() plays greedily against them with the
/// real battery, buffer and gains.
class DpPolicy {
 public:
  ChannelAction act(const OnlineState& st) const;
  StepFunction step() const;

  const DpConfig& config() const { return cfg_; }
  const std::vector<double>& levels() const { return levels_; }
  /// Expected value from block n onward, before gains are revealed.
  double expected_value(std::size_t block, double battery, double buffer = 0.0) const;

 private:
  friend DpPolicy dp_solve(const DpConfig& cfg);
  double continuation(std::size_t next_block, double battery, double buffer) const;

  DpConfig cfg_;
  std::vector<double> levels_;
  std::size_t nb_ = 0, nq_ = 0;
  // w_[n] on the (battery, buffer) grid: expected value at block n after arrivals
  std::vector<std::vector<double>> w_;
  // u_[n]: expectation of w_[n] over block-n arrivals, indexed by pre-arrival state
  std::vector<std::vector<double>> u_;
};

DpPolicy dp_solve(const DpConfig& cfg);

/// Single-channel best use of `energy` uJ within `tau` s: bursty at v* or full.
void single_channel_use(double gain, double eps, double tau, double energy, double& power,
                        double& duration);

}  // namespace ehglue
