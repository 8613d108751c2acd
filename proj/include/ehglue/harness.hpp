#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ehglue/io.hpp"
#include "ehglue/model.hpp"
#include "ehglue/online.hpp"

namespace ehglue {

struct FadingParams {
  std::size_t blocks = 10;
  std::size_t channels = 2;
  double block_s = 1.0;
  double fading_rate = 1.0;  // exponential gains, per uW
  double energy_max = 10.0;  // packets ~ U[0, energy_max] uJ
  double data_max = 0.0;     // packets ~ U[0, data_max] nats
  double eps = 1.0;
  Capacity battery = Capacity::finite(10.0);
};

/// One realisation; a pure function of (seed, params). The same uniforms are
/// drawn for every parameter value, so seeds stay paired across a sweep.
Scenario gen_fading_scenario(std::uint64_t seed, const FadingParams& p);

enum class SweepVariable { epsilon, energy_rate, data_rate };
std::string to_string(SweepVariable v);
SweepVariable parse_sweep_variable(const std::string& name);

struct ExperimentConfig {
  ProblemKind kind = ProblemKind::throughput;
  SweepVariable variable = SweepVariable::energy_rate;
  std::vector<double> grid;  // E/2, B/2 or eps values
  FadingParams base;
  std::size_t seeds = 1000;
  std::uint64_t base_seed = 1;
  bool run_dp = true;
  DpConfig dp;  // quantisation knobs; distributions are filled from `base`
  std::string output;

  void validate() const;
};

/// Defaults for the two Monte Carlo setups (throughput: E_max = 10, eps = 1,
/// E swept; energy: energy ~ U[0, 3], B swept, unbounded battery).
ExperimentConfig default_experiment(ProblemKind kind);
ExperimentConfig experiment_from_json(const json& j);

/// Parameters of one sweep point.
FadingParams point_params(const ExperimentConfig& cfg, double value);
DpConfig point_dp_config(const ExperimentConfig& cfg, double value);

struct SeedOutcome {
  std::uint64_t seed = 0;
  bool feasible = true;      // offline feasibility (energy kind)
  double offline = 0.0;      // nats or uJ
  double myopic = 0.0;
  double dp = 0.0;
  bool myopic_delivered = true;
  bool dp_delivered = true;
  std::string error;         // non-empty when a solver failed on this seed
};

/// Paired offline / myopic / DP evaluations of one sweep point. `dp` may be
/// null to skip the DP column.
std::vector<SeedOutcome> run_point(const ExperimentConfig& cfg, double value, const DpPolicy* dp);

struct SweepRow {
  double value = 0.0;
  double offline_mean = 0.0, myopic_mean = 0.0, dp_mean = 0.0;
  double offline_stderr = 0.0, myopic_stderr = 0.0, dp_stderr = 0.0;
  double feasible_fraction = 1.0;
  double myopic_delivered = 1.0, dp_delivered = 1.0;  // fraction of feasible seeds
  std::size_t seeds = 0;
  std::size_t dominance_violations = 0;
  std::size_t errors = 0;
};

SweepRow summarize(double value, const std::vector<SeedOutcome>& out, bool with_dp);
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg);

std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string seed_csv(double value, const std::vector<SeedOutcome>& out);

/// Deterministic eps sweep of one scenario: throughput and total on-time for
/// the throughput kind, remaining energy and feasibility for the energy kind.
struct EpsRow {
  double eps = 0.0;
  double objective = 0.0;
  double total_duration = 0.0;
  bool feasible = true;
};
std::vector<EpsRow> epsilon_sweep(const Scenario& s, ProblemKind kind, const std::vector<double>& grid);
std::string epsilon_csv(const std::vector<EpsRow>& rows, ProblemKind kind);

/// Worker count from EHGLUE_WORKERS, else the hardware concurrency.
unsigned worker_count();

std::string fmt6(double v);

}  // namespace ehglue
