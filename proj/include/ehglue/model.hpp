#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ehglue/error.hpp"

// Units used throughout: energy in microjoules, power in microwatts, time in
// seconds, data in nats. Channel gains are per microwatt so that gain*power
// is dimensionless.

namespace ehglue {

/// Absolute tolerance (uJ / nats) used by ledger audits.
inline constexpr double kFeasibilityTol = 1e-9;

enum class ProblemKind { throughput, energy, tct };

std::string to_string(ProblemKind kind);
ProblemKind parse_problem_kind(const std::string& name);

/// Battery capacity: either a finite number of microjoules or unbounded.
class Capacity {
 public:
  static Capacity finite(double microjoules) { return Capacity(microjoules); }
  static Capacity unbounded() {
    return Capacity(std::numeric_limits<double>::infinity());
  }

  bool is_unbounded() const { return value_ == std::numeric_limits<double>::infinity(); }
  /// +inf when unbounded.
  double value() const { return value_; }

  bool operator==(const Capacity&) const = default;

 private:
  explicit Capacity(double v) : value_(v) {}
  double value_;
};

/// Piecewise-constant scenario: epoch i spans [t_i, t_i + tau_i); energy and
/// data packets arrive at t_i; gains(i, k) is the gain of sub-channel k.
struct Scenario {
  std::vector<double> durations;  // s
  std::vector<double> energy;     // uJ
  std::vector<double> data;       // nats
  Eigen::MatrixXd gains;          // I x K, per uW
  double processing_cost = 0.0;   // uW per active sub-channel
  Capacity battery_capacity = Capacity::unbounded();

  std::size_t num_epochs() const { return durations.size(); }
  std::size_t num_channels() const { return static_cast<std::size_t>(gains.cols()); }
  double deadline() const;
  /// Start time t_i of epoch i (0-based).
  double start_time(std::size_t epoch) const;
  double total_energy() const;
  double total_data() const;
};

/// Per-epoch, per-sub-channel transmit power and on-time. A sub-channel is
/// on for the first duration(i,k) seconds of epoch i.
struct Policy {
  Eigen::MatrixXd power;     // uW
  Eigen::MatrixXd duration;  // s

  static Policy zeros(std::size_t epochs, std::size_t channels);

  /// duration * power (transmit energy only, no processing cost).
  Eigen::MatrixXd energy_alloc() const;
  /// duration/2 * ln(1 + gain*power).
  Eigen::MatrixXd data_sent(const Eigen::MatrixXd& gains) const;
  /// Energy drawn from the battery per epoch, processing cost included.
  std::vector<double> epoch_consumption(double processing_cost) const;
  std::vector<double> epoch_data(const Eigen::MatrixXd& gains) const;

  /// Returns a copy with duration zeroed wherever power is zero.
  Policy canonical() const;
};

/// Shannon rate 0.5*ln(1 + gain*power) in nats/s.
double rate(double gain, double power);

struct ValidationIssue {
  ErrorCode code;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const { return issues.empty(); }
  std::string summary() const;
  /// Throws Error(ValidationFailed) carrying the summary if not ok().
  void throw_if_failed() const;
};

/// Checks the scenario invariants plus the preconditions of the given
/// objective: throughput ignores data arrivals (backlogged source); energy and
/// tct require an unbounded battery.
ValidationReport validate_scenario(const Scenario& s, ProblemKind kind);

enum class ConstraintId {
  EnergyCausality,
  BatteryOverflow,
  DataCausality,
  DurationBound,
  NegativePower,
};

std::string to_string(ConstraintId id);

struct Violation {
  ConstraintId constraint;
  std::size_t epoch;
  double magnitude;  // amount by which the constraint is exceeded
};

struct LedgerReport {
  std::vector<double> cumulative_energy;  // consumed through end of epoch i
  std::vector<double> battery_residual;   // stored at end of epoch i, before the next arrival
  std::vector<double> cumulative_data;    // delivered through end of epoch i
  std::vector<Violation> violations;

  bool feasible() const { return violations.empty(); }
  double delivered() const { return cumulative_data.empty() ? 0.0 : cumulative_data.back(); }
  double consumed() const { return cumulative_energy.empty() ? 0.0 : cumulative_energy.back(); }
  double final_residual() const { return battery_residual.empty() ? 0.0 : battery_residual.back(); }
};

/// Evaluates the energy-causality, battery-overflow and data-causality
/// ledgers of `pol` against `s`. Data causality is skipped for the
/// throughput kind (backlogged source); overflow is skipped for an unbounded
/// battery. A cell with zero power and positive duration still pays the
/// processing cost.
LedgerReport audit_policy(const Scenario& s, const Policy& pol,
                          ProblemKind kind = ProblemKind::energy,
                          double tol = kFeasibilityTol);

/// Total on-time: sum over epochs of the longest sub-channel duration.
double total_transmission_duration(const Policy& pol);

/// Copy of `s` with the battery made unbounded.
Scenario with_unbounded_battery(Scenario s);
/// Copy of `s` with a different processing cost.
Scenario with_processing_cost(Scenario s, double eps);

}  // namespace ehglue
