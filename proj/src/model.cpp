#include "ehglue/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ehglue {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveDuration: return "NonPositiveDuration";
    case ErrorCode::GainNonPositive: return "GainNonPositive";
    case ErrorCode::NegativeQuantity: return "NegativeQuantity";
    case ErrorCode::ArrivalExceedsCapacity: return "ArrivalExceedsCapacity";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::GainOrderViolation: return "GainOrderViolation";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::NeverFeasible: return "NeverFeasible";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::InfeasibleInstance: return "InfeasibleInstance";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::StateSpaceTooLarge: return "StateSpaceTooLarge";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

bool Error::is_validation_error() const noexcept {
  switch (code_) {
    case ErrorCode::NonPositiveDuration:
    case ErrorCode::GainNonPositive:
    case ErrorCode::NegativeQuantity:
    case ErrorCode::ArrivalExceedsCapacity:
    case ErrorCode::KindMismatch:
    case ErrorCode::ShapeMismatch:
    case ErrorCode::ValidationFailed:
    case ErrorCode::GainOrderViolation:
    case ErrorCode::ParseError:
      return true;
    default:
      return false;
  }
}

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::throughput: return "throughput";
    case ProblemKind::energy: return "energy";
    case ProblemKind::tct: return "tct";
  }
  return "unknown";
}

ProblemKind parse_problem_kind(const std::string& name) {
  if (name == "throughput") return ProblemKind::throughput;
  if (name == "energy") return ProblemKind::energy;
  if (name == "tct") return ProblemKind::tct;
  throw Error(ErrorCode::ParseError, "unknown problem kind '" + name + "'");
}

double Scenario::deadline() const {
  return std::accumulate(durations.begin(), durations.end(), 0.0);
}

double Scenario::start_time(std::size_t epoch) const {
  double t = 0.0;
  for (std::size_t i = 0; i < epoch && i < durations.size(); ++i) t += durations[i];
  return t;
}

double Scenario::total_energy() const {
  return std::accumulate(energy.begin(), energy.end(), 0.0);
}

double Scenario::total_data() const {
  return std::accumulate(data.begin(), data.end(), 0.0);
}

Policy Policy::zeros(std::size_t epochs, std::size_t channels) {
  const auto r = static_cast<Eigen::Index>(epochs);
  const auto c = static_cast<Eigen::Index>(channels);
  return Policy{Eigen::MatrixXd::Zero(r, c), Eigen::MatrixXd::Zero(r, c)};
}

Eigen::MatrixXd Policy::energy_alloc() const {
  return duration.cwiseProduct(power);
}

Eigen::MatrixXd Policy::data_sent(const Eigen::MatrixXd& gains) const {
  Eigen::MatrixXd out(power.rows(), power.cols());
  for (Eigen::Index i = 0; i < power.rows(); ++i)
    for (Eigen::Index k = 0; k < power.cols(); ++k)
      out(i, k) = duration(i, k) * rate(gains(i, k), power(i, k));
  return out;
}

std::vector<double> Policy::epoch_consumption(double processing_cost) const {
  std::vector<double> out(static_cast<std::size_t>(power.rows()), 0.0);
  for (Eigen::Index i = 0; i < power.rows(); ++i)
    for (Eigen::Index k = 0; k < power.cols(); ++k)
      out[static_cast<std::size_t>(i)] += duration(i, k) * (power(i, k) + processing_cost);
  return out;
}

std::vector<double> Policy::epoch_data(const Eigen::MatrixXd& gains) const {
  const Eigen::MatrixXd d = data_sent(gains);
  std::vector<double> out(static_cast<std::size_t>(d.rows()), 0.0);
  for (Eigen::Index i = 0; i < d.rows(); ++i) out[static_cast<std::size_t>(i)] = d.row(i).sum();
  return out;
}

Policy Policy::canonical() const {
  Policy out = *this;
  for (Eigen::Index i = 0; i < out.power.rows(); ++i)
    for (Eigen::Index k = 0; k < out.power.cols(); ++k)
      if (out.power(i, k) <= 0.0) {
        out.power(i, k) = 0.0;
        out.duration(i, k) = 0.0;
      }
  return out;
}

double rate(double gain, double power) { return 0.5 * std::log1p(gain * power); }

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    if (i) os << "; ";
    os << to_string(issues[i].code) << ": " << issues[i].message;
  }
  return os.str();
}

void ValidationReport::throw_if_failed() const {
  if (!ok()) throw Error(ErrorCode::ValidationFailed, summary());
}

ValidationReport validate_scenario(const Scenario& s, ProblemKind kind) {
  ValidationReport rep;
  auto add = [&](ErrorCode c, std::string m) { rep.issues.push_back({c, std::move(m)}); };

  const std::size_t n = s.durations.size();
  if (s.energy.size() != n || s.data.size() != n ||
      static_cast<std::size_t>(s.gains.rows()) != n) {
    add(ErrorCode::ShapeMismatch, "epoch arrays and gain rows differ in length");
    return rep;
  }
  if (n == 0 || s.gains.cols() == 0) {
    add(ErrorCode::ShapeMismatch, "scenario needs at least one epoch and one sub-channel");
    return rep;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(s.durations[i] > 0.0) || !std::isfinite(s.durations[i]))
      add(ErrorCode::NonPositiveDuration, "epoch " + std::to_string(i) + " has non-positive duration");
    for (Eigen::Index k = 0; k < s.gains.cols(); ++k)
      if (!(s.gains(static_cast<Eigen::Index>(i), k) > 0.0) ||
          !std::isfinite(s.gains(static_cast<Eigen::Index>(i), k)))
        add(ErrorCode::GainNonPositive, "gain (" + std::to_string(i) + "," + std::to_string(k) + ") is not positive");
    if (!(s.energy[i] >= 0.0) || !std::isfinite(s.energy[i]))
      add(ErrorCode::NegativeQuantity, "energy arrival " + std::to_string(i) + " is negative");
    if (kind != ProblemKind::throughput && (!(s.data[i] >= 0.0) || !std::isfinite(s.data[i])))
      add(ErrorCode::NegativeQuantity, "data arrival " + std::to_string(i) + " is negative");
    if (s.energy[i] > s.battery_capacity.value())
      add(ErrorCode::ArrivalExceedsCapacity, "energy arrival " + std::to_string(i) + " exceeds battery capacity");
  }
  if (!(s.processing_cost >= 0.0) || !std::isfinite(s.processing_cost))
    add(ErrorCode::NegativeQuantity, "processing cost is negative");
  if (!s.battery_capacity.is_unbounded() && !(s.battery_capacity.value() > 0.0))
    add(ErrorCode::NegativeQuantity, "battery capacity must be positive");
  if (kind != ProblemKind::throughput && !s.battery_capacity.is_unbounded())
    add(ErrorCode::KindMismatch, to_string(kind) + " objective assumes an unbounded battery");
  return rep;
}

std::string to_string(ConstraintId id) {
  switch (id) {
    case ConstraintId::EnergyCausality: return "energy_causality";
    case ConstraintId::BatteryOverflow: return "battery_overflow";
    case ConstraintId::DataCausality: return "data_causality";
    case ConstraintId::DurationBound: return "duration_bound";
    case ConstraintId::NegativePower: return "negative_power";
  }
  return "unknown";
}

LedgerReport audit_policy(const Scenario& s, const Policy& pol, ProblemKind kind, double tol) {
  const auto I = static_cast<Eigen::Index>(s.num_epochs());
  const auto K = static_cast<Eigen::Index>(s.num_channels());
  if (pol.power.rows() != I || pol.power.cols() != K || pol.duration.rows() != I ||
      pol.duration.cols() != K)
    throw Error(ErrorCode::ShapeMismatch, "policy shape does not match scenario");

  LedgerReport rep;
  const std::size_t n = s.num_epochs();
  rep.cumulative_energy.resize(n);
  rep.battery_residual.resize(n);
  rep.cumulative_data.resize(n);

  double harvested = 0.0, consumed = 0.0, delivered = 0.0, arrived = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    harvested += s.energy[i];
    arrived += s.data[i];
    for (Eigen::Index k = 0; k < K; ++k) {
      const double p = pol.power(ii, k), th = pol.duration(ii, k);
      if (p < -tol) rep.violations.push_back({ConstraintId::NegativePower, i, -p});
      if (th < -tol) rep.violations.push_back({ConstraintId::DurationBound, i, -th});
      if (th > s.durations[i] + tol)
        rep.violations.push_back({ConstraintId::DurationBound, i, th - s.durations[i]});
      consumed += th * (std::max(p, 0.0) + s.processing_cost);
      delivered += th * rate(s.gains(ii, k), std::max(p, 0.0));
    }
    rep.cumulative_energy[i] = consumed;
    rep.cumulative_data[i] = delivered;
    rep.battery_residual[i] = harvested - consumed;

    if (consumed - harvested > tol)
      rep.violations.push_back({ConstraintId::EnergyCausality, i, consumed - harvested});
    if (!s.battery_capacity.is_unbounded()) {
      const double next = i + 1 < n ? s.energy[i + 1] : 0.0;
      const double stored = harvested + next - consumed;
      if (stored - s.battery_capacity.value() > tol)
        rep.violations.push_back(
            {ConstraintId::BatteryOverflow, i, stored - s.battery_capacity.value()});
    }
    if (kind != ProblemKind::throughput && delivered - arrived > tol)
      rep.violations.push_back({ConstraintId::DataCausality, i, delivered - arrived});
  }
  return rep;
}

double total_transmission_duration(const Policy& pol) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < pol.duration.rows(); ++i) {
    double longest = 0.0;
    for (Eigen::Index k = 0; k < pol.duration.cols(); ++k)
      if (pol.power(i, k) > 0.0) longest = std::max(longest, pol.duration(i, k));
    total += longest;
  }
  return total;
}

Scenario with_unbounded_battery(Scenario s) {
  s.battery_capacity = Capacity::unbounded();
  return s;
}

Scenario with_processing_cost(Scenario s, double eps) {
  s.processing_cost = eps;
  return s;
}

}  // namespace ehglue
