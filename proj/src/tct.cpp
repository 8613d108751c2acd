#include "ehglue/tct.hpp"

#include <map>

#include "ehglue/offline_energy.hpp"

namespace ehglue {

namespace {

std::size_t last_data_epoch(const Scenario& s) {
  for (std::size_t i = s.num_epochs(); i-- > 0;)
    if (s.data[i] > 0.0) return i;
  throw Error(ErrorCode::ValidationFailed, "completion time needs at least one data arrival");
}

bool feasible_by(const Scenario& s, std::size_t last, double t) {
  return check_feasibility(truncate_scenario(s, last, t)).feasible;
}

}  // namespace

Scenario truncate_scenario(const Scenario& s, std::size_t last, double tau_last) {
  Scenario out = s;
  const std::size_t n = last + 1;
  out.durations.resize(n);
  out.energy.resize(n);
  out.data.resize(n);
  out.gains = s.gains.topRows(static_cast<Eigen::Index>(n));
  out.durations[last] = tau_last;
  return out;
}

std::size_t find_bracket_epoch(const Scenario& s) {
  validate_scenario(s, ProblemKind::tct).throw_if_failed();
  for (std::size_t m = last_data_epoch(s); m < s.num_epochs(); ++m)
    if (feasible_by(s, m, s.durations[m])) return m + 1;
  throw Error(ErrorCode::NeverFeasible, "data cannot be delivered within the horizon");
}

TctResult solve_tct(const Scenario& s) {
  const std::size_t m = find_bracket_epoch(s) - 1;
  double lo = 0.0, hi = s.durations[m];
  for (int it = 0; it < 200 && hi - lo > 1e-12 * s.durations[m]; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (feasible_by(s, m, mid))
      hi = mid;
    else
      lo = mid;
  }

  TctResult res;
  res.bracket_epoch = m + 1;
  res.t_star = hi;
  res.t_min = s.start_time(m) + hi;

  const Scenario cut = truncate_scenario(s, m, hi);
  const EnergySolution sol = solve_offline_energy(cut);
  res.remaining_energy = sol.remaining_energy;
  res.policy = Policy::zeros(s.num_epochs(), s.num_channels());
  const auto rows = static_cast<Eigen::Index>(m + 1);
  res.policy.power.topRows(rows) = sol.policy.power;
  res.policy.duration.topRows(rows) = sol.policy.duration;

  // equal-gain sub-channels of the last epoch share their on-time
  const auto mi = static_cast<Eigen::Index>(m);
  std::map<std::pair<double, double>, std::vector<Eigen::Index>> groups;
  for (Eigen::Index k = 0; k < res.policy.power.cols(); ++k)
    if (res.policy.power(mi, k) > 0.0)
      groups[{s.gains(mi, k), res.policy.power(mi, k)}].push_back(k);
  for (const auto& [key, ks] : groups) {
    if (ks.size() < 2) continue;
    double total = 0.0;
    for (auto k : ks) total += res.policy.duration(mi, k);
    for (auto k : ks) res.policy.duration(mi, k) = total / static_cast<double>(ks.size());
  }
  return res;
}

}  // namespace ehglue
