#include "ehglue/golden.hpp"

#include <cmath>
#include <filesystem>

#include "ehglue/offline_energy.hpp"
#include "ehglue/offline_throughput.hpp"
#include "ehglue/tct.hpp"

namespace ehglue {

double evaluate_quantity(const Scenario& s, const std::string& q) {
  if (q == "throughput_nats") return solve_offline_throughput(s).throughput;
  if (q == "throughput_structure")
    return verify_throughput_structure(s, solve_offline_throughput(s).policy).pass() ? 1.0 : 0.0;

  Scenario u = with_unbounded_battery(s);
  if (q == "feasible") return check_feasibility(u).feasible ? 1.0 : 0.0;
  if (q == "remaining_energy_uJ") return solve_offline_energy(u).remaining_energy;
  if (q == "delivered_nats") {
    auto sol = solve_offline_energy(u);
    double d = 0.0;
    for (double x : sol.policy.epoch_data(u.gains)) d += x;
    return d;
  }
  if (q == "energy_structure")
    return verify_energy_structure(u, solve_offline_energy(u).policy).pass() ? 1.0 : 0.0;
  if (q == "t_min_s") return solve_tct(u).t_min;
  if (q == "tct_remaining_uJ") return solve_tct(u).remaining_energy;
  throw Error(ErrorCode::ParseError, "unknown golden quantity '" + q + "'");
}

std::vector<GoldenCheck> run_golden_registry(const std::string& path) {
  json reg = read_json_file(path);
  if (!reg.contains("entries") || !reg.at("entries").is_array())
    throw Error(ErrorCode::ParseError, path + ": expected an 'entries' array");
  auto dir = std::filesystem::path(path).parent_path();
  std::vector<GoldenCheck> out;
  for (const json& e : reg.at("entries")) {
    GoldenCheck c;
    try {
      c.name = e.at("name").get<std::string>();
      c.quantity = e.at("quantity").get<std::string>();
      c.expected = e.at("expected").get<double>();
      c.tolerance = e.at("tolerance").get<double>();
      c.source = e.value("source", std::string());
      const json& sc = e.at("scenario");
      Scenario s = sc.is_string() ? scenario_from_json(read_json_file((dir / sc.get<std::string>()).string()))
                                  : scenario_from_json(sc);
      if (e.contains("processing_cost_uW")) s = with_processing_cost(s, e.at("processing_cost_uW").get<double>());
      c.actual = evaluate_quantity(s, c.quantity);
      c.pass = std::abs(c.actual - c.expected) <= c.tolerance;
    } catch (const json::exception& ex) {
      c.error = std::string("malformed entry: ") + ex.what();
    } catch (const std::exception& ex) {
      c.error = ex.what();
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace ehglue
