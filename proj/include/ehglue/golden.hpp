#pragma once

#include <string>
#include <vector>

#include "ehglue/io.hpp"

namespace ehglue {

struct GoldenCheck {
  std::string name;
  std::string quantity;
  double expected = 0.0;
  double tolerance = 0.0;
  double actual = 0.0;
  bool pass = false;
  std::string source;
  std::string error;
};

/// Evaluates one named quantity of a scenario:
///   throughput_nats, throughput_structure, remaining_energy_uJ,
///   delivered_nats, energy_structure, feasible, t_min_s, tct_remaining_uJ.
/// Structure checks and `feasible` report 1 or 0.
double evaluate_quantity(const Scenario& s, const std::string& quantity);

/// Runs every entry of a registry file. Scenario paths are resolved relative
/// to the registry's directory.
std::vector<GoldenCheck> run_golden_registry(const std::string& path);

}  // namespace ehglue
