#pragma once

#include <vector>

#include "ehglue/model.hpp"
#include "ehglue/structure.hpp"

namespace ehglue {

struct ThroughputSolution {
  Policy policy;
  double throughput = 0.0;          // nats
  std::vector<double> glue_levels;  // per epoch, NaN where nothing is sent
  std::vector<double> battery_residual;  // end of each epoch, before the next arrival
};

/// Offline deadline-throughput maximisation with a finite (or unbounded)
/// battery, by directional backward glue pouring.
ThroughputSolution solve_offline_throughput(const Scenario& s);

/// Checks the optimality structure of a throughput policy. `tol` applies to
/// glue levels and powers (uW); battery full/empty tests use 1e-6 uJ.
StructureReport verify_throughput_structure(const Scenario& s, const Policy& pol,
                                            double tol = 1e-6);

}  // namespace ehglue
