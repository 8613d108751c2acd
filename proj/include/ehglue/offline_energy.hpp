#pragma once

#include <vector>

#include "ehglue/model.hpp"
#include "ehglue/structure.hpp"

namespace ehglue {

struct FeasibilityReport {
  double slack = 0.0;  // nats that could still be sent on top of the arrivals
  bool feasible = false;
};

struct EnergySolution {
  Policy policy;
  double remaining_energy = 0.0;    // uJ left at the deadline
  std::vector<double> glue_levels;  // per epoch, NaN where nothing is sent
};

/// Largest amount of extra data deliverable by the deadline with every
/// arrival sent as well; feasible iff slack >= -kFeasibilityTol.
FeasibilityReport check_feasibility(const Scenario& s);

/// Offline remaining-energy maximisation (all arriving data delivered by the
/// deadline, unbounded battery).
EnergySolution solve_offline_energy(const Scenario& s);

StructureReport verify_energy_structure(const Scenario& s, const Policy& pol, double tol = 1e-6);

}  // namespace ehglue
