#pragma once

#include <string>
#include <vector>

#include "ehglue/model.hpp"

namespace ehglue {

struct StructureIssue {
  char clause;  // 'a' common level, 'b' level change, 'c' regime, 'd' final residual
  std::size_t epoch;
  std::string detail;
};

struct StructureReport {
  std::vector<StructureIssue> issues;

  bool pass() const { return issues.empty(); }
  bool failed(char clause) const;
  std::string summary() const;
};

/// Per-epoch glue level of a policy: mean of 1/gamma + p over cells with
/// p > 0 and duration > 0; NaN for an epoch with no such cell.
std::vector<double> policy_glue_levels(const Scenario& s, const Policy& pol);

/// Clause (a): active cells of an epoch share a level to within tol.
/// Clause (c): partial cells sit at v*, full cells at or above v*, unused
/// cells have a threshold no lower than the epoch level.
void check_epoch_structure(const Scenario& s, const Policy& pol, double tol,
                           StructureReport& rep);

}  // namespace ehglue
