#pragma once

#include <cstddef>

#include "ehglue/model.hpp"

namespace ehglue {

struct TctResult {
  std::size_t bracket_epoch = 0;  // 1-based m
  double t_star = 0.0;            // s into epoch m
  double t_min = 0.0;             // s from time zero
  Policy policy;                  // I x K, zero after epoch m
  double remaining_energy = 0.0;  // uJ left at t_min
};

/// Scenario cut at epoch `last` (0-based), whose duration becomes `tau_last`.
Scenario truncate_scenario(const Scenario& s, std::size_t last, double tau_last);

/// Smallest 1-based m, no earlier than the last data arrival, such that all
/// data can be delivered by the end of epoch m.
std::size_t find_bracket_epoch(const Scenario& s);

TctResult solve_tct(const Scenario& s);

}  // namespace ehglue
