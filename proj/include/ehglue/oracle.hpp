#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ehglue/model.hpp"

namespace ehglue {

/// Multipliers and residuals. For the throughput kind lambda/mu belong to the
/// energy-causality/overflow rows; for energy and tct kinds to the
/// energy-causality/data-causality rows. phi, psi, sigma are per cell:
/// duration cap, duration floor, allocation floor.
struct KKTCertificate {
  std::vector<double> lambda;
  std::vector<double> mu;
  Eigen::MatrixXd phi;
  Eigen::MatrixXd psi;
  Eigen::MatrixXd sigma;
  double final_multiplier = 0.0;  // total-delivery row (energy, tct)
  std::vector<double> glue_levels;
  double stationarity = 0.0;
  double complementarity = 0.0;
  double max_residual = 0.0;
  bool degenerate = false;
  std::vector<std::string> notes;
};

struct ConvexResult {
  Policy policy;
  double objective = 0.0;  // nats, uJ remaining, or T_min in s
  KKTCertificate certificate;
  std::size_t bracket_epoch = 0;  // tct only, 1-based
  int newton_steps = 0;
};

struct BarrierOptions {
  double gap_tol = 1e-9;     // relative duality-gap target
  double mu_factor = 10.0;
  int max_outer = 50;
  int max_newton = 200;
  double snap_duration = 1e-7;  // s
};

/// Log-barrier interior-point solve of the perspective formulation of the
/// chosen objective. Throws NoConvergence or InfeasibleInstance.
ConvexResult solve_convex(const Scenario& s, ProblemKind kind, const BarrierOptions& opt = {});

/// Fits multipliers to a given policy from its glue structure and reports
/// the KKT residuals (relative).
KKTCertificate kkt_residuals(const Scenario& s, const Policy& pol, ProblemKind kind);

struct BruteForceResult {
  Policy policy;
  double objective = 0.0;
  double gap_bound = 0.0;  // objective of the true optimum is within this of `objective`
  std::size_t evaluated = 0;
};

/// Exhaustive search over per-cell (power, duration) grids: power step
/// grid_step uW, duration step grid_step * tau. Throughput or energy kinds.
BruteForceResult brute_force_small(const Scenario& s, ProblemKind kind, double grid_step,
                                   std::size_t max_evaluations = 200'000'000);

}  // namespace ehglue
