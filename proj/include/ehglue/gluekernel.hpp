#pragma once

#include <cstddef>
#include <vector>

#include "ehglue/model.hpp"

namespace ehglue {

/// Bursty-power threshold: the root p >= 0 of (p + eps) = (1/gamma + p) ln(1 + gamma p).
/// Zero when eps == 0.
double v_star(double gamma, double eps);

/// 1/gamma + v_star(gamma, eps). A cell is unused below this glue level.
double glue_threshold(double gamma, double eps);

/// One (sub-channel, epoch) slot that can be filled with glue.
struct Cell {
  double gain;  // per uW
  double tau;   // s
};

struct CellPour {
  double glue_level;  // NaN when nothing is allocated
  std::vector<double> power;
  std::vector<double> duration;
  double energy = 0.0;  // incl. processing cost
  double data = 0.0;

  bool empty() const { return energy <= 0.0 && data <= 0.0; }
};

/// A fixed set of cells sharing one glue level. Cells are filled in order of
/// threshold; equal thresholds go to the lower index first, so callers pass
/// cells epoch-major to get earliest-epoch-first tie breaking.
class GlueCells {
 public:
  GlueCells(std::vector<Cell> cells, double eps);

  std::size_t size() const { return cells_.size(); }
  const Cell& cell(std::size_t i) const { return cells_[i]; }
  double v_star(std::size_t i) const { return vstar_[i]; }
  double threshold(std::size_t i) const { return thr_[i]; }
  double eps() const { return eps_; }
  /// Smallest threshold; +inf for an empty set.
  double min_threshold() const;

  /// Energy used when every cell at or below xi runs full. With upper=false,
  /// cells whose threshold equals xi are left off (left limit).
  double energy_at(double xi, bool upper) const;
  double data_at(double xi, bool upper) const;

  /// Maximum-data allocation using exactly `budget` (or all cells full).
  CellPour pour_energy(double budget) const;
  /// Minimum-energy allocation delivering `target` nats.
  CellPour pour_data(double target) const;

 private:
  CellPour finish(double xi, std::size_t filled, std::size_t partial, double partial_theta) const;

  std::vector<Cell> cells_;
  std::vector<double> vstar_;
  std::vector<double> thr_;
  std::vector<std::size_t> order_;
  double eps_;
};

struct GlueAllocation {
  double glue_level;  // NaN when the budget is (numerically) zero
  std::vector<double> v_star;
  std::vector<double> power;
  std::vector<double> duration;
  double energy_used = 0.0;

  double data(const std::vector<double>& gains) const;
};

/// Single-epoch, K-sub-channel glue pouring of `budget` uJ.
GlueAllocation epoch_glue_pour(const std::vector<double>& gains, double tau, double eps,
                               double budget);

/// Two fading levels gamma1 > gamma2 on one sub-channel, energy E1 available
/// at the start; returns the 2x1 policy from the four-case closed form.
Policy two_level_reference(double gamma1, double gamma2, double tau1, double tau2, double eps,
                           double E1);

}  // namespace ehglue
