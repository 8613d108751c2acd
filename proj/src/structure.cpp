#include "ehglue/structure.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ehglue/gluekernel.hpp"

namespace ehglue {

bool StructureReport::failed(char clause) const {
  for (const auto& i : issues)
    if (i.clause == clause) return true;
  return false;
}

std::string StructureReport::summary() const {
  if (issues.empty()) return "pass";
  std::ostringstream os;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    if (i) os << "; ";
    os << '(' << issues[i].clause << ") epoch " << issues[i].epoch + 1 << ": " << issues[i].detail;
  }
  return os.str();
}

std::vector<double> policy_glue_levels(const Scenario& s, const Policy& pol) {
  std::vector<double> out(s.num_epochs(), std::numeric_limits<double>::quiet_NaN());
  for (Eigen::Index i = 0; i < pol.power.rows(); ++i) {
    double sum = 0.0;
    int n = 0;
    for (Eigen::Index k = 0; k < pol.power.cols(); ++k)
      if (pol.power(i, k) > 0.0 && pol.duration(i, k) > 0.0) {
        sum += 1.0 / s.gains(i, k) + pol.power(i, k);
        ++n;
      }
    if (n) out[static_cast<std::size_t>(i)] = sum / n;
  }
  return out;
}

void check_epoch_structure(const Scenario& s, const Policy& pol, double tol,
                           StructureReport& rep) {
  const auto levels = policy_glue_levels(s, pol);
  const double eps = s.processing_cost;
  for (std::size_t i = 0; i < s.num_epochs(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double tau = s.durations[i];
    for (Eigen::Index k = 0; k < pol.power.cols(); ++k) {
      const double g = s.gains(ii, k);
      const double p = pol.power(ii, k), th = pol.duration(ii, k);
      const double vs = v_star(g, eps);
      const bool active = p > 0.0 && th > 0.0;
      std::ostringstream os;
      if (active) {
        const double xi = 1.0 / g + p;
        if (std::abs(xi - levels[i]) > tol) {
          os << "sub-channel " << k + 1 << " level " << xi << " vs epoch level " << levels[i];
          rep.issues.push_back({'a', i, os.str()});
          continue;
        }
        if (th < tau - tol && std::abs(p - vs) > tol) {
          os << "sub-channel " << k + 1 << " partial at p=" << p << " but v*=" << vs;
          rep.issues.push_back({'c', i, os.str()});
        } else if (th >= tau - tol && p < vs - tol) {
          os << "sub-channel " << k + 1 << " full at p=" << p << " below v*=" << vs;
          rep.issues.push_back({'c', i, os.str()});
        }
      } else if (!std::isnan(levels[i]) && levels[i] > 1.0 / g + vs + tol) {
        os << "sub-channel " << k + 1 << " unused below the epoch level";
        rep.issues.push_back({'c', i, os.str()});
      }
    }
  }
}

}  // namespace ehglue
