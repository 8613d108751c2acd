#include <algorithm>
#include <cmath>
#include <sstream>

#include "ehglue/gluekernel.hpp"
#include "ehglue/oracle.hpp"
#include "ehglue/structure.hpp"

namespace ehglue {

namespace {

constexpr double kTight = 1e-6;

// Q = xi ln(1 + gamma p) - (p + eps); zero on partial cells, >= 0 on full ones.
double duration_condition(double gamma, double p, double eps) {
  return (1.0 / gamma + p) * std::log1p(gamma * p) - (p + eps);
}

}  // namespace

KKTCertificate kkt_residuals(const Scenario& s, const Policy& pol, ProblemKind kind) {
  const std::size_t I = s.num_epochs(), K = s.num_channels();
  const auto Ii = static_cast<Eigen::Index>(I), Ki = static_cast<Eigen::Index>(K);
  const double eps = s.processing_cost;
  KKTCertificate cert;
  cert.lambda.assign(I, 0.0);
  cert.mu.assign(I, 0.0);
  cert.phi = Eigen::MatrixXd::Zero(Ii, Ki);
  cert.psi = cert.phi;
  cert.sigma = cert.phi;

  const LedgerReport led = audit_policy(s, pol, kind == ProblemKind::throughput
                                                    ? ProblemKind::throughput
                                                    : ProblemKind::energy);
  std::vector<double> xi = policy_glue_levels(s, pol);
  if (std::none_of(xi.begin(), xi.end(), [](double v) { return !std::isnan(v); })) {
    cert.glue_levels = xi;
    cert.degenerate = true;
    cert.notes.push_back("no active cell");
    return cert;
  }

  double stat = 0.0, comp = 0.0;
  auto note = [&](std::size_t i, const std::string& what) {
    std::ostringstream os;
    os << "epoch " << i + 1 << ": " << what;
    cert.notes.push_back(os.str());
  };

  // within-epoch stationarity and the duration condition
  for (std::size_t i = 0; i < I; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    for (Eigen::Index k = 0; k < Ki; ++k) {
      const double g = s.gains(ii, k), p = pol.power(ii, k), th = pol.duration(ii, k);
      if (!(p > 0.0 && th > 0.0)) continue;
      stat = std::max(stat, std::abs(1.0 / g + p - xi[i]) / xi[i]);
      const double q = duration_condition(g, p, eps);
      if (th < s.durations[i] * (1.0 - 1e-12)) {
        stat = std::max(stat, std::abs(q) / xi[i]);
      } else {
        cert.phi(ii, k) = std::max(q, 0.0) / (2.0 * xi[i]);
        stat = std::max(stat, std::max(-q, 0.0) / xi[i]);
      }
    }
  }

  // levels of idle epochs: as high as the cells allow without exceeding the next level
  for (std::size_t i = I; i-- > 0;) {
    if (!std::isnan(xi[i])) continue;
    double hmin = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < Ki; ++k)
      hmin = std::min(hmin, glue_threshold(s.gains(static_cast<Eigen::Index>(i), k), eps));
    xi[i] = (i + 1 < I) ? std::min(xi[i + 1], hmin) : hmin;
    cert.degenerate = true;
  }
  cert.glue_levels = xi;

  for (std::size_t i = 0; i < I; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    for (Eigen::Index k = 0; k < Ki; ++k) {
      if (pol.power(ii, k) > 0.0 && pol.duration(ii, k) > 0.0) continue;
      const double g = s.gains(ii, k);
      cert.sigma(ii, k) = std::max(0.0, 1.0 / (2.0 * xi[i]) - g / 2.0);
      stat = std::max(stat, std::max(0.0, xi[i] - glue_threshold(g, eps)) / xi[i]);
    }
  }

  const double e_scale = std::max(1.0, s.total_energy());
  const double d_scale = std::max(1.0, s.total_data());

  if (kind == ProblemKind::throughput) {
    // nu_i = 1/(2 xi_i) = sum_{j>=i} (lambda_j - mu_j)
    const double cap = s.battery_capacity.value();
    double nu_max = 0.0;
    for (double v : xi) nu_max = std::max(nu_max, 1.0 / (2.0 * v));
    for (std::size_t i = 0; i < I; ++i) {
      const double nu = 1.0 / (2.0 * xi[i]);
      const double nu_next = i + 1 < I ? 1.0 / (2.0 * xi[i + 1]) : 0.0;
      const double d = nu - nu_next;
      cert.lambda[i] = std::max(d, 0.0);
      cert.mu[i] = std::max(-d, 0.0);
      const double empty_slack = led.battery_residual[i];
      const double full_slack =
          i + 1 < I ? cap - (led.battery_residual[i] + s.energy[i + 1]) : 0.0;
      comp = std::max(comp, cert.lambda[i] / nu_max * empty_slack / e_scale);
      if (std::isfinite(full_slack))
        comp = std::max(comp, cert.mu[i] / nu_max * full_slack / e_scale);
      else if (cert.mu[i] > 0.0)
        comp = std::max(comp, cert.mu[i] / nu_max);
      if (empty_slack <= kTight * e_scale && full_slack <= kTight * e_scale) {
        cert.degenerate = true;
        note(i, "battery both empty and full");
      }
    }
    cert.final_multiplier = 0.0;
  } else {
    // xi_i = w_i / (2 q_i), q_i = 1 + sum_{j>=i} lambda_j, w_i = w - sum_{i<=j<I} mu_j
    double arrived = 0.0;
    std::vector<double> buffer(I);
    for (std::size_t i = 0; i < I; ++i) {
      arrived += s.data[i];
      buffer[i] = arrived - led.cumulative_data[i];
    }
    double q = 1.0, w = 2.0 * xi[I - 1];
    cert.final_multiplier = w;
    const double w_scale = w;
    comp = std::max(comp, std::abs(led.delivered() - s.total_data()) / d_scale);
    for (std::size_t i = I - 1; i-- > 0;) {
      const double target = 2.0 * xi[i];
      const double rel = (w / q - target) / (w / q);
      if (rel < -1e-12) {
        stat = std::max(stat, -rel);
        note(i, "level decreases");
        continue;
      }
      if (rel <= 1e-12) continue;
      const bool data_tight = buffer[i] <= kTight * d_scale;
      const bool energy_tight = led.battery_residual[i] <= kTight * e_scale;
      if (data_tight && energy_tight) {
        cert.degenerate = true;
        note(i, "battery and buffer both empty");
      }
      if (data_tight || !energy_tight) {
        const double w_new = target * q;
        cert.mu[i] = w - w_new;
        w = w_new;
        comp = std::max(comp, cert.mu[i] / w_scale * buffer[i] / d_scale);
      } else {
        const double q_new = w / target;
        cert.lambda[i] = q_new - q;
        q = q_new;
        comp = std::max(comp, cert.lambda[i] * led.battery_residual[i] / e_scale);
      }
    }
  }

  cert.stationarity = stat;
  cert.complementarity = comp;
  cert.max_residual = std::max(stat, comp);
  return cert;
}

}  // namespace ehglue
