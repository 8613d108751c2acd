#include "ehglue/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

namespace ehglue {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// -(theta/2) log(1 + gamma u / theta): negative data of one cell, (u, theta) = (alpha, Theta)
// (theta/gamma)(exp(2u/theta) - 1): transmit energy of one cell, (u, theta) = (beta, Theta)
enum class TermKind { NegData, Energy };

struct Term {
  TermKind kind;
  int u;
  int th;
  double gamma;
};

struct Fn {
  std::vector<std::pair<int, double>> lin;
  double c = 0.0;
  std::vector<Term> terms;
};

double term_value(const Term& t, const Eigen::VectorXd& x) {
  const double u = x[t.u], th = x[t.th];
  if (!(th > 0.0)) return kInf;
  if (t.kind == TermKind::NegData) {
    const double r = t.gamma * u / th;
    if (!(r > -1.0)) return kInf;
    return -0.5 * th * std::log1p(r);
  }
  const double z = 2.0 * u / th;
  if (z > 700.0) return kInf;
  return th / t.gamma * std::expm1(z);
}

void term_derivs(const Term& t, const Eigen::VectorXd& x, double wg, Eigen::VectorXd& g,
                 double wh, Eigen::MatrixXd* H) {
  const double u = x[t.u], th = x[t.th], gm = t.gamma;
  if (t.kind == TermKind::NegData) {
    const double D = th + gm * u;
    const double r = gm * u / th;
    g[t.u] += wg * (-gm * th / (2.0 * D));
    g[t.th] += wg * (-0.5 * (std::log1p(r) - r / (1.0 + r)));
    if (H) {
      const double c = wh * gm * gm / (2.0 * D * D);
      (*H)(t.u, t.u) += c * th;
      (*H)(t.u, t.th) -= c * u;
      (*H)(t.th, t.u) -= c * u;
      (*H)(t.th, t.th) += c * u * u / th;
    }
    return;
  }
  const double z = 2.0 * u / th;
  const double w = std::exp(z);
  g[t.u] += wg * (2.0 / gm) * w;
  g[t.th] += wg * (w - 1.0 - z * w) / gm;
  if (H) {
    const double c = wh * w / (gm * th);
    (*H)(t.u, t.u) += c * 4.0;
    (*H)(t.u, t.th) -= c * 2.0 * z;
    (*H)(t.th, t.u) -= c * 2.0 * z;
    (*H)(t.th, t.th) += c * z * z;
  }
}

double eval(const Fn& f, const Eigen::VectorXd& x) {
  double v = f.c;
  for (const auto& [j, a] : f.lin) v += a * x[j];
  for (const auto& t : f.terms) v += term_value(t, x);
  return v;
}

void derivs(const Fn& f, const Eigen::VectorXd& x, double wg, Eigen::VectorXd& g, double wh,
            Eigen::MatrixXd* H) {
  for (const auto& [j, a] : f.lin) g[j] += wg * a;
  for (const auto& t : f.terms) term_derivs(t, x, wg, g, wh, H);
}

struct Program {
  int n = 0;
  Fn objective;
  std::vector<Fn> cons;  // cons[i](x) <= 0
  std::size_t coupling = 0;  // cons[0..coupling) are the relaxed coupling rows
};

class BarrierSolver {
 public:
  BarrierSolver(const Program& p, const BarrierOptions& opt) : p_(p), opt_(opt) {}

  double phi(const Eigen::VectorXd& x, double t) const {
    double v = t * eval(p_.objective, x);
    if (!std::isfinite(v)) return kInf;
    for (const auto& c : p_.cons) {
      const double f = eval(c, x);
      if (!(f < 0.0)) return kInf;
      v -= std::log(-f);
    }
    return v;
  }

  // Damped Newton on phi(., t); returns false if the step budget ran out.
  bool center(Eigen::VectorXd& x, double t, const std::function<bool(const Eigen::VectorXd&)>& stop) {
    const int n = p_.n;
    double prev_dec = kInf;
    int stalls = 0;
    for (int it = 0; it < opt_.max_newton; ++it) {
      Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
      Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
      derivs(p_.objective, x, t, g, t, &H);
      for (const auto& c : p_.cons) {
        const double d = -eval(c, x);
        Eigen::VectorXd gi = Eigen::VectorXd::Zero(n);
        derivs(c, x, 1.0, gi, 0.0, nullptr);
        g += gi / d;
        H += gi * gi.transpose() / (d * d);
        if (!c.terms.empty()) {
          Eigen::VectorXd dummy = Eigen::VectorXd::Zero(n);
          derivs(c, x, 0.0, dummy, 1.0 / d, &H);
        }
      }
      // symmetric diagonal scaling; barrier rows spread the diagonal over many decades
      const Eigen::VectorXd dscale = H.diagonal().cwiseAbs().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
      const Eigen::MatrixXd Hs = dscale.asDiagonal() * H * dscale.asDiagonal();
      Eigen::LDLT<Eigen::MatrixXd> ldlt(Hs);
      Eigen::VectorXd dx = dscale.asDiagonal() * ldlt.solve(-(dscale.asDiagonal() * g));
      if (ldlt.info() != Eigen::Success || !dx.allFinite()) {
        const Eigen::MatrixXd Hr = Hs + 1e-12 * Eigen::MatrixXd::Identity(n, n);
        dx = dscale.asDiagonal() * Hr.ldlt().solve(-(dscale.asDiagonal() * g));
        if (!dx.allFinite()) return false;
      }
      const double dec = -g.dot(dx);
      ++steps_;
      if (dec < 0.0 || dec / 2.0 <= 1e-12) return true;
      // rounding floor: the decrement stops shrinking
      stalls = (dec < 1e-8 && dec > 0.5 * prev_dec) ? stalls + 1 : 0;
      if (stalls >= 3) return true;
      prev_dec = dec;

      double step = 1.0;
      Eigen::VectorXd xn = x + dx;
      double fn = phi(xn, t);
      // near the centre take the pure Newton step: at large t the Armijo test
      // drowns in cancellation of t*f0
      if (dec < 0.25 && fn < kInf) {
        x = xn;
        if (stop && stop(x)) return true;
        continue;
      }
      const double f0 = phi(x, t);
      while (!(fn <= f0 - 0.25 * step * dec) && step > 1e-20) {
        step *= 0.5;
        xn = x + step * dx;
        fn = phi(xn, t);
      }
      if (!(fn < kInf) || step <= 1e-20) return true;  // no progress possible at this precision
      x = xn;
      if (stop && stop(x)) return true;
    }
    return false;
  }

  // Returns the final barrier parameter.
  double run(Eigen::VectorXd& x, double scale,
             const std::function<bool(const Eigen::VectorXd&)>& stop = nullptr) {
    const double m = static_cast<double>(p_.cons.size());
    double t = 1.0;
    for (int outer = 0; outer < opt_.max_outer; ++outer) {
      center(x, t, stop);
      if (stop && stop(x)) return t;
      if (m / t < opt_.gap_tol * std::max(1.0, scale)) return t;
      t *= opt_.mu_factor;
    }
    throw Error(ErrorCode::NoConvergence, "barrier method hit the outer iteration cap");
  }

  int steps() const { return steps_; }

 private:
  const Program& p_;
  const BarrierOptions& opt_;
  int steps_ = 0;
};

struct Layout {
  std::size_t epochs, K;
  int u(std::size_t i, std::size_t k) const { return static_cast<int>(2 * (i * K + k)); }
  int th(std::size_t i, std::size_t k) const { return static_cast<int>(2 * (i * K + k) + 1); }
  int cells() const { return static_cast<int>(2 * epochs * K); }
};

double relax(double scale) { return 1e-9 * (1.0 + std::abs(scale)); }

// Builds the program for the first `epochs` epochs of s. For the tct kind,
// the last epoch's durations are bounded by an extra variable t.
Program build_program(const Scenario& s, ProblemKind kind, std::size_t epochs) {
  const std::size_t K = s.num_channels();
  const Layout L{epochs, K};
  const double eps = s.processing_cost;
  Program p;
  p.n = L.cells() + (kind == ProblemKind::tct ? 1 : 0);
  const int tvar = L.cells();

  auto cell_energy = [&](Fn& f, std::size_t i, std::size_t k) {
    const double g = s.gains(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
    if (kind == ProblemKind::throughput) {
      f.lin.push_back({L.u(i, k), 1.0});
    } else {
      f.terms.push_back({TermKind::Energy, L.u(i, k), L.th(i, k), g});
    }
    if (eps > 0.0) f.lin.push_back({L.th(i, k), eps});
  };

  // objective
  for (std::size_t i = 0; i < epochs; ++i)
    for (std::size_t k = 0; k < K; ++k) {
      const double g = s.gains(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
      if (kind == ProblemKind::throughput)
        p.objective.terms.push_back({TermKind::NegData, L.u(i, k), L.th(i, k), g});
      else if (kind == ProblemKind::energy)
        cell_energy(p.objective, i, k);
    }
  if (kind == ProblemKind::tct) p.objective.lin.push_back({tvar, 1.0});

  // energy causality
  double Ecum = 0.0, Bcum = 0.0;
  for (std::size_t i = 0; i < epochs; ++i) {
    Ecum += s.energy[i];
    Fn f;
    for (std::size_t j = 0; j <= i; ++j)
      for (std::size_t k = 0; k < K; ++k) cell_energy(f, j, k);
    f.c = -Ecum - relax(Ecum);
    p.cons.push_back(std::move(f));
  }
  if (kind == ProblemKind::throughput) {
    if (!s.battery_capacity.is_unbounded()) {
      Ecum = 0.0;
      for (std::size_t i = 0; i + 1 < epochs; ++i) {
        Ecum += s.energy[i];
        Fn f;
        for (std::size_t j = 0; j <= i; ++j)
          for (std::size_t k = 0; k < K; ++k) {
            f.lin.push_back({L.u(j, k), -1.0});
            if (eps > 0.0) f.lin.push_back({L.th(j, k), -eps});
          }
        const double lhs = Ecum + s.energy[i + 1] - s.battery_capacity.value();
        f.c = lhs - relax(s.battery_capacity.value());
        p.cons.push_back(std::move(f));
      }
    }
  } else {
    for (std::size_t i = 0; i < epochs; ++i) {
      Bcum += s.data[i];
      Fn f;
      for (std::size_t j = 0; j <= i; ++j)
        for (std::size_t k = 0; k < K; ++k) f.lin.push_back({L.u(j, k), i + 1 < epochs ? 1.0 : -1.0});
      // prefix rows: sent <= arrived; last row: sent >= arrived
      f.c = (i + 1 < epochs ? -Bcum : Bcum) - relax(Bcum);
      p.cons.push_back(std::move(f));
    }
  }
  p.coupling = p.cons.size();

  // cell bounds
  for (std::size_t i = 0; i < epochs; ++i)
    for (std::size_t k = 0; k < K; ++k) {
      Fn lo_u, lo_th, hi_th;
      lo_u.lin.push_back({L.u(i, k), -1.0});
      lo_th.lin.push_back({L.th(i, k), -1.0});
      hi_th.lin.push_back({L.th(i, k), 1.0});
      if (kind == ProblemKind::tct && i + 1 == epochs) {
        hi_th.lin.push_back({tvar, -1.0});
      } else {
        hi_th.c = -s.durations[i];
      }
      p.cons.push_back(std::move(lo_u));
      p.cons.push_back(std::move(lo_th));
      p.cons.push_back(std::move(hi_th));
    }
  if (kind == ProblemKind::tct) {
    Fn hi_t;
    hi_t.lin.push_back({tvar, 1.0});
    hi_t.c = -s.durations[epochs - 1];
    p.cons.push_back(std::move(hi_t));
  }
  return p;
}

Eigen::VectorXd initial_point(const Scenario& s, ProblemKind kind, std::size_t epochs) {
  const std::size_t K = s.num_channels();
  const Layout L{epochs, K};
  Eigen::VectorXd x(L.cells() + (kind == ProblemKind::tct ? 1 : 0));
  for (std::size_t i = 0; i < epochs; ++i)
    for (std::size_t k = 0; k < K; ++k) {
      double th = 0.5 * s.durations[i];
      if (kind == ProblemKind::tct && i + 1 == epochs) th = 0.45 * s.durations[i];
      x[L.th(i, k)] = th;
      x[L.u(i, k)] = 1e-6 * th;
    }
  if (kind == ProblemKind::tct) x[L.cells()] = 0.9 * s.durations[epochs - 1];
  return x;
}

// Phase I: minimise a shared slack on the coupling rows until x is strictly
// feasible. Returns false if the instance has no interior.
bool phase_one(const Program& p, Eigen::VectorXd& x, const BarrierOptions& opt, int& steps) {
  auto worst = [&](const Eigen::VectorXd& y) {
    double w = -kInf;
    for (std::size_t c = 0; c < p.coupling; ++c) w = std::max(w, eval(p.cons[c], y));
    return w;
  };
  const double w0 = worst(x);
  if (w0 < 0.0) return true;

  Program q;
  q.n = p.n + 1;
  const int svar = p.n;
  for (std::size_t c = 0; c < p.cons.size(); ++c) {
    Fn f = p.cons[c];
    if (c < p.coupling) f.lin.push_back({svar, -1.0});
    q.cons.push_back(std::move(f));
  }
  const double floor_s = -(1.0 + std::abs(w0));
  Fn lo_s;
  lo_s.lin.push_back({svar, -1.0});
  lo_s.c = floor_s;
  q.cons.push_back(std::move(lo_s));
  q.objective.lin.push_back({svar, 1.0});
  q.coupling = 0;

  Eigen::VectorXd y(q.n);
  y.head(p.n) = x;
  y[svar] = w0 + 1.0;
  BarrierOptions o = opt;
  o.gap_tol = 1e-14;
  BarrierSolver bs(q, o);
  auto stop = [&](const Eigen::VectorXd& z) { return worst(z.head(p.n)) < 0.0; };
  try {
    bs.run(y, 1.0, stop);
  } catch (const Error&) {
  }
  steps += bs.steps();
  x = y.head(p.n);
  return worst(x) < 0.0;
}

struct Solved {
  Eigen::VectorXd x;
  double t = 1.0;
  int steps = 0;
};

bool solve_program(const Program& p, Eigen::VectorXd x0, const BarrierOptions& opt, Solved& out) {
  out.steps = 0;
  if (!phase_one(p, x0, opt, out.steps)) return false;
  BarrierSolver bs(p, opt);
  const double scale = std::abs(eval(p.objective, x0));
  out.t = bs.run(x0, scale);
  out.steps += bs.steps();
  out.x = x0;
  return true;
}

Policy extract_policy(const Scenario& s, ProblemKind kind, std::size_t epochs,
                      const Eigen::VectorXd& x, double snap) {
  const std::size_t K = s.num_channels();
  const Layout L{epochs, K};
  Policy pol = Policy::zeros(s.num_epochs(), K);
  for (std::size_t i = 0; i < epochs; ++i)
    for (std::size_t k = 0; k < K; ++k) {
      const auto ii = static_cast<Eigen::Index>(i), kk = static_cast<Eigen::Index>(k);
      const double th = x[L.th(i, k)], u = std::max(0.0, x[L.u(i, k)]);
      if (th < snap) continue;
      const double p = kind == ProblemKind::throughput ? u / th
                                                       : std::expm1(2.0 * u / th) / s.gains(ii, kk);
      pol.power(ii, kk) = p;
      pol.duration(ii, kk) = std::min(th, s.durations[i]);
    }
  return pol.canonical();
}

KKTCertificate barrier_certificate(const Scenario& s, ProblemKind kind, std::size_t epochs,
                                   const Program& p, const Eigen::VectorXd& x, double t) {
  const std::size_t K = s.num_channels();
  const std::size_t I = s.num_epochs();
  KKTCertificate cert;
  cert.lambda.assign(I, 0.0);
  cert.mu.assign(I, 0.0);
  cert.phi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(I), static_cast<Eigen::Index>(K));
  cert.psi = cert.phi;
  cert.sigma = cert.phi;

  const std::size_t m = p.cons.size();
  Eigen::VectorXd g0 = Eigen::VectorXd::Zero(p.n);
  derivs(p.objective, x, 1.0, g0, 0.0, nullptr);
  const double gscale = std::max(1.0, g0.cwiseAbs().maxCoeff());
  Eigen::MatrixXd J(p.n, static_cast<Eigen::Index>(m));
  std::vector<double> fval(m), dual(m);
  for (std::size_t c = 0; c < m; ++c) {
    fval[c] = eval(p.cons[c], x);
    Eigen::VectorXd gi = Eigen::VectorXd::Zero(p.n);
    derivs(p.cons[c], x, 1.0, gi, 0.0, nullptr);
    J.col(static_cast<Eigen::Index>(c)) = gi;
    dual[c] = 1.0 / (t * -fval[c]);
  }
  auto residuals = [&](const std::vector<double>& lam, double& st, double& cs) {
    Eigen::VectorXd r = g0;
    cs = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      r += lam[c] * J.col(static_cast<Eigen::Index>(c));
      cs = std::max(cs, lam[c] * std::abs(fval[c]) / gscale);
    }
    st = r.cwiseAbs().maxCoeff() / gscale;
  };
  double st, cs;
  residuals(dual, st, cs);

  // barrier duals carry the rounding error of tiny slacks; refit them by least
  // squares on the rows the barrier marks as active, dropping negatives
  std::vector<Eigen::Index> active;
  for (std::size_t c = 0; c < m; ++c)
    if (std::abs(fval[c]) <= 1e-6 * (1.0 + std::abs(p.cons[c].c)))
      active.push_back(static_cast<Eigen::Index>(c));
  if (!active.empty()) {
    Eigen::MatrixXd JA(p.n, static_cast<Eigen::Index>(active.size()));
    for (std::size_t a = 0; a < active.size(); ++a) JA.col(static_cast<Eigen::Index>(a)) = J.col(active[a]);
    std::vector<Eigen::Index> keep(active);
    for (int pass = 0; pass < 5 && !keep.empty(); ++pass) {
      Eigen::MatrixXd JK(p.n, static_cast<Eigen::Index>(keep.size()));
      for (std::size_t a = 0; a < keep.size(); ++a) JK.col(static_cast<Eigen::Index>(a)) = J.col(keep[a]);
      const Eigen::VectorXd lam = JK.completeOrthogonalDecomposition().solve(-g0);
      std::vector<double> fit(m, 0.0);
      std::vector<Eigen::Index> next;
      for (std::size_t a = 0; a < keep.size(); ++a)
        if (lam[static_cast<Eigen::Index>(a)] > 0.0) {
          fit[static_cast<std::size_t>(keep[a])] = lam[static_cast<Eigen::Index>(a)];
          next.push_back(keep[a]);
        }
      double st2, cs2;
      residuals(fit, st2, cs2);
      if (std::max(st2, cs2) < std::max(st, cs)) {
        dual = fit;
        st = st2;
        cs = cs2;
      }
      if (next.size() == keep.size()) break;
      keep = std::move(next);
    }
  }
  cert.stationarity = st;
  cert.complementarity = cs;
  cert.max_residual = std::max(st, cs);

  std::size_t c = 0;
  for (std::size_t i = 0; i < epochs; ++i) cert.lambda[i] = dual[c++];
  if (kind == ProblemKind::throughput) {
    if (!s.battery_capacity.is_unbounded())
      for (std::size_t i = 0; i + 1 < epochs; ++i) cert.mu[i] = dual[c++];
  } else {
    for (std::size_t i = 0; i + 1 < epochs; ++i) cert.mu[i] = dual[c++];
    cert.final_multiplier = dual[c++];
  }
  for (std::size_t i = 0; i < epochs; ++i)
    for (std::size_t k = 0; k < K; ++k) {
      const auto ii = static_cast<Eigen::Index>(i), kk = static_cast<Eigen::Index>(k);
      cert.sigma(ii, kk) = dual[c++];
      cert.psi(ii, kk) = dual[c++];
      cert.phi(ii, kk) = dual[c++];
    }
  return cert;
}

}  // namespace

ConvexResult solve_convex(const Scenario& s, ProblemKind kind, const BarrierOptions& opt) {
  validate_scenario(s, kind).throw_if_failed();
  const std::size_t I = s.num_epochs(), K = s.num_channels();
  ConvexResult res;

  if (kind == ProblemKind::throughput && s.total_energy() <= 1e-12) {
    res.policy = Policy::zeros(I, K);
    res.certificate = kkt_residuals(s, res.policy, kind);
    return res;
  }
  if (kind == ProblemKind::energy && s.total_data() <= 1e-12) {
    res.policy = Policy::zeros(I, K);
    res.objective = s.total_energy();
    res.certificate = kkt_residuals(s, res.policy, kind);
    return res;
  }

  std::size_t first = I, last = I;
  if (kind == ProblemKind::tct) {
    for (std::size_t i = I; i-- > 0;)
      if (s.data[i] > 0.0) {
        first = i;
        break;
      }
    if (first == I) throw Error(ErrorCode::ValidationFailed, "no data to deliver");
    last = I;
  } else {
    first = I - 1;
    last = I;
  }

  for (std::size_t m = first; m < last; ++m) {
    const std::size_t epochs = m + 1;
    const Program p = build_program(s, kind, epochs);
    Solved sv;
    if (!solve_program(p, initial_point(s, kind, epochs), opt, sv)) continue;
    res.newton_steps = sv.steps;
    res.policy = extract_policy(s, kind, epochs, sv.x, opt.snap_duration);
    res.certificate = barrier_certificate(s, kind, epochs, p, sv.x, sv.t);
    if (kind == ProblemKind::throughput) {
      for (double d : res.policy.epoch_data(s.gains)) res.objective += d;
    } else if (kind == ProblemKind::energy) {
      res.objective = s.total_energy();
      for (double e : res.policy.epoch_consumption(s.processing_cost)) res.objective -= e;
    } else {
      res.objective = s.start_time(m) + sv.x[p.n - 1];
      res.bracket_epoch = m + 1;
    }
    return res;
  }
  throw Error(ErrorCode::InfeasibleInstance, "no strictly feasible point found");
}

}  // namespace ehglue
