#include "ehglue/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include "ehglue/offline_energy.hpp"
#include "ehglue/offline_throughput.hpp"

namespace ehglue {

namespace {

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double dominance_tol(double x) { return 1e-6 * (1.0 + std::abs(x)); }

}  // namespace

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

Scenario gen_fading_scenario(std::uint64_t seed, const FadingParams& p) {
  std::mt19937_64 rng(seed);
  Scenario s;
  s.gains.resize(static_cast<Eigen::Index>(p.blocks), static_cast<Eigen::Index>(p.channels));
  for (std::size_t i = 0; i < p.blocks; ++i) {
    for (std::size_t k = 0; k < p.channels; ++k) {
      double g = -std::log1p(-unit(rng)) / p.fading_rate;
      s.gains(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = std::max(g, 1e-12);
    }
    s.energy.push_back(unit(rng) * p.energy_max);
    s.data.push_back(unit(rng) * p.data_max);
    s.durations.push_back(p.block_s);
  }
  s.processing_cost = p.eps;
  s.battery_capacity = p.battery;
  return s;
}

std::string to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::epsilon: return "epsilon";
    case SweepVariable::energy_rate: return "energy_rate";
    case SweepVariable::data_rate: return "data_rate";
  }
  return "?";
}

SweepVariable parse_sweep_variable(const std::string& name) {
  if (name == "epsilon" || name == "eps") return SweepVariable::epsilon;
  if (name == "energy_rate") return SweepVariable::energy_rate;
  if (name == "data_rate") return SweepVariable::data_rate;
  throw Error(ErrorCode::ParseError, "unknown sweep variable '" + name + "'");
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::ValidationFailed, "experiment: " + m); };
  if (grid.empty()) fail("grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) fail("grid must be strictly increasing");
  for (double v : grid)
    if (!(v >= 0.0) || !std::isfinite(v)) fail("grid values must be finite and non-negative");
  if (seeds < 1) fail("seed count must be at least 1");
  if (base.blocks < 1 || base.channels < 1 || !(base.block_s > 0.0) || !(base.fading_rate > 0.0))
    fail("blocks, channels, block length and fading rate must be positive");
  if (kind == ProblemKind::tct) fail("online experiments cover the throughput and energy kinds");
  if (kind == ProblemKind::energy && !base.battery.is_unbounded()) fail("energy kind needs an unbounded battery");
  if (kind == ProblemKind::throughput && variable == SweepVariable::data_rate)
    fail("data_rate sweeps need the energy kind");
}

ExperimentConfig default_experiment(ProblemKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  if (kind == ProblemKind::throughput) {
    c.variable = SweepVariable::energy_rate;
    c.grid = {0.5, 1, 1.5, 2, 2.5, 3, 3.5, 4, 4.5, 5};
  } else {
    c.variable = SweepVariable::data_rate;
    c.grid = {0.01, 0.03, 0.05, 0.07, 0.09};
    c.base.energy_max = 3.0;
    c.base.data_max = 0.18;
    c.base.battery = Capacity::unbounded();
  }
  return c;
}

ExperimentConfig experiment_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "experiment: expected an object");
  ProblemKind kind = parse_problem_kind(j.value("kind", std::string("throughput")));
  ExperimentConfig c = default_experiment(kind);
  try {
    if (j.contains("sweep")) {
      const json& sw = j.at("sweep");
      if (sw.contains("variable")) c.variable = parse_sweep_variable(sw.at("variable").get<std::string>());
      if (sw.contains("grid")) c.grid = sw.at("grid").get<std::vector<double>>();
    }
    FadingParams& b = c.base;
    b.blocks = j.value("blocks", b.blocks);
    b.channels = j.value("channels", b.channels);
    b.block_s = j.value("block_s", b.block_s);
    b.fading_rate = j.value("fading_rate", b.fading_rate);
    b.energy_max = j.value("energy_max_uJ", b.energy_max);
    b.data_max = j.value("data_max_nats", b.data_max);
    b.eps = j.value("processing_cost_uW", b.eps);
    if (j.contains("battery_capacity_uJ")) {
      const json& cap = j.at("battery_capacity_uJ");
      b.battery = cap.is_string() ? Capacity::unbounded() : Capacity::finite(cap.get<double>());
    }
    c.seeds = j.value("seeds", c.seeds);
    c.base_seed = j.value("base_seed", c.base_seed);
    c.output = j.value("output", c.output);
    if (j.contains("dp")) {
      const json& d = j.at("dp");
      c.run_dp = d.value("enabled", c.run_dp);
      c.dp.gain_levels = d.value("gain_levels", c.dp.gain_levels);
      c.dp.battery_step = d.value("battery_step_uJ", c.dp.battery_step);
      c.dp.buffer_step = d.value("buffer_step_nats", c.dp.buffer_step);
      c.dp.quadrature = d.value("quadrature", c.dp.quadrature);
      c.dp.penalty = d.value("penalty", c.dp.penalty);
      c.dp.state_cap = d.value("state_cap", c.dp.state_cap);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("experiment: ") + e.what());
  }
  return c;
}

FadingParams point_params(const ExperimentConfig& cfg, double value) {
  FadingParams p = cfg.base;
  switch (cfg.variable) {
    case SweepVariable::epsilon: p.eps = value; break;
    case SweepVariable::energy_rate: p.energy_max = 2.0 * value; break;
    case SweepVariable::data_rate: p.data_max = 2.0 * value; break;
  }
  return p;
}

DpConfig point_dp_config(const ExperimentConfig& cfg, double value) {
  FadingParams p = point_params(cfg, value);
  DpConfig d = cfg.dp;
  d.kind = cfg.kind;
  d.blocks = p.blocks;
  d.block_s = p.block_s;
  d.channels = p.channels;
  d.fading_rate = p.fading_rate;
  d.energy_min = 0.0;
  d.energy_max = p.energy_max;
  d.data_min = 0.0;
  d.data_max = p.data_max;
  d.eps = p.eps;
  if (cfg.kind == ProblemKind::throughput) {
    d.battery_capacity = p.battery.is_unbounded() ? p.blocks * p.energy_max : p.battery.value();
  } else {
    d.battery_capacity = p.blocks * p.energy_max;
    d.buffer_max = p.blocks * p.data_max;
  }
  return d;
}

unsigned worker_count() {
  if (const char* env = std::getenv("EHGLUE_WORKERS")) {
    int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

SeedOutcome run_seed(const ExperimentConfig& cfg, const FadingParams& p, std::uint64_t seed,
                     const DpPolicy* dp) {
  SeedOutcome o;
  o.seed = seed;
  try {
    Scenario s = gen_fading_scenario(seed, p);
    if (cfg.kind == ProblemKind::throughput) {
      o.offline = solve_offline_throughput(s).throughput;
      double cap = s.battery_capacity.value();
      auto myopic = [&](const OnlineState& st) { return online_throughput_step(st, p.eps, cap); };
      o.myopic = simulate(s, myopic, ProblemKind::throughput).throughput;
      if (dp) o.dp = simulate(s, dp->step(), ProblemKind::throughput).throughput;
    } else {
      o.feasible = check_feasibility(s).feasible;
      if (!o.feasible) return o;
      o.offline = solve_offline_energy(s).remaining_energy;
      auto myopic = [&](const OnlineState& st) { return online_energy_step(st, p.eps); };
      Trace t = simulate(s, myopic, ProblemKind::energy);
      o.myopic_delivered = t.feasible;
      o.myopic = t.feasible ? t.remaining_energy : 0.0;
      if (dp) {
        Trace td = simulate(s, dp->step(), ProblemKind::energy);
        o.dp_delivered = td.feasible;
        o.dp = td.feasible ? td.remaining_energy : 0.0;
      }
    }
  } catch (const std::exception& e) {
    o.error = e.what();
  }
  return o;
}

}  // namespace

std::vector<SeedOutcome> run_point(const ExperimentConfig& cfg, double value, const DpPolicy* dp) {
  FadingParams p = point_params(cfg, value);
  std::vector<SeedOutcome> out(cfg.seeds);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < cfg.seeds;)
      out[i] = run_seed(cfg, p, cfg.base_seed + i, dp);
  };
  unsigned n = std::min<unsigned>(worker_count(), static_cast<unsigned>(cfg.seeds));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return out;
}

SweepRow summarize(double value, const std::vector<SeedOutcome>& out, bool with_dp) {
  SweepRow r;
  r.value = value;
  r.seeds = out.size();
  std::vector<double> off, my, dp;
  std::size_t my_ok = 0, dp_ok = 0;
  for (const auto& o : out) {
    if (!o.error.empty()) {
      ++r.errors;
      continue;
    }
    if (!o.feasible) continue;
    off.push_back(o.offline);
    my.push_back(o.myopic);
    dp.push_back(o.dp);
    my_ok += o.myopic_delivered;
    dp_ok += o.dp_delivered;
    double tol = dominance_tol(o.offline);
    if (o.myopic > o.offline + tol || (with_dp && o.dp > o.offline + tol)) ++r.dominance_violations;
  }
  auto stats = [](const std::vector<double>& v, double& mean, double& se) {
    mean = se = 0.0;
    if (v.empty()) return;
    for (double x : v) mean += x;
    mean /= v.size();
    if (v.size() < 2) return;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    se = std::sqrt(ss / (v.size() - 1) / v.size());
  };
  stats(off, r.offline_mean, r.offline_stderr);
  stats(my, r.myopic_mean, r.myopic_stderr);
  if (with_dp) stats(dp, r.dp_mean, r.dp_stderr);
  std::size_t ok = out.size() - r.errors;
  r.feasible_fraction = ok ? static_cast<double>(off.size()) / ok : 0.0;
  if (!off.empty()) {
    r.myopic_delivered = static_cast<double>(my_ok) / off.size();
    r.dp_delivered = with_dp ? static_cast<double>(dp_ok) / off.size() : 0.0;
  }
  return r;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<SweepRow> rows;
  for (double v : cfg.grid) {
    std::optional<DpPolicy> dp;
    if (cfg.run_dp) dp = dp_solve(point_dp_config(cfg, v));
    rows.push_back(summarize(v, run_point(cfg, v, dp ? &*dp : nullptr), cfg.run_dp));
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "sweep_value,offline_mean,myopic_mean,dp_mean,offline_stderr,myopic_stderr,dp_stderr,"
        "feasible_fraction,myopic_delivered,dp_delivered,seeds,dominance_violations,errors\n";
  for (const auto& r : rows) {
    os << fmt6(r.value) << ',' << fmt6(r.offline_mean) << ',' << fmt6(r.myopic_mean) << ','
       << fmt6(r.dp_mean) << ',' << fmt6(r.offline_stderr) << ',' << fmt6(r.myopic_stderr) << ','
       << fmt6(r.dp_stderr) << ',' << fmt6(r.feasible_fraction) << ',' << fmt6(r.myopic_delivered)
       << ',' << fmt6(r.dp_delivered) << ',' << r.seeds << ',' << r.dominance_violations << ','
       << r.errors << '\n';
  }
  return os.str();
}

std::string seed_csv(double value, const std::vector<SeedOutcome>& out) {
  std::ostringstream os;
  os << "sweep_value,seed,feasible,offline,myopic,dp,myopic_delivered,dp_delivered,error\n";
  for (const auto& o : out) {
    std::string err = o.error;
    std::replace(err.begin(), err.end(), ',', ';');
    os << fmt6(value) << ',' << o.seed << ',' << o.feasible << ',' << fmt6(o.offline) << ','
       << fmt6(o.myopic) << ',' << fmt6(o.dp) << ',' << o.myopic_delivered << ',' << o.dp_delivered
       << ',' << err << '\n';
  }
  return os.str();
}

std::vector<EpsRow> epsilon_sweep(const Scenario& s, ProblemKind kind, const std::vector<double>& grid) {
  std::vector<EpsRow> rows;
  for (double e : grid) {
    Scenario t = with_processing_cost(s, e);
    EpsRow r;
    r.eps = e;
    if (kind == ProblemKind::throughput) {
      auto sol = solve_offline_throughput(t);
      r.objective = sol.throughput;
      r.total_duration = total_transmission_duration(sol.policy);
    } else {
      t = with_unbounded_battery(t);
      r.feasible = check_feasibility(t).feasible;
      if (r.feasible) {
        auto sol = solve_offline_energy(t);
        r.objective = sol.remaining_energy;
        r.total_duration = total_transmission_duration(sol.policy);
      }
    }
    rows.push_back(r);
  }
  return rows;
}

std::string epsilon_csv(const std::vector<EpsRow>& rows, ProblemKind kind) {
  std::ostringstream os;
  os << "epsilon," << (kind == ProblemKind::throughput ? "throughput_nats" : "remaining_energy_uJ")
     << ",total_duration_s,feasible\n";
  for (const auto& r : rows)
    os << fmt6(r.eps) << ',' << fmt6(r.objective) << ',' << fmt6(r.total_duration) << ','
       << r.feasible << '\n';
  return os.str();
}

}  // namespace ehglue
