#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "ehglue/golden.hpp"
#include "ehglue/harness.hpp"
#include "ehglue/io.hpp"
#include "ehglue/offline_energy.hpp"
#include "ehglue/offline_throughput.hpp"
#include "ehglue/oracle.hpp"
#include "ehglue/tct.hpp"

using namespace ehglue;

namespace {

struct SolveArgs {
  std::string scenario;
  std::string out;
  std::optional<double> eps;
  bool json_out = false;
};

void add_solve_options(CLI::App* sub, SolveArgs& a) {
  sub->add_option("--scenario", a.scenario, "scenario JSON file")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", a.out, "write the result JSON here");
  sub->add_option("--eps-override", a.eps, "replace the processing cost (uW)");
  sub->add_flag("--json", a.json_out, "machine-readable output on stdout");
}

Scenario load(const SolveArgs& a, bool unbounded) {
  Scenario s = scenario_from_json(read_json_file(a.scenario));
  if (a.eps) s = with_processing_cost(s, *a.eps);
  if (unbounded) s = with_unbounded_battery(s);
  return s;
}

json levels_json(const std::vector<double>& v) {
  json j = json::array();
  for (double x : v) j.push_back(std::isnan(x) ? json(nullptr) : json(x));
  return j;
}

void print_policy(const Policy& p) {
  for (Eigen::Index i = 0; i < p.power.rows(); ++i) {
    std::printf("  epoch %ld:", static_cast<long>(i + 1));
    for (Eigen::Index k = 0; k < p.power.cols(); ++k)
      std::printf("  (%.6g uW, %.6g s)", p.power(i, k), p.duration(i, k));
    std::printf("\n");
  }
}

void emit(const SolveArgs& a, const json& j, const std::string& text) {
  if (!a.out.empty()) write_text_file(a.out, j.dump(2) + "\n");
  if (a.json_out) std::cout << j.dump(2) << "\n";
  else std::cout << text;
}

std::vector<double> parse_grid(const std::string& text) {
  // "a:b:n" -> n evenly spaced points, otherwise a comma-separated list
  std::vector<double> g;
  auto c1 = text.find(':');
  if (c1 != std::string::npos) {
    auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string::npos) throw Error(ErrorCode::ParseError, "grid must be a:b:n or a list");
    double a = std::stod(text.substr(0, c1)), b = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
    int n = std::stoi(text.substr(c2 + 1));
    if (n < 1) throw Error(ErrorCode::ParseError, "grid needs at least one point");
    for (int i = 0; i < n; ++i) g.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
    return g;
  }
  std::stringstream ss(text);
  for (std::string tok; std::getline(ss, tok, ',');) g.push_back(std::stod(tok));
  return g;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offline and online transmission scheduling for an energy harvesting transmitter "
               "on parallel fading sub-channels with processing cost."};
  app.require_subcommand(1);

  SolveArgs thr, en, fe, tc;
  auto* s_thr = app.add_subcommand("solve-throughput", "maximise delivered data by the deadline");
  add_solve_options(s_thr, thr);
  auto* s_en = app.add_subcommand("solve-energy", "maximise the energy left at the deadline");
  add_solve_options(s_en, en);
  auto* s_fe = app.add_subcommand("check-feasibility", "can every data packet be delivered?");
  add_solve_options(s_fe, fe);
  auto* s_tc = app.add_subcommand("solve-tct", "minimise the completion time");
  add_solve_options(s_tc, tc);

  SolveArgs ver;
  std::string ver_policy, ver_kind = "throughput";
  auto* s_ver = app.add_subcommand("verify", "audit a policy: ledgers, structure and KKT residuals");
  add_solve_options(s_ver, ver);
  s_ver->add_option("--policy", ver_policy, "policy JSON file")->required()->check(CLI::ExistingFile);
  s_ver->add_option("--kind", ver_kind, "throughput | energy")->check(CLI::IsMember({"throughput", "energy"}));

  std::string on_config, on_kind, on_policy = "myopic", on_out;
  std::size_t on_seeds = 0;
  bool on_json = false;
  auto* s_on = app.add_subcommand("simulate-online", "paired offline/online Monte Carlo runs");
  s_on->add_option("--config", on_config, "experiment JSON file")->required()->check(CLI::ExistingFile);
  s_on->add_option("--kind", on_kind, "override the experiment kind")->check(CLI::IsMember({"throughput", "energy"}));
  s_on->add_option("--policy", on_policy, "myopic | dp")->check(CLI::IsMember({"myopic", "dp"}));
  s_on->add_option("--seeds", on_seeds, "number of seeds");
  s_on->add_option("--out", on_out, "per-seed CSV");
  s_on->add_flag("--json", on_json, "aggregates as JSON");

  std::string sw_config, sw_out, sw_scenario, sw_grid, sw_kind = "throughput";
  std::size_t sw_seeds = 0;
  bool sw_no_dp = false;
  auto* s_sw = app.add_subcommand("sweep", "Monte Carlo sweep (--config) or eps sweep of one scenario (--scenario)");
  auto* o_cfg = s_sw->add_option("--config", sw_config, "experiment JSON file")->check(CLI::ExistingFile);
  auto* o_sc = s_sw->add_option("--scenario", sw_scenario, "scenario JSON file")->check(CLI::ExistingFile);
  o_cfg->excludes(o_sc);
  s_sw->add_option("--eps-grid", sw_grid, "eps values: a:b:n or a list")->needs(o_sc);
  s_sw->add_option("--kind", sw_kind, "throughput | energy (eps sweep)")->check(CLI::IsMember({"throughput", "energy"}));
  s_sw->add_option("--seeds", sw_seeds, "override the seed count");
  s_sw->add_flag("--no-dp", sw_no_dp, "skip the DP baseline");
  s_sw->add_option("--out", sw_out, "CSV path (default: stdout)");

  std::string registry = "data/golden.json";
  bool golden_json = false;
  auto* s_gold = app.add_subcommand("golden", "run the golden registry");
  s_gold->add_option("--registry", registry, "registry JSON file")->check(CLI::ExistingFile);
  s_gold->add_flag("--json", golden_json, "machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  }

  try {
    if (*s_thr) {
      Scenario s = load(thr, false);
      auto sol = solve_offline_throughput(s);
      json j = {{"throughput_nats", sol.throughput},
                {"glue_levels", levels_json(sol.glue_levels)},
                {"battery_residual_uJ", sol.battery_residual},
                {"policy", policy_to_json(sol.policy)}};
      std::ostringstream t;
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6f", sol.throughput);
      t << "throughput " << buf << " nats\n";
      emit(thr, j, t.str());
      if (!thr.json_out) print_policy(sol.policy);
    } else if (*s_en) {
      Scenario s = load(en, true);
      auto sol = solve_offline_energy(s);
      json j = {{"remaining_energy_uJ", sol.remaining_energy},
                {"glue_levels", levels_json(sol.glue_levels)},
                {"policy", policy_to_json(sol.policy)}};
      char buf[96];
      std::snprintf(buf, sizeof buf, "remaining energy %.6f uJ\n", sol.remaining_energy);
      emit(en, j, buf);
      if (!en.json_out) print_policy(sol.policy);
    } else if (*s_fe) {
      Scenario s = load(fe, true);
      auto r = check_feasibility(s);
      json j = {{"feasible", r.feasible}, {"slack_nats", r.slack}};
      char buf[96];
      std::snprintf(buf, sizeof buf, "%s (slack %.6g nats)\n", r.feasible ? "feasible" : "infeasible", r.slack);
      emit(fe, j, buf);
    } else if (*s_tc) {
      Scenario s = load(tc, true);
      auto r = solve_tct(s);
      json j = {{"t_min_s", r.t_min},
                {"bracket_epoch", r.bracket_epoch},
                {"t_star_s", r.t_star},
                {"remaining_energy_uJ", r.remaining_energy},
                {"policy", policy_to_json(r.policy)}};
      char buf[128];
      std::snprintf(buf, sizeof buf, "T_min %.6f s (epoch %zu, %.6f s in)\n", r.t_min, r.bracket_epoch, r.t_star);
      emit(tc, j, buf);
      if (!tc.json_out) print_policy(r.policy);
    } else if (*s_ver) {
      ProblemKind kind = parse_problem_kind(ver_kind);
      Scenario s = load(ver, kind != ProblemKind::throughput);
      Policy pol = policy_from_json(read_json_file(ver_policy));
      auto ledger = audit_policy(s, pol, kind);
      auto structure = kind == ProblemKind::throughput ? verify_throughput_structure(s, pol)
                                                       : verify_energy_structure(s, pol);
      auto kkt = kkt_residuals(s, pol, kind);
      json viol = json::array();
      for (const auto& v : ledger.violations)
        viol.push_back({{"constraint", to_string(v.constraint)}, {"epoch", v.epoch + 1}, {"magnitude", v.magnitude}});
      bool ok = ledger.feasible() && structure.pass() && kkt.max_residual <= 1e-5;
      json j = {{"feasible", ledger.feasible()},
                {"violations", viol},
                {"structure_pass", structure.pass()},
                {"structure", structure.summary()},
                {"kkt_max_residual", kkt.max_residual},
                {"kkt_degenerate", kkt.degenerate},
                {"pass", ok}};
      std::ostringstream t;
      t << "ledger: " << (ledger.feasible() ? "feasible" : "VIOLATED") << "\n";
      for (const auto& v : ledger.violations)
        t << "  " << to_string(v.constraint) << " epoch " << v.epoch + 1 << " by " << v.magnitude << "\n";
      t << "structure: " << structure.summary() << "\n";
      t << "kkt max residual: " << kkt.max_residual << (kkt.degenerate ? " (degenerate)" : "") << "\n";
      emit(ver, j, t.str());
      return ok ? 0 : 1;
    } else if (*s_on) {
      ExperimentConfig cfg = experiment_from_json(read_json_file(on_config));
      if (!on_kind.empty() && parse_problem_kind(on_kind) != cfg.kind) {
        ExperimentConfig d = default_experiment(parse_problem_kind(on_kind));
        d.seeds = cfg.seeds;
        d.base_seed = cfg.base_seed;
        cfg = d;
      }
      if (on_seeds) cfg.seeds = on_seeds;
      cfg.validate();
      bool with_dp = on_policy == "dp";
      std::string csv;
      json agg = json::array();
      for (double v : cfg.grid) {
        std::optional<DpPolicy> dp;
        if (with_dp) dp = dp_solve(point_dp_config(cfg, v));
        auto out = run_point(cfg, v, dp ? &*dp : nullptr);
        std::string part = seed_csv(v, out);
        csv += csv.empty() ? part : part.substr(part.find('\n') + 1);
        SweepRow r = summarize(v, out, with_dp);
        double online = with_dp ? r.dp_mean : r.myopic_mean;
        agg.push_back({{"sweep_value", v}, {"offline_mean", r.offline_mean}, {"online_mean", online},
                       {"feasible_fraction", r.feasible_fraction}, {"dominance_violations", r.dominance_violations},
                       {"errors", r.errors}});
        if (!on_json)
          std::printf("%s=%s offline %s online(%s) %s feasible %s violations %zu\n", to_string(cfg.variable).c_str(),
                      fmt6(v).c_str(), fmt6(r.offline_mean).c_str(), on_policy.c_str(), fmt6(online).c_str(),
                      fmt6(r.feasible_fraction).c_str(), r.dominance_violations);
      }
      if (!on_out.empty()) write_text_file(on_out, csv);
      if (on_json) std::cout << agg.dump(2) << "\n";
    } else if (*s_sw) {
      std::string csv;
      if (!sw_config.empty()) {
        ExperimentConfig cfg = experiment_from_json(read_json_file(sw_config));
        if (sw_seeds) cfg.seeds = sw_seeds;
        if (sw_no_dp) cfg.run_dp = false;
        csv = sweep_csv(run_sweep(cfg));
        if (sw_out.empty()) sw_out = cfg.output;
      } else if (!sw_scenario.empty()) {
        Scenario s = scenario_from_json(read_json_file(sw_scenario));
        ProblemKind kind = parse_problem_kind(sw_kind);
        csv = epsilon_csv(epsilon_sweep(s, kind, parse_grid(sw_grid.empty() ? "0:1:21" : sw_grid)), kind);
      } else {
        std::cerr << "sweep needs --config or --scenario\n" << s_sw->help();
        return 2;
      }
      if (sw_out.empty()) std::cout << csv;
      else write_text_file(sw_out, csv);
    } else if (*s_gold) {
      auto checks = run_golden_registry(registry);
      bool all = true;
      json j = json::array();
      for (const auto& c : checks) {
        all = all && c.pass;
        j.push_back({{"name", c.name}, {"quantity", c.quantity}, {"expected", c.expected},
                     {"tolerance", c.tolerance}, {"actual", c.actual}, {"pass", c.pass},
                     {"source", c.source}, {"error", c.error}});
        if (!golden_json)
          std::printf("%s %-34s %-22s expected %-8s got %-10s (+/- %s)%s%s\n", c.pass ? "PASS" : "FAIL",
                      c.name.c_str(), c.quantity.c_str(), fmt6(c.expected).c_str(), fmt6(c.actual).c_str(),
                      fmt6(c.tolerance).c_str(), c.error.empty() ? "" : " error: ", c.error.c_str());
      }
      if (golden_json) std::cout << j.dump(2) << "\n";
      return all ? 0 : 1;
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return e.is_validation_error() ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
