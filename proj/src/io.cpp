#include "ehglue/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace ehglue {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

double number(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) bad(std::string("missing numeric field '") + key + "'");
  return j.at(key).get<double>();
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) r.push_back(m(i, k));
    rows.push_back(r);
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) bad(std::string("missing matrix '") + key + "'");
  const json& rows = j.at(key);
  Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  Eigen::Index k = n ? static_cast<Eigen::Index>(rows[0].size()) : 0;
  Eigen::MatrixXd m(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!rows[i].is_array() || static_cast<Eigen::Index>(rows[i].size()) != k) bad(std::string("ragged matrix '") + key + "'");
    for (Eigen::Index c = 0; c < k; ++c) {
      if (!rows[i][c].is_number()) bad(std::string("non-numeric entry in '") + key + "'");
      m(i, c) = rows[i][c].get<double>();
    }
  }
  return m;
}

}  // namespace

Scenario scenario_from_json(const json& j) {
  if (!j.is_object() || !j.contains("epochs") || !j.at("epochs").is_array())
    bad("scenario: expected an object with an 'epochs' array");
  Scenario s;
  const json& ep = j.at("epochs");
  std::size_t k = 0;
  for (std::size_t i = 0; i < ep.size(); ++i) {
    const json& e = ep[i];
    if (!e.contains("gains_per_uW") || !e.at("gains_per_uW").is_array()) bad("epoch " + std::to_string(i) + ": missing gains_per_uW");
    if (i == 0) k = e.at("gains_per_uW").size();
    if (e.at("gains_per_uW").size() != k) bad("epoch " + std::to_string(i) + ": gain count differs from epoch 0");
  }
  s.gains.resize(static_cast<Eigen::Index>(ep.size()), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < ep.size(); ++i) {
    const json& e = ep[i];
    s.durations.push_back(number(e, "tau_s"));
    s.energy.push_back(e.contains("energy_uJ") ? number(e, "energy_uJ") : 0.0);
    s.data.push_back(e.contains("data_nats") ? number(e, "data_nats") : 0.0);
    for (std::size_t c = 0; c < k; ++c) {
      const json& g = e.at("gains_per_uW")[c];
      if (!g.is_number()) bad("epoch " + std::to_string(i) + ": non-numeric gain");
      s.gains(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = g.get<double>();
    }
  }
  s.processing_cost = j.contains("processing_cost_uW") ? number(j, "processing_cost_uW") : 0.0;
  if (!j.contains("battery_capacity_uJ")) {
    s.battery_capacity = Capacity::unbounded();
  } else {
    const json& c = j.at("battery_capacity_uJ");
    if (c.is_string() && (c == "inf" || c == "infinity")) s.battery_capacity = Capacity::unbounded();
    else if (c.is_number()) s.battery_capacity = Capacity::finite(c.get<double>());
    else bad("battery_capacity_uJ must be a number or \"inf\"");
  }
  return s;
}

json scenario_to_json(const Scenario& s) {
  json ep = json::array();
  for (std::size_t i = 0; i < s.num_epochs(); ++i) {
    json g = json::array();
    for (std::size_t c = 0; c < s.num_channels(); ++c)
      g.push_back(s.gains(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)));
    ep.push_back({{"tau_s", s.durations[i]},
                  {"energy_uJ", s.energy[i]},
                  {"data_nats", s.data[i]},
                  {"gains_per_uW", g}});
  }
  json j = {{"epochs", ep}, {"processing_cost_uW", s.processing_cost}};
  if (s.battery_capacity.is_unbounded()) j["battery_capacity_uJ"] = "inf";
  else j["battery_capacity_uJ"] = s.battery_capacity.value();
  return j;
}

json policy_to_json(const Policy& pol) {
  return {{"power_uW", matrix_json(pol.power)}, {"duration_s", matrix_json(pol.duration)}};
}

Policy policy_from_json(const json& j) {
  if (!j.is_object()) bad("policy: expected an object");
  Policy p;
  p.power = matrix_from(j, "power_uW");
  p.duration = matrix_from(j, "duration_s");
  if (p.power.rows() != p.duration.rows() || p.power.cols() != p.duration.cols())
    bad("policy: power_uW and duration_s shapes differ");
  return p;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    bad(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) bad("cannot write " + path);
  out << text;
}

}  // namespace ehglue
