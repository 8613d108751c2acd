#pragma once

#include <string>

#include "json.hpp"

#include "ehglue/model.hpp"

namespace ehglue {

using nlohmann::json;

// Scenario files:
//   { "epochs": [ {"tau_s": 3.5, "energy_uJ": 9, "data_nats": 0.5,
//                  "gains_per_uW": [0.8, 0.35]}, ... ],
//     "processing_cost_uW": 0.25, "battery_capacity_uJ": 10 | "inf" }
Scenario scenario_from_json(const json& j);
json scenario_to_json(const Scenario& s);

json policy_to_json(const Policy& pol);
Policy policy_from_json(const json& j);

/// Reads a whole JSON file; throws Error(ParseError) on I/O or syntax errors.
json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace ehglue
