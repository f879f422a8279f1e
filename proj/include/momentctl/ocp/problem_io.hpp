#pragma once

#include <filesystem>
#include <string_view>

#include <json.hpp>

#include "momentctl/ocp/problem.hpp"

namespace momentctl::ocp {

/// Problem document:
///   {"n":2,"m":1,"lambda":0.1,
///    "dynamics":["x2 + 0.1*x1^3","-0.3*u1"], "cost":"x1^2 + x2^2",
///    "constraints":["1 - x1^2 - x2^2","(1 - u1)*(1 + u1)"],
///    "initial":{"kind":"dirac","x0":[0,0.7]}}
/// Other initial kinds: {"kind":"uniform_box","lo":[...],"hi":[...]} and
/// {"kind":"uniform_ball","center":[...],"radius":r}.
OcpProblem problem_from_json(const nlohmann::json& doc);
nlohmann::json problem_to_json(const OcpProblem& p);

InitialMeasure measure_from_json(const nlohmann::json& doc);
nlohmann::json measure_to_json(const InitialMeasure& m);

OcpProblem load_problem(const std::filesystem::path& path);
OcpProblem parse_problem(std::string_view text);

}  // namespace momentctl::ocp
