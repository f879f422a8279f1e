#include "momentctl/ocp/problem_io.hpp"

#include <fstream>
#include <sstream>

#include "momentctl/errors.hpp"
#include "momentctl/poly/parse.hpp"

namespace momentctl::ocp {

using nlohmann::json;

namespace {

const json& field(const json& doc, const char* name) {
  if (!doc.is_object() || !doc.contains(name)) throw InputError(std::string("missing field \"") + name + "\"");
  return doc.at(name);
}

std::vector<double> number_list(const json& doc, const char* name) {
  const json& v = field(doc, name);
  if (!v.is_array()) throw InputError(std::string("field \"") + name + "\" must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw InputError(std::string("field \"") + name + "\" must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace

InitialMeasure measure_from_json(const json& doc) {
  const std::string kind = field(doc, "kind").get<std::string>();
  if (kind == "dirac") return InitialMeasure::dirac(number_list(doc, "x0"));
  if (kind == "uniform_box") return InitialMeasure::uniform_box(number_list(doc, "lo"), number_list(doc, "hi"));
  if (kind == "uniform_ball") {
    return InitialMeasure::uniform_ball(number_list(doc, "center"), field(doc, "radius").get<double>());
  }
  throw InputError("unknown initial measure kind \"" + kind + "\"");
}

json measure_to_json(const InitialMeasure& m) {
  switch (m.kind) {
    case InitialMeasure::Kind::kDirac:
      return {{"kind", "dirac"}, {"x0", m.point}};
    case InitialMeasure::Kind::kUniformBox:
      return {{"kind", "uniform_box"}, {"lo", m.lo}, {"hi", m.hi}};
    case InitialMeasure::Kind::kUniformBall:
      return {{"kind", "uniform_ball"}, {"center", m.point}, {"radius", m.radius}};
  }
  return {};
}

OcpProblem problem_from_json(const json& doc) {
  try {
    OcpProblem p;
    p.n = field(doc, "n").get<int>();
    p.m = field(doc, "m").get<int>();
    p.lambda = field(doc, "lambda").get<double>();
    if (p.n < 1 || p.m < 0) throw InputError("need n >= 1 and m >= 0");
    std::vector<poly::Polynomial> f;
    for (const auto& s : field(doc, "dynamics")) f.push_back(poly::parse_polynomial(s.get<std::string>(), p.n, p.m));
    p.f = poly::PolynomialVector(std::move(f));
    p.g = poly::parse_polynomial(field(doc, "cost").get<std::string>(), p.n, p.m);
    for (const auto& s : field(doc, "constraints")) {
      p.q.push_back(poly::parse_polynomial(s.get<std::string>(), p.n, p.m));
    }
    p.initial = measure_from_json(field(doc, "initial"));
    return p;
  } catch (const json::exception& e) {
    throw InputError(std::string("problem document: ") + e.what());
  }
}

json problem_to_json(const OcpProblem& p) {
  const auto names = poly::variable_names(p.n, p.m);
  json dyn = json::array(), cons = json::array();
  for (const auto& fk : p.f.components()) dyn.push_back(fk.to_string(names));
  for (const auto& q : p.q) cons.push_back(q.to_string(names));
  return {{"n", p.n},          {"m", p.m},
          {"lambda", p.lambda}, {"dynamics", dyn},
          {"cost", p.g.to_string(names)}, {"constraints", cons},
          {"initial", measure_to_json(p.initial)}};
}

OcpProblem parse_problem(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("problem JSON: ") + e.what());
  }
  return problem_from_json(doc);
}

OcpProblem load_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open problem file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem(ss.str());
}

}  // namespace momentctl::ocp
