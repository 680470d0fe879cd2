#include "osserman/spec_io.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "osserman/error.hpp"

namespace osserman {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void fail(const std::string& what) {
  throw Error(ErrorKind::parse, what);
}

double number(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  fail(where + ": expected a number, got " + j.dump());
}

const json& arg(const json& j, std::size_t i, const std::string& op) {
  if (i >= j.size()) fail("expression \"" + op + "\" is missing an argument");
  return j[i];
}

GrowthClass growth_from_json(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "exponential") return GrowthClass::exponential();
    if (s == "bounded") return GrowthClass::bounded();
    fail("unknown growth class \"" + s + "\"");
  }
  if (j.is_object() && j.size() == 1) {
    if (j.contains("power")) return GrowthClass::power(number(j["power"], "power"));
    if (j.contains("log_power"))
      return GrowthClass::log_power(number(j["log_power"], "log_power"));
  }
  fail("unknown growth class " + j.dump());
}

ClaimedProperties claims_from_json(const json& j) {
  ClaimedProperties c;
  if (!j.is_object()) fail("claims must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!value.is_boolean()) fail("claim \"" + key + "\" must be a boolean");
    const bool v = value.get<bool>();
    if (key == "nondecreasing") c.nondecreasing = v;
    else if (key == "strictly_increasing") c.strictly_increasing = v;
    else if (key == "positive") c.positive = v;
    else if (key == "nonnegative") c.nonnegative = v;
    else if (key == "nonpositive") c.nonpositive = v;
    else fail("unknown claim \"" + key + "\"");
  }
  return c;
}

Nonlinearity nonlinearity_from_json(const json& j, const json& declared,
                                    const std::string& name) {
  const json* expr = &j;
  ClaimedProperties claims;
  std::optional<double> limit;
  std::optional<GrowthClass> growth;
  if (j.is_object()) {
    if (!j.contains("expr")) fail(name + ": missing \"expr\"");
    expr = &j["expr"];
    if (j.contains("claims")) claims = claims_from_json(j["claims"]);
    if (j.contains("limit")) limit = number(j["limit"], name + ".limit");
    if (j.contains("growth")) growth = growth_from_json(j["growth"]);
  }
  if (declared.contains(name + "_limit"))
    limit = number(declared[name + "_limit"], name + "_limit");
  if (declared.contains(name + "_growth"))
    growth = growth_from_json(declared[name + "_growth"]);
  return Nonlinearity(expr_from_json(*expr), claims, limit, growth);
}

std::vector<double> vector_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where + ": expected an array");
  std::vector<double> v;
  for (const auto& x : j) v.push_back(number(x, where));
  return v;
}

DomainShape domain_from_json(const json& j) {
  if (!j.is_object() || j.size() != 1) fail("domain must name one shape");
  const std::string kind = j.begin().key();
  const json& body = j.begin().value();
  if (kind == "ball")
    return DomainShape::ball(vector_from_json(body.at("center"), "center"),
                             number(body.at("radius"), "radius"));
  if (kind == "box")
    return DomainShape::box(vector_from_json(body.at("min"), "min"),
                            vector_from_json(body.at("max"), "max"));
  if (kind == "half_space")
    return DomainShape::half_space(vector_from_json(body.at("normal"), "normal"),
                                   number(body.at("offset"), "offset"));
  fail("unknown domain shape \"" + kind + "\"");
}

}  // namespace

Expr expr_from_json(const json& j) {
  if (j.is_number()) return Expr::constant(j.get<double>());
  if (j.is_string()) {
    if (j.get<std::string>() == "t") return Expr::identity();
    fail("unknown expression symbol " + j.dump());
  }
  if (!j.is_array() || j.empty() || !j[0].is_string())
    fail("expression must be \"t\", a number or [op, ...]: " + j.dump());
  const auto op = j[0].get<std::string>();
  auto num = [&](std::size_t i) { return number(arg(j, i, op), op); };
  auto sub = [&](std::size_t i) { return expr_from_json(arg(j, i, op)); };
  auto arity = [&](std::size_t n) {
    if (j.size() != n + 1)
      fail("expression \"" + op + "\" takes " + std::to_string(n) +
           " arguments: " + j.dump());
  };
  if (op == "const") { arity(1); return Expr::constant(num(1)); }
  if (op == "affine") { arity(3); return Expr::affine(num(1), num(2), sub(3)); }
  if (op == "exp") { arity(1); return Expr::exp(sub(1)); }
  if (op == "softplus") { arity(1); return Expr::softplus(sub(1)); }
  if (op == "power") { arity(2); return Expr::power(sub(1), num(2)); }
  if (op == "pos") { arity(1); return Expr::positive_part(sub(1)); }
  if (op == "neg") { arity(1); return Expr::negative_part(sub(1)); }
  if (op == "scale") { arity(2); return Expr::scale(num(1), sub(2)); }
  if (op == "log_power") { arity(2); return Expr::log_power(num(1), sub(2)); }
  if (op == "sum") {
    if (j.size() < 2) fail("\"sum\" needs at least one term");
    std::vector<Expr> terms;
    for (std::size_t i = 1; i < j.size(); ++i) terms.push_back(sub(i));
    return Expr::sum(std::move(terms));
  }
  fail("unknown expression operator \"" + op + "\"");
}

json expr_to_json(const Expr& e) {
  const auto p = e.params();
  const auto c = e.children();
  switch (e.kind()) {
    case Expr::Kind::constant: return p[0];
    case Expr::Kind::identity: return "t";
    case Expr::Kind::affine:
      return json::array({"affine", p[0], p[1], expr_to_json(c[0])});
    case Expr::Kind::exp: return json::array({"exp", expr_to_json(c[0])});
    case Expr::Kind::softplus:
      return json::array({"softplus", expr_to_json(c[0])});
    case Expr::Kind::power:
      return json::array({"power", expr_to_json(c[0]), p[0]});
    case Expr::Kind::positive_part:
      return json::array({"pos", expr_to_json(c[0])});
    case Expr::Kind::negative_part:
      return json::array({"neg", expr_to_json(c[0])});
    case Expr::Kind::sum: {
      json out = json::array({"sum"});
      for (const auto& x : c) out.push_back(expr_to_json(x));
      return out;
    }
    case Expr::Kind::scale:
      return json::array({"scale", p[0], expr_to_json(c[0])});
    case Expr::Kind::log_power:
      return json::array({"log_power", p[0], expr_to_json(c[0])});
  }
  fail("unknown expression node");
}

RunSpec parse_spec(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("spec must be a JSON object");
  for (const char* key : {"f", "g", "q"})
    if (!doc.contains(key)) fail(std::string("spec is missing \"") + key + "\"");

  try {
    const json declared = doc.value("declared", json::object());
    if (!declared.is_object()) fail("\"declared\" must be an object");

    RunSpec rs{ProblemSpec{nonlinearity_from_json(doc["f"], declared, "f"),
                           nonlinearity_from_json(doc["g"], declared, "g")},
               Operator::m_plus_01(), 1, std::nullopt, std::nullopt};
    ProblemSpec& p = rs.problem;
    p.q = number(doc["q"], "q");
    p.a = doc.contains("a") ? number(doc["a"], "a") : 0.0;

    if (doc.contains("operator")) {
      const json& op = doc["operator"];
      if (op.is_string() && op.get<std::string>() == "Mplus01") {
        rs.op = Operator::m_plus_01();
      } else if (op.is_object() && op.contains("Pk") &&
                 op["Pk"].is_number_integer()) {
        rs.op = Operator::p_plus_k(op["Pk"].get<int>());
      } else {
        fail("operator must be \"Mplus01\" or {\"Pk\": k}");
      }
    }
    if (doc.contains("dimension")) {
      if (!doc["dimension"].is_number_integer() || doc["dimension"] < 1)
        fail("dimension must be a positive integer");
      rs.dimension = doc["dimension"].get<int>();
    } else if (doc.contains("c")) {
      rs.dimension = std::max(1, int(std::ceil(number(doc["c"], "c"))));
    }
    if (rs.op.kind == Operator::Kind::p_plus_k &&
        (rs.op.k < 1 || rs.op.k > rs.dimension))
      throw Error(ErrorKind::invalid_k, "P+_k needs 1 <= k <= dimension");
    if (doc.contains("c"))
      p.c = number(doc["c"], "c");
    else
      p.c = rs.op.kind == Operator::Kind::p_plus_k ? rs.op.k : rs.dimension;

    if (doc.contains("tolerances")) {
      const json& t = doc["tolerances"];
      if (!t.is_object()) fail("\"tolerances\" must be an object");
      for (const auto& [key, value] : t.items()) {
        const double v = number(value, key);
        if (key == "step_rel") p.tol.step_rel = v;
        else if (key == "r_max") p.tol.r_max = v;
        else if (key == "phi_cap") p.tol.phi_cap = v;
        else fail("unknown tolerance \"" + key + "\"");
      }
    }
    if (doc.contains("domain")) rs.domain = domain_from_json(doc["domain"]);

    p.validate();
    try {
      rs.regime = detect_regime(p.g);
    } catch (const Error&) {
      // Left unresolved; commands that need it report the missing limit.
    }
    return rs;
  } catch (const json::exception& e) {
    fail(std::string("spec: ") + e.what());
  }
}

RunSpec parse_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot read spec file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str());
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  fail("csv has no column \"" + name + "\"");
}

double CsvTable::number(std::size_t row, const std::string& name) const {
  const std::string& cell = rows.at(row).at(column(name));
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0')
    fail("csv cell \"" + cell + "\" is not a number");
  return v;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) fail("csv is empty");
  t.header = split(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto row = split(line);
    if (row.size() != t.header.size())
      fail("csv row has " + std::to_string(row.size()) + " cells, header has " +
           std::to_string(t.header.size()));
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void write_csv(std::ostream& os, const CsvTable& t) {
  auto line = [&os](const std::vector<std::string>& cells, bool numeric) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os << ',';
      const std::string& c = cells[i];
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (numeric && end != c.c_str() && *end == '\0')
        os << format_number(v);
      else
        os << c;
    }
    os << '\n';
  };
  line(t.header, false);
  for (const auto& r : t.rows) line(r, true);
}

}  // namespace osserman
