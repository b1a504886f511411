#include "jetlab/serialize.hpp"

#include <cmath>

namespace jetlab {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw Error("parse", path + ": " + what); }

const json& single_child(const json& j, const std::string& path) {
  if (j.is_array()) {
    if (j.size() != 1) fail(path, "expects exactly one argument, got " + std::to_string(j.size()));
    return j[0];
  }
  return j;
}

double number_field(const json& obj, const char* key, double fallback, const std::string& path) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) fail(path + "." + key, "must be a number");
  return v.get<double>();
}

}  // namespace

json rational_to_json(const Rational& x) {
  if (x.get_den() == 1 && x.get_num().fits_slong_p()) return json(x.get_num().get_si());
  return json(x.get_str());
}

Rational rational_from_json(const json& j) {
  if (j.is_number_integer()) return Rational(j.get<long>());
  if (j.is_number()) return Rational(j.get<double>());
  if (j.is_string()) return parse_rational(j.get<std::string>());
  throw Error("parse", "expected a number or a \"p/q\" string");
}

Expr expr_from_json(const json& j, int dim, const std::string& path) {
  if (!j.is_object() || j.size() != 1) fail(path, "an expression node is an object with exactly one key");
  const std::string key = j.begin().key();
  const json& body = j.begin().value();
  const std::string here = path + "." + key;

  if (key == "const") {
    if (body.is_string()) {
      try {
        return Expr::constant(parse_rational(body.get<std::string>()));
      } catch (const Error& e) {
        fail(here, e.what());
      }
    }
    if (body.is_number_integer()) return Expr::constant(Rational(body.get<long>()));
    if (body.is_number()) return Expr::constant(body.get<double>());
    fail(here, "must be a number or a \"p/q\" string");
  }
  if (key == "coord") {
    if (!body.is_number_integer()) fail(here, "axis must be an integer");
    int axis = body.get<int>();
    if (axis < 0 || (dim >= 0 && axis >= dim))
      fail(here, "axis " + std::to_string(axis) + " out of range for dimension " + std::to_string(dim));
    return Expr::coord(axis);
  }
  if (key == "add" || key == "mul") {
    if (!body.is_array()) fail(here, "expects an array of expressions");
    if (body.empty()) fail(here, "expects at least one operand");
    std::vector<Expr> kids;
    for (std::size_t i = 0; i < body.size(); ++i)
      kids.push_back(expr_from_json(body[i], dim, here + "[" + std::to_string(i) + "]"));
    return key == "add" ? Expr::add(std::move(kids)) : Expr::mul(std::move(kids));
  }
  if (key == "pow") {
    if (!body.is_object() || !body.contains("base") || !body.contains("exponent"))
      fail(here, "expects {\"base\": expr, \"exponent\": number}");
    for (auto it = body.begin(); it != body.end(); ++it)
      if (it.key() != "base" && it.key() != "exponent") fail(here, "unknown field '" + it.key() + "'");
    if (!body.at("exponent").is_number()) fail(here + ".exponent", "must be a number");
    return Expr::pow(expr_from_json(body.at("base"), dim, here + ".base"), body.at("exponent").get<double>());
  }
  if (key == "sin" || key == "cos" || key == "exp") {
    Expr arg = expr_from_json(single_child(body, here), dim, here);
    if (key == "sin") return Expr::sin(arg);
    if (key == "cos") return Expr::cos(arg);
    return Expr::exp(arg);
  }
  if (key == "plateau" || key == "transition") {
    if (!body.is_object() || !body.contains("arg")) fail(here, "expects {\"arg\": expr, \"inner\", \"outer\", \"smoothness\"}");
    for (auto it = body.begin(); it != body.end(); ++it)
      if (it.key() != "arg" && it.key() != "inner" && it.key() != "outer" && it.key() != "smoothness")
        fail(here, "unknown field '" + it.key() + "'");
    const bool plateau = key == "plateau";
    double inner = number_field(body, "inner", 0.5, here);
    double outer = number_field(body, "outer", plateau ? 1.0 : 0.75, here);
    int smooth = 4;
    if (body.contains("smoothness")) {
      if (!body.at("smoothness").is_number_integer()) fail(here + ".smoothness", "must be an integer");
      smooth = body.at("smoothness").get<int>();
    }
    Expr arg = expr_from_json(body.at("arg"), dim, here + ".arg");
    try {
      return plateau ? Expr::plateau(arg, inner, outer, smooth) : Expr::transition(arg, inner, outer, smooth);
    } catch (const Error& e) {
      fail(here, e.what());
    }
  }
  if (key == "compose") {
    if (!body.is_object() || !body.contains("outer") || !body.contains("inner") || !body.at("inner").is_array())
      fail(here, "expects {\"outer\": expr, \"inner\": [expr, ...]}");
    const json& inner_j = body.at("inner");
    std::vector<Expr> inner;
    for (std::size_t i = 0; i < inner_j.size(); ++i)
      inner.push_back(expr_from_json(inner_j[i], dim, here + ".inner[" + std::to_string(i) + "]"));
    Expr outer = expr_from_json(body.at("outer"), static_cast<int>(inner.size()), here + ".outer");
    return Expr::compose(outer, std::move(inner));
  }
  fail(path, "unknown node kind '" + key + "'");
}

json expr_to_json(const Expr& e) {
  const Expr::Node& n = e.node();
  switch (n.kind) {
    case ExprKind::Const:
      if (n.literal_is_string) {
        if (n.exact_value.get_den() == 1 && n.exact_value.get_num().fits_slong_p())
          return {{"const", n.exact_value.get_num().get_si()}};
        return {{"const", n.exact_value.get_str()}};
      }
      return {{"const", n.value}};
    case ExprKind::Coord:
      return {{"coord", n.axis}};
    case ExprKind::Add:
    case ExprKind::Mul: {
      json arr = json::array();
      for (const auto& c : n.children) arr.push_back(expr_to_json(c));
      return {{n.kind == ExprKind::Add ? "add" : "mul", arr}};
    }
    case ExprKind::Pow:
    {
      json ex = (std::floor(n.exponent) == n.exponent && std::fabs(n.exponent) < 1e15)
                    ? json(static_cast<long>(n.exponent))
                    : json(n.exponent);
      return {{"pow", {{"base", expr_to_json(n.children[0])}, {"exponent", ex}}}};
    }
    case ExprKind::Sin:
      return {{"sin", expr_to_json(n.children[0])}};
    case ExprKind::Cos:
      return {{"cos", expr_to_json(n.children[0])}};
    case ExprKind::Exp:
      return {{"exp", expr_to_json(n.children[0])}};
    case ExprKind::Plateau:
    case ExprKind::Transition:
      return {{n.kind == ExprKind::Plateau ? "plateau" : "transition",
               {{"arg", expr_to_json(n.children[0])},
                {"inner", n.profile->inner()},
                {"outer", n.profile->outer()},
                {"smoothness", n.profile->smoothness()}}}};
    case ExprKind::Compose: {
      json inner = json::array();
      for (std::size_t i = 1; i < n.children.size(); ++i) inner.push_back(expr_to_json(n.children[i]));
      return {{"compose", {{"outer", expr_to_json(n.children[0])}, {"inner", inner}}}};
    }
  }
  throw Error("internal", "unknown expression node");
}

namespace {

template <Scalar S>
json jet_json_impl(const Jet<S>& s) {
  json base = json::array(), coeffs = json::array();
  for (const auto& b : s.base) {
    if constexpr (std::same_as<S, double>)
      base.push_back(b);
    else
      base.push_back(rational_to_json(b));
  }
  for (const auto& p : s.components) {
    json row = json::array();
    for (const auto& c : p.coeffs()) {
      if constexpr (std::same_as<S, double>)
        row.push_back(c);
      else
        row.push_back(rational_to_json(c));
    }
    coeffs.push_back(row);
  }
  return {{"m", s.m()}, {"n", s.n()}, {"r", s.r()}, {"base", base}, {"coeffs", coeffs}};
}

template <Scalar S>
Jet<S> jet_from_json_impl(const json& j) {
  for (const char* k : {"m", "n", "r", "base", "coeffs"})
    if (!j.contains(k)) throw Error("parse", std::string("jet: missing field '") + k + "'");
  const int m = j.at("m").get<int>(), n = j.at("n").get<int>(), r = j.at("r").get<int>();
  require(m >= 1 && n >= 0 && r >= 0, "parse", "jet: invalid (m, n, r)");
  require(j.at("base").is_array() && static_cast<int>(j.at("base").size()) == m, "parse", "jet: base must have m entries");
  require(j.at("coeffs").is_array() && static_cast<int>(j.at("coeffs").size()) == n, "parse",
          "jet: coeffs must have n rows");
  LayoutPtr lay = Layout::get(m, r);
  Jet<S> out;
  for (const auto& b : j.at("base")) {
    if constexpr (std::same_as<S, double>)
      out.base.push_back(b.get<double>());
    else
      out.base.push_back(rational_from_json(b));
  }
  for (const auto& row : j.at("coeffs")) {
    require(row.is_array() && row.size() == lay->size(), "parse", "jet: each coefficient row needs C(m+r, r) entries");
    TruncatedPoly<S> p(lay);
    for (std::size_t i = 0; i < lay->size(); ++i) {
      if constexpr (std::same_as<S, double>)
        p[i] = row[i].get<double>();
      else
        p[i] = rational_from_json(row[i]);
    }
    out.components.push_back(std::move(p));
  }
  return out;
}

}  // namespace

json jet_to_json(const Jet<double>& s) { return jet_json_impl(s); }
json jet_to_json(const Jet<Rational>& s) { return jet_json_impl(s); }
Jet<double> jet_from_json(const json& j) { return jet_from_json_impl<double>(j); }
Jet<Rational> jet_from_json_exact(const json& j) { return jet_from_json_impl<Rational>(j); }

}  // namespace jetlab
