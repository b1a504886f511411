#pragma once

#include <json.hpp>
#include <string>

#include "jetlab/expression.hpp"
#include "jetlab/jet.hpp"

namespace jetlab {

using json = nlohmann::json;

// Expression grammar (axes are 0-based):
//   {"const": 1.5} | {"const": "3/4"} | {"coord": i}
//   {"add": [e, ...]} | {"mul": [e, ...]} | {"pow": {"base": e, "exponent": p}}
//   {"sin": e} | {"cos": e} | {"exp": e}
//   {"plateau": {"arg": e, "inner": .5, "outer": 1, "smoothness": 4}}
//   {"transition": {"arg": e, "inner": .5, "outer": .75, "smoothness": 4}}
//   {"compose": {"outer": e, "inner": [e, ...]}}
// `dim` bounds the coordinate axes (-1 disables the check). Errors carry the
// node path, e.g. "$.add[1].sin".
Expr expr_from_json(const json& j, int dim = -1, const std::string& path = "$");
json expr_to_json(const Expr& e);

json jet_to_json(const Jet<double>& s);
json jet_to_json(const Jet<Rational>& s);
Jet<double> jet_from_json(const json& j);
Jet<Rational> jet_from_json_exact(const json& j);

json rational_to_json(const Rational& x);
Rational rational_from_json(const json& j);

}  // namespace jetlab
