#include "jetlab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace jetlab {

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& msg) { throw Error("config", path + ": " + msg); }

const std::set<std::string> kTopKeys = {"mode",   "description", "m",     "n",          "r",        "k",
                                        "q",      "l",           "eps",   "delta",      "lambda",   "theta",
                                        "conormal", "hyperplane", "v",    "sigma",      "coefficients", "schedule",
                                        "sweep",  "grid",        "seed",  "output"};
const std::set<std::string> kSweepKeys = {"construction", "lattice", "eps", "ratio", "delta", "theta", "steps", "points",
                                          "kinds"};
const std::set<std::string> kGridKeys = {"scale", "defect_check", "resolution_check"};

void only_keys(const json& j, const std::set<std::string>& allowed, const std::string& path) {
  if (!j.is_object()) bad(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) bad(path + "." + it.key(), "unknown key");
}

int get_int(const json& j, const std::string& key, const std::string& path, std::optional<int> def = std::nullopt) {
  if (!j.contains(key)) {
    if (def) return *def;
    bad(path + "." + key, "required");
  }
  const json& v = j.at(key);
  if (!v.is_number_integer()) bad(path + "." + key, "expected an integer");
  return v.get<int>();
}

double get_num(const json& j, const std::string& key, const std::string& path, std::optional<double> def = std::nullopt) {
  if (!j.contains(key)) {
    if (def) return *def;
    bad(path + "." + key, "required");
  }
  const json& v = j.at(key);
  if (!v.is_number()) bad(path + "." + key, "expected a number");
  double x = v.get<double>();
  if (!std::isfinite(x)) bad(path + "." + key, "expected a finite number");
  return x;
}

bool get_bool(const json& j, const std::string& key, const std::string& path, bool def) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_boolean()) bad(path + "." + key, "expected a boolean");
  return j.at(key).get<bool>();
}

std::vector<double> get_nums(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) bad(path + "." + key, "required");
  const json& v = j.at(key);
  if (!v.is_array() || v.empty()) bad(path + "." + key, "expected a non-empty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) bad(path + "." + key + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

std::vector<double> get_vector(const json& j, const std::string& key, int dim, const std::string& path) {
  auto v = get_nums(j, key, path);
  if (static_cast<int>(v.size()) != dim) bad(path + "." + key, "expected " + std::to_string(dim) + " entries");
  double s = 0.0;
  for (double x : v) s += x * x;
  if (!(s > 0.0)) bad(path + "." + key, "must be nonzero");
  return v;
}

bool needs(const std::string& mode, std::initializer_list<const char*> modes) {
  for (const char* m : modes)
    if (mode == m) return true;
  return false;
}

Field scaled_exact(const Field& f, const Rational& c) {
  if (c == 0) return Field::zero(f.in_dim(), f.out_dim());
  if (f.expressions()) {
    std::vector<Expr> comps;
    for (const auto& e : *f.expressions()) comps.push_back(Expr::mul({Expr::constant(c), e}));
    return Field::from_expressions(std::move(comps), f.in_dim());
  }
  return f.scaled(c.get_d());
}

// {"polynomial": [{"exponent": [...], "coef": c}, ...], "amplitude": field}
// or {"coefficients": [field, ...]} over the slots [begin, end) of Layout(m, r).
std::vector<Field> parse_slot_fields(const json& j, int m, int r, std::size_t begin, const std::string& path) {
  LayoutPtr lay = Layout::get(m, r);
  const std::size_t count = lay->size() - begin;
  if (!j.is_object()) bad(path, "expected an object with \"polynomial\" or \"coefficients\"");
  only_keys(j, {"polynomial", "amplitude", "coefficients"}, path);
  std::vector<Field> out;
  if (j.contains("coefficients")) {
    if (j.contains("polynomial")) bad(path, "give either \"polynomial\" or \"coefficients\"");
    const json& c = j.at("coefficients");
    if (!c.is_array() || c.size() != count)
      bad(path + ".coefficients", "expected " + std::to_string(count) + " fields in graded-lex order");
    for (std::size_t i = 0; i < count; ++i)
      out.push_back(parse_field_expression(c[i], m, path + ".coefficients[" + std::to_string(i) + "]"));
    for (const auto& f : out)
      if (f.out_dim() != out[0].out_dim()) bad(path + ".coefficients", "fields differ in output dimension");
    return out;
  }
  if (!j.contains("polynomial")) bad(path, "expected \"polynomial\" or \"coefficients\"");
  Field amp = j.contains("amplitude") ? parse_field_expression(j.at("amplitude"), m, path + ".amplitude")
                                      : Field::from_expressions({Expr::constant(Rational(1))}, m);
  std::vector<Rational> coef(count, Rational(0));
  const json& p = j.at("polynomial");
  if (!p.is_array()) bad(path + ".polynomial", "expected an array of monomials");
  for (std::size_t i = 0; i < p.size(); ++i) {
    const std::string here = path + ".polynomial[" + std::to_string(i) + "]";
    only_keys(p[i], {"exponent", "coef"}, here);
    if (!p[i].contains("exponent") || !p[i].at("exponent").is_array()) bad(here + ".exponent", "expected an array");
    MultiIndex alpha;
    for (const auto& a : p[i].at("exponent")) {
      if (!a.is_number_integer() || a.get<int>() < 0) bad(here + ".exponent", "expected non-negative integers");
      alpha.push_back(a.get<int>());
    }
    int slot = lay->find(alpha);
    if (slot < 0 || static_cast<std::size_t>(slot) < begin)
      bad(here + ".exponent", "needs " + std::to_string(m) + " entries and " +
                                  (begin > 0 ? "order exactly " : "order at most ") + std::to_string(r));
    if (!p[i].contains("coef")) bad(here + ".coef", "required");
    try {
      coef[slot - begin] += rational_from_json(p[i].at("coef"));
    } catch (const Error& e) {
      bad(here + ".coef", e.what());
    }
  }
  for (const auto& c : coef) out.push_back(scaled_exact(amp, c));
  return out;
}

TopOrderSection top_order_from(const json& j, int m, int r) {
  TopOrderSection s;
  s.m = m;
  s.r = r;
  s.a = parse_slot_fields(j.at("sigma"), m, r, Layout::get(m, r)->degree_begin(r), "$.sigma");
  s.n = s.a.front().out_dim();
  s.validate();
  return s;
}

CoefficientSection coefficients_from(const json& j, int m, int r) {
  CoefficientSection s;
  s.m = m;
  s.r = r;
  s.a = parse_slot_fields(j.at("coefficients"), m, r, 0, "$.coefficients");
  s.n = s.a.front().out_dim();
  s.validate();
  return s;
}

std::vector<double> default_axis(int m, int axis) {
  std::vector<double> u(m, 0.0);
  u[axis] = 1.0;
  return u;
}

std::vector<double> conormal_of(const ExperimentConfig& c) {
  if (c.raw.contains("conormal")) return get_vector(c.raw, "conormal", c.m, "$");
  if (c.theta) {
    std::vector<double> u(c.m, 0.0);
    u[0] = std::sin(*c.theta);
    u[c.m - 1] += std::cos(*c.theta);
    return u;
  }
  return default_axis(c.m, c.mode == "adjust" ? c.m - 1 : 0);
}

std::string now_iso() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

class Writer {
 public:
  explicit Writer(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }
  void write(const std::string& name, const std::string& content) {
    std::ofstream f(dir_ / name, std::ios::binary);
    if (!f) throw Error("io", "cannot write " + (dir_ / name).string());
    f << content;
    f.close();
    if (!f) throw Error("io", "write failed for " + (dir_ / name).string());
    files_.push_back(name);
  }
  const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

struct ModeOutput {
  json report;
  std::vector<std::pair<std::string, std::string>> tables;
  std::vector<Check> checks;
};

std::string checks_csv(const std::vector<Check>& checks) {
  std::ostringstream os;
  os.precision(17);
  os << "name,passed,value\n";
  for (const auto& c : checks) os << c.name << ',' << (c.passed ? 1 : 0) << ',' << c.value << '\n';
  return os.str();
}

ModeOutput from_result(const ApproximationResult& res) {
  ModeOutput out;
  out.report = res.to_json();
  out.checks = res.checks;
  out.tables.push_back({"checks.csv", checks_csv(res.checks)});
  return out;
}

TransverseOptions transverse_options(const ExperimentConfig& c) {
  TransverseOptions o;
  o.grid_scale = c.grid_scale;
  o.defect_check = c.defect_check;
  o.resolution_check = c.resolution_check;
  return o;
}

AdjustOptions adjust_options(const ExperimentConfig& c) {
  AdjustOptions o;
  o.grid_scale = c.grid_scale;
  o.defect_check = c.defect_check;
  return o;
}

TopOrderOptions top_order_options(const ExperimentConfig& c) {
  TopOrderOptions o;
  o.primitive.transverse = transverse_options(c);
  o.primitive.adjust = adjust_options(c);
  o.lambda = c.lambda;
  o.defect_check = c.defect_check;
  return o;
}

json term_json(const PrimitiveTerm& t, int m, int r) {
  LayoutPtr lay = Layout::get(m, r);
  json w = json::array();
  for (const auto& [pos, weight] : t.term.weights)
    w.push_back({{"monomial", lay->index(lay->degree_begin(r) + pos)}, {"weight", rational_to_json(weight)}});
  json j = {{"beta", t.term.beta}, {"conormal", t.term.conormal}, {"weights", w}, {"zero", t.section.is_zero()}};
  if (t.section.v.expressions()) {
    json v = json::array();
    for (const auto& e : *t.section.v.expressions()) v.push_back(expr_to_json(e));
    j["v"] = v;
  }
  return j;
}

template <Scalar S>
double max_abs_diff(const Jet<S>& a, const Jet<S>& b, bool& exact_zero) {
  double out = 0.0;
  for (int c = 0; c < a.n(); ++c)
    for (std::size_t i = 0; i < a.components[c].size(); ++i) {
      S d = a.components[c][i] - b.components[c][i];
      if (d != S(0)) exact_zero = false;
      out = std::max(out, std::fabs(to_double(d)));
    }
  return out;
}

ModeOutput run_decompose(const ExperimentConfig& c, bool exact) {
  TopOrderSection sigma = top_order_from(c.raw, c.m, c.r);
  auto raw = decompose_top_order(sigma, false);
  auto merged = decompose_top_order(sigma, true);

  // Reconstruction on the points {-1, -1/2, 0, 1/2, 1}^m.
  GridSpec g = GridSpec::cube(c.m, 5);
  double residual = 0.0, scale = 0.0;
  bool zero = true;
  std::vector<double> x(c.m);
  for (std::size_t p = 0; p < g.size(); ++p) {
    g.point(p, x);
    if (exact) {
      std::vector<Rational> xr;
      for (double xi : x) xr.push_back(Rational(xi));
      Jet<Rational> want = sigma.at_exact(xr);
      Jet<Rational> got = Jet<Rational>::zero(xr, sigma.n, sigma.r);
      for (const auto& t : merged) {
        Jet<Rational> j = t.section.jet_exact(xr);
        for (int k = 0; k < sigma.n; ++k) got.components[k] += j.components[k];
      }
      residual = std::max(residual, max_abs_diff(got, want, zero));
    } else {
      Jet<double> want = sigma.at(x);
      Jet<double> got = Jet<double>::zero(x, sigma.n, sigma.r);
      for (const auto& t : merged) {
        Jet<double> j = t.section.jet(x);
        for (int k = 0; k < sigma.n; ++k) got.components[k] += j.components[k];
      }
      bool unused = true;
      residual = std::max(residual, max_abs_diff(got, want, unused));
      for (const auto& p : want.components)
        for (double v : p.coeffs()) scale = std::max(scale, std::fabs(v));
    }
  }
  Check rec{"reconstruction", exact ? zero : residual <= 1e-12 * (1.0 + scale), residual,
            exact ? "exact rational residual" : "double residual, tolerance 1e-12 relative"};

  json terms = json::array(), raw_terms = json::array();
  for (const auto& t : merged) terms.push_back(term_json(t, c.m, c.r));
  for (const auto& t : raw) raw_terms.push_back(term_json(t, c.m, c.r));
  json dec = {{"m", c.m}, {"n", sigma.n}, {"r", c.r}, {"terms", terms}, {"raw_terms", raw_terms}};

  std::ostringstream csv;
  csv << "index,beta,conormal,zero\n";
  auto join = [](const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + std::to_string(v[i]);
    return s;
  };
  for (std::size_t i = 0; i < merged.size(); ++i)
    csv << i << ',' << join(merged[i].term.beta) << ',' << join(merged[i].term.conormal) << ','
        << (merged[i].section.is_zero() ? 1 : 0) << '\n';

  ModeOutput out;
  out.checks = {rec};
  out.report = {{"path", "decompose"},
                {"term_count", merged.size()},
                {"raw_term_count", raw.size()},
                {"exact", exact},
                {"checks", json::array({{{"name", rec.name}, {"passed", rec.passed}, {"value", rec.value}}})}};
  out.tables.push_back({"decomposition.json", dec.dump(2) + "\n"});
  out.tables.push_back({"terms.csv", csv.str()});
  return out;
}

std::vector<StageParams> schedule_of(const ExperimentConfig& c) {
  if (!c.schedule.empty()) return c.schedule;
  return {{c.eps, c.delta}};
}

ModeOutput run_sweep(const ExperimentConfig& c) {
  const json& s = c.raw.at("sweep");
  const std::string construction = s.at("construction").get<std::string>();
  Field v = parse_field_expression(c.raw.at("v"), c.m, "$.v");

  SweepConstruction build;
  std::vector<std::string> kinds;
  if (construction == "transverse") {
    build = transverse_construction(PrimitiveSection::with_constant_conormal(v, conormal_of(c), c.r), c.k,
                                    transverse_options(c));
    kinds = {"conclusion_c0", "conclusion_perp"};
  } else if (construction == "estimate") {
    build = estimate_construction(PrimitiveSection::with_constant_conormal(v, conormal_of(c), c.r));
    kinds = {"h_mixed", "dF", "phi", "b"};
  } else {
    build = adjust_construction(v, c.m, c.r, adjust_options(c));
    kinds = {"adjust"};
  }
  if (s.contains("kinds")) kinds = s.at("kinds").get<std::vector<std::string>>();

  std::vector<SweepPoint> lattice;
  const std::string lt = s.at("lattice").get<std::string>();
  if (lt == "product") {
    lattice = product_lattice(s.at("eps").get<std::vector<double>>(), s.at("ratio").get<std::vector<double>>());
  } else if (lt == "diagonal") {
    lattice = diagonal_lattice(s.at("eps").get<double>(), s.at("delta").get<double>(), s.at("steps").get<int>());
  } else if (lt == "angle") {
    for (double th : s.at("theta").get<std::vector<double>>())
      for (double d : s.at("delta").get<std::vector<double>>()) lattice.push_back({0.0, d, th});
  } else {
    for (const auto& p : s.at("points"))
      lattice.push_back({p.value("eps", 0.0), p.value("delta", 0.0), p.value("theta", 0.0)});
  }

  SweepReport rep = scaling_sweep(build, lattice, kinds);
  std::size_t failed = 0, errors = 0;
  for (const auto& row : rep.rows) {
    if (!row.stats) {
      ++errors;
      continue;
    }
    const json& d = row.stats->detail;
    if (d.contains("structural_ok") && !d.at("structural_ok").get<bool>()) ++failed;
  }
  ModeOutput out;
  out.report = rep.to_json();
  out.report["path"] = "sweep";
  out.report["construction"] = construction;
  out.report["failed_rows"] = errors;
  out.checks.push_back({"constructions_structural", failed == 0, static_cast<double>(failed),
                        "rows whose construction failed a structural check"});
  out.tables.push_back({"sweep.csv", rep.to_csv()});
  return out;
}

ModeOutput run_mode(const ExperimentConfig& c, bool exact) {
  const std::string& mode = c.mode;
  if (mode == "decompose") return run_decompose(c, exact);
  if (mode == "sweep") return run_sweep(c);
  if (mode == "top_order")
    return from_result(approximate_top_order(top_order_from(c.raw, c.m, c.r), c.k, schedule_of(c), top_order_options(c)));
  if (mode == "reduce")
    return from_result(
        reduce_order(coefficients_from(c.raw, c.m, c.r), c.l, c.k, schedule_of(c), top_order_options(c)));
  if (mode == "parametric") {
    Field v = parse_field_expression(c.raw.at("v"), c.m + c.q, "$.v");
    ParametricOptions o;
    o.transverse = transverse_options(c);
    return from_result(parametric_transverse_approximate(v, c.m, c.q, c.r, c.k, c.eps, c.delta, o));
  }
  Field v = parse_field_expression(c.raw.at("v"), c.m, "$.v");
  PrimitiveSection sigma = PrimitiveSection::with_constant_conormal(v, conormal_of(c), c.r);
  if (mode == "transverse") return from_result(transverse_approximate(sigma, c.k, c.eps, c.delta, transverse_options(c)));
  if (mode == "adjust") {
    std::vector<double> nh =
        c.raw.contains("hyperplane") ? get_vector(c.raw, "hyperplane", c.m, "$") : default_axis(c.m, c.m - 1);
    Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(nh.data(), c.m);
    auto res = transversality_adjust(sigma, c.delta, Subspace::hyperplane(e), adjust_options(c));
    return from_result(res);
  }
  PrimitiveOptions o;
  o.transverse = transverse_options(c);
  o.adjust = adjust_options(c);
  return from_result(approximate_primitive(sigma, c.k, c.eps, c.delta, c.lambda, o));
}

}  // namespace

Field parse_field_expression(const json& j, int in_dim, const std::string& path) {
  if (j.is_string()) {
    json parsed;
    try {
      parsed = json::parse(j.get<std::string>());
    } catch (const json::parse_error& e) {
      throw Error("parse", path + ": not valid JSON: " + e.what());
    }
    return parse_field_expression(parsed, in_dim, path);
  }
  std::vector<Expr> comps;
  if (j.is_array()) {
    if (j.empty()) throw Error("parse", path + ": a field needs at least one component");
    for (std::size_t i = 0; i < j.size(); ++i)
      comps.push_back(expr_from_json(j[i], in_dim, path + "[" + std::to_string(i) + "]"));
  } else {
    comps.push_back(expr_from_json(j, in_dim, path));
  }
  return Field::from_expressions(std::move(comps), in_dim);
}

const std::vector<std::string>& experiment_modes() {
  static const std::vector<std::string> modes = {"decompose", "adjust",    "transverse", "parametric",
                                                 "primitive", "top_order", "reduce",     "sweep"};
  return modes;
}

ExperimentConfig parse_config(const json& j) {
  only_keys(j, kTopKeys, "$");
  ExperimentConfig c;
  c.raw = j;
  if (!j.contains("mode") || !j.at("mode").is_string()) bad("$.mode", "required string");
  c.mode = j.at("mode").get<std::string>();
  const auto& modes = experiment_modes();
  if (std::find(modes.begin(), modes.end(), c.mode) == modes.end()) bad("$.mode", "unknown mode '" + c.mode + "'");

  c.m = get_int(j, "m", "$");
  c.r = get_int(j, "r", "$");
  if (c.m < 1) bad("$.m", "must be >= 1");
  if (c.r < 1) bad("$.r", "must be >= 1");
  c.k = get_int(j, "k", "$", c.m - 1);
  if (c.k < 0 || c.k >= c.m) bad("$.k", "must satisfy 0 <= k < m");
  c.q = get_int(j, "q", "$", 0);
  if (c.q < 0) bad("$.q", "must be >= 0");
  c.lambda = get_num(j, "lambda", "$", 0.1);
  if (!(c.lambda > 0.0)) bad("$.lambda", "must be > 0");
  if (j.contains("theta")) c.theta = get_num(j, "theta", "$");
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) bad("$.seed", "expected a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("grid")) {
    only_keys(j.at("grid"), kGridKeys, "$.grid");
    c.grid_scale = get_num(j.at("grid"), "scale", "$.grid", 1.0);
    if (!(c.grid_scale > 0.0)) bad("$.grid.scale", "must be > 0");
    c.defect_check = get_bool(j.at("grid"), "defect_check", "$.grid", true);
    c.resolution_check = get_bool(j.at("grid"), "resolution_check", "$.grid", true);
  }
  if (j.contains("output")) {
    only_keys(j.at("output"), {"dir"}, "$.output");
    if (!j.at("output").contains("dir") || !j.at("output").at("dir").is_string())
      bad("$.output.dir", "expected a string");
    c.out_dir = j.at("output").at("dir").get<std::string>();
  }

  const std::string& mode = c.mode;
  const bool single_scale = needs(mode, {"transverse", "parametric", "primitive"});
  if (single_scale || mode == "adjust") {
    c.delta = get_num(j, "delta", "$");
    if (!(c.delta > 0.0)) bad("$.delta", "must be > 0");
  }
  if (single_scale) {
    c.eps = get_num(j, "eps", "$");
    if (!(c.eps > 0.0 && c.eps <= 1.0)) bad("$.eps", "must lie in (0, 1]");
  }
  if (needs(mode, {"top_order", "reduce"})) {
    if (j.contains("schedule")) {
      const json& s = j.at("schedule");
      if (!s.is_array() || s.empty()) bad("$.schedule", "expected a non-empty array");
      for (std::size_t i = 0; i < s.size(); ++i) {
        const std::string here = "$.schedule[" + std::to_string(i) + "]";
        only_keys(s[i], {"eps", "delta"}, here);
        StageParams p{get_num(s[i], "eps", here), get_num(s[i], "delta", here)};
        if (!(p.eps > 0.0 && p.eps <= 1.0)) bad(here + ".eps", "must lie in (0, 1]");
        if (!(p.delta > 0.0)) bad(here + ".delta", "must be > 0");
        c.schedule.push_back(p);
      }
    } else {
      c.eps = get_num(j, "eps", "$");
      c.delta = get_num(j, "delta", "$");
      if (!(c.eps > 0.0 && c.eps <= 1.0)) bad("$.eps", "must lie in (0, 1]");
      if (!(c.delta > 0.0)) bad("$.delta", "must be > 0");
    }
  }

  int n = -1;
  try {
    if (needs(mode, {"decompose", "top_order"})) {
      if (!j.contains("sigma")) bad("$.sigma", "required");
      n = top_order_from(j, c.m, c.r).n;
    } else if (mode == "reduce") {
      if (!j.contains("coefficients")) bad("$.coefficients", "required");
      n = coefficients_from(j, c.m, c.r).n;
      c.l = get_int(j, "l", "$");
      if (c.l < 0 || c.l >= c.r) bad("$.l", "must satisfy 0 <= l < r");
    } else {
      if (!j.contains("v")) bad("$.v", "required");
      if (mode == "parametric" && c.q < 1) bad("$.q", "parametric mode needs q >= 1");
      n = parse_field_expression(j.at("v"), mode == "parametric" ? c.m + c.q : c.m, "$.v").out_dim();
    }
  } catch (const Error& e) {
    if (e.code() == "config") throw;
    throw Error("config", e.what());
  }
  if (j.contains("n") && get_int(j, "n", "$") != n)
    bad("$.n", "is " + std::to_string(get_int(j, "n", "$")) + " but the fields have " + std::to_string(n) +
                   " components");
  c.n = n;

  if (j.contains("conormal")) get_vector(j, "conormal", c.m, "$");
  if (j.contains("hyperplane")) get_vector(j, "hyperplane", c.m, "$");

  if (mode == "sweep") {
    if (!j.contains("sweep")) bad("$.sweep", "required");
    const json& s = j.at("sweep");
    only_keys(s, kSweepKeys, "$.sweep");
    if (!s.contains("construction") || !s.at("construction").is_string()) bad("$.sweep.construction", "required string");
    const std::string con = s.at("construction").get<std::string>();
    if (con != "transverse" && con != "estimate" && con != "adjust")
      bad("$.sweep.construction", "expected transverse, estimate or adjust");
    if (!s.contains("lattice") || !s.at("lattice").is_string()) bad("$.sweep.lattice", "required string");
    const std::string lt = s.at("lattice").get<std::string>();
    if (lt == "product") {
      get_nums(s, "eps", "$.sweep");
      get_nums(s, "ratio", "$.sweep");
    } else if (lt == "diagonal") {
      get_num(s, "eps", "$.sweep");
      get_num(s, "delta", "$.sweep");
      if (get_int(s, "steps", "$.sweep") < 0) bad("$.sweep.steps", "must be >= 0");
    } else if (lt == "angle") {
      get_nums(s, "theta", "$.sweep");
      get_nums(s, "delta", "$.sweep");
    } else if (lt == "points") {
      if (!s.contains("points") || !s.at("points").is_array() || s.at("points").empty())
        bad("$.sweep.points", "expected a non-empty array");
      for (std::size_t i = 0; i < s.at("points").size(); ++i) {
        const std::string here = "$.sweep.points[" + std::to_string(i) + "]";
        only_keys(s.at("points")[i], {"eps", "delta", "theta"}, here);
        get_num(s.at("points")[i], "delta", here);
      }
    } else {
      bad("$.sweep.lattice", "expected product, diagonal, angle or points");
    }
    if ((lt == "angle") != (con == "adjust") && lt != "points")
      bad("$.sweep.lattice", con == "adjust" ? "adjust sweeps use the angle or points lattice"
                                             : "the angle lattice is for adjust sweeps");
    if (s.contains("kinds")) {
      if (!s.at("kinds").is_array() || s.at("kinds").empty()) bad("$.sweep.kinds", "expected a non-empty array");
      for (std::size_t i = 0; i < s.at("kinds").size(); ++i) {
        const json& k = s.at("kinds")[i];
        if (!k.is_string()) bad("$.sweep.kinds[" + std::to_string(i) + "]", "expected a string");
        try {
          bound_kind_from_string(k.get<std::string>());
        } catch (const Error& e) {
          bad("$.sweep.kinds[" + std::to_string(i) + "]", e.what());
        }
      }
    }
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("config", "cannot open config file " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw Error("config", path + ": " + e.what());
  }
  return parse_config(j);
}

std::uint64_t config_hash(const json& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : config.dump()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::string tool_version() { return JETLAB_VERSION; }

std::string resolve_out_dir(const RunOptions& opt, const std::string& config_dir) {
  if (opt.out_dir) return *opt.out_dir;
  if (const char* env = std::getenv("JETLAB_OUT_DIR"); env && *env) return env;
  if (!config_dir.empty()) return config_dir;
  return "jetlab_out";
}

int RunManifest::exit_code() const {
  if (error_code) return 2;
  return structural_ok ? 0 : 1;
}

json RunManifest::to_json() const {
  json cj = json::array();
  for (const auto& c : checks) cj.push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}});
  json j = {{"mode", mode},
            {"config_hash", config_hash},
            {"tool_version", version},
            {"started", started},
            {"finished", finished},
            {"out_dir", out_dir},
            {"files", files},
            {"checks", cj},
            {"structural_ok", structural_ok},
            {"exit_code", exit_code()}};
  if (error_code) j["error"] = {{"code", *error_code}, {"message", error_message.value_or("")}};
  return j;
}

RunManifest run_experiment(const ExperimentConfig& cfg, const RunOptions& opt) {
  RunManifest man;
  man.mode = cfg.mode;
  man.version = tool_version();
  man.started = now_iso();
  man.config_hash = hash_hex(config_hash(cfg.raw));
  man.out_dir = resolve_out_dir(opt, cfg.out_dir);

  ExperimentConfig c = cfg;
  if (opt.grid_scale) c.grid_scale = *opt.grid_scale;
  Writer w(man.out_dir);
  try {
    if (opt.exact && c.mode != "decompose")
      throw Error("config", "--exact applies to decompose mode only; the local models run in double precision");
    w.write("config.json", cfg.raw.dump(2) + "\n");
    ModeOutput out = run_mode(c, opt.exact);
    for (const auto& ch : out.checks) {
      man.checks.push_back({ch.name, ch.passed, ch.value});
      man.structural_ok = man.structural_ok && ch.passed;
    }
    json report = {{"mode", c.mode},
                   {"config_hash", man.config_hash},
                   {"tool_version", man.version},
                   {"grid_scale", c.grid_scale},
                   {"seed", c.seed},
                   {"result", out.report}};
    w.write("report.json", report.dump(2) + "\n");
    for (const auto& [name, content] : out.tables) w.write(name, content);
  } catch (const Error& e) {
    man.error_code = e.code();
    man.error_message = e.what();
  } catch (const std::exception& e) {
    man.error_code = "internal";
    man.error_message = e.what();
  }
  man.files = w.files();
  man.finished = now_iso();
  Writer(man.out_dir).write("manifest.json", man.to_json().dump(2) + "\n");
  return man;
}

json config_schema() {
  static const char* text = R"JSON({
  "$schema": "http://json-schema.org/draft-07/schema#",
  "title": "jetlab experiment config",
  "type": "object",
  "additionalProperties": false,
  "required": ["mode", "m", "r"],
  "definitions": {
    "expr": {"type": "object", "minProperties": 1, "maxProperties": 1},
    "field": {
      "oneOf": [
        {"$ref": "#/definitions/expr"},
        {"type": "array", "minItems": 1, "items": {"$ref": "#/definitions/expr"}},
        {"type": "string"}
      ]
    },
    "rational": {"oneOf": [{"type": "number"}, {"type": "string", "pattern": "^-?[0-9]+(/[0-9]+)?$"}]},
    "slots": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "polynomial": {
          "type": "array",
          "items": {
            "type": "object",
            "additionalProperties": false,
            "required": ["exponent", "coef"],
            "properties": {
              "exponent": {"type": "array", "items": {"type": "integer", "minimum": 0}},
              "coef": {"$ref": "#/definitions/rational"}
            }
          }
        },
        "amplitude": {"$ref": "#/definitions/field"},
        "coefficients": {"type": "array", "items": {"$ref": "#/definitions/field"}}
      }
    },
    "vector": {"type": "array", "minItems": 1, "items": {"type": "number"}},
    "numbers": {"type": "array", "minItems": 1, "items": {"type": "number"}}
  },
  "properties": {
    "mode": {"enum": ["decompose", "adjust", "transverse", "parametric", "primitive", "top_order", "reduce", "sweep"]},
    "description": {"type": "string"},
    "m": {"type": "integer", "minimum": 1},
    "n": {"type": "integer", "minimum": 0},
    "r": {"type": "integer", "minimum": 1},
    "k": {"type": "integer", "minimum": 0},
    "q": {"type": "integer", "minimum": 0},
    "l": {"type": "integer", "minimum": 0},
    "eps": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
    "delta": {"type": "number", "exclusiveMinimum": 0},
    "lambda": {"type": "number", "exclusiveMinimum": 0},
    "theta": {"type": "number"},
    "conormal": {"$ref": "#/definitions/vector"},
    "hyperplane": {"$ref": "#/definitions/vector"},
    "v": {"$ref": "#/definitions/field"},
    "sigma": {"$ref": "#/definitions/slots"},
    "coefficients": {"$ref": "#/definitions/slots"},
    "schedule": {
      "type": "array",
      "minItems": 1,
      "items": {
        "type": "object",
        "additionalProperties": false,
        "required": ["eps", "delta"],
        "properties": {
          "eps": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
          "delta": {"type": "number", "exclusiveMinimum": 0}
        }
      }
    },
    "sweep": {
      "type": "object",
      "additionalProperties": false,
      "required": ["construction", "lattice"],
      "properties": {
        "construction": {"enum": ["transverse", "estimate", "adjust"]},
        "lattice": {"enum": ["product", "diagonal", "angle", "points"]},
        "eps": {"oneOf": [{"type": "number"}, {"$ref": "#/definitions/numbers"}]},
        "ratio": {"$ref": "#/definitions/numbers"},
        "delta": {"oneOf": [{"type": "number"}, {"$ref": "#/definitions/numbers"}]},
        "theta": {"$ref": "#/definitions/numbers"},
        "steps": {"type": "integer", "minimum": 0},
        "points": {
          "type": "array",
          "minItems": 1,
          "items": {
            "type": "object",
            "additionalProperties": false,
            "required": ["delta"],
            "properties": {"eps": {"type": "number"}, "delta": {"type": "number"}, "theta": {"type": "number"}}
          }
        },
        "kinds": {
          "type": "array",
          "minItems": 1,
          "items": {"enum": ["h_mixed", "dF", "phi", "b", "conclusion_c0", "conclusion_perp", "adjust"]}
        }
      }
    },
    "grid": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "scale": {"type": "number", "exclusiveMinimum": 0},
        "defect_check": {"type": "boolean"},
        "resolution_check": {"type": "boolean"}
      }
    },
    "seed": {"type": "integer", "minimum": 0},
    "output": {
      "type": "object",
      "additionalProperties": false,
      "properties": {"dir": {"type": "string"}}
    }
  }
})JSON";
  return json::parse(text);
}

}  // namespace jetlab
