#include "htc/config.hpp"

#include <fstream>
#include <initializer_list>
#include <memory>
#include <sstream>

#include "htc/error.hpp"
#include "htc/expression.hpp"
#include "json.hpp"

namespace htc {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ConfigError("config field '" + field + "': " + what);
}

std::string join(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

void allow_keys(const json& j, const std::string& field, std::initializer_list<const char*> keys) {
  if (!j.is_object()) fail(field.empty() ? "<root>" : field, "expected an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known) fail(join(field, key), "unknown key");
  }
}

const json& require(const json& j, const std::string& parent, const char* key) {
  if (!j.contains(key)) throw ConfigError("missing config field '" + join(parent, key) + "'");
  return j.at(key);
}

double to_number(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "expected a number");
  return j.get<double>();
}

std::size_t to_count(const json& j, const std::string& field) {
  if (!j.is_number_integer() || j.get<long long>() < 0) fail(field, "expected a non-negative integer");
  return j.get<std::size_t>();
}

Expression to_expression(const json& j, const std::string& field) {
  if (j.is_number()) {
    std::ostringstream os;
    os.precision(17);
    os << j.get<double>();
    return Expression(os.str());
  }
  if (!j.is_string()) fail(field, "expected an expression string or number");
  try {
    return Expression(j.get<std::string>());
  } catch (const ConfigError& e) {
    fail(field, e.what());
  }
}

SpaceTimeFn to_space_time(const json& j, const std::string& field) {
  auto e = std::make_shared<const Expression>(to_expression(j, field));
  return [e](double t, double x) { return (*e)(t, x); };
}

TimeFn to_time(const json& j, const std::string& field) {
  auto e = std::make_shared<const Expression>(to_expression(j, field));
  return [e](double t) { return (*e)(t, 0.0); };
}

/// A single expression, or an array with one expression per layer.
LayeredFunction to_layered(const json& j, const std::string& field) {
  if (!j.is_array()) return LayeredFunction(to_space_time(j, field));
  if (j.empty()) fail(field, "empty per-layer array");
  std::vector<SpaceTimeFn> pieces;
  for (std::size_t i = 0; i < j.size(); ++i)
    pieces.push_back(to_space_time(j[i], field + "[" + std::to_string(i) + "]"));
  return LayeredFunction(std::move(pieces));
}

BoundaryKind to_boundary(const json& j, const std::string& field) {
  if (j == "dirichlet") return BoundaryKind::dirichlet;
  if (j == "robin") return BoundaryKind::robin;
  fail(field, "expected \"dirichlet\" or \"robin\"");
}

void parse_geometry(const json& j, SlabGeometry& geo) {
  const std::string f = "geometry";
  allow_keys(j, f, {"length", "interfaces", "orientation", "left", "right"});
  geo.length = to_number(require(j, f, "length"), "geometry.length");
  const json& ifs = require(j, f, "interfaces");
  if (!ifs.is_array()) fail("geometry.interfaces", "expected an array of positions");
  geo.interfaces.clear();
  for (std::size_t i = 0; i < ifs.size(); ++i)
    geo.interfaces.push_back(to_number(ifs[i], "geometry.interfaces[" + std::to_string(i) + "]"));
  geo.orientation.clear();
  if (j.contains("orientation")) {
    const json& o = j.at("orientation");
    if (!o.is_array()) fail("geometry.orientation", "expected an array of +1/-1");
    for (std::size_t i = 0; i < o.size(); ++i) {
      const std::string fi = "geometry.orientation[" + std::to_string(i) + "]";
      if (!o[i].is_number_integer() || (o[i] != 1 && o[i] != -1)) fail(fi, "expected +1 or -1");
      geo.orientation.push_back(o[i].get<int>());
    }
  }
  if (j.contains("left")) geo.outer[0] = to_boundary(j.at("left"), "geometry.left");
  if (j.contains("right")) geo.outer[1] = to_boundary(j.at("right"), "geometry.right");
}

void parse_solver(const json& j, ProblemConfig& c) {
  const std::string f = "solver";
  allow_keys(j, f,
             {"theta", "tol", "max_iter", "delta1_factor", "det_tolerance", "dirichlet_conormal",
              "boundary_tolerance", "measurement_tolerance", "smoothing_window", "min_horizon_steps",
              "sequential_max_inner", "refine", "noise", "seed"});
  auto& o = c.spec.options;
  if (j.contains("theta")) o.theta = to_number(j["theta"], "solver.theta");
  if (j.contains("tol")) o.tolerance = to_number(j["tol"], "solver.tol");
  if (j.contains("max_iter")) o.max_iterations = to_count(j["max_iter"], "solver.max_iter");
  if (j.contains("delta1_factor")) o.delta1_factor = to_number(j["delta1_factor"], "solver.delta1_factor");
  if (j.contains("det_tolerance")) o.det_tolerance = to_number(j["det_tolerance"], "solver.det_tolerance");
  if (j.contains("dirichlet_conormal")) {
    const json& d = j["dirichlet_conormal"];
    if (d == "vanishing_weights") o.dirichlet_conormal = DirichletConormal::vanishing_weights;
    else if (d == "stencil") o.dirichlet_conormal = DirichletConormal::stencil;
    else fail("solver.dirichlet_conormal", "expected \"vanishing_weights\" or \"stencil\"");
  }
  if (j.contains("boundary_tolerance"))
    o.boundary_tolerance = to_number(j["boundary_tolerance"], "solver.boundary_tolerance");
  if (j.contains("measurement_tolerance"))
    o.measurement_tolerance = to_number(j["measurement_tolerance"], "solver.measurement_tolerance");
  if (j.contains("smoothing_window"))
    o.smoothing_window = to_count(j["smoothing_window"], "solver.smoothing_window");
  if (j.contains("min_horizon_steps"))
    o.min_horizon_steps = to_count(j["min_horizon_steps"], "solver.min_horizon_steps");
  if (j.contains("sequential_max_inner"))
    o.sequential_max_inner = to_count(j["sequential_max_inner"], "solver.sequential_max_inner");
  if (j.contains("refine")) c.refinement = to_count(j["refine"], "solver.refine");
  if (j.contains("noise")) c.noise = to_number(j["noise"], "solver.noise");
  if (j.contains("seed")) c.seed = to_count(j["seed"], "solver.seed");
}

void parse_study(const json& j, StudyConfig& s) {
  const std::string f = "study";
  allow_keys(j, f, {"ladder", "noise", "horizons", "workers", "theta"});
  if (j.contains("ladder")) {
    const json& l = j["ladder"];
    if (!l.is_array()) fail("study.ladder", "expected an array of [nx, nt] pairs");
    s.ladder.clear();
    for (std::size_t i = 0; i < l.size(); ++i) {
      const std::string fi = "study.ladder[" + std::to_string(i) + "]";
      if (!l[i].is_array() || l[i].size() != 2) fail(fi, "expected [nx, nt]");
      s.ladder.emplace_back(to_count(l[i][0], fi + "[0]"), to_count(l[i][1], fi + "[1]"));
    }
  }
  auto numbers = [&](const char* key, std::vector<double>& out) {
    if (!j.contains(key)) return;
    const json& a = j[key];
    const std::string fk = join(f, key);
    if (!a.is_array()) fail(fk, "expected an array of numbers");
    out.clear();
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back(to_number(a[i], fk + "[" + std::to_string(i) + "]"));
  };
  numbers("noise", s.noise);
  numbers("horizons", s.horizons);
  if (j.contains("workers")) s.workers = to_count(j["workers"], "study.workers");
  if (j.contains("theta")) s.theta = to_number(j["theta"], "study.theta");
}

}  // namespace

ProblemConfig parse_config(const std::string& text, const std::filesystem::path& base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  allow_keys(j, "", {"name", "variant", "geometry", "grid", "coefficients", "data", "basis",
                     "weights", "truth", "exact", "measurements", "solver", "study"});

  ProblemConfig c;
  auto& spec = c.spec;
  if (j.contains("name")) {
    if (!j["name"].is_string()) fail("name", "expected a string");
    c.name = j["name"].get<std::string>();
  }
  const json& variant = require(j, "", "variant");
  if (variant == "interface") spec.variant = Variant::interface;
  else if (variant == "robin") spec.variant = Variant::robin;
  else fail("variant", "expected \"interface\" or \"robin\"");

  parse_geometry(require(j, "", "geometry"), spec.geometry);

  const json& grid = require(j, "", "grid");
  allow_keys(grid, "grid", {"nx", "nt", "T"});
  const std::size_t nx = to_count(require(grid, "grid", "nx"), "grid.nx");
  const std::size_t nt = to_count(require(grid, "grid", "nt"), "grid.nt");
  const double horizon = to_number(require(grid, "grid", "T"), "grid.T");

  json coef = j.value("coefficients", json::object());
  allow_keys(coef, "coefficients", {"a", "a1", "a0", "ellipticity"});
  spec.coefficients.diffusion = to_layered(coef.value("a", json("1")), "coefficients.a");
  spec.coefficients.drift = to_layered(coef.value("a1", json("0")), "coefficients.a1");
  spec.coefficients.reaction = to_layered(coef.value("a0", json("0")), "coefficients.a0");
  if (coef.contains("ellipticity"))
    spec.coefficients.ellipticity = to_number(coef["ellipticity"], "coefficients.ellipticity");

  const json& data = require(j, "", "data");
  allow_keys(data, "data", {"f", "u0", "g_left", "g_right", "g_plus", "beta_left", "beta_right"});
  spec.data.source = to_layered(data.value("f", json("0")), "data.f");
  spec.data.initial = to_layered(require(data, "data", "u0"), "data.u0");
  spec.data.boundary = {to_time(data.value("g_left", json("0")), "data.g_left"),
                        to_time(data.value("g_right", json("0")), "data.g_right")};
  spec.data.interface_flux.assign(spec.geometry.interface_count(), [](double) { return 0.0; });
  if (data.contains("g_plus")) {
    const json& gp = data["g_plus"];
    if (!gp.is_array() || gp.size() != spec.geometry.interface_count())
      fail("data.g_plus", "expected one expression per interface");
    for (std::size_t l = 0; l < gp.size(); ++l)
      spec.data.interface_flux[l] = to_time(gp[l], "data.g_plus[" + std::to_string(l) + "]");
  }
  if (data.contains("beta_left")) spec.data.robin_coefficient[0] = to_time(data["beta_left"], "data.beta_left");
  if (data.contains("beta_right")) spec.data.robin_coefficient[1] = to_time(data["beta_right"], "data.beta_right");

  const json& basis = require(j, "", "basis");
  if (!basis.is_array() || basis.empty()) fail("basis", "expected a non-empty array of expressions");
  for (std::size_t i = 0; i < basis.size(); ++i)
    spec.basis.functions.push_back(to_space_time(basis[i], "basis[" + std::to_string(i) + "]"));

  const json& weights = require(j, "", "weights");
  if (!weights.is_array()) fail("weights", "expected an array of weights");
  for (std::size_t i = 0; i < weights.size(); ++i)
    spec.weights.functions.push_back(to_layered(weights[i], "weights[" + std::to_string(i) + "]"));

  if (j.contains("truth")) {
    const json& t = j["truth"];
    allow_keys(t, "truth", {"q"});
    const json& q = require(t, "truth", "q");
    if (!q.is_array() || q.size() != spec.m()) fail("truth.q", "expected one expression per basis function");
    std::vector<TimeFn> fns;
    for (std::size_t i = 0; i < q.size(); ++i) fns.push_back(to_time(q[i], "truth.q[" + std::to_string(i) + "]"));
    c.truth = [fns](double time) {
      Vector out(static_cast<Eigen::Index>(fns.size()));
      for (std::size_t i = 0; i < fns.size(); ++i) out[static_cast<Eigen::Index>(i)] = fns[i](time);
      return out;
    };
  }
  if (j.contains("exact")) c.exact = to_layered(j["exact"], "exact");
  if (j.contains("measurements")) {
    if (!j["measurements"].is_string()) fail("measurements", "expected a CSV path");
    std::filesystem::path p = j["measurements"].get<std::string>();
    c.measurements = p.is_relative() && !base.empty() ? base / p : p;
  }
  if (j.contains("solver")) parse_solver(j["solver"], c);
  if (j.contains("study")) parse_study(j["study"], c.study);

  spec.grid = SpaceTimeGrid::uniform(spec.geometry, nx, nt, horizon);
  return c;
}

ProblemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  ProblemConfig c = parse_config(text.str(), path.parent_path());
  if (c.name.empty()) c.name = path.stem().string();
  return c;
}

void apply_overrides(ProblemConfig& config, const Overrides& o) {
  auto& spec = config.spec;
  if (o.theta) spec.options.theta = *o.theta;
  if (o.tol) spec.options.tolerance = *o.tol;
  if (o.noise) config.noise = *o.noise;
  if (o.refine) config.refinement = *o.refine;
  if (o.seed) config.seed = *o.seed;
  if (o.nx || o.nt) {
    const std::size_t nx = o.nx.value_or(spec.grid.node_count());
    const std::size_t nt = o.nt.value_or(spec.grid.step_count());
    spec.grid = SpaceTimeGrid::uniform(spec.geometry, nx, nt, spec.grid.horizon());
  }
}

}  // namespace htc
