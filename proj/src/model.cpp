#include "htc/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "htc/error.hpp"

namespace htc {

SpaceTimeGrid SpaceTimeGrid::uniform(const SlabGeometry& geometry, std::size_t nodes,
                                     std::size_t steps, double horizon) {
  SpaceTimeGrid g;
  g.length_ = geometry.length;
  g.steps_ = steps;
  g.dt_ = steps > 0 ? horizon / static_cast<double>(steps) : 0.0;
  g.h_ = nodes > 1 ? geometry.length / static_cast<double>(nodes - 1) : 0.0;
  g.nodes_ = Vector::LinSpaced(static_cast<Eigen::Index>(nodes), 0.0, geometry.length);
  if (nodes > 1) g.nodes_[static_cast<Eigen::Index>(nodes - 1)] = geometry.length;

  const std::size_t k = geometry.interface_count();
  g.interface_node_.resize(k);
  g.misalignment_.resize(k);
  for (std::size_t l = 0; l < k; ++l) {
    const double pos = g.h_ > 0 ? geometry.interfaces[l] / g.h_ : 0.0;
    const double r = std::clamp(std::round(pos), 0.0, static_cast<double>(nodes ? nodes - 1 : 0));
    g.interface_node_[l] = static_cast<std::size_t>(r);
    g.misalignment_[l] = std::abs(pos - r);
  }

  // Walk the nodes once; an interface node closes the current layer with its
  // left trace and opens the next layer with its right trace.
  std::size_t layer = 0;
  std::size_t next_interface = 0;
  g.layer_first_.push_back(0);
  for (std::size_t j = 0; j < nodes; ++j) {
    const bool split = next_interface < k && g.interface_node_[next_interface] == j &&
                       j > 0 && j + 1 < nodes;
    const double x = g.nodes_[static_cast<Eigen::Index>(j)];
    g.dof_x_.push_back(x);
    g.dof_node_.push_back(j);
    g.dof_layer_.push_back(layer);
    if (split) {
      g.layer_last_.push_back(g.dof_x_.size() - 1);
      ++layer;
      g.layer_first_.push_back(g.dof_x_.size());
      g.dof_x_.push_back(x);
      g.dof_node_.push_back(j);
      g.dof_layer_.push_back(layer);
    }
    while (next_interface < k && g.interface_node_[next_interface] <= j) ++next_interface;
  }
  g.layer_last_.push_back(g.dof_x_.empty() ? 0 : g.dof_x_.size() - 1);
  // Degenerate placements (duplicates, interface on an end node) leave fewer
  // layers than interfaces + 1; validation reports them, and the index arrays
  // are padded so accessors stay in range.
  while (g.layer_first_.size() < k + 1) {
    g.layer_first_.push_back(g.layer_last_.back());
    g.layer_last_.push_back(g.layer_last_.back());
  }
  return g;
}

SpaceTimeGrid SpaceTimeGrid::truncated(std::size_t steps) const {
  SpaceTimeGrid g = *this;
  g.steps_ = std::min(steps, steps_);
  return g;
}

ProblemSpec ProblemSpec::with_grid(std::size_t nodes, std::size_t steps) const {
  ProblemSpec s = *this;
  s.grid = SpaceTimeGrid::uniform(geometry, nodes, steps, grid.horizon());
  return s;
}

ProblemSpec ProblemSpec::refined(std::size_t factor) const {
  return with_grid((grid.node_count() - 1) * factor + 1, grid.step_count() * factor);
}

ProblemSpec ProblemSpec::truncated(std::size_t steps) const {
  ProblemSpec s = *this;
  s.grid = grid.truncated(steps);
  return s;
}

bool ValidationReport::has(const std::string& code) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.code == code; });
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& v : violations) os << v.code << ": " << v.message << "\n";
  return os.str();
}

namespace {

void check_layered(ValidationReport& r, const LayeredFunction& fn, std::size_t layers,
                   const std::string& name) {
  if (!fn.defined()) {
    r.violations.push_back({"missing-field", name + " is not defined"});
  } else if (fn.piece_count() != 1 && fn.piece_count() != layers) {
    r.violations.push_back({"layer-count-mismatch", name + " has " +
                                                        std::to_string(fn.piece_count()) +
                                                        " pieces for " + std::to_string(layers) +
                                                        " layers"});
  }
}

}  // namespace

ValidationReport validate_spec(const ProblemSpec& spec) {
  ValidationReport r;
  auto add = [&](std::string code, std::string msg) {
    r.violations.push_back({std::move(code), std::move(msg)});
  };
  const auto& geo = spec.geometry;
  const auto& grid = spec.grid;
  const std::size_t k = geo.interface_count();
  const std::size_t layers = geo.layer_count();

  if (!(geo.length > 0.0)) add("geometry", "slab length must be positive");
  for (std::size_t l = 0; l < k; ++l) {
    const double g = geo.interfaces[l];
    if (!(g > 0.0 && g < geo.length)) add("geometry", "interface " + std::to_string(l) + " outside (0, L)");
    if (l > 0 && !(g > geo.interfaces[l - 1])) add("geometry", "interfaces not strictly increasing");
  }
  if (!geo.orientation.empty()) {
    if (geo.orientation.size() != k) add("geometry", "orientation count differs from interface count");
    for (int o : geo.orientation)
      if (o != 1 && o != -1) add("geometry", "orientation entries must be +1 or -1");
  }

  if (spec.variant == Variant::interface && k == 0)
    add("variant", "interface variant needs at least one interface");
  if (spec.variant == Variant::robin) {
    if (geo.outer[left_end] != BoundaryKind::robin && geo.outer[right_end] != BoundaryKind::robin)
      add("variant", "robin variant needs a robin outer boundary");
    if (k != 0) add("variant", "robin variant is supported on a single layer only");
  }

  if (grid.node_count() < 3) add("grid", "at least three spatial nodes required");
  if (grid.step_count() < 1 || !(grid.dt() > 0.0)) add("grid", "time step must be positive");
  bool aligned = true;
  for (std::size_t l = 0; l < grid.interface_count(); ++l) {
    if (grid.interface_misalignment(l) > 1e-8) {
      aligned = false;
      add("interface-off-grid", "interface at x = " + std::to_string(geo.interfaces[l]) +
                                    " does not coincide with a grid node");
    }
  }
  if (aligned && r.ok()) {
    for (std::size_t layer = 0; layer < layers; ++layer)
      if (grid.layer_node_count(layer) < 3)
        add("grid", "layer " + std::to_string(layer) + " has fewer than three nodes");
  }

  const auto& opt = spec.options;
  if (!(opt.theta >= 0.5 && opt.theta <= 1.0)) add("options", "theta must lie in [0.5, 1]");
  if (!(opt.tolerance > 0.0)) add("options", "tolerance must be positive");
  if (!(opt.delta1_factor > 0.0 && opt.delta1_factor <= 1.0))
    add("options", "delta1 factor must lie in (0, 1]");

  check_layered(r, spec.coefficients.diffusion, layers, "diffusion");
  check_layered(r, spec.coefficients.drift, layers, "drift");
  check_layered(r, spec.coefficients.reaction, layers, "reaction");
  check_layered(r, spec.data.source, layers, "source");
  check_layered(r, spec.data.initial, layers, "initial state");
  for (std::size_t b = 0; b < 2; ++b) {
    if (!spec.data.boundary[b]) add("missing-field", "outer boundary data missing");
    if (geo.outer[b] == BoundaryKind::robin && spec.variant == Variant::interface &&
        !spec.data.robin_coefficient[b])
      add("missing-field", "robin coefficient missing at a robin end");
  }
  if (spec.data.interface_flux.size() != k)
    add("missing-field", "interface data g+ must be given per interface");
  for (const auto& g : spec.data.interface_flux)
    if (!g) add("missing-field", "interface data g+ not defined");

  const std::size_t m = spec.basis.size();
  if (m == 0) add("basis", "at least one basis function required");
  for (const auto& phi : spec.basis.functions)
    if (!phi) add("missing-field", "basis function not defined");
  if (spec.weights.size() != m)
    add("weight-count", "number of weights (" + std::to_string(spec.weights.size()) +
                            ") differs from number of basis functions (" + std::to_string(m) + ")");
  for (std::size_t i = 0; i < spec.weights.size(); ++i)
    check_layered(r, spec.weights.functions[i], layers, "weight " + std::to_string(i + 1));

  if (!r.ok()) return r;

  // Checks below evaluate the fields on the grid.
  if (opt.dirichlet_conormal == DirichletConormal::vanishing_weights) {
    for (std::size_t i = 0; i < m; ++i) {
      const auto& w = spec.weights.functions[i];
      if (geo.outer[left_end] == BoundaryKind::dirichlet && std::abs(w(0, 0.0, 0.0)) > 1e-12)
        add("dirichlet-weight", "weight " + std::to_string(i + 1) +
                                    " nonzero on Dirichlet boundary x = 0");
      if (geo.outer[right_end] == BoundaryKind::dirichlet &&
          std::abs(w(layers - 1, 0.0, geo.length)) > 1e-12)
        add("dirichlet-weight", "weight " + std::to_string(i + 1) +
                                    " nonzero on Dirichlet boundary x = L");
    }
  }

  double amin = std::numeric_limits<double>::infinity();
  bool finite = true;
  for (std::size_t n = 0; n < grid.time_count(); ++n) {
    const Vector a = sample(spec.coefficients.diffusion, grid, grid.time(n));
    amin = std::min(amin, a.minCoeff());
    finite = finite && a.allFinite();
  }
  if (!finite || !(amin >= spec.coefficients.ellipticity) || !(spec.coefficients.ellipticity > 0.0))
    add("ellipticity", "diffusion minimum " + std::to_string(amin) +
                           " below ellipticity bound " +
                           std::to_string(spec.coefficients.ellipticity));
  return r;
}

void require_valid(const ProblemSpec& spec) {
  const auto report = validate_spec(spec);
  if (!report.ok()) throw ConfigError("invalid problem spec:\n" + report.to_string());
}

Vector sample(const LayeredFunction& fn, const SpaceTimeGrid& grid, double t) {
  Vector out(static_cast<Eigen::Index>(grid.dof_count()));
  for (std::size_t d = 0; d < grid.dof_count(); ++d)
    out[static_cast<Eigen::Index>(d)] = fn(grid.dof_layer(d), t, grid.dof_x(d));
  return out;
}

std::vector<End> robin_ends(const ProblemSpec& spec) {
  std::vector<End> ends;
  for (End b : {left_end, right_end})
    if (spec.geometry.outer[b] == BoundaryKind::robin) ends.push_back(b);
  return ends;
}

std::vector<double> support_points(const ProblemSpec& spec) {
  if (spec.variant == Variant::interface) return spec.geometry.interfaces;
  std::vector<double> pts;
  for (End b : robin_ends(spec)) pts.push_back(b == left_end ? 0.0 : spec.geometry.length);
  return pts;
}

Matrix basis_values(const ProblemSpec& spec, double t) {
  const auto pts = support_points(spec);
  Matrix out(static_cast<Eigen::Index>(spec.m()), static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < spec.m(); ++i)
    for (std::size_t p = 0; p < pts.size(); ++p)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) =
          spec.basis.functions[i](t, pts[p]);
  return out;
}

}  // namespace htc
