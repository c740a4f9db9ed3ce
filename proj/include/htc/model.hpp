#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace htc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

using SpaceTimeFn = std::function<double(double t, double x)>;
using TimeFn = std::function<double(double t)>;

enum class Variant { interface, robin };
enum class BoundaryKind { dirichlet, robin };

/// Outer boundary points: x = 0 and x = L.
enum End : std::size_t { left_end = 0, right_end = 1 };

/// How the outer conormal term of the weak form is handled at Dirichlet ends.
enum class DirichletConormal {
  vanishing_weights,  // weights must vanish at Dirichlet ends; the term drops
  stencil,            // term evaluated from one-sided difference stencils
};

/// Function given piecewise on the layers of a slab. A single piece applies
/// to every layer.
class LayeredFunction {
 public:
  LayeredFunction() = default;
  LayeredFunction(SpaceTimeFn single) { pieces_.push_back(std::move(single)); }  // NOLINT
  explicit LayeredFunction(std::vector<SpaceTimeFn> pieces) : pieces_(std::move(pieces)) {}

  double operator()(std::size_t layer, double t, double x) const {
    return pieces_.size() == 1 ? pieces_.front()(t, x) : pieces_[layer](t, x);
  }

  bool defined() const noexcept {
    if (pieces_.empty()) return false;
    for (const auto& p : pieces_)
      if (!p) return false;
    return true;
  }
  std::size_t piece_count() const noexcept { return pieces_.size(); }

 private:
  std::vector<SpaceTimeFn> pieces_;
};

struct SlabGeometry {
  double length = 1.0;
  std::vector<double> interfaces;
  /// Per-interface normal sign (+1: minus side is the left layer). Empty means all +1.
  std::vector<int> orientation;
  std::array<BoundaryKind, 2> outer{BoundaryKind::dirichlet, BoundaryKind::dirichlet};

  std::size_t interface_count() const noexcept { return interfaces.size(); }
  std::size_t layer_count() const noexcept { return interfaces.size() + 1; }
  int normal(std::size_t l) const { return orientation.empty() ? 1 : orientation[l]; }
};

/// Uniform spatial grid with doubled degrees of freedom at interface nodes,
/// and a uniform time grid t_n = n dt, n = 0..steps.
///
/// Degrees of freedom (dofs) are numbered left to right; an interface node
/// carries its left trace followed by its right trace, so every layer owns
/// a contiguous dof range.
class SpaceTimeGrid {
 public:
  SpaceTimeGrid() = default;
  static SpaceTimeGrid uniform(const SlabGeometry& geometry, std::size_t nodes,
                               std::size_t steps, double horizon);

  std::size_t node_count() const noexcept { return static_cast<std::size_t>(nodes_.size()); }
  std::size_t dof_count() const noexcept { return static_cast<std::size_t>(dof_x_.size()); }
  std::size_t step_count() const noexcept { return steps_; }
  std::size_t time_count() const noexcept { return steps_ + 1; }
  double spacing() const noexcept { return h_; }
  double dt() const noexcept { return dt_; }
  double horizon() const noexcept { return dt_ * static_cast<double>(steps_); }
  double time(std::size_t n) const noexcept { return dt_ * static_cast<double>(n); }
  double length() const noexcept { return length_; }
  const Vector& nodes() const noexcept { return nodes_; }

  std::size_t interface_count() const noexcept { return interface_node_.size(); }
  std::size_t layer_count() const noexcept { return layer_first_.size(); }
  std::size_t interface_node(std::size_t l) const { return interface_node_[l]; }
  /// Distance from each interface to its nearest node, in units of h.
  double interface_misalignment(std::size_t l) const { return misalignment_[l]; }
  /// Dof of the trace from the layer left of interface l.
  std::size_t left_dof(std::size_t l) const { return layer_last_[l]; }
  /// Dof of the trace from the layer right of interface l.
  std::size_t right_dof(std::size_t l) const { return layer_first_[l + 1]; }

  std::size_t layer_first_dof(std::size_t k) const { return layer_first_[k]; }
  std::size_t layer_last_dof(std::size_t k) const { return layer_last_[k]; }
  std::size_t layer_node_count(std::size_t k) const { return layer_last_[k] - layer_first_[k] + 1; }

  std::size_t dof_layer(std::size_t d) const { return dof_layer_[d]; }
  double dof_x(std::size_t d) const { return dof_x_[d]; }
  std::size_t dof_node(std::size_t d) const { return dof_node_[d]; }

  /// Same spatial grid, first `steps` time steps only.
  SpaceTimeGrid truncated(std::size_t steps) const;

 private:
  double length_ = 0.0;
  double h_ = 0.0;
  double dt_ = 0.0;
  std::size_t steps_ = 0;
  Vector nodes_;
  std::vector<std::size_t> interface_node_;
  std::vector<double> misalignment_;
  std::vector<std::size_t> layer_first_, layer_last_;
  std::vector<std::size_t> dof_layer_, dof_node_;
  std::vector<double> dof_x_;
};

struct CoefficientField {
  LayeredFunction diffusion;  // a(t,x) > 0, may jump across interfaces
  LayeredFunction drift;      // a1(t,x)
  LayeredFunction reaction;   // a0(t,x)
  double ellipticity = 1e-6;  // lower bound delta0 on a
};

struct ProblemData {
  LayeredFunction source;                 // f(t,x)
  LayeredFunction initial;                // u0(x), evaluated with t = 0
  std::array<TimeFn, 2> boundary;         // g(t) at x = 0 and x = L
  std::vector<TimeFn> interface_flux;     // g+(t) per interface
  std::array<TimeFn, 2> robin_coefficient;  // known beta(t) at robin ends, interface variant
};

struct BasisSet {
  std::vector<SpaceTimeFn> functions;  // Phi_i(t,x), evaluated on the coefficient support
  std::size_t size() const noexcept { return functions.size(); }
};

struct WeightSet {
  std::vector<LayeredFunction> functions;  // phi_k(x), evaluated with t = 0
  std::size_t size() const noexcept { return functions.size(); }
};

struct SolverOptions {
  double theta = 1.0;
  double tolerance = 1e-10;
  std::size_t max_iterations = 50;
  double delta1_factor = 0.5;
  double det_tolerance = 1e-12;
  DirichletConormal dirichlet_conormal = DirichletConormal::vanishing_weights;
  double boundary_tolerance = 1e-2;
  double measurement_tolerance = 1e-3;  // relative to 1 + |psi_k(0)|
  std::size_t smoothing_window = 11;
  std::size_t min_horizon_steps = 4;
  std::size_t sequential_max_inner = 100;
};

struct ProblemSpec {
  Variant variant = Variant::interface;
  SlabGeometry geometry;
  SpaceTimeGrid grid;
  CoefficientField coefficients;
  ProblemData data;
  BasisSet basis;
  WeightSet weights;
  SolverOptions options;

  std::size_t m() const noexcept { return basis.size(); }

  /// Copy with a fresh uniform grid on the same horizon.
  ProblemSpec with_grid(std::size_t nodes, std::size_t steps) const;
  /// Copy with both spacings divided by `factor`.
  ProblemSpec refined(std::size_t factor) const;
  /// Copy restricted to the first `steps` time steps.
  ProblemSpec truncated(std::size_t steps) const;
};

struct Violation {
  std::string code;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const noexcept { return violations.empty(); }
  bool has(const std::string& code) const;
  std::string to_string() const;
};

ValidationReport validate_spec(const ProblemSpec& spec);

/// Throws ConfigError listing every violation when the spec is malformed.
void require_valid(const ProblemSpec& spec);

/// Samples a layered function at every dof for time t.
Vector sample(const LayeredFunction& fn, const SpaceTimeGrid& grid, double t);

/// Points carrying the unknown coefficient: interfaces for the interface
/// variant, robin ends for the robin variant.
std::vector<double> support_points(const ProblemSpec& spec);

/// Phi_i(t, p) for every basis function i and support point p (m x P).
Matrix basis_values(const ProblemSpec& spec, double t);

/// Robin ends of the outer boundary.
std::vector<End> robin_ends(const ProblemSpec& spec);

}  // namespace htc
