#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include "htc/model.hpp"

namespace htc {

/// Discrete solution on a SpaceTimeGrid: one column of dof values per time node.
class SolutionField {
 public:
  SolutionField() = default;
  SolutionField(SpaceTimeGrid grid, Matrix values) : grid_(std::move(grid)), values_(std::move(values)) {}

  const SpaceTimeGrid& grid() const noexcept { return grid_; }
  const Matrix& values() const noexcept { return values_; }
  std::size_t time_count() const noexcept { return static_cast<std::size_t>(values_.cols()); }
  auto at(std::size_t n) const { return values_.col(static_cast<Eigen::Index>(n)); }

  friend SolutionField operator+(const SolutionField& a, const SolutionField& b) {
    return {a.grid_, a.values_ + b.values_};
  }
  friend SolutionField operator-(const SolutionField& a, const SolutionField& b) {
    return {a.grid_, a.values_ - b.values_};
  }

 private:
  SpaceTimeGrid grid_;
  Matrix values_;
};

/// Coefficient vector q(t_n) per time node (m x time_count).
struct CoefficientSeries {
  Matrix values;

  static CoefficientSeries constant(const Vector& q, std::size_t time_count);
  static CoefficientSeries zeros(std::size_t m, std::size_t time_count);
  static CoefficientSeries sampled(const std::function<Vector(double)>& q, const SpaceTimeGrid& grid);

  std::size_t size() const noexcept { return static_cast<std::size_t>(values.rows()); }
  std::size_t time_count() const noexcept { return static_cast<std::size_t>(values.cols()); }
  auto at(std::size_t n) const { return values.col(static_cast<Eigen::Index>(n)); }
};

/// sigma(t_n, p) or beta(t_n, p) = sum_i q_i(t_n) Phi_i(t_n, p) at every support point p.
Vector coefficient_values(const ProblemSpec& spec, const CoefficientSeries& q, std::size_t n);

/// Boundary and interface data at one time level.
struct StepConditions {
  Vector sigma;                   // interface coefficient per interface
  Vector g_plus;                  // interface data per interface
  std::array<double, 2> beta{};   // robin coefficient per outer end
  std::array<double, 2> g{};      // outer boundary data per end
};

/// Bulk fields of a problem sampled on its grid at every time node.
struct GridFields {
  GridFields(const ProblemSpec& spec, bool with_source);

  Matrix diffusion, drift, reaction, source;  // dof x time; source empty when homogeneous
};

/// One theta-scheme step for u_t = a u_xx - a1 u_x - a0 u + f on every layer.
///
/// Interior dofs use central differences. Each outer end carries either the
/// Dirichlet value or the Robin row a u_x n + beta u = g with a second-order
/// one-sided stencil; each interface carries two rows,
///   nu a u_x(side) - sigma (u+ - u-) = g+   for side = left, right,
/// which together impose flux continuity and the jump condition. The step
/// matrix has two sub- and two superdiagonals.
class ThetaStepper {
 public:
  ThetaStepper(const ProblemSpec& spec, const GridFields& fields);

  /// Advances from time index n - 1 to n. Throws ForwardError on a singular
  /// step matrix or non-finite result.
  Vector step(std::size_t n, const Eigen::Ref<const Vector>& previous,
              const StepConditions& now) const;

  /// Spatial operator L u (zero at constraint rows) at time index n.
  Vector apply_operator(std::size_t n, const Eigen::Ref<const Vector>& u) const;

 private:
  const ProblemSpec& spec_;
  const GridFields& fields_;
  std::vector<bool> constrained_;
};

/// Boundary and interface data for time index n of a direct problem whose
/// unknown-coefficient support carries sum_i q_i Phi_i(t_n, .).
StepConditions direct_conditions(const ProblemSpec& spec, const Eigen::Ref<const Vector>& q,
                                 std::size_t n);

struct TraceSet {
  double left = 0.0, right = 0.0;                  // u(0), u(L)
  std::vector<double> minus, plus;                 // u-(gamma_l), u+(gamma_l)
  double conormal_left = 0.0, conormal_right = 0.0;  // a u_x n at the outer ends
  std::vector<double> flux_left, flux_right;       // a u_x from the left/right layer at gamma_l

  double jump(std::size_t l) const { return plus[l] - minus[l]; }
};

TraceSet extract_traces(const ProblemSpec& spec, const SolutionField& u, std::size_t n);

/// Dof of the plus-side trace of interface l (the side the normal points into).
std::size_t plus_dof(const ProblemSpec& spec, std::size_t l);
std::size_t minus_dof(const ProblemSpec& spec, std::size_t l);

/// Derivative of dof values along x: central inside each layer, second-order
/// one-sided at layer ends.
Vector layer_derivative(const SpaceTimeGrid& grid, const Eigen::Ref<const Vector>& u);

SolutionField solve_direct(const ProblemSpec& spec, const CoefficientSeries& q);

/// Direct problem with the coefficient frozen at q0 for all time.
SolutionField solve_auxiliary(const ProblemSpec& spec, const Vector& q0);

/// Correction w solving the homogeneous-data problem with coefficient
/// sigma0 + sum q_tilde Phi and forcing (sigma - sigma0)(v+ - v-) at the
/// interfaces (robin variant: (beta0 - beta) v at the robin ends).
SolutionField solve_correction(const ProblemSpec& spec, const Vector& q0,
                               const CoefficientSeries& q_tilde, const SolutionField& v);

}  // namespace htc
