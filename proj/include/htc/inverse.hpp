#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "htc/forward.hpp"
#include "htc/measurement.hpp"
#include "htc/model.hpp"

namespace htc {

/// Discrete weak form of the parabolic operator against the weights of a spec:
///
///   a(u, phi) = sum over layers of  int a u_x phi_x + ((a1 + a_x) u_x + a0 u) phi dx
///
/// by trapezoid quadrature with the layer-wise derivative stencils. The a_x
/// term turns integration by parts of the non-divergence operator into an
/// identity. Coefficients are cached for every time node of the grid.
class WeakForm {
 public:
  explicit WeakForm(const ProblemSpec& spec);

  /// a(u, phi_k) for every k at time index n.
  Vector bilinear(const Eigen::Ref<const Vector>& u, std::size_t n) const;
  /// (f(t_n), phi_k) for every k.
  Vector source(std::size_t n) const;

  /// Weights sampled at the dofs (dof x m).
  const Matrix& weights() const noexcept { return phi_; }
  /// phi_k(0) or phi_k(L) for every k.
  Vector weights_at(End b) const;
  /// Jump phi+ - phi- of every weight at interface l.
  Vector weight_jumps(std::size_t l) const;

 private:
  const ProblemSpec& spec_;
  Vector quad_;
  Matrix phi_, dphi_;
  Matrix diffusion_, advection_, reaction_, source_;
};

double weak_form(const ProblemSpec& spec, const SolutionField& u, std::size_t k, std::size_t n);

/// m x m matrix pairing the basis with solution traces at time t:
///   interface: b_ij = sum_l Phi_j(t, g_l) (u+ - u-)(g_l) phi_i^0(g_l)
///   robin:     b_ij = sum_b Phi_j(t, x_b) phi_i(x_b) u(x_b)
Matrix measurement_matrix(const ProblemSpec& spec, const WeakForm& form,
                          const Eigen::Ref<const Vector>& u, double t);

/// Conormal derivative a u_x n at an outer end from the one-sided stencil.
double outer_conormal(const ProblemSpec& spec, const Eigen::Ref<const Vector>& u, double t, End b);

/// Right-hand side of the weak-form identity at time index n without the
/// psi' term, so that  B(u) q = identity_rhs - psi'  holds for a solution u
/// with coefficient q.
Vector identity_rhs(const ProblemSpec& spec, const WeakForm& form,
                    const Eigen::Ref<const Vector>& u, std::size_t n);

/// Residual of the weak-form identity for a direct solution u computed with
/// coefficient q; psi' is formed by differentiating int u phi_k (m x time_count).
Matrix weak_residual(const ProblemSpec& spec, const SolutionField& u, const CoefficientSeries& q);

/// Coefficient at t = 0 from the weak-form identity evaluated on u0.
/// Throws DegeneracyError when |det B0| is below the threshold.
Vector solve_q0(const ProblemSpec& spec, const MeasurementSet& psi);

struct MatrixSeries {
  std::vector<Matrix> matrices;
  Vector det;
  double delta1 = 0.0;
  /// Largest n with |det B(t_j)| >= delta1 for all j <= n.
  std::size_t horizon = 0;
};

MatrixSeries assemble_B(const ProblemSpec& spec, const SolutionField& v);

/// Right-hand side of B(t_n) q_tilde = F at time index n:
///   F = -a(w, phi) - psi_tilde' + (outer conormal terms of w) - B(w) (q0 + q_tilde)
/// where B(w) is the measurement matrix on the traces of w.
Vector assemble_F(const ProblemSpec& spec, const WeakForm& form, const Vector& q0,
                  const CoefficientSeries& q_tilde, const SolutionField& w,
                  const Matrix& dpsi_tilde, std::size_t n);

struct IterationRecord {
  std::size_t iteration = 0;
  double residual = 0.0;  // max_n |q^(k) - q^(k-1)|
  double ratio = 0.0;     // residual / previous residual (NaN for the first); index k = iteration - 1
  double norm = 0.0;      // max_n |q^(k)|
  std::size_t horizon = 0;
};

struct RecoveryResult {
  std::string method;
  Vector times;
  CoefficientSeries q;  // q0 + q_tilde on [0, tau0]
  Vector q0;
  SolutionField v, w, u;
  std::size_t horizon_steps = 0;
  double tau0 = 0.0;
  std::vector<IterationRecord> history;  // last attempt; all attempts in `attempts`
  std::vector<std::vector<IterationRecord>> attempts;
  std::size_t iterations = 0;
  bool converged = false;
  double g0_norm = 0.0;
  double ball_radius = 0.0;
  bool inside_ball = true;
  Vector det;
  double delta1 = 0.0;
  Matrix overdetermination;  // |int u phi_k - psi_k| per k and time node
  std::vector<std::size_t> inner_iterations;  // sequential method only

  double max_overdetermination() const;
  /// Largest |q^(k+1) - q^(k)| / |q^(k) - q^(k-1)| over k >= from.
  double max_ratio(std::size_t from = 2) const;
};

RecoveryResult picard_recover(const ProblemSpec& spec, const MeasurementSet& psi);

/// Time-marching oracle: couples one implicit step with the weak-form identity
/// at every time node, iterating the pair (u^n, q^n) to tolerance.
RecoveryResult sequential_recover(const ProblemSpec& spec, const MeasurementSet& psi);

struct ConsistencyReport {
  double boundary_residual = 0.0;  // t = 0 boundary / interface identity
  double flux_residual = 0.0;      // flux continuity of u0 at the interfaces
  Vector measurement_residual;     // |int u0 phi_k - psi_k(0)|
  double det_b0 = 0.0;
  Vector q0;
  bool boundary_ok = false, measurement_ok = false, det_ok = false;

  bool passed() const noexcept { return boundary_ok && measurement_ok && det_ok; }
  std::string to_string() const;
};

ConsistencyReport check_consistency(const ProblemSpec& spec, const MeasurementSet& psi);

}  // namespace htc
