#include "htc/inverse.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "htc/error.hpp"

namespace htc {

using Index = Eigen::Index;

namespace {

Index dof_of(const SpaceTimeGrid& grid, End b) {
  return b == left_end ? 0 : static_cast<Index>(grid.dof_count()) - 1;
}

/// Outer-boundary part of the weak-form identity that does not involve the
/// unknown coefficient. `homogeneous` selects the correction problem, whose
/// boundary data vanish.
Vector known_outer_terms(const ProblemSpec& spec, const WeakForm& form,
                         const Eigen::Ref<const Vector>& u, double t, bool homogeneous) {
  Vector out = Vector::Zero(static_cast<Index>(spec.m()));
  for (End b : {left_end, right_end}) {
    const Vector phi = form.weights_at(b);
    const double ub = u[dof_of(spec.grid, b)];
    if (spec.geometry.outer[b] == BoundaryKind::dirichlet) {
      if (phi.cwiseAbs().maxCoeff() > 0.0) out += outer_conormal(spec, u, t, b) * phi;
    } else if (spec.variant == Variant::interface) {
      const double beta = spec.data.robin_coefficient[b](t);
      const double g = homogeneous ? 0.0 : spec.data.boundary[b](t);
      out += (g - beta * ub) * phi;
    } else if (!homogeneous) {
      out += spec.data.boundary[b](t) * phi;
    }
  }
  return out;
}

void check_measurements(const ProblemSpec& spec, const MeasurementSet& psi) {
  if (psi.size() != spec.m())
    throw ConfigError("measurement set has " + std::to_string(psi.size()) + " series, expected " +
                      std::to_string(spec.m()));
  if (psi.time_count() != spec.grid.time_count())
    throw ConfigError("measurement set has " + std::to_string(psi.time_count()) +
                      " time nodes, grid has " + std::to_string(spec.grid.time_count()));
}

Matrix differentiate_rows(const Matrix& series, double dt, double noise, std::size_t window) {
  Matrix d(series.rows(), series.cols());
  for (Index k = 0; k < series.rows(); ++k) {
    const Vector row = series.row(k).transpose();
    d.row(k) = (noise > 0.0 ? differentiate_series(smooth_series(row, window), dt)
                            : differentiate_series(row, dt))
                   .transpose();
  }
  return d;
}

double sup_norm(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

WeakForm::WeakForm(const ProblemSpec& spec) : spec_(spec) {
  const auto& grid = spec.grid;
  const Index dofs = static_cast<Index>(grid.dof_count());
  const Index m = static_cast<Index>(spec.m());
  const Index times = static_cast<Index>(grid.time_count());
  quad_ = quadrature_weights(grid);
  phi_.resize(dofs, m);
  dphi_.resize(dofs, m);
  for (Index k = 0; k < m; ++k) {
    phi_.col(k) = weight_samples(grid, spec.weights.functions[static_cast<std::size_t>(k)]);
    dphi_.col(k) = layer_derivative(grid, phi_.col(k));
  }
  diffusion_.resize(dofs, times);
  advection_.resize(dofs, times);
  reaction_.resize(dofs, times);
  source_.resize(m, times);
  for (Index n = 0; n < times; ++n) {
    const double t = grid.time(static_cast<std::size_t>(n));
    const Vector a = sample(spec.coefficients.diffusion, grid, t);
    diffusion_.col(n) = a;
    advection_.col(n) = sample(spec.coefficients.drift, grid, t) + layer_derivative(grid, a);
    reaction_.col(n) = sample(spec.coefficients.reaction, grid, t);
    source_.col(n) = phi_.transpose() * quad_.cwiseProduct(sample(spec.data.source, grid, t));
  }
}

Vector WeakForm::bilinear(const Eigen::Ref<const Vector>& u, std::size_t n) const {
  const Index c = static_cast<Index>(n);
  const Vector ux = layer_derivative(spec_.grid, u);
  const Vector flux = quad_.cwiseProduct(diffusion_.col(c).cwiseProduct(ux));
  const Vector lower = quad_.cwiseProduct(advection_.col(c).cwiseProduct(ux) +
                                          reaction_.col(c).cwiseProduct(u));
  return dphi_.transpose() * flux + phi_.transpose() * lower;
}

Vector WeakForm::source(std::size_t n) const { return source_.col(static_cast<Index>(n)); }

Vector WeakForm::weights_at(End b) const {
  return phi_.row(dof_of(spec_.grid, b)).transpose();
}

Vector WeakForm::weight_jumps(std::size_t l) const {
  return (phi_.row(static_cast<Index>(plus_dof(spec_, l))) -
          phi_.row(static_cast<Index>(minus_dof(spec_, l))))
      .transpose();
}

double weak_form(const ProblemSpec& spec, const SolutionField& u, std::size_t k, std::size_t n) {
  const WeakForm form(spec);
  return form.bilinear(u.at(n), n)[static_cast<Index>(k)];
}

Matrix measurement_matrix(const ProblemSpec& spec, const WeakForm& form,
                          const Eigen::Ref<const Vector>& u, double t) {
  const Index m = static_cast<Index>(spec.m());
  const Matrix basis = basis_values(spec, t);
  Matrix b = Matrix::Zero(m, m);
  if (spec.variant == Variant::interface) {
    for (std::size_t l = 0; l < spec.grid.interface_count(); ++l) {
      const double jump = u[static_cast<Index>(plus_dof(spec, l))] - u[static_cast<Index>(minus_dof(spec, l))];
      b += jump * form.weight_jumps(l) * basis.col(static_cast<Index>(l)).transpose();
    }
  } else {
    const auto ends = robin_ends(spec);
    for (std::size_t p = 0; p < ends.size(); ++p) {
      const double ub = u[dof_of(spec.grid, ends[p])];
      b += ub * form.weights_at(ends[p]) * basis.col(static_cast<Index>(p)).transpose();
    }
  }
  return b;
}

double outer_conormal(const ProblemSpec& spec, const Eigen::Ref<const Vector>& u, double t, End b) {
  const double h = spec.grid.spacing();
  const auto& a = spec.coefficients.diffusion;
  if (b == left_end) return -a(0, t, 0.0) * (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
  const Index e = u.size() - 1;
  return a(spec.grid.layer_count() - 1, t, spec.grid.length()) *
         (3.0 * u[e] - 4.0 * u[e - 1] + u[e - 2]) / (2.0 * h);
}

Vector identity_rhs(const ProblemSpec& spec, const WeakForm& form,
                    const Eigen::Ref<const Vector>& u, std::size_t n) {
  const double t = spec.grid.time(n);
  Vector rhs = form.source(n) - form.bilinear(u, n) + known_outer_terms(spec, form, u, t, false);
  for (std::size_t l = 0; l < spec.grid.interface_count(); ++l)
    rhs -= spec.data.interface_flux[l](t) * form.weight_jumps(l);
  return rhs;
}

Matrix weak_residual(const ProblemSpec& spec, const SolutionField& u, const CoefficientSeries& q) {
  const WeakForm form(spec);
  const Matrix dpsi = differentiate_rows(observe(spec, u), spec.grid.dt(), 0.0, 0);
  Matrix res(static_cast<Index>(spec.m()), static_cast<Index>(u.time_count()));
  for (std::size_t n = 0; n < u.time_count(); ++n) {
    const auto col = u.at(n);
    const Index c = static_cast<Index>(n);
    res.col(c) = measurement_matrix(spec, form, col, spec.grid.time(n)) * q.at(n) -
                 identity_rhs(spec, form, col, n) + dpsi.col(c);
  }
  return res;
}

Vector solve_q0(const ProblemSpec& spec, const MeasurementSet& psi) {
  require_valid(spec);
  check_measurements(spec, psi);
  const WeakForm form(spec);
  const Vector u0 = sample(spec.data.initial, spec.grid, 0.0);
  const Matrix b0 = measurement_matrix(spec, form, u0, 0.0);
  const double det = b0.determinant();
  if (!(std::abs(det) >= spec.options.det_tolerance)) {
    std::ostringstream os;
    os << "degenerate data: |det B0| = " << std::abs(det) << " below threshold "
       << spec.options.det_tolerance << " (nondegeneracy of the t = 0 measurement matrix fails)";
    throw DegeneracyError(os.str(), 0, det);
  }
  return b0.partialPivLu().solve(identity_rhs(spec, form, u0, 0) - psi.dpsi.col(0));
}

MatrixSeries assemble_B(const ProblemSpec& spec, const SolutionField& v) {
  const WeakForm form(spec);
  MatrixSeries out;
  const std::size_t count = v.time_count();
  out.det.resize(static_cast<Index>(count));
  for (std::size_t n = 0; n < count; ++n) {
    out.matrices.push_back(measurement_matrix(spec, form, v.at(n), spec.grid.time(n)));
    out.det[static_cast<Index>(n)] = out.matrices.back().determinant();
  }
  const double det0 = std::abs(out.det[0]);
  if (!(det0 >= spec.options.det_tolerance)) {
    std::ostringstream os;
    os << "degenerate data: |det B(t0)| = " << det0 << " below threshold " << spec.options.det_tolerance;
    throw DegeneracyError(os.str(), 0, out.det[0]);
  }
  out.delta1 = spec.options.delta1_factor * det0;
  out.horizon = 0;
  while (out.horizon + 1 < count && std::abs(out.det[static_cast<Index>(out.horizon + 1)]) >= out.delta1)
    ++out.horizon;
  return out;
}

Vector assemble_F(const ProblemSpec& spec, const WeakForm& form, const Vector& q0,
                  const CoefficientSeries& q_tilde, const SolutionField& w,
                  const Matrix& dpsi_tilde, std::size_t n) {
  const double t = spec.grid.time(n);
  const auto wn = w.at(n);
  const Vector q = q0 + q_tilde.at(n);
  return -form.bilinear(wn, n) - dpsi_tilde.col(static_cast<Index>(n)) +
         known_outer_terms(spec, form, wn, t, true) - measurement_matrix(spec, form, wn, t) * q;
}

double RecoveryResult::max_overdetermination() const { return sup_norm(overdetermination); }

double RecoveryResult::max_ratio(std::size_t from) const {
  double r = 0.0;
  for (const auto& rec : history)
    if (rec.iteration > from && std::isfinite(rec.ratio)) r = std::max(r, rec.ratio);
  return r;
}

namespace {

enum class AttemptOutcome { converged, left_ball, residual_growth, iteration_limit };

const char* describe(AttemptOutcome o) {
  switch (o) {
    case AttemptOutcome::converged: return "converged";
    case AttemptOutcome::left_ball: return "iterate left the ball of radius 2|g0|";
    case AttemptOutcome::residual_growth: return "residual grew for 3 consecutive iterations";
    case AttemptOutcome::iteration_limit: return "iteration limit reached";
  }
  return "";
}

}  // namespace

RecoveryResult picard_recover(const ProblemSpec& spec, const MeasurementSet& psi) {
  const Vector q0 = solve_q0(spec, psi);
  const SolutionField v = solve_auxiliary(spec, q0);
  const double dt = spec.grid.dt();
  const Matrix psi_tilde = psi.psi - observe(spec, v);
  const Matrix dpsi_tilde = differentiate_rows(psi_tilde, dt, psi.noise, psi.smoothing_window);
  const MatrixSeries bs = assemble_B(spec, v);
  const WeakForm form(spec);
  const std::size_t m = spec.m();
  const auto& opt = spec.options;

  RecoveryResult res;
  res.method = "picard";
  res.q0 = q0;
  res.delta1 = bs.delta1;

  std::size_t horizon = bs.horizon;
  std::string last_failure = "determinant bound holds on no step beyond t0";
  for (;;) {
    if (horizon < opt.min_horizon_steps) {
      std::ostringstream os;
      os << "fixed-point iteration is not contractive on any horizon >= " << opt.min_horizon_steps
         << " steps (last attempt: " << last_failure << ")";
      throw NonContractionError(os.str());
    }
    const ProblemSpec sub = spec.truncated(horizon);
    const std::size_t count = horizon + 1;
    const SolutionField v_sub(sub.grid, v.values().leftCols(static_cast<Index>(count)));

    CoefficientSeries q_tilde = CoefficientSeries::zeros(m, count);
    SolutionField w(sub.grid, Matrix::Zero(static_cast<Index>(sub.grid.dof_count()), static_cast<Index>(count)));
    std::vector<IterationRecord> history;
    double radius = 0.0, previous = std::numeric_limits<double>::quiet_NaN();
    std::size_t growth = 0;
    bool inside = true;
    AttemptOutcome outcome = AttemptOutcome::iteration_limit;

    for (std::size_t k = 1; k <= opt.max_iterations; ++k) {
      if (k > 1) w = solve_correction(sub, q0, q_tilde, v_sub);
      CoefficientSeries next = CoefficientSeries::zeros(m, count);
      for (std::size_t n = 1; n < count; ++n)
        next.values.col(static_cast<Index>(n)) = bs.matrices[n].partialPivLu().solve(
            assemble_F(sub, form, q0, q_tilde, w, dpsi_tilde, n));
      const double residual = sup_norm(next.values - q_tilde.values);
      const double norm = sup_norm(next.values);
      if (k == 1) {
        res.g0_norm = norm;
        radius = 2.0 * norm;
      }
      history.push_back({k, residual, residual / previous, norm, horizon});
      q_tilde = std::move(next);

      if (residual <= opt.tolerance * (1.0 + norm)) {
        outcome = AttemptOutcome::converged;
        break;
      }
      if (norm > radius + opt.tolerance * (1.0 + norm)) {
        inside = false;
        outcome = AttemptOutcome::left_ball;
        break;
      }
      growth = (k > 1 && residual > previous) ? growth + 1 : 0;
      if (growth >= 3) {
        outcome = AttemptOutcome::residual_growth;
        break;
      }
      previous = residual;
    }
    res.attempts.push_back(history);

    if (outcome != AttemptOutcome::converged) {
      last_failure = describe(outcome);
      horizon /= 2;
      continue;
    }

    res.history = std::move(history);
    res.iterations = res.history.size();
    res.converged = true;
    res.inside_ball = inside;
    res.ball_radius = radius;
    res.horizon_steps = horizon;
    res.tau0 = sub.grid.horizon();
    res.times = Vector::LinSpaced(static_cast<Index>(count), 0.0, res.tau0);
    res.q.values = q0.replicate(1, static_cast<Index>(count)) + q_tilde.values;
    res.v = v_sub;
    res.w = solve_correction(sub, q0, q_tilde, v_sub);
    res.u = res.v + res.w;
    res.det = bs.det.head(static_cast<Index>(count));
    res.overdetermination =
        (observe(sub, res.u) - psi.psi.leftCols(static_cast<Index>(count))).cwiseAbs();
    return res;
  }
}

RecoveryResult sequential_recover(const ProblemSpec& spec, const MeasurementSet& psi) {
  const Vector q0 = solve_q0(spec, psi);
  const auto& grid = spec.grid;
  const auto& opt = spec.options;
  const WeakForm form(spec);
  const GridFields fields(spec, true);
  const ThetaStepper stepper(spec, fields);
  const Index count = static_cast<Index>(grid.time_count());
  const Index dofs = static_cast<Index>(grid.dof_count());

  Matrix u(dofs, count);
  u.col(0) = sample(spec.data.initial, grid, 0.0);
  Matrix q(static_cast<Index>(spec.m()), count);
  q.col(0) = q0;
  Vector det(count);
  det[0] = measurement_matrix(spec, form, u.col(0), 0.0).determinant();
  const double delta1 = opt.delta1_factor * std::abs(det[0]);

  RecoveryResult res;
  res.method = "sequential";
  res.q0 = q0;
  res.delta1 = delta1;
  res.inner_iterations.push_back(0);

  for (Index n = 1; n < count; ++n) {
    const std::size_t step = static_cast<std::size_t>(n);
    const double t = grid.time(step);
    Vector qn = n >= 2 ? Vector(2.0 * q.col(n - 1) - q.col(n - 2)) : Vector(q.col(n - 1));
    bool done = false;
    std::size_t it = 0;
    Vector un;
    while (!done) {
      if (++it > opt.sequential_max_inner) {
        throw Error(ErrorKind::non_contraction,
                    "sequential inner iteration failed to converge at time index " + std::to_string(step),
                    step);
      }
      un = stepper.step(step, u.col(n - 1), direct_conditions(spec, qn, step));
      const Matrix bn = measurement_matrix(spec, form, un, t);
      det[n] = bn.determinant();
      if (!(std::abs(det[n]) >= delta1)) {
        std::ostringstream os;
        os << "measurement matrix degenerate at time index " << step << ": |det B| = "
           << std::abs(det[n]) << " < delta1 = " << delta1;
        throw DegeneracyError(os.str(), step, det[n]);
      }
      const Vector next = bn.partialPivLu().solve(identity_rhs(spec, form, un, step) - psi.dpsi.col(n));
      const double change = (next - qn).cwiseAbs().maxCoeff();
      if (!next.allFinite()) {
        throw Error(ErrorKind::non_contraction,
                    "sequential inner iteration diverged at time index " + std::to_string(step), step);
      }
      qn = next;
      done = change <= opt.tolerance * (1.0 + qn.cwiseAbs().maxCoeff());
    }
    u.col(n) = stepper.step(step, u.col(n - 1), direct_conditions(spec, qn, step));
    q.col(n) = qn;
    res.inner_iterations.push_back(it);
  }

  res.converged = true;
  res.horizon_steps = grid.step_count();
  res.tau0 = grid.horizon();
  res.times = Vector::LinSpaced(count, 0.0, res.tau0);
  res.q.values = std::move(q);
  res.u = SolutionField(grid, std::move(u));
  res.det = det;
  res.overdetermination = (observe(spec, res.u) - psi.psi).cwiseAbs();
  return res;
}

ConsistencyReport check_consistency(const ProblemSpec& spec, const MeasurementSet& psi) {
  require_valid(spec);
  check_measurements(spec, psi);
  const auto& opt = spec.options;
  const auto& grid = spec.grid;
  const WeakForm form(spec);
  const Vector u0 = sample(spec.data.initial, grid, 0.0);
  const SolutionField u0_field(grid, u0);

  ConsistencyReport rep;
  const Matrix b0 = measurement_matrix(spec, form, u0, 0.0);
  rep.det_b0 = std::abs(b0.determinant());
  rep.det_ok = rep.det_b0 >= opt.det_tolerance;
  const Vector rhs = identity_rhs(spec, form, u0, 0) - psi.dpsi.col(0);
  rep.q0 = rep.det_ok ? Vector(b0.partialPivLu().solve(rhs))
                      : Vector(b0.completeOrthogonalDecomposition().solve(rhs));

  const Vector coef = basis_values(spec, 0.0).transpose() * rep.q0;
  const TraceSet tr = extract_traces(spec, u0_field, 0);
  double boundary = 0.0;
  for (End b : {left_end, right_end}) {
    const double ub = b == left_end ? tr.left : tr.right;
    const double g = spec.data.boundary[b](0.0);
    if (spec.geometry.outer[b] == BoundaryKind::dirichlet) {
      boundary = std::max(boundary, std::abs(ub - g));
      continue;
    }
    double beta = 0.0;
    if (spec.variant == Variant::interface) {
      beta = spec.data.robin_coefficient[b](0.0);
    } else {
      const auto ends = robin_ends(spec);
      for (std::size_t p = 0; p < ends.size(); ++p)
        if (ends[p] == b) beta = coef[static_cast<Index>(p)];
    }
    const double conormal = b == left_end ? tr.conormal_left : tr.conormal_right;
    boundary = std::max(boundary, std::abs(conormal + beta * ub - g));
  }
  for (std::size_t l = 0; l < grid.interface_count(); ++l) {
    const double nu = spec.geometry.normal(l);
    const double plus_flux = nu * (nu > 0 ? tr.flux_right[l] : tr.flux_left[l]);
    const double sigma = coef[static_cast<Index>(l)];
    boundary = std::max(boundary, std::abs(plus_flux - sigma * tr.jump(l) -
                                           spec.data.interface_flux[l](0.0)));
    rep.flux_residual = std::max(rep.flux_residual, std::abs(tr.flux_left[l] - tr.flux_right[l]));
  }
  rep.boundary_residual = std::isfinite(boundary) ? boundary : std::numeric_limits<double>::max();

  rep.measurement_residual = (observe(spec, u0_field).col(0) - psi.psi.col(0)).cwiseAbs();
  rep.boundary_ok = rep.boundary_residual <= opt.boundary_tolerance &&
                    rep.flux_residual <= opt.boundary_tolerance;
  rep.measurement_ok = true;
  for (Index k = 0; k < rep.measurement_residual.size(); ++k)
    rep.measurement_ok = rep.measurement_ok &&
                         rep.measurement_residual[k] <= opt.measurement_tolerance * (1.0 + std::abs(psi.psi(k, 0)));
  return rep;
}

std::string ConsistencyReport::to_string() const {
  std::ostringstream os;
  os.precision(6);
  os << "consistency: " << (passed() ? "pass" : "fail") << "\n";
  os << "t=0 boundary/interface identity residual: " << boundary_residual
     << (boundary_ok ? "  ok" : "  FAIL") << "\n";
  os << "t=0 interface flux continuity residual: " << flux_residual << "\n";
  for (Index k = 0; k < measurement_residual.size(); ++k)
    os << "int u0 phi_" << k + 1 << " - psi_" << k + 1 << "(0) residual: " << measurement_residual[k]
       << "\n";
  os << "measurement residuals: " << (measurement_ok ? "ok" : "FAIL") << "\n";
  os << "|det B0|: " << det_b0 << (det_ok ? "  ok" : "  FAIL (degenerate)") << "\n";
  os << "q(0):";
  for (Index i = 0; i < q0.size(); ++i) os << " " << q0[i];
  os << "\n";
  return os.str();
}

}  // namespace htc
