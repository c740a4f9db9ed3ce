#include "htc/forward.hpp"

#include <cmath>
#include <string>

#include "htc/banded.hpp"
#include "htc/error.hpp"

namespace htc {

using Index = Eigen::Index;

CoefficientSeries CoefficientSeries::constant(const Vector& q, std::size_t time_count) {
  return {q.replicate(1, static_cast<Index>(time_count))};
}

CoefficientSeries CoefficientSeries::zeros(std::size_t m, std::size_t time_count) {
  return {Matrix::Zero(static_cast<Index>(m), static_cast<Index>(time_count))};
}

CoefficientSeries CoefficientSeries::sampled(const std::function<Vector(double)>& q,
                                             const SpaceTimeGrid& grid) {
  const Vector first = q(0.0);
  Matrix values(first.size(), static_cast<Index>(grid.time_count()));
  values.col(0) = first;
  for (std::size_t n = 1; n < grid.time_count(); ++n) values.col(static_cast<Index>(n)) = q(grid.time(n));
  return {std::move(values)};
}

Vector coefficient_values(const ProblemSpec& spec, const CoefficientSeries& q, std::size_t n) {
  return basis_values(spec, spec.grid.time(n)).transpose() * q.at(n);
}

GridFields::GridFields(const ProblemSpec& spec, bool with_source) {
  const auto& grid = spec.grid;
  const Index dofs = static_cast<Index>(grid.dof_count());
  const Index times = static_cast<Index>(grid.time_count());
  diffusion.resize(dofs, times);
  drift.resize(dofs, times);
  reaction.resize(dofs, times);
  if (with_source) source.resize(dofs, times);
  for (Index n = 0; n < times; ++n) {
    const double t = grid.time(static_cast<std::size_t>(n));
    diffusion.col(n) = sample(spec.coefficients.diffusion, grid, t);
    drift.col(n) = sample(spec.coefficients.drift, grid, t);
    reaction.col(n) = sample(spec.coefficients.reaction, grid, t);
    if (with_source) source.col(n) = sample(spec.data.source, grid, t);
  }
}

std::size_t plus_dof(const ProblemSpec& spec, std::size_t l) {
  return spec.geometry.normal(l) > 0 ? spec.grid.right_dof(l) : spec.grid.left_dof(l);
}

std::size_t minus_dof(const ProblemSpec& spec, std::size_t l) {
  return spec.geometry.normal(l) > 0 ? spec.grid.left_dof(l) : spec.grid.right_dof(l);
}

ThetaStepper::ThetaStepper(const ProblemSpec& spec, const GridFields& fields)
    : spec_(spec), fields_(fields), constrained_(spec.grid.dof_count(), false) {
  const auto& grid = spec.grid;
  constrained_.front() = true;
  constrained_.back() = true;
  for (std::size_t l = 0; l < grid.interface_count(); ++l) {
    constrained_[grid.left_dof(l)] = true;
    constrained_[grid.right_dof(l)] = true;
  }
}

Vector ThetaStepper::apply_operator(std::size_t n, const Eigen::Ref<const Vector>& u) const {
  const Index dofs = u.size();
  const double h = spec_.grid.spacing();
  const Index col = static_cast<Index>(n);
  Vector lu = Vector::Zero(dofs);
  for (Index d = 1; d + 1 < dofs; ++d) {
    if (constrained_[static_cast<std::size_t>(d)]) continue;
    const double a = fields_.diffusion(d, col);
    const double a1 = fields_.drift(d, col);
    const double a0 = fields_.reaction(d, col);
    lu[d] = a * (u[d + 1] - 2.0 * u[d] + u[d - 1]) / (h * h) -
            a1 * (u[d + 1] - u[d - 1]) / (2.0 * h) - a0 * u[d];
  }
  return lu;
}

Vector ThetaStepper::step(std::size_t n, const Eigen::Ref<const Vector>& previous,
                          const StepConditions& now) const {
  const auto& grid = spec_.grid;
  const Index dofs = static_cast<Index>(grid.dof_count());
  const double h = spec_.grid.spacing();
  const double dt = grid.dt();
  const double theta = spec_.options.theta;
  const Index col = static_cast<Index>(n);

  BandedMatrix<double> a_mat(dofs, 2, 2);
  Vector rhs = previous;
  if (theta < 1.0) rhs += (1.0 - theta) * dt * apply_operator(n - 1, previous);
  if (fields_.source.size() > 0)
    rhs += dt * (theta * fields_.source.col(col) + (1.0 - theta) * fields_.source.col(col - 1));

  for (Index d = 1; d + 1 < dofs; ++d) {
    if (constrained_[static_cast<std::size_t>(d)]) continue;
    const double a = fields_.diffusion(d, col);
    const double a1 = fields_.drift(d, col);
    const double a0 = fields_.reaction(d, col);
    a_mat(d, d - 1) = -theta * dt * (a / (h * h) + a1 / (2.0 * h));
    a_mat(d, d) = 1.0 + theta * dt * (2.0 * a / (h * h) + a0);
    a_mat(d, d + 1) = -theta * dt * (a / (h * h) - a1 / (2.0 * h));
  }

  // Outer ends: n = -1 at x = 0, n = +1 at x = L.
  const Index last = dofs - 1;
  for (End b : {left_end, right_end}) {
    const Index d = b == left_end ? 0 : last;
    const Index s = b == left_end ? 1 : -1;
    if (spec_.geometry.outer[b] == BoundaryKind::dirichlet) {
      a_mat(d, d) = 1.0;
    } else {
      const double a = fields_.diffusion(d, col);
      a_mat(d, d) = 1.5 * a / h + now.beta[b];
      a_mat(d, d + s) = -2.0 * a / h;
      a_mat(d, d + 2 * s) = 0.5 * a / h;
    }
    rhs[d] = now.g[b];
  }

  for (std::size_t l = 0; l < grid.interface_count(); ++l) {
    const Index dl = static_cast<Index>(grid.left_dof(l));
    const Index dr = static_cast<Index>(grid.right_dof(l));
    const Index p = static_cast<Index>(plus_dof(spec_, l));
    const Index mi = static_cast<Index>(minus_dof(spec_, l));
    const double nu = spec_.geometry.normal(l);
    const double sigma = now.sigma[static_cast<Index>(l)];
    const double al = nu * fields_.diffusion(dl, col) / (2.0 * h);
    const double ar = nu * fields_.diffusion(dr, col) / (2.0 * h);

    a_mat(dl, dl - 2) = al;
    a_mat(dl, dl - 1) = -4.0 * al;
    a_mat(dl, dl) = 3.0 * al;
    a_mat(dr, dr) = -3.0 * ar;
    a_mat(dr, dr + 1) = 4.0 * ar;
    a_mat(dr, dr + 2) = -ar;
    for (Index row : {dl, dr}) {
      a_mat(row, p) -= sigma;
      a_mat(row, mi) += sigma;
      rhs[row] = now.g_plus[static_cast<Index>(l)];
    }
  }

  const BandedLU<double> lu(std::move(a_mat));
  if (lu.singular_column())
    throw ForwardError("singular step matrix at time index " + std::to_string(n), n);
  Vector next = lu.solve(rhs);
  if (!next.allFinite())
    throw ForwardError("solution diverged (non-finite values) at time index " + std::to_string(n), n);
  return next;
}

StepConditions direct_conditions(const ProblemSpec& spec, const Eigen::Ref<const Vector>& q,
                                 std::size_t n) {
  const double t = spec.grid.time(n);
  const std::size_t k = spec.geometry.interface_count();
  StepConditions c;
  c.sigma = Vector::Zero(static_cast<Index>(k));
  c.g_plus.resize(static_cast<Index>(k));
  for (std::size_t l = 0; l < k; ++l) c.g_plus[static_cast<Index>(l)] = spec.data.interface_flux[l](t);
  for (End b : {left_end, right_end}) c.g[b] = spec.data.boundary[b](t);

  const Vector coef = basis_values(spec, t).transpose() * q;
  if (spec.variant == Variant::interface) {
    c.sigma = coef;
    for (End b : robin_ends(spec)) c.beta[b] = spec.data.robin_coefficient[b](t);
  } else {
    const auto ends = robin_ends(spec);
    for (std::size_t p = 0; p < ends.size(); ++p) c.beta[ends[p]] = coef[static_cast<Index>(p)];
  }
  return c;
}

namespace {

SolutionField march(const ProblemSpec& spec, const GridFields& fields, const Vector& initial,
                    const std::function<StepConditions(std::size_t)>& conditions) {
  const auto& grid = spec.grid;
  Matrix values(static_cast<Index>(grid.dof_count()), static_cast<Index>(grid.time_count()));
  values.col(0) = initial;
  const ThetaStepper stepper(spec, fields);
  for (std::size_t n = 1; n < grid.time_count(); ++n) {
    const Index c = static_cast<Index>(n);
    values.col(c) = stepper.step(n, values.col(c - 1), conditions(n));
  }
  return {grid, std::move(values)};
}

}  // namespace

SolutionField solve_direct(const ProblemSpec& spec, const CoefficientSeries& q) {
  require_valid(spec);
  const GridFields fields(spec, true);
  const Vector initial = sample(spec.data.initial, spec.grid, 0.0);
  return march(spec, fields, initial,
               [&](std::size_t n) { return direct_conditions(spec, q.at(n), n); });
}

SolutionField solve_auxiliary(const ProblemSpec& spec, const Vector& q0) {
  return solve_direct(spec, CoefficientSeries::constant(q0, spec.grid.time_count()));
}

SolutionField solve_correction(const ProblemSpec& spec, const Vector& q0,
                               const CoefficientSeries& q_tilde, const SolutionField& v) {
  require_valid(spec);
  const auto& grid = spec.grid;
  const GridFields fields(spec, false);
  const std::size_t k = grid.interface_count();
  const auto ends = robin_ends(spec);

  auto conditions = [&](std::size_t n) {
    const double t = grid.time(n);
    const Matrix phi = basis_values(spec, t);
    const Vector increment = phi.transpose() * q_tilde.at(n);
    const Vector base = phi.transpose() * q0;
    const auto vn = v.at(n);
    StepConditions c;
    c.sigma = Vector::Zero(static_cast<Index>(k));
    c.g_plus = Vector::Zero(static_cast<Index>(k));
    if (spec.variant == Variant::interface) {
      c.sigma = base + increment;
      for (std::size_t l = 0; l < k; ++l) {
        const Index li = static_cast<Index>(l);
        const double jump_v = vn[static_cast<Index>(plus_dof(spec, l))] -
                              vn[static_cast<Index>(minus_dof(spec, l))];
        c.g_plus[li] = increment[li] * jump_v;
      }
      for (End b : ends) c.beta[b] = spec.data.robin_coefficient[b](t);
    } else {
      for (std::size_t p = 0; p < ends.size(); ++p) {
        const End b = ends[p];
        const Index pi = static_cast<Index>(p);
        const Index d = b == left_end ? 0 : vn.size() - 1;
        c.beta[b] = base[pi] + increment[pi];
        c.g[b] = -increment[pi] * vn[d];
      }
    }
    return c;
  };
  return march(spec, fields, Vector::Zero(static_cast<Index>(grid.dof_count())), conditions);
}

Vector layer_derivative(const SpaceTimeGrid& grid, const Eigen::Ref<const Vector>& u) {
  const double h = grid.spacing();
  Vector du(u.size());
  for (std::size_t k = 0; k < grid.layer_count(); ++k) {
    const Index f = static_cast<Index>(grid.layer_first_dof(k));
    const Index e = static_cast<Index>(grid.layer_last_dof(k));
    du[f] = (-3.0 * u[f] + 4.0 * u[f + 1] - u[f + 2]) / (2.0 * h);
    for (Index d = f + 1; d < e; ++d) du[d] = (u[d + 1] - u[d - 1]) / (2.0 * h);
    du[e] = (3.0 * u[e] - 4.0 * u[e - 1] + u[e - 2]) / (2.0 * h);
  }
  return du;
}

TraceSet extract_traces(const ProblemSpec& spec, const SolutionField& u, std::size_t n) {
  const auto& grid = u.grid();
  const auto col = u.at(n);
  const double h = grid.spacing();
  const double t = grid.time(n);
  const auto& a = spec.coefficients.diffusion;
  const Index last = col.size() - 1;

  TraceSet tr;
  tr.left = col[0];
  tr.right = col[last];
  tr.conormal_left = -a(0, t, 0.0) * (-3.0 * col[0] + 4.0 * col[1] - col[2]) / (2.0 * h);
  tr.conormal_right = a(grid.layer_count() - 1, t, grid.length()) *
                      (3.0 * col[last] - 4.0 * col[last - 1] + col[last - 2]) / (2.0 * h);
  for (std::size_t l = 0; l < grid.interface_count(); ++l) {
    const Index dl = static_cast<Index>(grid.left_dof(l));
    const Index dr = static_cast<Index>(grid.right_dof(l));
    const double x = grid.dof_x(static_cast<std::size_t>(dl));
    tr.minus.push_back(col[static_cast<Index>(minus_dof(spec, l))]);
    tr.plus.push_back(col[static_cast<Index>(plus_dof(spec, l))]);
    tr.flux_left.push_back(a(l, t, x) * (3.0 * col[dl] - 4.0 * col[dl - 1] + col[dl - 2]) / (2.0 * h));
    tr.flux_right.push_back(a(l + 1, t, x) * (-3.0 * col[dr] + 4.0 * col[dr + 1] - col[dr + 2]) / (2.0 * h));
  }
  return tr;
}

}  // namespace htc
