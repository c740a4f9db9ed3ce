#pragma once

// Problem definitions shared by the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "htc/forward.hpp"
#include "htc/model.hpp"

namespace htc::testing {

inline SpaceTimeFn constant(double c) {
  return [c](double, double) { return c; };
}
inline TimeFn constant_t(double c) {
  return [c](double) { return c; };
}

/// C3 step from 0 to 1 on [0, 1], flat at both ends.
inline double smoothstep(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * x * x * (35.0 - 84.0 * x + 70.0 * x * x - 20.0 * x * x * x);
}

inline ProblemSpec base_spec(Variant variant, SlabGeometry geo, std::size_t nx, std::size_t nt, double horizon) {
  ProblemSpec s;
  s.variant = variant;
  s.geometry = std::move(geo);
  s.grid = SpaceTimeGrid::uniform(s.geometry, nx, nt, horizon);
  s.coefficients.diffusion = constant(1.0);
  s.coefficients.drift = constant(0.0);
  s.coefficients.reaction = constant(0.0);
  s.data.source = constant(0.0);
  s.data.boundary = {constant_t(0.0), constant_t(0.0)};
  s.data.interface_flux.assign(s.geometry.interface_count(), constant_t(0.0));
  return s;
}

/// Steady two-layer profile on (0, 2): u = x left of 1, x + 1 right of 1,
/// flux 1 and unit jump, consistent with sigma = 1.
inline ProblemSpec steady_interface(std::size_t nx = 21, std::size_t nt = 10, double horizon = 0.5) {
  SlabGeometry geo;
  geo.length = 2.0;
  geo.interfaces = {1.0};
  ProblemSpec s = base_spec(Variant::interface, geo, nx, nt, horizon);
  s.data.initial = LayeredFunction(std::vector<SpaceTimeFn>{[](double, double x) { return x; },
                                                           [](double, double x) { return x + 1.0; }});
  s.data.boundary = {constant_t(0.0), constant_t(3.0)};
  s.basis.functions = {constant(1.0)};
  s.weights.functions = {LayeredFunction(std::vector<SpaceTimeFn>{
      constant(0.0), [](double, double x) { return 2.0 - x; }})};
  return s;
}

/// Interface twin experiment: sigma(t) = 1 + 0.25 sin 2t on (0, 2) with one interface at 1.
/// The weight has slope sigma(0) * [phi] on both sides of the interface.
inline ProblemSpec case_a(std::size_t nx = 401, std::size_t nt = 400) {
  ProblemSpec s = steady_interface(nx, nt, 0.5);
  s.weights.functions = {LayeredFunction(std::vector<SpaceTimeFn>{
      [](double, double x) { return x; },
      [](double, double x) { return 2.0 + (x - 1.0) - 3.0 * std::pow(x - 1.0, 4); }})};
  return s;
}

inline Vector case_a_q(double t) {
  Vector q(1);
  q << 1.0 + 0.25 * std::sin(2.0 * t);
  return q;
}

/// Robin twin experiment on (0, 1): beta = q1 at x = 0, q2 at x = 1.
/// Each weight meets the homogeneous Robin condition with beta(0) at both ends.
inline ProblemSpec case_b(std::size_t nx = 401, std::size_t nt = 400) {
  SlabGeometry geo;
  geo.length = 1.0;
  geo.outer = {BoundaryKind::robin, BoundaryKind::robin};
  ProblemSpec s = base_spec(Variant::robin, geo, nx, nt, 0.5);
  s.data.initial = LayeredFunction([](double, double x) { return 1.0 + x; });
  s.data.boundary = {constant_t(0.0), constant_t(3.0)};
  s.basis.functions = {[](double, double x) { return 1.0 - x; }, [](double, double x) { return x; }};
  s.weights.functions = {
      LayeredFunction([](double, double x) { return (1.0 + x) * (1.0 - smoothstep(x)); }),
      LayeredFunction([](double, double x) { return (2.0 - x) * smoothstep(x); })};
  return s;
}

inline Vector case_b_q(double t) {
  Vector q(2);
  q << 1.0 + 0.5 * t, 1.0 - 0.25 * t;
  return q;
}

/// Three layers on (0, 2) with interfaces at 0.5 and 1.5, one coefficient each.
inline ProblemSpec case_multi(std::size_t nx = 401, std::size_t nt = 400) {
  SlabGeometry geo;
  geo.length = 2.0;
  geo.interfaces = {0.5, 1.5};
  ProblemSpec s = base_spec(Variant::interface, geo, nx, nt, 0.5);
  s.data.initial = LayeredFunction(std::vector<SpaceTimeFn>{[](double, double x) { return x; },
                                                           [](double, double x) { return x + 1.0; },
                                                           [](double, double x) { return x + 2.0; }});
  s.data.boundary = {constant_t(0.0), constant_t(4.0)};
  s.basis.functions = {[](double, double x) { return 1.5 - x; }, [](double, double x) { return x - 0.5; }};
  s.weights.functions = {
      LayeredFunction(std::vector<SpaceTimeFn>{
          [](double, double x) { return x; },
          [](double, double x) { return (1.0 + x) * (1.0 - smoothstep(x - 0.5)); }, constant(0.0)}),
      LayeredFunction(std::vector<SpaceTimeFn>{
          constant(0.0), [](double, double x) { return (3.0 - x) * (1.0 - smoothstep(1.5 - x)); },
          [](double, double x) { return 2.0 - x; }})};
  return s;
}

inline Vector case_multi_q(double t) {
  Vector q(2);
  q << 1.0 + 0.25 * std::sin(2.0 * t), 1.0 + 0.5 * t;
  return q;
}

/// Robin ends on (0, 1) with exact solution e^{-t} (1 + sin pi x) and the case-B coefficients.
inline double manufactured_exact(double t, double x) {
  return std::exp(-t) * (1.0 + std::sin(std::numbers::pi * x));
}

inline ProblemSpec manufactured(std::size_t nx, std::size_t nt, double theta = 1.0, double horizon = 0.5) {
  constexpr double pi = std::numbers::pi;
  ProblemSpec s = case_b(nx, nt);
  s.grid = SpaceTimeGrid::uniform(s.geometry, nx, nt, horizon);
  s.options.theta = theta;
  s.data.initial = LayeredFunction([](double, double x) { return manufactured_exact(0.0, x); });
  s.data.source = LayeredFunction([](double t, double x) {
    return std::exp(-t) * ((pi * pi - 1.0) * std::sin(pi * x) - 1.0);
  });
  // -u_x(0) + q1 u(0) and u_x(1) + q2 u(1)
  s.data.boundary = {[](double t) { return std::exp(-t) * (1.0 + 0.5 * t - pi); },
                     [](double t) { return std::exp(-t) * (1.0 - 0.25 * t - pi); }};
  return s;
}

/// Random spec with nonnegative data: piecewise constant a > 0, a0 >= 0,
/// f >= 0, u0 >= 0, sigma >= 0, g+ = 0 and nonnegative outer data.
struct RandomSpec {
  ProblemSpec spec;
  CoefficientSeries q;
};

inline RandomSpec random_nonnegative(std::mt19937& rng, std::size_t nx = 31, std::size_t nt = 10) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> layers_dist(1, 3);
  const int layers = layers_dist(rng);
  SlabGeometry geo;
  geo.length = 1.5;
  for (int l = 1; l < layers; ++l) geo.interfaces.push_back(geo.length * l / layers);
  const bool robin = u(rng) < 0.5;
  if (robin) geo.outer = {BoundaryKind::robin, BoundaryKind::dirichlet};
  ProblemSpec s = base_spec(layers > 1 ? Variant::interface : Variant::robin, geo, nx, nt, 1.0);
  if (layers == 1) {
    s.geometry.outer = {BoundaryKind::robin, BoundaryKind::robin};
    s.grid = SpaceTimeGrid::uniform(s.geometry, nx, nt, 1.0);
  }
  std::vector<SpaceTimeFn> a, a0, f, u0;
  for (int l = 0; l < layers; ++l) {
    a.push_back(constant(0.2 + 2.0 * u(rng)));
    a0.push_back(constant(u(rng)));
    f.push_back(constant(u(rng) < 0.5 ? 0.0 : u(rng)));
    const double c = u(rng), k = 1.0 + 5.0 * u(rng);
    u0.push_back([c, k](double, double x) { return c * (1.0 + std::cos(k * x)); });
  }
  s.coefficients.diffusion = LayeredFunction(a);
  s.coefficients.reaction = LayeredFunction(a0);
  s.data.source = LayeredFunction(f);
  s.data.initial = LayeredFunction(u0);
  const double g0 = u(rng), g1 = u(rng);
  s.data.boundary = {constant_t(g0), constant_t(g1)};
  s.data.robin_coefficient = {constant_t(u(rng)), constant_t(u(rng))};
  const std::size_t m = layers > 1 ? 1 : 2;
  if (layers > 1) {
    s.basis.functions = {constant(1.0)};
  } else {
    s.basis.functions = {[](double, double x) { return 1.0 - x / 1.5; }, [](double, double x) { return x / 1.5; }};
  }
  s.weights.functions.assign(m, LayeredFunction(constant(0.0)));
  s.options.dirichlet_conormal = DirichletConormal::stencil;
  Vector q(static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < q.size(); ++i) q[i] = 3.0 * u(rng);
  return {s, CoefficientSeries::constant(q, s.grid.time_count())};
}

}  // namespace htc::testing
