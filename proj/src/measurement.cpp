#include "htc/measurement.hpp"

#include <random>

namespace htc {

using Index = Eigen::Index;

void MeasurementSet::refresh_derivatives() {
  dpsi.resize(psi.rows(), psi.cols());
  const double step = dt();
  for (Index k = 0; k < psi.rows(); ++k) {
    const Vector row = psi.row(k).transpose();
    dpsi.row(k) = noise > 0.0 ? differentiate_series(smooth_series(row, smoothing_window), step).transpose()
                              : differentiate_series(row, step).transpose();
  }
}

MeasurementSet MeasurementSet::truncated(std::size_t count) const {
  const Index c = static_cast<Index>(count);
  MeasurementSet out = *this;
  out.times = times.head(c);
  out.psi = psi.leftCols(c);
  out.refresh_derivatives();
  return out;
}

MeasurementSet make_measurements(Vector times, Matrix psi, Provenance provenance, double noise,
                                 std::uint64_t seed, std::size_t smoothing_window) {
  MeasurementSet m;
  m.times = std::move(times);
  m.psi = std::move(psi);
  m.provenance = provenance;
  m.noise = noise;
  m.seed = seed;
  m.smoothing_window = smoothing_window;
  m.refresh_derivatives();
  return m;
}

Vector quadrature_weights(const SpaceTimeGrid& grid) {
  Vector w = Vector::Zero(static_cast<Index>(grid.dof_count()));
  const double h = grid.spacing();
  for (std::size_t k = 0; k < grid.layer_count(); ++k) {
    const Index f = static_cast<Index>(grid.layer_first_dof(k));
    const Index e = static_cast<Index>(grid.layer_last_dof(k));
    for (Index d = f; d < e; ++d) {
      w[d] += 0.5 * h;
      w[d + 1] += 0.5 * h;
    }
  }
  return w;
}

Vector weight_samples(const SpaceTimeGrid& grid, const LayeredFunction& weight) {
  return sample(weight, grid, 0.0);
}

double integrate_weight(const SolutionField& u, const Eigen::Ref<const Vector>& weight, std::size_t n) {
  return quadrature_weights(u.grid()).cwiseProduct(weight).dot(u.at(n));
}

double integrate_weight(const SolutionField& u, const LayeredFunction& weight, std::size_t n) {
  return integrate_weight(u, weight_samples(u.grid(), weight), n);
}

Matrix observe(const ProblemSpec& spec, const SolutionField& u) {
  const auto& grid = u.grid();
  const Vector quad = quadrature_weights(grid);
  Matrix kernel(static_cast<Index>(spec.m()), static_cast<Index>(grid.dof_count()));
  for (std::size_t k = 0; k < spec.m(); ++k)
    kernel.row(static_cast<Index>(k)) =
        quad.cwiseProduct(weight_samples(grid, spec.weights.functions[k])).transpose();
  return kernel * u.values();
}

MeasurementSet synthesize(const ProblemSpec& spec, const std::function<Vector(double)>& q_true,
                          std::size_t refinement, double noise, std::uint64_t seed) {
  const std::size_t r = refinement == 0 ? 1 : refinement;
  const ProblemSpec fine = spec.refined(r);
  const SolutionField u = solve_direct(fine, CoefficientSeries::sampled(q_true, fine.grid));
  const Matrix fine_psi = observe(fine, u);

  const std::size_t count = spec.grid.time_count();
  Matrix psi(fine_psi.rows(), static_cast<Index>(count));
  Vector times(static_cast<Index>(count));
  for (std::size_t n = 0; n < count; ++n) {
    psi.col(static_cast<Index>(n)) = fine_psi.col(static_cast<Index>(n * r));
    times[static_cast<Index>(n)] = spec.grid.time(n);
  }
  if (noise > 0.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (Index n = 0; n < psi.cols(); ++n)
      for (Index k = 0; k < psi.rows(); ++k) psi(k, n) *= 1.0 + noise * unit(rng);
  }
  return make_measurements(std::move(times), std::move(psi), Provenance::synthetic, noise, seed,
                           spec.options.smoothing_window);
}

}  // namespace htc
