#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <functional>
#include <stdexcept>

#include "htc/forward.hpp"
#include "htc/model.hpp"

namespace htc {

enum class Provenance { synthetic, external };

/// Integral observations psi_k(t_n) with their time derivatives.
struct MeasurementSet {
  Vector times;
  Matrix psi;   // m x time_count
  Matrix dpsi;  // derivative companion, always recomputed from psi
  Provenance provenance = Provenance::external;
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::size_t smoothing_window = 11;

  std::size_t size() const noexcept { return static_cast<std::size_t>(psi.rows()); }
  std::size_t time_count() const noexcept { return static_cast<std::size_t>(psi.cols()); }
  double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }

  /// Recomputes dpsi from psi; smooths first when noise > 0.
  void refresh_derivatives();
  /// First `count` time nodes only.
  MeasurementSet truncated(std::size_t count) const;
};

MeasurementSet make_measurements(Vector times, Matrix psi, Provenance provenance,
                                 double noise = 0.0, std::uint64_t seed = 0,
                                 std::size_t smoothing_window = 11);

/// Composite trapezoid weights per dof: each layer is integrated separately
/// from its own traces.
Vector quadrature_weights(const SpaceTimeGrid& grid);

/// Weight function sampled at every dof, one-sided at interfaces.
Vector weight_samples(const SpaceTimeGrid& grid, const LayeredFunction& weight);

double integrate_weight(const SolutionField& u, const Eigen::Ref<const Vector>& weight, std::size_t n);
double integrate_weight(const SolutionField& u, const LayeredFunction& weight, std::size_t n);

/// int u phi_k dx for every weight and time node (m x time_count).
Matrix observe(const ProblemSpec& spec, const SolutionField& u);

/// Twin-experiment data: solves on a grid refined by `refinement` in both
/// spacings, observes at the coarse time nodes, and optionally applies
/// multiplicative uniform noise psi (1 + eta U[-1, 1]) from a seeded generator.
MeasurementSet synthesize(const ProblemSpec& spec, const std::function<Vector(double)>& q_true,
                          std::size_t refinement = 2, double noise = 0.0, std::uint64_t seed = 0);

/// Derivative of a uniformly sampled series: central differences inside,
/// second-order one-sided differences at both ends.
template <typename Derived>
Vector differentiate_series(const Eigen::MatrixBase<Derived>& psi, double dt) {
  const Eigen::Index n = psi.size();
  if (n < 3) throw std::invalid_argument("series too short to differentiate (need >= 3 samples)");
  Vector d(n);
  d[0] = (-3.0 * psi[0] + 4.0 * psi[1] - psi[2]) / (2.0 * dt);
  for (Eigen::Index i = 1; i + 1 < n; ++i) d[i] = (psi[i + 1] - psi[i - 1]) / (2.0 * dt);
  d[n - 1] = (3.0 * psi[n - 1] - 4.0 * psi[n - 2] + psi[n - 3]) / (2.0 * dt);
  return d;
}

/// Local least-squares quadratic smoothing over a sliding window of
/// `window` samples (shifted inward near the ends).
template <typename Derived>
Vector smooth_series(const Eigen::MatrixBase<Derived>& psi, std::size_t window) {
  const Eigen::Index n = psi.size();
  Eigen::Index w = static_cast<Eigen::Index>(window);
  if (w > n) w = n;
  if (w < 3) return psi;
  Vector out(n);
  Matrix vander(w, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index lo = std::clamp<Eigen::Index>(i - w / 2, 0, n - w);
    for (Eigen::Index j = 0; j < w; ++j) {
      const double s = static_cast<double>(lo + j - i);
      vander(j, 0) = 1.0;
      vander(j, 1) = s;
      vander(j, 2) = s * s;
    }
    const Vector c = vander.colPivHouseholderQr().solve(psi.segment(lo, w).eval());
    out[i] = c[0];
  }
  return out;
}

/// Running integral of a uniformly sampled series, starting from zero.
template <typename Derived>
Vector cumulative_trapezoid(const Eigen::MatrixBase<Derived>& f, double dt) {
  Vector out(f.size());
  if (f.size() == 0) return out;
  out[0] = 0.0;
  for (Eigen::Index i = 1; i < f.size(); ++i) out[i] = out[i - 1] + 0.5 * dt * (f[i] + f[i - 1]);
  return out;
}

}  // namespace htc
