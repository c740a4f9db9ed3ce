#include "htc/study.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

#include "htc/csv.hpp"
#include "htc/error.hpp"

namespace htc {

namespace {

constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

RungStatus capture(const std::exception& e) { return {exit_status(e), e.what()}; }

double max_error_to_exact(const SolutionField& u, const LayeredFunction& exact) {
  const auto& g = u.grid();
  double err = 0.0;
  for (std::size_t n = 0; n < u.time_count(); ++n)
    for (std::size_t d = 0; d < g.dof_count(); ++d)
      err = std::max(err, std::abs(u.values()(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n)) -
                                   exact(g.dof_layer(d), g.time(n), g.dof_x(d))));
  return err;
}

/// Max difference between a coarse field and a nested finer one on the coarse nodes.
double nested_difference(const SolutionField& coarse, const SolutionField& fine) {
  const auto& gc = coarse.grid();
  const auto& gf = fine.grid();
  const std::size_t nc = gc.node_count() - 1, nf = gf.node_count() - 1;
  const std::size_t sc = gc.step_count(), sf = gf.step_count();
  if (nc == 0 || sc == 0 || nf % nc != 0 || sf % sc != 0)
    throw ConfigError("convergence ladder without an exact solution must be nested (nx - 1 and nt divide)");
  const std::size_t rx = nf / nc, rt = sf / sc;
  // First and second fine dof at every fine node; the second differs only at interfaces.
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> fine_dof;
  for (std::size_t d = 0; d < gf.dof_count(); ++d) {
    auto [it, fresh] = fine_dof.try_emplace(gf.dof_node(d), d, d);
    if (!fresh) it->second.second = d;
  }
  double diff = 0.0;
  for (std::size_t d = 0; d < gc.dof_count(); ++d) {
    const std::size_t node = gc.dof_node(d);
    const bool second = d > 0 && gc.dof_node(d - 1) == node;
    const auto& pair = fine_dof.at(node * rx);
    const std::size_t df = second ? pair.second : pair.first;
    for (std::size_t n = 0; n < coarse.time_count(); ++n)
      diff = std::max(diff, std::abs(coarse.values()(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n)) -
                                     fine.values()(static_cast<Eigen::Index>(df), static_cast<Eigen::Index>(n * rt))));
  }
  return diff;
}

}  // namespace

int exit_status(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    switch (err->kind()) {
      case ErrorKind::config: return 2;
      case ErrorKind::forward: return 3;
      case ErrorKind::consistency: return 4;
      case ErrorKind::degeneracy: return 5;
      case ErrorKind::non_contraction: return 6;
    }
  }
  return 1;
}

SolutionField forward_solution(const ProblemConfig& config) {
  if (!config.has_truth()) throw ConfigError("missing config field 'truth.q' (needed for a forward solve)");
  require_valid(config.spec);
  return solve_direct(config.spec, CoefficientSeries::sampled(config.truth, config.spec.grid));
}

MeasurementSet synthesize_config(const ProblemConfig& config) {
  if (!config.has_truth()) throw ConfigError("missing config field 'truth.q' (needed to synthesize data)");
  require_valid(config.spec);
  return synthesize(config.spec, config.truth, config.refinement, config.noise, config.seed);
}

MeasurementSet load_or_synthesize(const ProblemConfig& config) {
  if (config.measurements.empty()) return synthesize_config(config);
  MeasurementSet psi = read_measurements(config.measurements, config.spec.options.smoothing_window);
  if (psi.size() != config.spec.weights.size())
    throw ConfigError("measurements carry " + std::to_string(psi.size()) + " series, config defines " +
                      std::to_string(config.spec.weights.size()) + " weights");
  if (psi.time_count() != config.spec.grid.time_count() ||
      std::abs(psi.dt() - config.spec.grid.dt()) > 1e-9 * (1.0 + config.spec.grid.dt()))
    throw ConfigError("measurement times do not match the config time grid");
  return psi;
}

double relative_recovery_error(const RecoveryResult& r, const std::function<Vector(double)>& truth) {
  double err = 0.0, scale = 0.0;
  for (std::size_t n = 0; n < r.q.time_count(); ++n) {
    const Vector q = truth(r.times[static_cast<Eigen::Index>(n)]);
    err = std::max(err, (r.q.at(n) - q).cwiseAbs().maxCoeff());
    scale = std::max(scale, q.cwiseAbs().maxCoeff());
  }
  return scale > 0.0 ? err / scale : err;
}

void run_parallel(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& task) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) task(i);
    });
  for (auto& t : pool) t.join();
}

namespace {

using Ladder = std::vector<std::pair<std::size_t, std::size_t>>;

std::vector<ConvergenceRung> run_ladder(const ProblemConfig& config, const Ladder& ladder, double theta,
                                        bool temporal) {
  const bool richardson = !config.exact.defined();
  std::vector<SolutionField> fields(ladder.size());
  std::vector<ConvergenceRung> rungs(ladder.size());
  run_parallel(ladder.size(), config.study.workers, [&](std::size_t r) {
    auto& rung = rungs[r];
    rung.nx = ladder[r].first;
    rung.nt = ladder[r].second;
    try {
      ProblemConfig c = config;
      c.spec = config.spec.with_grid(rung.nx, rung.nt);
      c.spec.options.theta = theta;
      rung.h = c.spec.grid.spacing();
      rung.dt = c.spec.grid.dt();
      fields[r] = forward_solution(c);
      if (!richardson) rung.error = max_error_to_exact(fields[r], config.exact);
    } catch (const std::exception& e) {
      rung.status = capture(e);
    }
  });

  for (std::size_t r = 0; r < ladder.size(); ++r) {
    auto& rung = rungs[r];
    rung.order = nan_value;
    if (!richardson || rung.status.status != 0) continue;
    if (r + 1 == ladder.size() || rungs[r + 1].status.status != 0) {
      rung.error = nan_value;
      continue;
    }
    try {
      rung.error = nested_difference(fields[r], fields[r + 1]);
    } catch (const std::exception& e) {
      rung.status = capture(e);
    }
  }
  for (std::size_t r = 1; r < ladder.size(); ++r) {
    const auto& a = rungs[r - 1];
    auto& b = rungs[r];
    const double ratio = temporal ? a.dt / b.dt : a.h / b.h;
    if (a.status.status == 0 && b.status.status == 0 && std::isfinite(a.error) && std::isfinite(b.error) &&
        b.error > 0.0 && ratio > 1.0)
      b.order = std::log(a.error / b.error) / std::log(ratio);
  }
  return rungs;
}

}  // namespace

ConvergenceStudy convergence_study(const ProblemConfig& config) {
  ConvergenceStudy study;
  study.richardson = !config.exact.defined();
  study.theta = config.study.theta.value_or(config.spec.options.theta);
  const Ladder& ladder = config.study.ladder;
  if (ladder.size() < 3) throw ConfigError("config field 'study.ladder': need at least 3 rungs");

  std::size_t nx_max = 0, nt_max = 0;
  for (const auto& [nx, nt] : ladder) {
    nx_max = std::max(nx_max, nx);
    nt_max = std::max(nt_max, nt);
  }
  Ladder spatial, temporal;
  for (const auto& [nx, nt] : ladder) {
    spatial.emplace_back(nx, nt_max);
    temporal.emplace_back(nx_max, nt);
  }
  study.joint = run_ladder(config, ladder, study.theta, false);
  study.spatial = run_ladder(config, spatial, study.theta, false);
  study.temporal = run_ladder(config, temporal, study.theta, true);
  return study;
}

std::vector<NoiseRung> noise_study(const ProblemConfig& config) {
  if (!config.has_truth()) throw ConfigError("missing config field 'truth.q' (needed for a noise study)");
  require_valid(config.spec);
  std::vector<NoiseRung> rungs(config.study.noise.size());
  run_parallel(rungs.size(), config.study.workers, [&](std::size_t i) {
    auto& rung = rungs[i];
    rung.eta = config.study.noise[i];
    try {
      ProblemConfig c = config;
      c.noise = rung.eta;
      const RecoveryResult r = picard_recover(c.spec, synthesize_config(c));
      rung.error = relative_recovery_error(r, config.truth);
      rung.tau0 = r.tau0;
      rung.iterations = r.iterations;
    } catch (const std::exception& e) {
      rung.status = capture(e);
    }
  });
  return rungs;
}

std::vector<ContractionRung> contraction_study(const ProblemConfig& config) {
  require_valid(config.spec);
  const double T = config.spec.grid.horizon();
  std::vector<double> horizons = config.study.horizons;
  if (horizons.empty()) horizons = {T, T / 2, T / 4};
  const MeasurementSet psi = load_or_synthesize(config);

  std::vector<ContractionRung> rungs(horizons.size());
  run_parallel(rungs.size(), config.study.workers, [&](std::size_t i) {
    auto& rung = rungs[i];
    rung.horizon = horizons[i];
    try {
      const double steps = std::round(horizons[i] / config.spec.grid.dt());
      if (!(horizons[i] > 0.0) || steps < 1.0 || steps > static_cast<double>(config.spec.grid.step_count()))
        throw ConfigError("config field 'study.horizons': horizon outside (0, T]");
      const auto n = static_cast<std::size_t>(steps);
      const RecoveryResult r = picard_recover(config.spec.truncated(n), psi.truncated(n + 1));
      rung.tau0 = r.tau0;
      rung.iterations = r.iterations;
      rung.max_ratio = r.max_ratio(2);
      rung.inside_ball = r.inside_ball;
      for (std::size_t k = 1; k < r.history.size(); ++k) rung.ratios.push_back(r.history[k].ratio);
    } catch (const std::exception& e) {
      rung.status = capture(e);
    }
  });
  return rungs;
}

}  // namespace htc
