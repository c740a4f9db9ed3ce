#pragma once

#include <exception>
#include <functional>
#include <string>
#include <vector>

#include "htc/config.hpp"
#include "htc/forward.hpp"
#include "htc/inverse.hpp"

namespace htc {

/// Process exit status for an exception: 2 config, 3 forward, 4 consistency,
/// 5 degeneracy, 6 non-contraction, 1 anything else.
int exit_status(const std::exception& e);

/// Forward solution of a config with its known coefficient. Throws
/// ConfigError when the config has no truth.
SolutionField forward_solution(const ProblemConfig& config);

/// Twin-experiment measurements at the config grid.
MeasurementSet synthesize_config(const ProblemConfig& config);

/// Measurements from the config CSV, or synthesized when none is given.
MeasurementSet load_or_synthesize(const ProblemConfig& config);

/// max_n |q_rec - q_true| / max_n |q_true| over the recovered nodes.
double relative_recovery_error(const RecoveryResult& r, const std::function<Vector(double)>& truth);

/// Runs task(i) for i < count on up to `workers` threads.
void run_parallel(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& task);

struct RungStatus {
  int status = 0;
  std::string message;
};

struct ConvergenceRung {
  std::size_t nx = 0, nt = 0;
  double h = 0.0, dt = 0.0;
  double error = 0.0;  // against the exact solution, or to the next rung
  double order = 0.0;  // NaN where undefined
  RungStatus status;
};

struct ConvergenceStudy {
  bool richardson = false;  // no exact solution: errors are differences of successive rungs
  double theta = 1.0;
  std::vector<ConvergenceRung> joint;     // the ladder as given
  std::vector<ConvergenceRung> spatial;   // ladder nx at the finest nt
  std::vector<ConvergenceRung> temporal;  // ladder nt at the finest nx
};

/// Max-norm forward errors over every dof and time node. Without an exact
/// solution the ladder must be nested (spacings halved) and rung r is
/// compared with rung r + 1 on its own nodes. Orders use h for the joint and
/// spatial series and dt for the temporal one.
ConvergenceStudy convergence_study(const ProblemConfig& config);

struct NoiseRung {
  double eta = 0.0;
  double error = 0.0;  // relative recovery error
  double tau0 = 0.0;
  std::size_t iterations = 0;
  RungStatus status;
};

std::vector<NoiseRung> noise_study(const ProblemConfig& config);

struct ContractionRung {
  double horizon = 0.0;
  double tau0 = 0.0;
  std::size_t iterations = 0;
  double max_ratio = 0.0;  // k >= 2
  bool inside_ball = false;
  std::vector<double> ratios;  // accepted attempt, index k - 1 for k >= 1
  RungStatus status;
};

std::vector<ContractionRung> contraction_study(const ProblemConfig& config);

}  // namespace htc
