#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "htc/model.hpp"

namespace htc {

enum class StudyKind { convergence, noise, contraction };

struct StudyConfig {
  std::vector<std::pair<std::size_t, std::size_t>> ladder{{101, 100}, {201, 200}, {401, 400}};
  std::vector<double> noise{0.0, 1e-4, 1e-3};
  std::vector<double> horizons;  // contraction study; empty means T, T/2, T/4
  std::size_t workers = 1;
  std::optional<double> theta;   // convergence study overrides the solver theta
};

/// Command-line overrides applied on top of a config file.
struct Overrides {
  std::optional<std::size_t> nx, nt, refine;
  std::optional<double> theta, tol, noise;
  std::optional<std::uint64_t> seed;
};

/// Everything a run needs: the problem, the twin-experiment truth and the
/// measurement source.
struct ProblemConfig {
  std::string name;
  ProblemSpec spec;
  std::function<Vector(double)> truth;  // q_true(t); empty when unknown
  LayeredFunction exact;                // exact u(t, x); undefined when unknown
  std::filesystem::path measurements;   // external psi CSV; empty for synthesis
  std::size_t refinement = 2;
  double noise = 0.0;
  std::uint64_t seed = 0;
  StudyConfig study;

  bool has_truth() const noexcept { return static_cast<bool>(truth); }
};

/// Parses a JSON document. Relative paths resolve against `base`.
/// Throws ConfigError naming the offending field.
ProblemConfig parse_config(const std::string& text, const std::filesystem::path& base = {});
ProblemConfig load_config(const std::filesystem::path& path);

/// Applies overrides and rebuilds the grid when nx or nt change.
void apply_overrides(ProblemConfig& config, const Overrides& overrides);

}  // namespace htc
