#pragma once

#include <filesystem>
#include <string>

#include "htc/forward.hpp"
#include "htc/inverse.hpp"
#include "htc/measurement.hpp"

namespace htc {

/// Shortest round-trip text for a double.
std::string format_number(double value);

/// `t,x,side,value[,exact,error]` with side C at regular nodes and L/R for
/// the two traces of an interface node.
void write_solution(const std::filesystem::path& path, const SolutionField& u,
                    const LayeredFunction& exact = {});

/// `t,psi_1,...,psi_m`.
void write_measurements(const std::filesystem::path& path, const MeasurementSet& psi);
/// Reads the format written by write_measurements. Throws ConfigError on
/// malformed input or non-uniform times.
MeasurementSet read_measurements(const std::filesystem::path& path, std::size_t smoothing_window = 11);

/// `t,q_1..q_m,det_B,overdet_res_1..overdet_res_m`.
void write_recovery(const std::filesystem::path& path, const RecoveryResult& r);
/// One `attempt iter residual ratio norm horizon` line per iteration of every attempt.
void write_iterations(const std::filesystem::path& path, const RecoveryResult& r);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace htc
