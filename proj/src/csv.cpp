#include "htc/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "htc/error.hpp"

namespace htc {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  return out;
}

char side_tag(const SpaceTimeGrid& grid, std::size_t d) {
  for (std::size_t l = 0; l < grid.interface_count(); ++l) {
    if (grid.left_dof(l) == d) return 'L';
    if (grid.right_dof(l) == d) return 'R';
  }
  return 'C';
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_solution(const std::filesystem::path& path, const SolutionField& u, const LayeredFunction& exact) {
  const auto& grid = u.grid();
  auto out = open_out(path);
  out << "t,x,side,value";
  if (exact.defined()) out << ",exact,error";
  out << '\n';
  for (std::size_t n = 0; n < u.time_count(); ++n) {
    const double t = grid.time(n);
    for (std::size_t d = 0; d < grid.dof_count(); ++d) {
      const double x = grid.dof_x(d);
      const double value = u.values()(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n));
      out << format_number(t) << ',' << format_number(x) << ',' << side_tag(grid, d) << ','
          << format_number(value);
      if (exact.defined()) {
        const double e = exact(grid.dof_layer(d), t, x);
        out << ',' << format_number(e) << ',' << format_number(value - e);
      }
      out << '\n';
    }
  }
}

void write_measurements(const std::filesystem::path& path, const MeasurementSet& psi) {
  auto out = open_out(path);
  out << 't';
  for (std::size_t k = 0; k < psi.size(); ++k) out << ",psi_" << k + 1;
  out << '\n';
  for (std::size_t n = 0; n < psi.time_count(); ++n) {
    out << format_number(psi.times[static_cast<Eigen::Index>(n)]);
    for (std::size_t k = 0; k < psi.size(); ++k)
      out << ',' << format_number(psi.psi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n)));
    out << '\n';
  }
}

MeasurementSet read_measurements(const std::filesystem::path& path, std::size_t smoothing_window) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read measurements '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("measurements '" + path.string() + "' are empty");
  const auto header = split(line);
  if (header.size() < 2 || header[0] != "t")
    throw ConfigError("measurements header must be t,psi_1,...,psi_m");
  const std::size_t m = header.size() - 1;

  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != m + 1)
      throw ConfigError("measurements line " + std::to_string(lineno) + ": expected " +
                        std::to_string(m + 1) + " columns");
    std::vector<double> row;
    for (const auto& c : cells) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(c, &used));
        if (used != c.size()) throw std::invalid_argument(c);
      } catch (const std::exception&) {
        throw ConfigError("measurements line " + std::to_string(lineno) + ": bad number '" + c + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() < 3) throw ConfigError("measurements need at least 3 time nodes");

  Vector times(static_cast<Eigen::Index>(rows.size()));
  Matrix psi(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t n = 0; n < rows.size(); ++n) {
    times[static_cast<Eigen::Index>(n)] = rows[n][0];
    for (std::size_t k = 0; k < m; ++k)
      psi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n)) = rows[n][k + 1];
  }
  const double dt = times[1] - times[0];
  for (Eigen::Index n = 1; n < times.size(); ++n)
    if (std::abs(times[n] - times[n - 1] - dt) > 1e-9 * (1.0 + std::abs(dt)))
      throw ConfigError("measurement times must be uniformly spaced");
  return make_measurements(std::move(times), std::move(psi), Provenance::external, 0.0, 0, smoothing_window);
}

void write_recovery(const std::filesystem::path& path, const RecoveryResult& r) {
  auto out = open_out(path);
  const std::size_t m = r.q.size();
  out << 't';
  for (std::size_t i = 0; i < m; ++i) out << ",q_" << i + 1;
  out << ",det_B";
  for (std::size_t k = 0; k < static_cast<std::size_t>(r.overdetermination.rows()); ++k)
    out << ",overdet_res_" << k + 1;
  out << '\n';
  for (std::size_t n = 0; n < r.q.time_count(); ++n) {
    const auto c = static_cast<Eigen::Index>(n);
    out << format_number(r.times[c]);
    for (std::size_t i = 0; i < m; ++i) out << ',' << format_number(r.q.values(static_cast<Eigen::Index>(i), c));
    out << ',' << format_number(c < r.det.size() ? r.det[c] : std::nan(""));
    for (Eigen::Index k = 0; k < r.overdetermination.rows(); ++k)
      out << ',' << format_number(c < r.overdetermination.cols() ? r.overdetermination(k, c) : std::nan(""));
    out << '\n';
  }
}

void write_iterations(const std::filesystem::path& path, const RecoveryResult& r) {
  auto out = open_out(path);
  out << "# attempt iter residual ratio norm horizon_steps\n";
  for (std::size_t a = 0; a < r.attempts.size(); ++a)
    for (const auto& rec : r.attempts[a])
      out << a + 1 << ' ' << rec.iteration << ' ' << format_number(rec.residual) << ' '
          << format_number(rec.ratio) << ' ' << format_number(rec.norm) << ' ' << rec.horizon << '\n';
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

}  // namespace htc
