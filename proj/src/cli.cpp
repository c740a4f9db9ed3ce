#include "htc/cli.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "htc/config.hpp"
#include "htc/csv.hpp"
#include "htc/error.hpp"
#include "htc/study.hpp"

namespace htc::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::string out = ".";
  std::string study;
  Overrides overrides;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "problem config (JSON)")->required();
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--nx", o.overrides.nx, "spatial nodes");
  sub->add_option("--nt", o.overrides.nt, "time steps");
  sub->add_option("--theta", o.overrides.theta, "theta-scheme weight in [0.5, 1]");
  sub->add_option("--tol", o.overrides.tol, "fixed-point tolerance");
  sub->add_option("--noise", o.overrides.noise, "relative measurement noise");
  sub->add_option("--refine", o.overrides.refine, "synthesis grid refinement");
  sub->add_option("--seed", o.overrides.seed, "noise seed");
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::string grid_line(const ProblemConfig& c) {
  const auto& g = c.spec.grid;
  std::ostringstream os;
  os << "grid: nx=" << g.node_count() << " nt=" << g.step_count() << " T=" << num(g.horizon())
     << " h=" << num(g.spacing()) << " dt=" << num(g.dt()) << " theta=" << num(c.spec.options.theta) << "\n";
  return os.str();
}

std::string forward_summary(const ProblemConfig& c, const SolutionField& u) {
  const auto& spec = c.spec;
  const Vector quad = quadrature_weights(spec.grid);
  std::ostringstream os;
  os << "forward: " << c.name << "\n" << grid_line(c);
  const std::size_t last = u.time_count() - 1;
  const TraceSet fin = extract_traces(spec, u, last);
  os << "final traces (t=" << num(spec.grid.time(last)) << "): u(0)=" << num(fin.left)
     << " u(L)=" << num(fin.right) << "\n";
  for (std::size_t l = 0; l < fin.minus.size(); ++l)
    os << "  interface " << l + 1 << ": u-=" << num(fin.minus[l]) << " u+=" << num(fin.plus[l])
       << " jump=" << num(fin.jump(l)) << " flux=" << num(fin.flux_left[l]) << "\n";
  if (c.exact.defined()) {
    double err = 0.0;
    for (std::size_t n = 0; n <= last; ++n)
      for (std::size_t d = 0; d < spec.grid.dof_count(); ++d)
        err = std::max(err, std::abs(u.values()(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n)) -
                                     c.exact(spec.grid.dof_layer(d), spec.grid.time(n), spec.grid.dof_x(d))));
    os << "max error vs exact: " << num(err) << "\n";
  }
  os << "\n# n t u(0) u(L)";
  for (std::size_t l = 0; l < fin.minus.size(); ++l) os << " u-_" << l + 1 << " u+_" << l + 1;
  os << " int_u2\n";
  for (std::size_t n = 0; n <= last; ++n) {
    const TraceSet tr = extract_traces(spec, u, n);
    os << n << ' ' << format_number(spec.grid.time(n)) << ' ' << format_number(tr.left) << ' '
       << format_number(tr.right);
    for (std::size_t l = 0; l < tr.minus.size(); ++l)
      os << ' ' << format_number(tr.minus[l]) << ' ' << format_number(tr.plus[l]);
    os << ' ' << format_number(quad.dot(u.at(n).cwiseAbs2())) << '\n';
  }
  return os.str();
}

std::string recovery_summary(const ProblemConfig& c, const MeasurementSet& psi, const RecoveryResult& r) {
  std::ostringstream os;
  os << "invert: " << c.name << "\n" << grid_line(c);
  os << "measurements: " << (psi.provenance == Provenance::synthetic ? "synthetic" : "external");
  if (psi.provenance == Provenance::synthetic)
    os << " refine=" << c.refinement << " noise=" << num(psi.noise) << " seed=" << psi.seed;
  os << "\n";
  os << "q(0):";
  for (Eigen::Index i = 0; i < r.q0.size(); ++i) os << ' ' << num(r.q0[i]);
  os << "\n|det B0|=" << num(std::abs(r.det[0])) << " delta1=" << num(r.delta1) << "\n";
  os << "tau0=" << num(r.tau0) << " (" << r.horizon_steps << " steps, " << r.attempts.size()
     << " attempt" << (r.attempts.size() == 1 ? "" : "s") << ")\n";
  os << "iterations=" << r.iterations << " converged=" << (r.converged ? "yes" : "no")
     << " max ratio (k>=2)=" << num(r.max_ratio(2)) << "\n";
  os << "ball: |g0|=" << num(r.g0_norm) << " radius=" << num(r.ball_radius)
     << " inside=" << (r.inside_ball ? "yes" : "no") << "\n";
  os << "max overdetermination residual=" << num(r.max_overdetermination()) << "\n";
  if (c.has_truth()) os << "max relative recovery error=" << num(relative_recovery_error(r, c.truth)) << "\n";
  return os.str();
}

std::string status_text(const RungStatus& s) {
  return s.status == 0 ? "ok" : "status " + std::to_string(s.status) + ": " + s.message;
}

int first_failure(const std::vector<RungStatus>& statuses) {
  for (const auto& s : statuses)
    if (s.status != 0) return s.status;
  return 0;
}

int run_study(const ProblemConfig& c, const std::string& kind, const fs::path& out, std::ostream& log) {
  std::ostringstream text;
  std::vector<RungStatus> statuses;
  if (kind == "convergence") {
    const ConvergenceStudy s = convergence_study(c);
    std::ostringstream csv;
    csv << "series,nx,nt,h,dt,error,order,status\n";
    text << "convergence study: " << c.name << " theta=" << num(s.theta)
         << (s.richardson ? " (differences of successive rungs)" : " (error against exact solution)") << "\n";
    const std::pair<const char*, const std::vector<ConvergenceRung>*> series[] = {
        {"joint", &s.joint}, {"spatial", &s.spatial}, {"temporal", &s.temporal}};
    for (const auto& [name, rungs] : series) {
      text << name << ": nx nt error order status\n";
      for (const auto& r : *rungs) {
        csv << name << ',' << r.nx << ',' << r.nt << ',' << format_number(r.h) << ',' << format_number(r.dt)
            << ',' << format_number(r.error) << ',' << format_number(r.order) << ',' << r.status.status << '\n';
        text << "  " << r.nx << ' ' << r.nt << ' ' << num(r.error) << ' ' << num(r.order) << ' '
             << status_text(r.status) << '\n';
        statuses.push_back(r.status);
      }
    }
    write_text(out / "study_convergence.csv", csv.str());
  } else if (kind == "noise") {
    const auto rungs = noise_study(c);
    std::ostringstream csv;
    csv << "eta,error,tau0,iterations,status\n";
    text << "noise study: " << c.name << " seed=" << c.seed << "\neta error tau0 iterations status\n";
    bool monotone = true;
    for (std::size_t i = 0; i < rungs.size(); ++i) {
      const auto& r = rungs[i];
      csv << format_number(r.eta) << ',' << format_number(r.error) << ',' << format_number(r.tau0) << ','
          << r.iterations << ',' << r.status.status << '\n';
      text << num(r.eta) << ' ' << num(r.error) << ' ' << num(r.tau0) << ' ' << r.iterations << ' '
           << status_text(r.status) << '\n';
      if (i > 0 && r.error < rungs[i - 1].error) monotone = false;
      statuses.push_back(r.status);
    }
    text << "error monotone in eta: " << (monotone ? "yes" : "no") << "\n";
    write_text(out / "study_noise.csv", csv.str());
  } else {
    const auto rungs = contraction_study(c);
    std::size_t rows = 0;
    for (const auto& r : rungs) rows = std::max(rows, r.ratios.size());
    std::ostringstream csv;
    csv << 'k';
    for (const auto& r : rungs) csv << ",T=" << format_number(r.horizon);
    csv << '\n';
    for (std::size_t k = 0; k < rows; ++k) {
      csv << k + 1;
      for (const auto& r : rungs) csv << ',' << (k < r.ratios.size() ? format_number(r.ratios[k]) : "");
      csv << '\n';
    }
    text << "contraction study: " << c.name << "\nhorizon tau0 iterations max_ratio(k>=2) inside_ball status\n";
    for (const auto& r : rungs) {
      text << num(r.horizon) << ' ' << num(r.tau0) << ' ' << r.iterations << ' ' << num(r.max_ratio) << ' '
           << (r.inside_ball ? "yes" : "no") << ' ' << status_text(r.status) << '\n';
      statuses.push_back(r.status);
    }
    write_text(out / "study_contraction.csv", csv.str());
  }
  write_text(out / ("study_" + kind + ".txt"), text.str());
  log << text.str();
  return first_failure(statuses);
}

int execute(const std::string& command, const Options& o, std::ostream& out, std::ostream& err) {
  ProblemConfig c = load_config(o.config);
  apply_overrides(c, o.overrides);
  require_valid(c.spec);
  const fs::path dir = o.out;

  if (command == "forward") {
    const SolutionField u = forward_solution(c);
    fs::create_directories(dir);
    write_solution(dir / "solution.csv", u, c.exact);
    const std::string summary = forward_summary(c, u);
    write_text(dir / "summary.txt", summary);
    out << summary.substr(0, summary.find("\n#"));
    return 0;
  }
  if (command == "synth") {
    const MeasurementSet psi = synthesize_config(c);
    fs::create_directories(dir);
    write_measurements(dir / "measurements.csv", psi);
    std::ostringstream s;
    s << "synth: " << c.name << "\n" << grid_line(c) << "refine=" << c.refinement << " noise=" << num(c.noise)
      << " seed=" << c.seed << " series=" << psi.size() << "\n";
    write_text(dir / "summary.txt", s.str());
    out << s.str();
    return 0;
  }
  if (command == "study") {
    if (c.study.ladder.size() < 3 && o.study == "convergence")
      throw ConfigError("config field 'study.ladder': need at least 3 rungs");
    fs::create_directories(dir);
    return run_study(c, o.study, dir, out);
  }

  const MeasurementSet psi = load_or_synthesize(c);
  const ConsistencyReport report = check_consistency(c.spec, psi);
  fs::create_directories(dir);
  if (psi.provenance == Provenance::synthetic) write_measurements(dir / "measurements.csv", psi);
  write_text(dir / "consistency.txt", report.to_string());
  if (!report.det_ok) {
    err << "error: degenerate data, |det B0| = " << report.det_b0 << "\n" << report.to_string();
    return 5;
  }
  if (!report.passed()) {
    err << "error: data violate the t = 0 consistency conditions\n" << report.to_string();
    return 4;
  }
  if (command == "verify") {
    out << report.to_string();
    return 0;
  }
  const RecoveryResult r = picard_recover(c.spec, psi);
  write_recovery(dir / "recovery.csv", r);
  write_iterations(dir / "iterations.log", r);
  const std::string summary = recovery_summary(c, psi, r);
  write_text(dir / "summary.txt", summary);
  out << summary;
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Identification of heat transfer coefficients from integral measurements", "htcid"};
  app.require_subcommand(1);
  Options o;
  const std::pair<const char*, const char*> commands[] = {
      {"forward", "solve the direct problem with the known coefficient"},
      {"synth", "synthesize twin-experiment measurements"},
      {"invert", "recover the coefficient from measurements"},
      {"verify", "check the t = 0 consistency conditions"},
      {"study", "run a convergence, noise or contraction study"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub, o);
    if (std::string(name) == "study")
      sub->add_option("--study", o.study, "study kind")
          ->required()
          ->check(CLI::IsMember({"convergence", "noise", "contraction"}));
  }

  std::vector<std::string> argv_store{"htcid"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 2;
  }

  std::string command;
  for (const auto* sub : app.get_subcommands()) command = sub->get_name();
  try {
    return execute(command, o, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_status(e);
  }
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace htc::cli
