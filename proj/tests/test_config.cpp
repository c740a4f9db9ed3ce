#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cases.hpp"
#include "doctest.h"
#include "htc/config.hpp"
#include "htc/csv.hpp"
#include "htc/error.hpp"

using namespace htc;
namespace fs = std::filesystem;

namespace {

const fs::path configs = fs::path(HTC_SOURCE_DIR) / "configs";

const char* minimal = R"({
  "variant": "interface",
  "geometry": {"length": 2, "interfaces": [1]},
  "grid": {"nx": 21, "nt": 10, "T": 0.5},
  "data": {"u0": ["x", "x + 1"], "g_left": 0, "g_right": 3},
  "basis": ["1"],
  "weights": [["0", "2 - x"]]
})";

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string with(const std::string& from, const std::string& to) {
  std::string s = minimal;
  const auto at = s.find(from);
  REQUIRE(at != std::string::npos);
  return s.replace(at, from.size(), to);
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("htc_config_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("minimal document") {
    const ProblemConfig c = parse_config(minimal);
    CHECK(c.spec.variant == Variant::interface);
    CHECK(c.spec.grid.node_count() == 21);
    CHECK(c.spec.grid.step_count() == 10);
    CHECK(c.spec.grid.horizon() == doctest::Approx(0.5));
    CHECK(c.spec.m() == 1);
    CHECK_FALSE(c.has_truth());
    CHECK_FALSE(c.exact.defined());
    CHECK(validate_spec(c.spec).ok());
    CHECK(c.spec.data.initial(1, 0.0, 1.5) == 2.5);
    CHECK(c.spec.data.boundary[right_end](0.2) == 3.0);
    // Defaults for omitted pieces.
    CHECK(c.spec.coefficients.diffusion(0, 0.0, 0.3) == 1.0);
    CHECK(c.spec.data.interface_flux.size() == 1);
    CHECK(c.spec.options.theta == 1.0);
  }

  TEST_CASE("shipped configs load and validate") {
    for (const char* name : {"case_a", "case_b", "multi", "steady", "manufactured"}) {
      CAPTURE(name);
      const ProblemConfig c = load_config(configs / (std::string(name) + ".json"));
      CHECK(validate_spec(c.spec).ok());
      CHECK(c.has_truth());
    }
    const ProblemConfig a = load_config(configs / "case_a.json");
    CHECK(a.truth(0.3)[0] == doctest::Approx(testing::case_a_q(0.3)[0]).epsilon(1e-15));
    const ProblemConfig b = load_config(configs / "case_b.json");
    CHECK(b.spec.variant == Variant::robin);
    CHECK(b.truth(0.4)[1] == doctest::Approx(0.9));
    const ProblemConfig m = load_config(configs / "manufactured.json");
    CHECK(m.exact.defined());
    CHECK(m.exact(0, 0.2, 0.5) == doctest::Approx(testing::manufactured_exact(0.2, 0.5)));
  }

  TEST_CASE("config weights agree with the compiled cases") {
    const ProblemConfig a = load_config(configs / "case_a.json");
    const ProblemSpec sa = testing::case_a(a.spec.grid.node_count(), a.spec.grid.step_count());
    CHECK((sample(a.spec.weights.functions[0], a.spec.grid, 0.0) - sample(sa.weights.functions[0], sa.grid, 0.0))
              .cwiseAbs()
              .maxCoeff() <= 1e-13);
    const ProblemConfig b = load_config(configs / "case_b.json");
    const ProblemSpec sb = testing::case_b(b.spec.grid.node_count(), b.spec.grid.step_count());
    for (std::size_t k = 0; k < 2; ++k)
      CHECK((sample(b.spec.weights.functions[k], b.spec.grid, 0.0) - sample(sb.weights.functions[k], sb.grid, 0.0))
                .cwiseAbs()
                .maxCoeff() <= 1e-13);
  }

  TEST_CASE("missing interfaces names the field") {
    const std::string msg = error_of(with(R"("interfaces": [1])", R"("orientation": [])"));
    CHECK(msg.find("geometry.interfaces") != std::string::npos);
  }

  TEST_CASE("errors name the offending field") {
    CHECK(error_of(with(R"("T": 0.5)", R"("T": 0.5, "dx": 1)")).find("grid.dx") != std::string::npos);
    CHECK(error_of(with(R"("g_left": 0)", R"("g_left": "sin(")")).find("data.g_left") != std::string::npos);
    CHECK(error_of(with(R"("nx": 21)", R"("nx": -3)")).find("grid.nx") != std::string::npos);
    CHECK(error_of(with(R"("nx": 21)", R"("nx": 2.5)")).find("grid.nx") != std::string::npos);
    CHECK(error_of(with(R"("T": 0.5)", R"("T": "long")")).find("grid.T") != std::string::npos);
    CHECK(error_of(with(R"("u0": ["x", "x + 1"], )", "")).find("data.u0") != std::string::npos);
    CHECK(error_of(with(R"("variant": "interface")", R"("variant": "both")")).find("variant") != std::string::npos);
    CHECK_FALSE(error_of("{ not json").empty());
  }

  TEST_CASE("solver options and overrides") {
    ProblemConfig c = parse_config(with(R"("basis")", R"("solver": {"theta": 0.5, "tol": 1e-9, "max_iter": 7,
        "dirichlet_conormal": "stencil", "refine": 3, "noise": 0.01, "seed": 42}, "basis")"));
    CHECK(c.spec.options.theta == 0.5);
    CHECK(c.spec.options.tolerance == 1e-9);
    CHECK(c.spec.options.max_iterations == 7);
    CHECK(c.spec.options.dirichlet_conormal == DirichletConormal::stencil);
    CHECK(c.refinement == 3);
    CHECK(c.noise == 0.01);
    CHECK(c.seed == 42);

    Overrides o;
    o.nx = 41;
    o.nt = 5;
    o.theta = 1.0;
    o.seed = 3;
    apply_overrides(c, o);
    CHECK(c.spec.grid.node_count() == 41);
    CHECK(c.spec.grid.step_count() == 5);
    CHECK(c.spec.grid.horizon() == doctest::Approx(0.5));
    CHECK(c.spec.options.theta == 1.0);
    CHECK(c.seed == 3);
    CHECK(c.refinement == 3);
  }

  TEST_CASE("measurement CSV round trip") {
    const ProblemSpec s = testing::case_b(41, 20);
    const MeasurementSet m = synthesize(s, testing::case_b_q, 2, 1e-3, 9);
    const fs::path dir = temp_dir("roundtrip");
    write_measurements(dir / "psi.csv", m);
    const MeasurementSet back = read_measurements(dir / "psi.csv", s.options.smoothing_window);
    CHECK(back.provenance == Provenance::external);
    CHECK(back.psi == m.psi);
    CHECK(back.times == m.times);

    // External data referenced from a config resolve relative to the config file.
    std::ifstream in(configs / "case_b.json");
    std::stringstream text;
    text << in.rdbuf();
    ProblemConfig c = parse_config(text.str(), dir);
    CHECK(c.measurements.empty());
    std::string doc = text.str();
    doc.insert(doc.rfind('}'), R"(, "measurements": "psi.csv")");
    c = parse_config(doc, dir);
    CHECK(c.measurements == dir / "psi.csv");
  }

  TEST_CASE("malformed measurement files") {
    const fs::path dir = temp_dir("malformed");
    write_text(dir / "header.csv", "time,psi_1\n0,1\n0.1,1\n0.2,1\n");
    CHECK_THROWS_AS(read_measurements(dir / "header.csv"), ConfigError);
    write_text(dir / "uneven.csv", "t,psi_1\n0,1\n0.1,1\n0.3,1\n");
    CHECK_THROWS_AS(read_measurements(dir / "uneven.csv"), ConfigError);
    write_text(dir / "ragged.csv", "t,psi_1,psi_2\n0,1,2\n0.1,1\n0.2,1,2\n");
    CHECK_THROWS_AS(read_measurements(dir / "ragged.csv"), ConfigError);
    CHECK_THROWS_AS(read_measurements(dir / "absent.csv"), ConfigError);
  }

  TEST_CASE("number formatting round-trips") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (int i = 0; i < 100; ++i) {
      const double v = u(rng);
      CHECK(std::stod(format_number(v)) == v);
    }
  }
}
