#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "doctest.h"
#include "htc/cli.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path configs = fs::path(HTC_SOURCE_DIR) / "configs";

struct Run {
  int status;
  std::string out, err;
};

Run htcid(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int status = htc::cli::run(args, out, err);
  return {status, out.str(), err.str()};
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("htc_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

json load(const std::string& name) { return json::parse(slurp(configs / (name + ".json"))); }

fs::path save(const json& j, const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  const fs::path p = dir / (name + ".json");
  std::ofstream(p) << j.dump(2);
  return p;
}

/// Value after `key` on the line that contains it.
double field(const std::string& text, const std::string& key) {
  const auto at = text.find(key);
  REQUIRE(at != std::string::npos);
  return std::stod(text.substr(at + key.size()));
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("argument errors") {
    CHECK(htcid({}).status == 2);
    CHECK(htcid({"--help"}).status == 0);
    CHECK(htcid({"forward"}).status == 2);
    CHECK(htcid({"launch", "--config", "x.json"}).status == 2);
    CHECK(htcid({"forward", "--config", (configs / "steady.json").string(), "--nx", "many"}).status == 2);
    CHECK(htcid({"study", "--config", (configs / "steady.json").string(), "--study", "speed"}).status == 2);
    const Run missing = htcid({"forward", "--config", "/nonexistent/none.json", "--out", "/tmp/x"});
    CHECK(missing.status == 2);
    CHECK(missing.err.find("none.json") != std::string::npos);
  }

  TEST_CASE("steady forward run has constant traces") {
    const fs::path out = temp_dir("steady");
    const Run r = htcid({"forward", "--config", (configs / "steady.json").string(), "--out", out.string()});
    REQUIRE(r.status == 0);
    CHECK(fs::exists(out / "solution.csv"));
    const std::string summary = slurp(out / "summary.txt");
    CHECK(std::abs(field(summary, "u(0)=")) <= 1e-12);
    CHECK(field(summary, "u(L)=") == doctest::Approx(3.0).epsilon(1e-12));
    std::istringstream rows(summary.substr(summary.find("\n#") + 1));
    std::string line;
    std::getline(rows, line);
    CHECK(line == "# n t u(0) u(L) u-_1 u+_1 int_u2");
    int count = 0;
    while (std::getline(rows, line)) {
      std::istringstream cells(line);
      double n, t, u0, uL, um, up, e;
      cells >> n >> t >> u0 >> uL >> um >> up >> e;
      CHECK(std::abs(u0) <= 1e-12);
      CHECK(uL == doctest::Approx(3.0).epsilon(1e-12));
      CHECK(um == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(up == doctest::Approx(2.0).epsilon(1e-12));
      ++count;
    }
    CHECK(count == 11);
  }

  TEST_CASE("missing interfaces is a config error without artifacts") {
    json j = load("steady");
    j["geometry"].erase("interfaces");
    const fs::path dir = temp_dir("missing");
    const fs::path cfg = save(j, dir, "broken");
    const fs::path out = dir / "out";
    for (const char* cmd : {"forward", "synth", "invert", "verify"}) {
      const Run r = htcid({cmd, "--config", cfg.string(), "--out", out.string()});
      CHECK(r.status == 2);
      CHECK(r.err.find("geometry.interfaces") != std::string::npos);
      CHECK_FALSE(fs::exists(out));
    }
    const Run bad_theta = htcid({"invert", "--config", (configs / "steady.json").string(), "--out", out.string(),
                                 "--theta", "0.2"});
    CHECK(bad_theta.status == 2);
    CHECK_FALSE(fs::exists(out));
  }

  TEST_CASE("manufactured forward run appends the exact solution") {
    const fs::path out = temp_dir("mms");
    const Run r = htcid({"forward", "--config", (configs / "manufactured.json").string(), "--out", out.string()});
    REQUIRE(r.status == 0);
    std::ifstream in(out / "solution.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,x,side,value,exact,error");
    const double err41 = field(slurp(out / "summary.txt"), "max error vs exact: ");
    CHECK(err41 < 1e-3);
    const Run fine = htcid({"forward", "--config", (configs / "manufactured.json").string(), "--out", out.string(),
                            "--nx", "161", "--nt", "160"});
    REQUIRE(fine.status == 0);
    // Crank-Nicolson on a smooth solution: second order in h = dt.
    CHECK(std::log2(err41 / field(slurp(out / "summary.txt"), "max error vs exact: ")) >= 1.9);
  }

  TEST_CASE("case A inversion") {
    const fs::path out = temp_dir("case_a");
    const Run r = htcid({"invert", "--config", (configs / "case_a.json").string(), "--out", out.string()});
    REQUIRE(r.status == 0);
    for (const char* f : {"recovery.csv", "iterations.log", "consistency.txt", "summary.txt", "measurements.csv"})
      CHECK(fs::exists(out / f));
    CHECK(field(r.out, "max relative recovery error=") <= 1e-2);
    std::ifstream in(out / "recovery.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,q_1,det_B,overdet_res_1");
    const Run v = htcid({"verify", "--config", (configs / "case_a.json").string(), "--out", out.string()});
    CHECK(v.status == 0);
    CHECK(v.out.find("consistency: pass") != std::string::npos);
  }

  TEST_CASE("inconsistent measurements give status 4") {
    const fs::path dir = temp_dir("inconsistent");
    REQUIRE(htcid({"synth", "--config", (configs / "case_a.json").string(), "--out", dir.string()}).status == 0);
    std::ifstream in(dir / "measurements.csv");
    std::ostringstream edited;
    std::string line;
    std::getline(in, line);
    edited << line << '\n';
    std::getline(in, line);
    const auto comma = line.find(',');
    const double psi0 = std::stod(line.substr(comma + 1));
    edited << line.substr(0, comma) << ',' << std::setprecision(17) << psi0 * 1.01 << '\n';
    while (std::getline(in, line)) edited << line << '\n';
    in.close();
    std::ofstream(dir / "perturbed.csv") << edited.str();

    json j = load("case_a");
    j["measurements"] = "perturbed.csv";
    const fs::path cfg = save(j, dir, "perturbed");
    const Run r = htcid({"invert", "--config", cfg.string(), "--out", (dir / "out").string()});
    CHECK(r.status == 4);
    const std::string report = slurp(dir / "out" / "consistency.txt");
    const double residual = field(report, "psi_1(0) residual: ");
    CHECK(residual == doctest::Approx(0.01 * psi0).epsilon(0.05));
    CHECK_FALSE(fs::exists(dir / "out" / "recovery.csv"));
  }

  TEST_CASE("zero initial jump gives status 5") {
    json j = load("steady");
    j["data"]["u0"] = "1";
    j["data"]["g_right"] = "1";
    const fs::path dir = temp_dir("degenerate");
    const Run r = htcid({"invert", "--config", save(j, dir, "flat").string(), "--out", (dir / "out").string()});
    CHECK(r.status == 5);
    CHECK(r.err.find("det B0") != std::string::npos);
  }

  TEST_CASE("forward failure gives status 3") {
    json j = load("steady");
    j["data"]["g_right"] = "3 + log(0.2 - t)";
    const fs::path dir = temp_dir("forward_fail");
    const Run r = htcid({"forward", "--config", save(j, dir, "nan").string(), "--out", (dir / "out").string()});
    CHECK(r.status == 3);
    CHECK(r.err.find("time index 4") != std::string::npos);
  }

  TEST_CASE("iteration limit gives status 6") {
    json j = load("case_a");
    j["solver"]["max_iter"] = 1;
    const fs::path dir = temp_dir("noncontraction");
    const Run r = htcid({"invert", "--config", save(j, dir, "short").string(), "--out", (dir / "out").string(),
                         "--nx", "101", "--nt", "100"});
    CHECK(r.status == 6);
  }

  TEST_CASE("identical config and seed give identical artifacts") {
    const fs::path a = temp_dir("repeat_a"), b = temp_dir("repeat_b");
    const std::vector<std::string> common{"--config", (configs / "case_b.json").string(), "--noise", "1e-3",
                                          "--seed", "17"};
    auto with_out = [&](const fs::path& out) {
      std::vector<std::string> args{"invert"};
      args.insert(args.end(), common.begin(), common.end());
      args.insert(args.end(), {"--out", out.string()});
      return args;
    };
    REQUIRE(htcid(with_out(a)).status == 0);
    REQUIRE(htcid(with_out(b)).status == 0);
    for (const char* f : {"recovery.csv", "iterations.log", "consistency.txt", "summary.txt", "measurements.csv"})
      CHECK(slurp(a / f) == slurp(b / f));
    CHECK(slurp(a / "summary.txt").find("seed=17") != std::string::npos);
  }

  TEST_CASE("contraction study on case B") {
    const fs::path out = temp_dir("contraction");
    const Run r = htcid({"study", "--config", (configs / "case_b.json").string(), "--out", out.string(), "--study",
                         "contraction"});
    REQUIRE(r.status == 0);
    std::ifstream in(out / "study_contraction.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("k,T=", 0) == 0);
    int rows = 0;
    while (std::getline(in, line)) {
      std::istringstream cells(line);
      std::string cell;
      std::getline(cells, cell, ',');
      const int k = std::stoi(cell);
      while (std::getline(cells, cell, ','))
        if (!cell.empty() && k >= 2) CHECK(std::stod(cell) <= 0.5);
      ++rows;
    }
    CHECK(rows >= 3);
    CHECK(fs::exists(out / "study_contraction.txt"));
  }
}
