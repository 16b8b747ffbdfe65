#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "anisoswarm/commands.hpp"
#include "anisoswarm/rng.hpp"

using namespace anisoswarm;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("anisoswarm_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ANISOSWARM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("defaults build the default structs") {
    const RunConfig rc = build_run_config(ConfigMap::defaults());
    CHECK(rc.sim.n_particles == 600);
    CHECK(rc.sim.dt == 0.2);
    CHECK(rc.force.alpha == 270.0);
    CHECK(rc.force.cutoff == 0.5);
    CHECK(rc.tensor.chi == 1.0);
    CHECK(rc.domain.is_torus());
    CHECK(rc.classify.link_radius == 0.02);
    CHECK(rc.threshold_n == 1200);
  }

  TEST_CASE("ini merge and overrides") {
    ConfigMap m = ConfigMap::defaults();
    m.merge_ini_string("[tensor]\nchi = 0.4\n[sim]\nintegrator = dopri\ninitial = ring\n[init]\nR = 0.003\n");
    m.set_assignment("sim.t_end=50");
    const RunConfig rc = build_run_config(m);
    CHECK(rc.tensor.chi == 0.4);
    CHECK(rc.sim.t_end == 50.0);
    CHECK(rc.sim.integrator.kind == IntegratorKind::DormandPrinceAdaptive);
    CHECK(std::get<initial::RingEquiangular>(rc.sim.initial).R == 0.003);

    // Round trip through the echoed INI.
    ConfigMap back = ConfigMap::defaults();
    back.merge_ini_string(m.to_ini());
    CHECK(back.to_ini() == m.to_ini());
  }

  TEST_CASE("config errors") {
    ConfigMap m = ConfigMap::defaults();
    CHECK_THROWS_AS(m.set("tensor.khi", "1"), Error);
    CHECK_THROWS_AS(m.set_assignment("tensor.chi"), Error);
    CHECK_THROWS_AS(m.merge_ini_string("[tensor\nchi=1\n"), Error);
    CHECK_THROWS_AS(m.merge_ini_file("/nonexistent/cfg.ini"), Error);
    m.set("tensor.chi", "abc");
    try {
      build_run_config(m);
      FAIL("expected InvalidConfig");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidConfig);
    }
    ConfigMap bad_chi = ConfigMap::defaults();
    bad_chi.set("tensor.chi", "1.5");
    CHECK_THROWS_AS(build_run_config(bad_chi), Error);
    ConfigMap bad_cut = ConfigMap::defaults();
    bad_cut.set("force.cutoff", "0.6");
    CHECK_THROWS_AS(build_run_config(bad_cut), Error);
  }

  TEST_CASE("sweep expansion") {
    ConfigMap m = ConfigMap::defaults();
    m.merge_ini_string("[sweep]\ntensor.chi = 0.12, 0.4, 0.7, 1\nforce.e_R = 100, 90\n");
    const auto pts = expand_sweep(m);
    REQUIRE(pts.size() == 8);
    CHECK(pts[0].suffix == "_chi_0.120000_e_R_100.000000");
    CHECK(pts[1].suffix == "_chi_0.120000_e_R_90.000000");
    CHECK(pts[7].suffix == "_chi_1.000000_e_R_90.000000");
    for (const auto& p : pts) {
      CHECK(p.config.get_u64("sim.seed") == derive_seed(1, p.index));
      CHECK(p.config.sweep_axes().empty());
    }
    CHECK(pts[2].config.get_double("tensor.chi") == 0.4);

    m.set("run.max_sweep_points", "7");
    CHECK_THROWS_AS(expand_sweep(m), Error);
    CHECK_THROWS_AS(m.set("sweep.tensor.nope", "1"), Error);

    CHECK(expand_sweep(ConfigMap::defaults()).size() == 1);
    CHECK(expand_sweep(ConfigMap::defaults())[0].suffix.empty());
    CHECK(sweep_value_label("0.1") == "0.100000");
    CHECK(sweep_value_label("plane") == "plane");
  }

  TEST_CASE("exit codes") {
    std::ostringstream out, err;
    ConfigMap m = ConfigMap::defaults();
    m.set("run.out", scratch_dir("codes").string());
    CHECK(run_command("nope", m, out, err) == 2);
    ConfigMap solver = m;
    solver.set("force.gamma", "0");
    CHECK(run_command("ring", solver, out, err) == 4);
    CHECK(err.str().find("NoRoot") != std::string::npos);
    ConfigMap invalid = m;
    invalid.set("sim.dt", "-1");
    CHECK(run_command("simulate", invalid, out, err) == 2);
    CHECK(run_command("stripe", m, out, err) == 0);
    CHECK(out.str().find("not an equilibrium") != std::string::npos);
    CHECK(exit_code_for(ErrorCode::FileError) == 3);
  }

  TEST_CASE("simulate outputs are reproducible") {
    const fs::path a = scratch_dir("rep_a"), b = scratch_dir("rep_b");
    ConfigMap m = ConfigMap::defaults();
    m.merge_ini_string("[sim]\nn_particles = 40\nt_end = 10\nsnapshot_every = 10\n");
    std::ostringstream out, err;
    m.set("run.out", a.string());
    REQUIRE(run_command("simulate", m, out, err) == 0);
    m.set("run.out", b.string());
    REQUIRE(run_command("simulate", m, out, err) == 0);
    CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
    CHECK(slurp(a / "pattern.json") == slurp(b / "pattern.json"));
    const auto summary = nlohmann::json::parse(slurp(a / "summary.json"));
    CHECK(summary.contains("classification"));
    CHECK(fs::exists(a / "config.ini"));

    // classify reads the trajectory back.
    ConfigMap c = ConfigMap::defaults();
    c.set("run.out", a.string());
    c.set("classify.input", (a / "trajectory.csv").string());
    REQUIRE(run_command("classify", c, out, err) == 0);
    CHECK(slurp(a / "pattern.json") == slurp(b / "pattern.json"));
  }

  TEST_CASE("binary: flags, config file and exit codes") {
    const fs::path d = scratch_dir("bin");
    CHECK(run_cli("ring --config " + (d / "missing.ini").string()) == 2);
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("") == 2);
    CHECK(run_cli("ring --set tensor.bogus=1 --out " + d.string()) == 2);
    {
      std::ofstream cfg(d / "c.ini");
      cfg << "[force]\ngamma = 0\n";
    }
    CHECK(run_cli("ring --config " + (d / "c.ini").string() + " --out " + d.string()) == 4);
    CHECK(run_cli("ring --out " + d.string() + " --threads 1") == 0);
    const auto j = nlohmann::json::parse(slurp(d / "ring.json"));
    CHECK(j["relative_difference"].get<double>() < 0.02);
    CHECK(run_cli("simulate --set sim.n_particles=20 --set sim.t_end=1 --seed 7 --out " + d.string()) == 0);
    CHECK(slurp(d / "config.ini").find("seed = 7") != std::string::npos);
  }
}
