#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "stcontrol/config.hpp"
#include "stcontrol/errors.hpp"
#include "stcontrol/io.hpp"
#include "support.hpp"

using namespace stcontrol;

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::filesystem::path& path, const std::string& text) { std::ofstream(path) << text; }

std::size_t count(const std::string& haystack, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("solution CSV round trip") {
  testing::TempDir dir("io");
  const ProblemSpec spec = make_preset("example1-moving");
  auto mesh = std::make_shared<const SpaceTimeMesh>(build_mesh(spec, 6));
  const DiscreteSolution sol = solve_optimality(build_block_system(mesh, spec));
  const DenseVector z = recover_control_riesz(sol, spec);
  write_solution_csv(*mesh, sol, z, dir / "s.csv");

  const std::string text = slurp(dir / "s.csv");
  CHECK(text.rfind("vertex_id,x,t,u,p,z_f\n", 0) == 0);
  CHECK(count(text, "\n") == mesh->num_vertices() + 1);

  const SolutionTable table = read_solution_csv(dir / "s.csv");
  REQUIRE(table.points.size() == mesh->num_vertices());
  CHECK(table.points == mesh->vertices);
  CHECK(table.u == sol.u);
  CHECK(table.p == sol.p);
  CHECK(table.z_f == z);
}

TEST_CASE("convergence CSV round trip") {
  testing::TempDir dir("io");
  ConvergenceReport report;
  report.rows = {{420, 0.1, 15.9, std::nullopt}, {1740, 0.05, 9.8, 0.7}, {7080, 0.025, 4.85, 1.0149999999999999}};
  write_convergence_csv(report, dir / "c.csv");
  CHECK(slurp(dir / "c.csv") ==
        "dofs,h,error,order\n"
        "420,0.10000000000000001,15.9,\n"
        "1740,0.050000000000000003,9.8000000000000007,0.69999999999999996\n"
        "7080,0.025000000000000001,4.8499999999999996,1.0149999999999999\n");
  const ConvergenceReport back = read_convergence_csv(dir / "c.csv");
  REQUIRE(back.rows.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(back.rows[k].dofs == report.rows[k].dofs);
    CHECK(back.rows[k].h == report.rows[k].h);
    CHECK(back.rows[k].error == report.rows[k].error);
    CHECK(back.rows[k].order == report.rows[k].order);
  }
}

TEST_CASE("malformed CSV files") {
  testing::TempDir dir("io");
  spit(dir / "a.csv", "vertex_id,x,t,u,p\n");
  CHECK_THROWS_AS(read_solution_csv(dir / "a.csv"), ParseError);
  spit(dir / "b.csv", "vertex_id,x,t,u,p,z_f\n0,0,0,1,2,3\n1,0,0,1,two,3\n");
  try {
    read_solution_csv(dir / "b.csv");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  spit(dir / "c.csv", "dofs,h,error,order\n10,0.1\n");
  CHECK_THROWS_AS(read_convergence_csv(dir / "c.csv"), ParseError);
  CHECK_THROWS_AS(read_convergence_csv(dir / "missing.csv"), IoError);
}

TEST_CASE("SVG renderings") {
  testing::TempDir dir("io");
  const ProblemSpec spec = make_preset("example1-moving");
  const SpaceTimeMesh mesh = build_mesh(spec, 5);
  const DenseVector values = lagrange_interpolate(mesh, spec, *spec.exact_state);
  write_field_svg(mesh, values, "state", dir / "u.svg");
  const std::string svg = slurp(dir / "u.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(count(svg, "<polygon") == mesh.num_triangles());
  CHECK(count(svg, "<line") == mesh.interface_edges.size());
  CHECK(svg.find("</svg>") != std::string::npos);

  ConvergenceReport report;
  report.preset = "demo";
  report.rows = {{10, 0.1, 1.0, std::nullopt}, {40, 0.05, 0.5, 1.0}};
  write_convergence_svg(report, dir / "c.svg");
  CHECK(count(slurp(dir / "c.svg"), "<circle") == 2);

  CHECK_THROWS_AS(write_field_svg(mesh, values, "x", dir / "no" / "such" / "dir.svg"), IoError);
}

TEST_CASE("ini parsing") {
  std::stringstream in(
      "# leading comment\n"
      "top = 1\n"
      "[problem]\n"
      "  preset = example1-moving   # trailing comment\n"
      "\n"
      "[ mesh ]\nlayers=4, 8\n");
  const IniFile ini = parse_ini(in);
  CHECK(ini.at("").at("top") == "1");
  CHECK(ini.at("problem").at("preset") == "example1-moving");
  CHECK(ini.at("mesh").at("layers") == "4, 8");

  std::stringstream bad_header("[problem\n");
  CHECK_THROWS_AS(parse_ini(bad_header), ParseError);
  std::stringstream no_equals("[problem]\npreset\n");
  try {
    parse_ini(no_equals);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  std::stringstream repeated("[problem]\n# note\neta = 1\neta = 2\n");
  try {
    parse_ini(repeated);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
  std::stringstream semicolon("; whole-line comment\n[solver]\nquad_subdiv = 2\n");
  CHECK(parse_ini(semicolon).at("solver").at("quad_subdiv") == "2");
}

TEST_CASE("layer lists") {
  CHECK(parse_layer_list("15, 30,60") == std::vector<int>{15, 30, 60});
  CHECK(parse_layer_list("8") == std::vector<int>{8});
  CHECK_THROWS_AS(parse_layer_list("15,x"), ConfigError);
  CHECK_THROWS_AS(parse_layer_list("15,"), ConfigError);
  CHECK_THROWS_AS(parse_layer_list("1.5"), ConfigError);
}

TEST_CASE("problems from config sections") {
  SUBCASE("preset with an override") {
    const ProblemSpec spec = problem_from_section({{"preset", "example1-static"}, {"eta", "0.01"}});
    CHECK(spec.eta == 0.01);
    CHECK(spec.has_exact());
    // the exact adjoint and derived u_d follow the new eta
    CHECK(spec.exact_adjoint->branch2(0.1, 0.5).value ==
          doctest::Approx(0.01 / 1e-6 * make_preset("example1-static").exact_adjoint->branch2(0.1, 0.5).value));
  }
  SUBCASE("custom sine velocity without exact solution") {
    const ProblemSpec spec = problem_from_section({{"velocity", "sine"},
                                                   {"velocity_amplitude", "0.2"},
                                                   {"velocity_angular_frequency", "3.14159"},
                                                   {"desired_state", "sinxt"}});
    CHECK_FALSE(spec.has_exact());
    CHECK(velocity_at(spec.velocity, 0.5) == doctest::Approx(0.2 * std::sin(3.14159 * 0.5)));
    CHECK(spec.desired_state(0.5, 0.5) == doctest::Approx(1.0));
  }
  SUBCASE("tabulated velocity") {
    const ProblemSpec spec = problem_from_section(
        {{"velocity", "tabulated"}, {"velocity_table", "0:0, 0.25:0.1, 0.5:0, 0.75:-0.1, 1:0"}});
    CHECK(velocity_at(spec.velocity, 0.25) == doctest::Approx(0.1));
  }
  SUBCASE("zero data") {
    const ProblemSpec spec = problem_from_section({{"exact", "zero"}, {"desired_state", "zero"}});
    CHECK(spec.has_exact());
    CHECK(spec.desired_state(0.3, 0.3) == 0.0);
    CHECK(problem_from_section({{"desired_state", "constant:2.5"}}).desired_state(0.1, 0.9) == 2.5);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(problem_from_section({{"eta", "tiny"}}), ConfigError);
    CHECK_THROWS_AS(problem_from_section({{"velocity", "rotating"}}), ConfigError);
    CHECK_THROWS_AS(problem_from_section({{"velocity", "tabulated"}}), ConfigError);
    CHECK_THROWS_AS(problem_from_section({{"preset", "nope"}}), ConfigError);
    CHECK_THROWS_AS(problem_from_section({{"exact", "nope"}}), ConfigError);
    CHECK_THROWS_AS(problem_from_section({{"desired_state", "nope"}}), ConfigError);
    CHECK_THROWS_AS(problem_from_section({{"offset_a", "0.7"}}), GeometryError);
    CHECK_THROWS_AS(problem_from_section({{"kappa1", "-1"}}), ConfigError);
  }
}

TEST_CASE("run configuration files") {
  testing::TempDir dir("cfg");
  spit(dir / "run.ini",
       "[problem]\npreset = example1-moving\n"
       "[mesh]\nlayers = 4, 8, 16\nrho_max = 9\n"
       "[solver]\nadjoint_space = W_h\nquad_subdiv = 2\nreference_layers = 64\nserial = true\n"
       "[output]\nout = results\nseed = 7\nplot = false\n");
  const RunConfig cfg = load_run_config(dir / "run.ini");
  CHECK(cfg.preset == "example1-moving");
  CHECK_FALSE(cfg.custom_problem.has_value());
  CHECK(cfg.layers == std::vector<int>{4, 8, 16});
  CHECK(cfg.rho_max == 9.0);
  CHECK(cfg.adjoint_space == AdjointSpace::W_h);
  CHECK(cfg.quad_subdiv == 2);
  CHECK(cfg.reference_layers == 64);
  CHECK(cfg.serial);
  CHECK(cfg.out == "results");
  CHECK(cfg.seed == 7u);
  CHECK_FALSE(cfg.plot);
  const StudyOptions opts = cfg.study_options();
  CHECK(opts.solver.adjoint_space == AdjointSpace::W_h);
  CHECK(opts.metric.quad_subdiv == 2);
  CHECK(opts.solver.assembly.quad_subdiv == 2);

  spit(dir / "custom.ini", "[problem]\nkappa1 = 2\ndesired_state = sinxt\n");
  const RunConfig custom = load_run_config(dir / "custom.ini");
  REQUIRE(custom.custom_problem.has_value());
  CHECK(custom.problem().kappa1 == 2.0);

  spit(dir / "bad.ini", "[mesh]\nlayers = 8, 4\n");
  CHECK_THROWS_AS(load_run_config(dir / "bad.ini"), ConfigError);
  spit(dir / "geometry.ini", "[problem]\noffset_a = 0.6\noffset_b = 0.4\n");
  CHECK_THROWS_AS(load_run_config(dir / "geometry.ini"), GeometryError);
  CHECK_THROWS_AS(load_run_config(dir / "missing.ini"), IoError);
  CHECK_THROWS_AS(adjoint_space_from_string("V_h"), ConfigError);
}
