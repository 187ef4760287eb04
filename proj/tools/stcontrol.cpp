// Command-line front end: mesh generation, single solves, convergence
// studies and a quick invariant self-test.
//
// Exit codes: 0 ok, 1 usage/config, 2 geometry or mesh, 3 solver, 4 I/O.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>

#include "stcontrol/config.hpp"
#include "stcontrol/errors.hpp"
#include "stcontrol/io.hpp"
#include "stcontrol/mesh.hpp"
#include "stcontrol/metrics.hpp"
#include "stcontrol/study.hpp"

namespace fs = std::filesystem;
using namespace stcontrol;

namespace {

enum ExitCode { ok = 0, usage = 1, geometry = 2, solver = 3, io = 4 };

struct CommonFlags {
  std::string preset;
  std::string config;
  std::string layers;
  std::string adjoint_space;
  int quad_subdiv = -1;
  std::string out;
  bool serial = false;
  int reference_layers = 0;
  unsigned seed = 0;
  bool no_plot = false;
};

void add_common(CLI::App* cmd, CommonFlags& f, const std::string& layers_help) {
  cmd->add_option("--preset", f.preset, "problem preset: example1-static | example1-moving (default example1-static)");
  cmd->add_option("--config", f.config, "config file with [problem] [mesh] [solver] [output] sections");
  cmd->add_option("--layers", f.layers, layers_help);
  cmd->add_option("--adjoint-space", f.adjoint_space, "adjoint trial space: U_h (default) | W_h");
  cmd->add_option("--quad-subdiv", f.quad_subdiv, "4^k sub-triangles for load/error quadrature (default 1)");
  cmd->add_option("--out", f.out, "output directory (default stcontrol-out)");
  cmd->add_flag("--serial", f.serial, "serial assembly and level loop (bitwise reproducible reference)");
}

RunConfig resolve(const CommonFlags& f) {
  RunConfig cfg = f.config.empty() ? RunConfig{} : load_run_config(f.config);
  if (!f.preset.empty()) {
    make_preset(f.preset);
    cfg.preset = f.preset;
    cfg.custom_problem.reset();
  }
  if (!f.layers.empty()) cfg.layers = parse_layer_list(f.layers);
  if (!f.adjoint_space.empty()) cfg.adjoint_space = adjoint_space_from_string(f.adjoint_space);
  if (f.quad_subdiv >= 0) cfg.quad_subdiv = f.quad_subdiv;
  if (!f.out.empty()) cfg.out = f.out;
  if (f.serial) cfg.serial = true;
  if (f.reference_layers > 0) cfg.reference_layers = f.reference_layers;
  if (f.seed != 0) cfg.seed = f.seed;
  if (f.no_plot) cfg.plot = false;
  for (int n : cfg.layers)
    if (n < 2) throw ConfigError("--layers: every level needs at least 2 layers");
  for (std::size_t k = 1; k < cfg.layers.size(); ++k)
    if (cfg.layers[k] <= cfg.layers[k - 1]) throw ConfigError("--layers must be strictly increasing");
  return cfg;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  const fs::path probe = dir / ".write-probe";
  std::ofstream test(probe);
  if (!test) throw IoError("output directory '" + dir.string() + "' is not writable");
  test.close();
  fs::remove(probe, ec);
}

int cmd_mesh(const RunConfig& cfg) {
  if (cfg.layers.size() != 1) throw ConfigError("mesh: --layers takes a single layer count");
  const ProblemSpec spec = cfg.problem();
  const int n = cfg.layers.front();
  const SpaceTimeMesh mesh = build_mesh(spec, n);
  const ValidationReport report = validate_mesh(mesh, spec, cfg.rho_max);
  ensure_dir(cfg.out);
  const fs::path path = cfg.out / ("mesh_" + std::to_string(n) + ".stmesh");
  write_mesh(mesh, path);
  std::cout << "mesh: " << mesh.num_vertices() << " vertices, " << mesh.num_triangles() << " triangles, h = " << mesh.h
            << "\nwrote " << path.string() << "\nvalidation: " << report.summary() << "\n";
  if (!report.ok()) {
    std::cerr << "mesh validation failed\n";
    return geometry;
  }
  return ok;
}

int cmd_solve(const RunConfig& cfg) {
  if (cfg.layers.size() != 1) throw ConfigError("solve: --layers takes a single layer count");
  const ProblemSpec spec = cfg.problem();
  const int n = cfg.layers.front();
  ensure_dir(cfg.out);
  const LevelResult level = run_level(spec, n, cfg.study_options());
  const SpaceTimeMesh& mesh = *level.mesh;

  const std::string tag = "_" + std::to_string(n);
  write_solution_csv(mesh, level.solution, level.z_f, cfg.out / ("solution" + tag + ".csv"));
  write_field_svg(mesh, level.solution.u, "state u_h", cfg.out / ("u" + tag + ".svg"));
  write_field_svg(mesh, level.solution.p, "adjoint p_h", cfg.out / ("p" + tag + ".svg"));
  write_field_svg(mesh, level.z_f, "control Riesz representative z_f", cfg.out / ("z_f" + tag + ".svg"));

  nlohmann::json summary;
  summary["preset"] = spec.name;
  summary["layers"] = n;
  summary["adjoint_space"] = to_string(cfg.adjoint_space);
  summary["quad_subdiv"] = cfg.quad_subdiv;
  summary["dofs"] = level.dofs;
  summary["h"] = level.h;
  summary["energy_error"] = level.energy_error ? nlohmann::json(*level.energy_error) : nlohmann::json(nullptr);
  summary["triple_norm_u"] = triple_norm(mesh, spec, level.solution.u);
  summary["star_norm_u"] = star_norm(mesh, spec, level.solution.u);
  summary["triple_norm_p"] = triple_norm(mesh, spec, level.solution.p);
  summary["control_norm"] = triple_norm(mesh, spec, level.z_f);
  summary["residual"] = level.solution.residual;
  summary["control_consistency"] = level.control_consistency;
  const fs::path jsonl = cfg.out / "summary.jsonl";
  std::ofstream out(jsonl, std::ios::app);
  if (!out) throw IoError("cannot append to '" + jsonl.string() + "'");
  out << summary.dump() << "\n";
  std::cout << summary.dump(2) << "\n";
  return ok;
}

int cmd_convergence(const RunConfig& cfg) {
  if (cfg.layers.size() < 3) throw ConfigError("convergence: need at least 3 levels");
  const ProblemSpec spec = cfg.problem();
  ensure_dir(cfg.out);
  const ConvergenceReport report = run_convergence(spec, cfg.layers, cfg.study_options());
  write_convergence_csv(report, cfg.out / "convergence.csv");
  if (cfg.plot) write_convergence_svg(report, cfg.out / "convergence.svg");
  std::printf("%s (%s error, adjoint space %s)\n", report.preset.c_str(), report.metric.c_str(),
              report.adjoint_space.c_str());
  std::printf("%10s  %12s  %12s  %8s\n", "#Dofs", "h", "Error", "Order");
  for (const auto& row : report.rows) {
    if (row.order)
      std::printf("%10ld  %12.4e  %12.4f  %8.3f\n", row.dofs, row.h, row.error, *row.order);
    else
      std::printf("%10ld  %12.4e  %12.4f  %8s\n", row.dofs, row.h, row.error, "--");
  }
  return ok;
}

/// Fast invariant checks on small meshes; one line per check.
int cmd_selftest(const RunConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  int failures = 0;
  auto report = [&](const std::string& name, bool pass, const std::string& detail) {
    std::cout << (pass ? "PASS " : "FAIL ") << name << "  " << detail << "\n";
    if (!pass) ++failures;
  };

  for (const auto& rule : {centroid_rule(), degree2_rule(), degree5_rule()}) {
    double worst = 0.0;
    for (int a = 0; a <= rule.degree; ++a) {
      for (int b = 0; a + b <= rule.degree; ++b) {
        // integral of l1^a l2^b over the reference triangle (area 1/2) = a! b! / (a + b + 2)!
        const double exact = std::tgamma(a + 1) * std::tgamma(b + 1) / std::tgamma(a + b + 3);
        double approx = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q)
          approx += 0.5 * rule.weights[q] * std::pow(rule.points[q][1], a) * std::pow(rule.points[q][2], b);
        worst = std::max(worst, std::abs(approx - exact));
      }
    }
    report("quadrature degree " + std::to_string(rule.degree), worst <= 1e-14, "max error " + sci(worst));
  }

  for (const std::string& name : preset_names()) {
    const ProblemSpec spec = make_preset(name);
    for (int n : {8, 30}) {
      const SpaceTimeMesh mesh = build_mesh(spec, n);
      const ValidationReport v = validate_mesh(mesh, spec, cfg.rho_max);
      report("mesh " + name + " layers " + std::to_string(n), v.ok(), v.summary());
    }
    const SpaceTimeMesh mesh = build_mesh(spec, 8);
    const DofMap dofs(mesh);
    const SparseMatrix A = assemble_state_matrix(mesh, spec, dofs);
    double worst = std::numeric_limits<double>::infinity();
    bool riesz_ok = true;
    for (int trial = 0; trial < 50; ++trial) {
      DenseVector u(dofs.size());
      for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = uniform(rng);
      dofs.zero_constrained(Space::U, u);
      const double tn = triple_norm(mesh, spec, u);
      worst = std::min(worst, (u.dot(A * u) - tn * tn) / (tn * tn));
      riesz_ok = riesz_ok && star_norm_detailed(mesh, spec, u).riesz_defect <= 1e-10;
    }
    report("coercivity " + name, worst >= -1e-10, "min (u'Au - |||u|||^2) / |||u|||^2 = " + sci(worst));
    report("Riesz identity " + name, riesz_ok, "50 random vectors");
  }

  {
    ProblemSpec spec = make_preset("example1-static");
    spec.desired_state = [](double, double) { return 0.0; };
    auto mesh = std::make_shared<const SpaceTimeMesh>(build_mesh(spec, 4));
    const DiscreteSolution sol = solve_optimality(build_block_system(mesh, spec));
    report("zero data gives zero solution", sol.u.isZero(0.0) && sol.p.isZero(0.0) && sol.residual == 0.0,
           "residual " + sci(sol.residual));
  }
  std::cout << (failures == 0 ? "selftest passed" : "selftest FAILED") << "\n";
  return failures == 0 ? ok : solver;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Space-time interface-fitted solver for energy-regularized parabolic optimal control"};
  app.require_subcommand(1);

  CommonFlags mesh_flags, solve_flags, conv_flags, self_flags;
  CLI::App* mesh = app.add_subcommand("mesh", "build, validate and write an interface-fitted mesh");
  add_common(mesh, mesh_flags, "number of time layers (>= 2, default from config)");
  CLI::App* solve = app.add_subcommand("solve", "solve the coupled state-adjoint system on one mesh");
  add_common(solve, solve_flags, "number of time layers (>= 2)");
  CLI::App* conv = app.add_subcommand("convergence", "run a mesh-refinement study (>= 3 levels)");
  add_common(conv, conv_flags, "comma-separated increasing layer counts (default 15,30,60,120)");
  conv->add_option("--reference-layers", conv_flags.reference_layers,
                   "compare against a reference solution with this many layers instead of the exact solution");
  conv->add_flag("--no-plot", conv_flags.no_plot, "skip the log-log SVG plot");
  CLI::App* self = app.add_subcommand("selftest", "run the invariant checks");
  add_common(self, self_flags, "unused");
  self->add_option("--seed", self_flags.seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return usage;
  }

  try {
    if (*mesh) {
      CommonFlags f = mesh_flags;
      if (f.layers.empty() && f.config.empty()) f.layers = "8";
      RunConfig cfg = resolve(f);
      if (f.layers.empty() && cfg.layers.size() > 1) cfg.layers = {cfg.layers.front()};
      return cmd_mesh(cfg);
    }
    if (*solve) {
      CommonFlags f = solve_flags;
      if (f.layers.empty() && f.config.empty()) f.layers = "30";
      RunConfig cfg = resolve(f);
      if (f.layers.empty() && cfg.layers.size() > 1) cfg.layers = {cfg.layers.front()};
      return cmd_solve(cfg);
    }
    if (*conv) return cmd_convergence(resolve(conv_flags));
    if (*self) return cmd_selftest(resolve(self_flags));
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return usage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return usage;
  } catch (const GeometryError& e) {
    std::cerr << "geometry error: " << e.what() << "\n";
    return geometry;
  } catch (const MeshingError& e) {
    std::cerr << "meshing error: " << e.what() << "\n";
    return geometry;
  } catch (const ValidationError& e) {
    std::cerr << "mesh error: " << e.what() << "\n";
    return geometry;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return io;
  } catch (const Error& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return solver;
  }
  return usage;
}
