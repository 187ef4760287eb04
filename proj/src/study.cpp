#include "stcontrol/study.hpp"

#include <future>

#include "stcontrol/errors.hpp"

namespace stcontrol {

std::string to_string(AdjointSpace space) { return space == AdjointSpace::U_h ? "U_h" : "W_h"; }

AdjointSpace adjoint_space_from_string(const std::string& name) {
  if (name == "U_h" || name == "U") return AdjointSpace::U_h;
  if (name == "W_h" || name == "W") return AdjointSpace::W_h;
  throw ConfigError("unknown adjoint space '" + name + "' (expected U_h or W_h)");
}

LevelResult run_level(const ProblemSpec& spec, int n_layers, const StudyOptions& options) {
  LevelResult level;
  level.n_layers = n_layers;
  level.mesh = std::make_shared<const SpaceTimeMesh>(build_mesh(spec, n_layers, options.mesh));
  const BlockSystem system = build_block_system(level.mesh, spec, options.solver);
  level.solution = solve_optimality(system, options.solver.residual_tolerance);
  level.z_f = recover_control_riesz(level.solution, spec);
  level.control_consistency = control_consistency(system, level.solution, level.z_f);
  level.dofs = static_cast<long>(system.dofs.num_free(Space::U) + system.dofs.num_free(system.adjoint_constraints()));
  level.h = level.mesh->h;
  if (spec.has_exact()) level.energy_error = energy_error(*level.mesh, spec, level.solution, options.metric);
  return level;
}

namespace {

template <typename Fn>
std::vector<LevelResult> run_levels(const std::vector<int>& layers, bool serial, Fn fn) {
  std::vector<LevelResult> out(layers.size());
  auto guarded = [&](std::size_t k) {
    try {
      return fn(layers[k]);
    } catch (const Error& e) {
      throw SolverError("level with " + std::to_string(layers[k]) + " layers failed: " + e.what());
    }
  };
  if (serial) {
    for (std::size_t k = 0; k < layers.size(); ++k) out[k] = guarded(k);
  } else {
    std::vector<std::future<LevelResult>> futures;
    for (std::size_t k = 0; k < layers.size(); ++k) futures.push_back(std::async(std::launch::async, guarded, k));
    for (std::size_t k = 0; k < layers.size(); ++k) out[k] = futures[k].get();
  }
  return out;
}

}  // namespace

ConvergenceReport run_convergence(const ProblemSpec& spec, const std::vector<int>& layers,
                                  const StudyOptions& options) {
  if (layers.size() < 2) throw ConfigError("convergence study needs at least two levels");
  for (std::size_t k = 1; k < layers.size(); ++k)
    if (layers[k] <= layers[k - 1]) throw ConfigError("layer counts must be strictly increasing");

  ConvergenceReport report;
  report.preset = spec.name;
  report.adjoint_space = to_string(options.solver.adjoint_space);
  report.quad_subdiv = options.metric.quad_subdiv;

  const bool reference_mode = options.reference_layers.has_value() || !spec.has_exact();
  report.metric = reference_mode ? "reference" : "energy";

  std::optional<LevelResult> reference;
  if (reference_mode) {
    const int ref_layers = options.reference_layers.value_or(240);
    if (ref_layers <= layers.back()) throw ConfigError("reference level must be finer than every study level");
    StudyOptions ref_opts = options;
    try {
      reference = run_level(spec, ref_layers, ref_opts);
    } catch (const Error& e) {
      throw SolverError("reference level with " + std::to_string(ref_layers) + " layers failed: " + e.what());
    }
  }

  const std::vector<LevelResult> levels = run_levels(layers, options.serial, [&](int n) {
    LevelResult level = run_level(spec, n, options);
    if (reference_mode)
      level.energy_error = reference_error(level.solution, *level.mesh, reference->solution, *reference->mesh, spec,
                                           options.metric);
    return level;
  });

  std::vector<std::pair<double, double>> h_and_error;
  for (const LevelResult& level : levels) {
    report.rows.push_back({level.dofs, level.h, *level.energy_error, std::nullopt});
    h_and_error.emplace_back(level.h, *level.energy_error);
  }
  const auto orders = compute_eoc(h_and_error);
  for (std::size_t k = 0; k < orders.size(); ++k) report.rows[k].order = orders[k];
  return report;
}

}  // namespace stcontrol
