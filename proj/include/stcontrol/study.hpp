#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "stcontrol/metrics.hpp"
#include "stcontrol/optimality.hpp"

namespace stcontrol {

struct StudyOptions {
  SolverOptions solver;
  MetricOptions metric;
  MeshOptions mesh;
  std::optional<int> reference_layers;  ///< reference-solution mode when set (or when no exact solution exists)
  bool serial = true;                   ///< run levels one after another
};

/// Everything produced by one mesh level.
struct LevelResult {
  int n_layers = 0;
  std::shared_ptr<const SpaceTimeMesh> mesh;
  DiscreteSolution solution;
  DenseVector z_f;
  long dofs = 0;  ///< free unknowns of the coupled system
  double h = 0.0;
  std::optional<double> energy_error;
  double control_consistency = 0.0;
};

LevelResult run_level(const ProblemSpec& spec, int n_layers, const StudyOptions& options = {});

/// Solves every level and reports the error with experimental orders. Uses
/// the exact-solution metric when available and no reference is requested,
/// otherwise the reference-solution metric against `reference_layers`
/// (default 240). Failures name the level.
ConvergenceReport run_convergence(const ProblemSpec& spec, const std::vector<int>& layers,
                                  const StudyOptions& options = {});

std::string to_string(AdjointSpace space);
AdjointSpace adjoint_space_from_string(const std::string& name);

}  // namespace stcontrol
