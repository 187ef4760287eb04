#pragma once

#include <filesystem>
#include <string>

#include "stcontrol/metrics.hpp"
#include "stcontrol/optimality.hpp"

namespace stcontrol {

/// Nodal solution table with columns vertex_id,x,t,u,p,z_f.
struct SolutionTable {
  std::vector<Point> points;
  DenseVector u, p, z_f;
};

void write_solution_csv(const SpaceTimeMesh& mesh, const DiscreteSolution& sol, const DenseVector& z_f,
                        const std::filesystem::path& path);
SolutionTable read_solution_csv(const std::filesystem::path& path);

/// Columns dofs,h,error,order; the first order is empty.
void write_convergence_csv(const ConvergenceReport& report, const std::filesystem::path& path);
ConvergenceReport read_convergence_csv(const std::filesystem::path& path);

/// Triangles filled by the nodal average of `values` on a blue-white-red map
/// symmetric about zero.
void write_field_svg(const SpaceTimeMesh& mesh, const DenseVector& values, const std::string& title,
                     const std::filesystem::path& path);

/// Log-log plot of error against h.
void write_convergence_svg(const ConvergenceReport& report, const std::filesystem::path& path);

}  // namespace stcontrol
