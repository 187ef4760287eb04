#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stcontrol/fem.hpp"
#include "stcontrol/optimality.hpp"

namespace stcontrol {

/// Which gradient enters the error integrals: spatial (d/dx) or full
/// space-time (d/dx, d/dt).
enum class GradientKind { spatial, space_time };

struct MetricOptions {
  int quad_subdiv = 1;
  GradientKind gradient = GradientKind::spatial;
};

/// |||w|||^2 = sum over elements of kappa_region * (dw/dx)^2 * area.
double triple_norm(const SpaceTimeMesh& mesh, const ProblemSpec& spec, const DenseVector& w);

struct StarNorm {
  double value = 0.0;
  double triple = 0.0;       ///< |||w|||
  double lifted = 0.0;       ///< |||z_h(dw/dt)|||
  double riesz_defect = 0.0; ///< |rhs^T z - z^T K z| / |z^T K z|
};

/// |||w|||_*^2 = |||w|||^2 + |||z_h(dw/dt)|||^2 with z_h from the discrete
/// Riesz problem on W_h. The discrete Riesz identity rhs^T z = z^T K z is
/// checked on every call (relative 1e-10); a violation throws SolverError.
StarNorm star_norm_detailed(const SpaceTimeMesh& mesh, const ProblemSpec& spec, const DenseVector& w);
double star_norm(const SpaceTimeMesh& mesh, const ProblemSpec& spec, const DenseVector& w);

/// Error of the P1 pair (u_h, p_h) against piecewise fields, unweighted by kappa.
/// Exact branches are picked by the true subdomain of each quadrature point.
double energy_error(const SpaceTimeMesh& mesh, const ProblemSpec& spec, const DenseVector& u_h,
                    const DenseVector& p_h, const PiecewiseField& exact_u, const PiecewiseField& exact_p,
                    const MetricOptions& opts = {});
double energy_error(const SpaceTimeMesh& mesh, const ProblemSpec& spec, const DiscreteSolution& sol,
                    const MetricOptions& opts = {});

/// Bucket-grid accelerated point location with barycentric containment.
class PointLocator {
 public:
  explicit PointLocator(const SpaceTimeMesh& mesh, double tolerance = 1e-12);

  /// Index of a triangle containing (x, t); throws LocationError if none.
  int locate(double x, double t) const;
  std::optional<int> try_locate(double x, double t) const;

 private:
  const SpaceTimeMesh& mesh_;
  double tolerance_;
  double x0_, t0_, dx_, dt_;
  int nx_, nt_;
  std::vector<std::vector<int>> buckets_;
};

/// Error of a coarse P1 pair against a reference P1 pair on a finer mesh.
/// Integration runs on the coarse mesh; reference gradients come from the
/// fine triangle containing each quadrature point.
double reference_error(const DiscreteSolution& coarse, const SpaceTimeMesh& coarse_mesh, const DiscreteSolution& ref,
                       const SpaceTimeMesh& ref_mesh, const ProblemSpec& spec, const MetricOptions& opts = {});

/// order_k = log(e_{k-1}/e_k) / log(h_{k-1}/h_k); first entry empty.
/// Throws ConfigError unless h is strictly decreasing.
std::vector<std::optional<double>> compute_eoc(const std::vector<std::pair<double, double>>& h_and_error);

struct ConvergenceRow {
  long dofs = 0;
  double h = 0.0;
  double error = 0.0;
  std::optional<double> order;
};

struct ConvergenceReport {
  std::string preset;
  std::string adjoint_space;
  int quad_subdiv = 1;
  std::string metric = "energy";  ///< "energy" or "reference"
  std::vector<ConvergenceRow> rows;
};

/// Sum of values by pairwise recursion (order-independent of thread count).
double pairwise_sum(const double* values, std::size_t n);

}  // namespace stcontrol
