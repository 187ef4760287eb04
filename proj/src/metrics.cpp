#include "stcontrol/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "stcontrol/errors.hpp"

namespace stcontrol {

double pairwise_sum(const double* values, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += values[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(values, half) + pairwise_sum(values + half, n - half);
}

namespace {

double sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

double squared_gradient_gap(const Eigen::Vector2d& exact, const Eigen::Vector2d& approx, GradientKind kind) {
  const Eigen::Vector2d d = exact - approx;
  return kind == GradientKind::spatial ? d.x() * d.x() : d.squaredNorm();
}

}  // namespace

double triple_norm(const SpaceTimeMesh& mesh, const ProblemSpec& spec, const DenseVector& w) {
  std::vector<double> parts(mesh.num_triangles());
  for (std::size_t e = 0; e < mesh.num_triangles(); ++e) {
    const Triangle& tri = mesh.triangles[e];
    const auto el = p1_element(mesh, tri);
    const double dx = el.gradient(element_values(tri, w)).x();
    parts[e] = spec.kappa(tri.region) * dx * dx * el.area;
  }
  return std::sqrt(sum(parts));
}

StarNorm star_norm_detailed(const SpaceTimeMesh& mesh, const ProblemSpec& spec, const DenseVector& w) {
  const DofMap dofs(mesh);
  const DenseVector rhs = assemble_time_weighted_load(mesh, dofs, w, Space::W);
  const DenseVector z = solve_riesz(mesh, spec, rhs);
  const SparseMatrix K = assemble_spatial_stiffness(mesh, spec, dofs, Space::W);

  StarNorm out;
  const double load = rhs.dot(z);
  const double energy = z.dot(K * z);
  out.riesz_defect = energy != 0.0 ? std::abs(load - energy) / std::abs(energy) : std::abs(load);
  if (!(out.riesz_defect <= 1e-10))
    throw SolverError("discrete Riesz identity violated: relative defect " + std::to_string(out.riesz_defect));
  out.triple = triple_norm(mesh, spec, w);
  out.lifted = triple_norm(mesh, spec, z);
  out.value = std::sqrt(out.triple * out.triple + out.lifted * out.lifted);
  return out;
}

double star_norm(const SpaceTimeMesh& mesh, const ProblemSpec& spec, const DenseVector& w) {
  return star_norm_detailed(mesh, spec, w).value;
}

double energy_error(const SpaceTimeMesh& mesh, const ProblemSpec& spec, const DenseVector& u_h,
                    const DenseVector& p_h, const PiecewiseField& exact_u, const PiecewiseField& exact_p,
                    const MetricOptions& opts) {
  const QuadratureRule<double> rule = subdivided(degree5_rule(), opts.quad_subdiv);
  std::vector<double> parts(mesh.num_triangles());
  for (std::size_t e = 0; e < mesh.num_triangles(); ++e) {
    const Triangle& tri = mesh.triangles[e];
    const auto el = p1_element(mesh, tri);
    const Eigen::Vector2d gu = el.gradient(element_values(tri, u_h));
    const Eigen::Vector2d gp = el.gradient(element_values(tri, p_h));
    double local = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Eigen::Vector2d x = el.map(rule.points[q]);
      const Jet u = evaluate(spec, exact_u, x.x(), x.y());
      const Jet p = evaluate(spec, exact_p, x.x(), x.y());
      local += rule.weights[q] * (squared_gradient_gap({u.dx, u.dt}, gu, opts.gradient) +
                                  squared_gradient_gap({p.dx, p.dt}, gp, opts.gradient));
    }
    parts[e] = local * el.area;
  }
  return std::sqrt(sum(parts));
}

double energy_error(const SpaceTimeMesh& mesh, const ProblemSpec& spec, const DiscreteSolution& sol,
                    const MetricOptions& opts) {
  if (!spec.has_exact()) throw ConfigError("energy_error: problem has no exact state/adjoint");
  return energy_error(mesh, spec, sol.u, sol.p, *spec.exact_state, *spec.exact_adjoint, opts);
}

PointLocator::PointLocator(const SpaceTimeMesh& mesh, double tolerance) : mesh_(mesh), tolerance_(tolerance) {
  if (mesh.vertices.empty()) throw ConfigError("PointLocator: empty mesh");
  double x1 = mesh.vertices[0].x, t1 = mesh.vertices[0].t;
  x0_ = x1;
  t0_ = t1;
  for (const Point& p : mesh.vertices) {
    x0_ = std::min(x0_, p.x);
    x1 = std::max(x1, p.x);
    t0_ = std::min(t0_, p.t);
    t1 = std::max(t1, p.t);
  }
  const int side = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.num_triangles()) / 2.0)));
  nx_ = nt_ = side;
  dx_ = (x1 - x0_) / nx_;
  dt_ = (t1 - t0_) / nt_;
  buckets_.resize(static_cast<std::size_t>(nx_) * nt_);
  auto clamp_x = [&](double x) { return std::clamp(static_cast<int>(std::floor((x - x0_) / dx_)), 0, nx_ - 1); };
  auto clamp_t = [&](double t) { return std::clamp(static_cast<int>(std::floor((t - t0_) / dt_)), 0, nt_ - 1); };
  for (std::size_t e = 0; e < mesh.num_triangles(); ++e) {
    const Triangle& tri = mesh.triangles[e];
    double lx = mesh.vertices[tri.v[0]].x, hx = lx, lt = mesh.vertices[tri.v[0]].t, ht = lt;
    for (int v : tri.v) {
      lx = std::min(lx, mesh.vertices[v].x);
      hx = std::max(hx, mesh.vertices[v].x);
      lt = std::min(lt, mesh.vertices[v].t);
      ht = std::max(ht, mesh.vertices[v].t);
    }
    const double pad_x = 1e-9 * dx_, pad_t = 1e-9 * dt_;
    for (int i = clamp_x(lx - pad_x); i <= clamp_x(hx + pad_x); ++i)
      for (int j = clamp_t(lt - pad_t); j <= clamp_t(ht + pad_t); ++j)
        buckets_[static_cast<std::size_t>(j) * nx_ + i].push_back(static_cast<int>(e));
  }
}

std::optional<int> PointLocator::try_locate(double x, double t) const {
  const double slack_x = 1e-9 * dx_, slack_t = 1e-9 * dt_;
  if (x < x0_ - slack_x || x > x0_ + nx_ * dx_ + slack_x || t < t0_ - slack_t || t > t0_ + nt_ * dt_ + slack_t)
    return std::nullopt;
  const int i = std::clamp(static_cast<int>(std::floor((x - x0_) / dx_)), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor((t - t0_) / dt_)), 0, nt_ - 1);
  for (int e : buckets_[static_cast<std::size_t>(j) * nx_ + i]) {
    const Triangle& tri = mesh_.triangles[e];
    const Point& a = mesh_.vertices[tri.v[0]];
    const Point& b = mesh_.vertices[tri.v[1]];
    const Point& c = mesh_.vertices[tri.v[2]];
    const double det = (b.x - a.x) * (c.t - a.t) - (c.x - a.x) * (b.t - a.t);
    const double l1 = ((x - a.x) * (c.t - a.t) - (c.x - a.x) * (t - a.t)) / det;
    const double l2 = ((b.x - a.x) * (t - a.t) - (x - a.x) * (b.t - a.t)) / det;
    const double l0 = 1.0 - l1 - l2;
    if (l0 >= -tolerance_ && l1 >= -tolerance_ && l2 >= -tolerance_) return e;
  }
  return std::nullopt;
}

int PointLocator::locate(double x, double t) const {
  if (auto e = try_locate(x, t)) return *e;
  throw LocationError("point not inside the triangulation", x, t);
}

double reference_error(const DiscreteSolution& coarse, const SpaceTimeMesh& coarse_mesh, const DiscreteSolution& ref,
                       const SpaceTimeMesh& ref_mesh, [[maybe_unused]] const ProblemSpec& spec,
                       const MetricOptions& opts) {
  if (ref_mesh.h > coarse_mesh.h * (1.0 + 1e-12))
    throw ConfigError("reference_error: reference mesh is coarser than the evaluated mesh");
  const PointLocator locator(ref_mesh);
  const QuadratureRule<double> rule = subdivided(degree5_rule(), opts.quad_subdiv);
  std::vector<double> parts(coarse_mesh.num_triangles());
  for (std::size_t e = 0; e < coarse_mesh.num_triangles(); ++e) {
    const Triangle& tri = coarse_mesh.triangles[e];
    const auto el = p1_element(coarse_mesh, tri);
    const Eigen::Vector2d gu = el.gradient(element_values(tri, coarse.u));
    const Eigen::Vector2d gp = el.gradient(element_values(tri, coarse.p));
    double local = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Eigen::Vector2d x = el.map(rule.points[q]);
      const Triangle& fine = ref_mesh.triangles[locator.locate(x.x(), x.y())];
      const auto fel = p1_element(ref_mesh, fine);
      const Eigen::Vector2d ru = fel.gradient(element_values(fine, ref.u));
      const Eigen::Vector2d rp = fel.gradient(element_values(fine, ref.p));
      local += rule.weights[q] * (squared_gradient_gap(ru, gu, opts.gradient) + squared_gradient_gap(rp, gp, opts.gradient));
    }
    parts[e] = local * el.area;
  }
  return std::sqrt(sum(parts));
}

std::vector<std::optional<double>> compute_eoc(const std::vector<std::pair<double, double>>& h_and_error) {
  if (h_and_error.size() < 2) throw ConfigError("compute_eoc: need at least two rows");
  std::vector<std::optional<double>> orders{std::nullopt};
  for (std::size_t k = 1; k < h_and_error.size(); ++k) {
    const auto [h0, e0] = h_and_error[k - 1];
    const auto [h1, e1] = h_and_error[k];
    if (!(h1 < h0)) throw ConfigError("compute_eoc: mesh sizes must be strictly decreasing");
    orders.push_back(std::log(e0 / e1) / std::log(h0 / h1));
  }
  return orders;
}

}  // namespace stcontrol
