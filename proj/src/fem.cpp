#include "stcontrol/fem.hpp"

#include <algorithm>
#include <thread>

#include "stcontrol/errors.hpp"

namespace stcontrol {

namespace {

constexpr std::uint8_t w_mask = left_side | right_side;
constexpr std::uint8_t u_mask = left_side | right_side | initial_time;

int worker_count(bool serial, std::size_t work) {
  if (serial) return 1;
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  return static_cast<int>(std::min<std::size_t>(hw, std::max<std::size_t>(1, work / 256)));
}

/// Runs `kernel(element, triplets)` over all elements. Workers own contiguous
/// element ranges and private buffers, concatenated in element order, so the
/// duplicate-summation order in setFromTriplets matches serial mode.
template <typename Kernel>
SparseMatrix assemble_elementwise(const SpaceTimeMesh& mesh, bool serial, Kernel kernel) {
  const std::size_t n = mesh.num_triangles();
  const int workers = worker_count(serial, n);
  std::vector<std::vector<Triplet>> buffers(workers);
  auto run = [&](int w) {
    const std::size_t begin = n * w / workers, end = n * (w + 1) / workers;
    buffers[w].reserve((end - begin) * 9);
    for (std::size_t e = begin; e < end; ++e) kernel(e, buffers[w]);
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::jthread> threads;
    for (int w = 0; w < workers; ++w) threads.emplace_back(run, w);
  }
  std::vector<Triplet> all;
  for (auto& b : buffers) all.insert(all.end(), b.begin(), b.end());
  const auto nv = static_cast<Eigen::Index>(mesh.num_vertices());
  SparseMatrix m(nv, nv);
  m.setFromTriplets(all.begin(), all.end());
  m.makeCompressed();
  return m;
}

double region_kappa(const ProblemSpec& spec, const Triangle& tri, std::size_t e) {
  if (tri.region != 1 && tri.region != 2)
    throw AssemblyError("element " + std::to_string(e) + " has no subdomain label");
  return spec.kappa(tri.region);
}

void push_local(const Triangle& tri, const Eigen::Matrix3d& local, std::vector<Triplet>& out) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out.emplace_back(tri.v[i], tri.v[j], local(i, j));
}

SparseMatrix finish(const SparseMatrix& raw, const DofMap& dofs, Space space) {
  return space == Space::none ? raw : apply_constraints(raw, dofs, space, space, 1.0);
}

}  // namespace

DofMap::DofMap(const SpaceTimeMesh& mesh) : tags_(mesh.boundary_tags) {
  if (tags_.size() != mesh.num_vertices()) throw ConfigError("DofMap: boundary tags missing for some vertices");
}

bool DofMap::constrained(Space space, Eigen::Index i) const {
  switch (space) {
    case Space::none:
      return false;
    case Space::W:
      return (tags_[i] & w_mask) != 0;
    case Space::U:
      return (tags_[i] & u_mask) != 0;
  }
  return false;
}

std::vector<int> DofMap::free_dofs(Space space) const {
  std::vector<int> out;
  for (Eigen::Index i = 0; i < size(); ++i)
    if (!constrained(space, i)) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<int> DofMap::constrained_dofs(Space space) const {
  std::vector<int> out;
  for (Eigen::Index i = 0; i < size(); ++i)
    if (constrained(space, i)) out.push_back(static_cast<int>(i));
  return out;
}

Eigen::Index DofMap::num_free(Space space) const { return static_cast<Eigen::Index>(free_dofs(space).size()); }

void DofMap::zero_constrained(Space space, DenseVector& v) const {
  for (Eigen::Index i = 0; i < size(); ++i)
    if (constrained(space, i)) v[i] = 0.0;
}

SparseMatrix apply_constraints(const SparseMatrix& raw, const DofMap& dofs, Space row_space, Space col_space,
                               double diagonal) {
  std::vector<Triplet> kept;
  kept.reserve(raw.nonZeros() + raw.rows());
  for (int r = 0; r < raw.outerSize(); ++r) {
    if (dofs.constrained(row_space, r)) {
      if (diagonal != 0.0) kept.emplace_back(r, r, diagonal);
      continue;
    }
    for (SparseMatrix::InnerIterator it(raw, r); it; ++it)
      if (!dofs.constrained(col_space, it.col())) kept.emplace_back(r, it.col(), it.value());
  }
  SparseMatrix out(raw.rows(), raw.cols());
  out.setFromTriplets(kept.begin(), kept.end());
  out.makeCompressed();
  return out;
}

SparseMatrix assemble_state_matrix(const SpaceTimeMesh& mesh, const ProblemSpec& spec, const DofMap& dofs, Space space,
                                   const AssemblyOptions& opts) {
  const QuadratureRule<double> rule = degree2_rule();
  SparseMatrix raw = assemble_elementwise(mesh, opts.serial, [&](std::size_t e, std::vector<Triplet>& out) {
    const Triangle& tri = mesh.triangles[e];
    const double kappa = region_kappa(spec, tri, e);
    const auto el = p1_element(mesh, tri);
    Eigen::Matrix3d local = Eigen::Matrix3d::Zero();
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Eigen::Vector3d& lambda = rule.points[q];
      const double t = el.map(lambda).y();
      const double v = velocity_at(spec.velocity, t);
      const double w = rule.weights[q] * el.area;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) local(i, j) += w * (el.grad[j].y() + v * el.grad[j].x()) * lambda[i];
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) local(i, j) += kappa * el.grad[i].x() * el.grad[j].x() * el.area;
    push_local(tri, local, out);
  });
  return finish(raw, dofs, space);
}

namespace {

SparseMatrix stiffness(const SpaceTimeMesh& mesh, const ProblemSpec* spec, bool serial) {
  return assemble_elementwise(mesh, serial, [&](std::size_t e, std::vector<Triplet>& out) {
    const Triangle& tri = mesh.triangles[e];
    const double kappa = spec ? region_kappa(*spec, tri, e) : 1.0;
    const auto el = p1_element(mesh, tri);
    Eigen::Matrix3d local;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) local(i, j) = kappa * el.grad[i].x() * el.grad[j].x() * el.area;
    push_local(tri, local, out);
  });
}

}  // namespace

SparseMatrix assemble_spatial_stiffness(const SpaceTimeMesh& mesh, const ProblemSpec& spec, const DofMap& dofs,
                                        Space space, const AssemblyOptions& opts) {
  return finish(stiffness(mesh, &spec, opts.serial), dofs, space);
}

SparseMatrix assemble_unweighted_stiffness(const SpaceTimeMesh& mesh, const DofMap& dofs, Space space,
                                           const AssemblyOptions& opts) {
  return finish(stiffness(mesh, nullptr, opts.serial), dofs, space);
}

SparseMatrix assemble_mass(const SpaceTimeMesh& mesh, const DofMap& dofs, Space space, const AssemblyOptions& opts) {
  SparseMatrix raw = assemble_elementwise(mesh, opts.serial, [&](std::size_t e, std::vector<Triplet>& out) {
    const Triangle& tri = mesh.triangles[e];
    const double area = signed_area(mesh, tri);
    Eigen::Matrix3d local = Eigen::Matrix3d::Constant(area / 12.0);
    local.diagonal().setConstant(area / 6.0);
    push_local(tri, local, out);
  });
  return finish(raw, dofs, space);
}

DenseVector assemble_load(const SpaceTimeMesh& mesh, const DofMap& dofs, const ScalarField& field, Space space,
                          const AssemblyOptions& opts) {
  const QuadratureRule<double> rule = subdivided(degree5_rule(), opts.quad_subdiv);
  DenseVector b = DenseVector::Zero(static_cast<Eigen::Index>(mesh.num_vertices()));
  // Element contributions are independent; they are computed (possibly in
  // parallel) and then scattered serially in element order.
  std::vector<Eigen::Vector3d> contrib(mesh.num_triangles());
  const std::size_t n = mesh.num_triangles();
  const int workers = worker_count(opts.serial, n);
  auto run = [&](int w) {
    for (std::size_t e = n * w / workers; e < n * (w + 1) / workers; ++e) {
      const auto el = p1_element(mesh, mesh.triangles[e]);
      Eigen::Vector3d local = Eigen::Vector3d::Zero();
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const auto x = el.map(rule.points[q]);
        local += (rule.weights[q] * el.area * field(x.x(), x.y())) * rule.points[q];
      }
      contrib[e] = local;
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::jthread> threads;
    for (int w = 0; w < workers; ++w) threads.emplace_back(run, w);
  }
  for (std::size_t e = 0; e < n; ++e)
    for (int k = 0; k < 3; ++k) b[mesh.triangles[e].v[k]] += contrib[e][k];
  dofs.zero_constrained(space, b);
  return b;
}

DenseVector assemble_time_weighted_load(const SpaceTimeMesh& mesh, const DofMap& dofs, const DenseVector& w,
                                        Space space) {
  if (w.size() != static_cast<Eigen::Index>(mesh.num_vertices()))
    throw ConfigError("assemble_time_weighted_load: coefficient vector has wrong size");
  DenseVector r = DenseVector::Zero(w.size());
  for (const Triangle& tri : mesh.triangles) {
    const auto el = p1_element(mesh, tri);
    const double dwdt = el.gradient(element_values(tri, w)).y();
    for (int k = 0; k < 3; ++k) r[tri.v[k]] += dwdt * el.area / 3.0;
  }
  dofs.zero_constrained(space, r);
  return r;
}

DenseVector lagrange_interpolate(const SpaceTimeMesh& mesh, const ScalarField& field) {
  DenseVector out(static_cast<Eigen::Index>(mesh.num_vertices()));
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) out[i] = field(mesh.vertices[i].x, mesh.vertices[i].t);
  return out;
}

DenseVector lagrange_interpolate(const SpaceTimeMesh& mesh, const ProblemSpec& spec, const PiecewiseField& field) {
  return lagrange_interpolate(mesh, [&](double x, double t) { return evaluate(spec, field, x, t).value; });
}

}  // namespace stcontrol
