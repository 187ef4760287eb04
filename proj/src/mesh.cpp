#include "stcontrol/mesh.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "stcontrol/errors.hpp"

namespace stcontrol {

namespace {

enum class NodeKind { grid, left_interface, right_interface };

struct LineNode {
  double x;
  NodeKind kind;
  int index = -1;
};

/// Nodes of one time line, sorted by x, with the positions of both interface nodes.
struct TimeLine {
  double t;
  std::vector<LineNode> nodes;
  std::size_t left = 0;
  std::size_t right = 0;
};

double min_angle(const Point& a, const Point& b, const Point& c) {
  auto angle = [](const Point& p, const Point& q, const Point& r) {
    const double ux = q.x - p.x, ut = q.t - p.t;
    const double vx = r.x - p.x, vt = r.t - p.t;
    return std::atan2(std::abs(ux * vt - ut * vx), ux * vx + ut * vt);
  };
  return std::min({angle(a, b, c), angle(b, c, a), angle(c, a, b)});
}

TimeLine make_time_line(const ProblemSpec& spec, double t, int n_x, double pitch, double cull, int layer) {
  const auto [left, right] = interface_positions(spec, t);
  const double length = spec.x_max - spec.x_min;
  const double collision = 1e-9 * length;
  if (left - spec.x_min < collision || spec.x_max - right < collision || right - left < collision)
    throw MeshingError("interface node collides with another node", layer);

  TimeLine line{t, {}, 0, 0};
  line.nodes.reserve(n_x + 3);
  for (int k = 0; k <= n_x; ++k) {
    const double x = k == n_x ? spec.x_max : spec.x_min + k * pitch;
    const bool boundary = k == 0 || k == n_x;
    if (!boundary && (std::abs(x - left) < cull * pitch || std::abs(x - right) < cull * pitch)) continue;
    line.nodes.push_back({x, NodeKind::grid});
  }
  line.nodes.push_back({left, NodeKind::left_interface});
  line.nodes.push_back({right, NodeKind::right_interface});
  std::sort(line.nodes.begin(), line.nodes.end(), [](const LineNode& a, const LineNode& b) { return a.x < b.x; });
  for (std::size_t i = 0; i + 1 < line.nodes.size(); ++i) {
    if (line.nodes[i + 1].x - line.nodes[i].x < collision) throw MeshingError("degenerate strip: node collision", layer);
  }
  for (std::size_t i = 0; i < line.nodes.size(); ++i) {
    if (line.nodes[i].kind == NodeKind::left_interface) line.left = i;
    if (line.nodes[i].kind == NodeKind::right_interface) line.right = i;
  }
  return line;
}

/// Triangulates the region between two monotone chains whose first and last
/// nodes are joined by the sub-strip's side edges.
void zigzag_merge(const std::vector<int>& bottom, const std::vector<int>& top, const std::vector<Point>& vertices,
                  std::vector<Triangle>& out) {
  std::size_t i = 0, k = 0;
  const std::size_t p = bottom.size() - 1, q = top.size() - 1;
  while (i < p || k < q) {
    bool advance_bottom;
    if (i == p) {
      advance_bottom = false;
    } else if (k == q) {
      advance_bottom = true;
    } else {
      // Sweep in x: advance the chain whose next node comes first; on a tie
      // keep the better-shaped of the two candidate triangles.
      const double xb = vertices[bottom[i + 1]].x, xt = vertices[top[k + 1]].x;
      if (std::abs(xb - xt) > 1e-12 * std::max(1.0, std::abs(xb))) {
        advance_bottom = xb < xt;
      } else {
        const double quality_bottom = min_angle(vertices[bottom[i]], vertices[bottom[i + 1]], vertices[top[k]]);
        const double quality_top = min_angle(vertices[bottom[i]], vertices[top[k + 1]], vertices[top[k]]);
        advance_bottom = quality_bottom >= quality_top - 1e-12;
      }
    }
    if (advance_bottom) {
      out.push_back({{bottom[i], bottom[i + 1], top[k]}, 2});
      ++i;
    } else {
      out.push_back({{bottom[i], top[k + 1], top[k]}, 2});
      ++k;
    }
  }
}

std::vector<int> chain(const TimeLine& line, std::size_t first, std::size_t last) {
  std::vector<int> ids;
  ids.reserve(last - first + 1);
  for (std::size_t i = first; i <= last; ++i) ids.push_back(line.nodes[i].index);
  return ids;
}

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.t - b.t); }

}  // namespace

double signed_area(const SpaceTimeMesh& mesh, const Triangle& tri) {
  const Point& a = mesh.vertices[tri.v[0]];
  const Point& b = mesh.vertices[tri.v[1]];
  const Point& c = mesh.vertices[tri.v[2]];
  return 0.5 * ((b.x - a.x) * (c.t - a.t) - (c.x - a.x) * (b.t - a.t));
}

double diameter(const SpaceTimeMesh& mesh, const Triangle& tri) {
  const Point& a = mesh.vertices[tri.v[0]];
  const Point& b = mesh.vertices[tri.v[1]];
  const Point& c = mesh.vertices[tri.v[2]];
  return std::max({distance(a, b), distance(b, c), distance(c, a)});
}

double inscribed_diameter(const SpaceTimeMesh& mesh, const Triangle& tri) {
  const Point& a = mesh.vertices[tri.v[0]];
  const Point& b = mesh.vertices[tri.v[1]];
  const Point& c = mesh.vertices[tri.v[2]];
  const double perimeter = distance(a, b) + distance(b, c) + distance(c, a);
  return 4.0 * std::abs(signed_area(mesh, tri)) / perimeter;
}

double measure_h(const SpaceTimeMesh& mesh) {
  double h = 0.0;
  for (const Triangle& tri : mesh.triangles) h = std::max(h, diameter(mesh, tri));
  return h;
}

double region_area(const SpaceTimeMesh& mesh, int region) {
  double area = 0.0;
  for (const Triangle& tri : mesh.triangles)
    if (tri.region == region) area += signed_area(mesh, tri);
  return area;
}

SpaceTimeMesh build_mesh(const ProblemSpec& spec, int n_layers, const MeshOptions& options) {
  if (n_layers < 2) throw ConfigError("build_mesh: n_layers must be at least 2");
  validate(spec);

  const double dt = spec.T / n_layers;
  const double length = spec.x_max - spec.x_min;
  const int n_x = std::max(2, static_cast<int>(std::lround(length / dt)));
  const double pitch = length / n_x;

  SpaceTimeMesh mesh;
  std::vector<TimeLine> lines;
  lines.reserve(n_layers + 1);
  for (int j = 0; j <= n_layers; ++j) {
    const double t = j == n_layers ? spec.T : j * dt;
    TimeLine line = make_time_line(spec, t, n_x, pitch, options.cull_fraction, j);
    for (std::size_t i = 0; i < line.nodes.size(); ++i) {
      LineNode& node = line.nodes[i];
      node.index = static_cast<int>(mesh.vertices.size());
      mesh.vertices.push_back({node.x, t});
      std::uint8_t tag = interior;
      if (i == 0) tag |= left_side;
      if (i + 1 == line.nodes.size()) tag |= right_side;
      if (j == 0) tag |= initial_time;
      if (j == n_layers) tag |= final_time;
      mesh.boundary_tags.push_back(tag);
    }
    lines.push_back(std::move(line));
  }

  for (int j = 0; j < n_layers; ++j) {
    const TimeLine& lo = lines[j];
    const TimeLine& hi = lines[j + 1];
    const std::size_t first_new = mesh.triangles.size();
    zigzag_merge(chain(lo, 0, lo.left), chain(hi, 0, hi.left), mesh.vertices, mesh.triangles);
    zigzag_merge(chain(lo, lo.left, lo.right), chain(hi, hi.left, hi.right), mesh.vertices, mesh.triangles);
    zigzag_merge(chain(lo, lo.right, lo.nodes.size() - 1), chain(hi, hi.right, hi.nodes.size() - 1), mesh.vertices,
                 mesh.triangles);

    // Centroid test against the piecewise-linear discrete interface of this strip.
    const double xl0 = lo.nodes[lo.left].x, xl1 = hi.nodes[hi.left].x;
    const double xr0 = lo.nodes[lo.right].x, xr1 = hi.nodes[hi.right].x;
    for (std::size_t e = first_new; e < mesh.triangles.size(); ++e) {
      Triangle& tri = mesh.triangles[e];
      if (signed_area(mesh, tri) <= 0.0) throw MeshingError("degenerate strip: non-positive triangle", j);
      double xc = 0.0, tc = 0.0;
      for (int v : tri.v) {
        xc += mesh.vertices[v].x / 3.0;
        tc += mesh.vertices[v].t / 3.0;
      }
      const double theta = (tc - lo.t) / (hi.t - lo.t);
      const double left = xl0 + theta * (xl1 - xl0);
      const double right = xr0 + theta * (xr1 - xr0);
      tri.region = (left < xc && xc < right) ? 1 : 2;
    }
    mesh.interface_edges.push_back({lo.nodes[lo.left].index, hi.nodes[hi.left].index});
    mesh.interface_edges.push_back({lo.nodes[lo.right].index, hi.nodes[hi.right].index});
  }

  mesh.h = measure_h(mesh);
  return mesh;
}

std::string ValidationReport::summary() const {
  std::ostringstream out;
  out << "max_interface_residual=" << max_interface_residual
      << " interface_residual_violations=" << interface_residual_violations << " straddle=" << straddle_count
      << " label_mismatches=" << label_mismatches << " orientation=" << orientation_violations
      << " conformity=" << conformity_violations << " quasi_uniformity=" << quasi_uniformity << " (rho_max=" << rho_max
      << ")";
  return out.str();
}

ValidationReport validate_mesh(const SpaceTimeMesh& mesh, const ProblemSpec& spec, double rho_max) {
  ValidationReport report;
  report.rho_max = rho_max;
  const double tol = report.interface_tolerance;

  auto curve_residual = [&](const Point& p) {
    if (!(p.t >= 0.0 && p.t <= spec.T)) return std::numeric_limits<double>::infinity();
    const auto [left, right] = interface_positions(spec, p.t);
    return std::min(std::abs(p.x - left), std::abs(p.x - right));
  };
  // 0 on Γ*, otherwise the subdomain number of the vertex.
  std::vector<int> side(mesh.num_vertices(), 0);
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
    const Point& p = mesh.vertices[i];
    if (curve_residual(p) <= tol) continue;
    const double t = std::clamp(p.t, 0.0, spec.T);
    const auto [left, right] = interface_positions(spec, t);
    side[i] = (left < p.x && p.x < right) ? 1 : 2;
  }

  for (const Edge& edge : mesh.interface_edges) {
    for (int v : edge) {
      const double r = curve_residual(mesh.vertices[v]);
      report.max_interface_residual = std::max(report.max_interface_residual, r);
      if (r > tol) ++report.interface_residual_violations;
    }
  }

  double max_diameter = 0.0;
  double min_inscribed = std::numeric_limits<double>::infinity();
  std::map<std::pair<int, int>, int> edge_use;
  for (const Triangle& tri : mesh.triangles) {
    if (signed_area(mesh, tri) <= 0.0) ++report.orientation_violations;
    bool has1 = false, has2 = false;
    for (int v : tri.v) {
      has1 |= side[v] == 1;
      has2 |= side[v] == 2;
    }
    if (has1 && has2) ++report.straddle_count;
    else if ((has1 && tri.region != 1) || (has2 && tri.region != 2)) ++report.label_mismatches;
    max_diameter = std::max(max_diameter, diameter(mesh, tri));
    min_inscribed = std::min(min_inscribed, inscribed_diameter(mesh, tri));
    for (int e = 0; e < 3; ++e) {
      const int a = tri.v[e], b = tri.v[(e + 1) % 3];
      ++edge_use[{std::min(a, b), std::max(a, b)}];
    }
  }
  for (const auto& [edge, count] : edge_use) {
    if (count > 2) {
      ++report.conformity_violations;
    } else if (count == 1) {
      // Edges used once must lie on the cylinder boundary.
      const std::uint8_t common = mesh.boundary_tags[edge.first] & mesh.boundary_tags[edge.second];
      if (common == interior) ++report.conformity_violations;
    }
  }
  report.quasi_uniformity = mesh.triangles.empty() ? 0.0 : max_diameter / min_inscribed;
  return report;
}

void write_mesh(const SpaceTimeMesh& mesh, std::ostream& out) {
  char buf[96];
  out << "stmesh 1\n";
  out << "vertices " << mesh.vertices.size() << "\n";
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %u\n", mesh.vertices[i].x, mesh.vertices[i].t,
                  static_cast<unsigned>(mesh.boundary_tags[i]));
    out << buf;
  }
  out << "triangles " << mesh.triangles.size() << "\n";
  for (const Triangle& tri : mesh.triangles)
    out << tri.v[0] << ' ' << tri.v[1] << ' ' << tri.v[2] << ' ' << tri.region << '\n';
  out << "interface_edges " << mesh.interface_edges.size() << "\n";
  for (const Edge& e : mesh.interface_edges) out << e[0] << ' ' << e[1] << '\n';
}

void write_mesh(const SpaceTimeMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_mesh(mesh, out);
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

namespace {

/// Line reader that drops `#` comments and blank lines and tracks line numbers.
class MeshLexer {
 public:
  explicit MeshLexer(std::istream& in) : in_(in) {}

  /// Next non-empty line split into tokens; false at end of input.
  bool next(std::vector<std::string>& tokens) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::istringstream words(line);
      tokens.clear();
      for (std::string w; words >> w;) tokens.push_back(w);
      if (!tokens.empty()) return true;
    }
    return false;
  }
  int line() const { return line_no_; }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

template <typename T>
T parse_number(const std::string& token, const std::string& section, int line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size())
    throw ParseError("bad number '" + token + "' in section '" + section + "'", line);
  return value;
}

std::size_t read_header(MeshLexer& lex, std::vector<std::string>& tok, const std::string& section) {
  if (!lex.next(tok)) throw ParseError("unexpected end of file: missing section '" + section + "'", lex.line());
  if (tok.size() != 2 || tok[0] != section)
    throw ParseError("expected section header '" + section + " <count>'", lex.line());
  return parse_number<std::size_t>(tok[1], section, lex.line());
}

void expect_row(MeshLexer& lex, std::vector<std::string>& tok, const std::string& section, std::size_t width) {
  if (!lex.next(tok)) throw ParseError("unexpected end of file in section '" + section + "'", lex.line());
  if (tok.size() != width)
    throw ParseError("expected " + std::to_string(width) + " fields in section '" + section + "'", lex.line());
}

}  // namespace

SpaceTimeMesh read_mesh(std::istream& in) {
  MeshLexer lex(in);
  std::vector<std::string> tok;
  if (!lex.next(tok) || tok.size() != 2 || tok[0] != "stmesh" || tok[1] != "1")
    throw ParseError("missing header 'stmesh 1'", lex.line());

  SpaceTimeMesh mesh;
  const std::size_t nv = read_header(lex, tok, "vertices");
  mesh.vertices.reserve(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    expect_row(lex, tok, "vertices", 3);
    mesh.vertices.push_back(
        {parse_number<double>(tok[0], "vertices", lex.line()), parse_number<double>(tok[1], "vertices", lex.line())});
    const unsigned tag = parse_number<unsigned>(tok[2], "vertices", lex.line());
    if (tag > 15) throw ValidationError("line " + std::to_string(lex.line()) + ": boundary tag out of range");
    mesh.boundary_tags.push_back(static_cast<std::uint8_t>(tag));
  }

  auto check_index = [&](int v, const std::string& section) {
    if (v < 0 || static_cast<std::size_t>(v) >= nv)
      throw ValidationError("line " + std::to_string(lex.line()) + ": vertex index " + std::to_string(v) +
                            " out of range in section '" + section + "'");
    return v;
  };

  const std::size_t nt = read_header(lex, tok, "triangles");
  mesh.triangles.reserve(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    expect_row(lex, tok, "triangles", 4);
    Triangle tri;
    for (int k = 0; k < 3; ++k) tri.v[k] = check_index(parse_number<int>(tok[k], "triangles", lex.line()), "triangles");
    tri.region = parse_number<int>(tok[3], "triangles", lex.line());
    if (tri.region != 1 && tri.region != 2)
      throw ValidationError("line " + std::to_string(lex.line()) + ": region ∉ {1,2}");
    mesh.triangles.push_back(tri);
  }

  const std::size_t ne = read_header(lex, tok, "interface_edges");
  mesh.interface_edges.reserve(ne);
  for (std::size_t i = 0; i < ne; ++i) {
    expect_row(lex, tok, "interface_edges", 2);
    mesh.interface_edges.push_back({check_index(parse_number<int>(tok[0], "interface_edges", lex.line()), "interface_edges"),
                                    check_index(parse_number<int>(tok[1], "interface_edges", lex.line()), "interface_edges")});
  }
  if (lex.next(tok)) throw ParseError("trailing content after section 'interface_edges'", lex.line());
  mesh.h = measure_h(mesh);
  return mesh;
}

SpaceTimeMesh read_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_mesh(in);
}

}  // namespace stcontrol
