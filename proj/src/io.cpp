#include "stcontrol/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "stcontrol/errors.hpp"

namespace stcontrol {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return in;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double to_double(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("bad number '" + s + "'", line);
  }
}

}  // namespace

void write_solution_csv(const SpaceTimeMesh& mesh, const DiscreteSolution& sol, const DenseVector& z_f,
                        const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "vertex_id,x,t,u,p,z_f\n";
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    out << i << ',' << fmt17(mesh.vertices[i].x) << ',' << fmt17(mesh.vertices[i].t) << ',' << fmt17(sol.u[k]) << ','
        << fmt17(sol.p[k]) << ',' << fmt17(z_f[k]) << '\n';
  }
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

SolutionTable read_solution_csv(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line != "vertex_id,x,t,u,p,z_f") throw ParseError("bad solution CSV header", 1);
  std::vector<std::array<double, 5>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 6) throw ParseError("expected 6 columns", line_no);
    if (std::stol(cells[0]) != static_cast<long>(rows.size())) throw ParseError("vertex ids must be consecutive", line_no);
    rows.push_back({to_double(cells[1], line_no), to_double(cells[2], line_no), to_double(cells[3], line_no),
                    to_double(cells[4], line_no), to_double(cells[5], line_no)});
  }
  SolutionTable table;
  const auto n = static_cast<Eigen::Index>(rows.size());
  table.u.resize(n);
  table.p.resize(n);
  table.z_f.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    table.points.push_back({rows[i][0], rows[i][1]});
    table.u[i] = rows[i][2];
    table.p[i] = rows[i][3];
    table.z_f[i] = rows[i][4];
  }
  return table;
}

void write_convergence_csv(const ConvergenceReport& report, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "dofs,h,error,order\n";
  for (const ConvergenceRow& row : report.rows) {
    out << row.dofs << ',' << fmt17(row.h) << ',' << fmt17(row.error) << ',';
    if (row.order) out << fmt17(*row.order);
    out << '\n';
  }
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

ConvergenceReport read_convergence_csv(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line != "dofs,h,error,order") throw ParseError("bad convergence CSV header", 1);
  ConvergenceReport report;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 4) throw ParseError("expected 4 columns", line_no);
    ConvergenceRow row;
    row.dofs = std::stol(cells[0]);
    row.h = to_double(cells[1], line_no);
    row.error = to_double(cells[2], line_no);
    if (!cells[3].empty()) row.order = to_double(cells[3], line_no);
    report.rows.push_back(row);
  }
  return report;
}

namespace {

std::string diverging_color(double value, double scale) {
  const double s = scale > 0.0 ? std::clamp(value / scale, -1.0, 1.0) : 0.0;
  // white at zero, blue (59,76,192) for negative, red (180,4,38) for positive
  const double r0 = s < 0 ? 59 : 180, g0 = s < 0 ? 76 : 4, b0 = s < 0 ? 192 : 38;
  const double a = std::abs(s);
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(255 + a * (r0 - 255)),
                static_cast<int>(255 + a * (g0 - 255)), static_cast<int>(255 + a * (b0 - 255)));
  return buf;
}

}  // namespace

void write_field_svg(const SpaceTimeMesh& mesh, const DenseVector& values, const std::string& title,
                     const std::filesystem::path& path) {
  if (mesh.vertices.empty()) throw IoError("write_field_svg: empty mesh");
  double x0 = mesh.vertices[0].x, x1 = x0, t0 = mesh.vertices[0].t, t1 = t0;
  for (const Point& p : mesh.vertices) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    t0 = std::min(t0, p.t);
    t1 = std::max(t1, p.t);
  }
  constexpr double size = 600.0, margin = 40.0;
  const double sx = size / (x1 - x0), st = size / (t1 - t0);
  const double scale = values.size() ? values.cwiseAbs().maxCoeff() : 0.0;
  std::ofstream out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size + 2 * margin << "\" height=\""
      << size + 2 * margin << "\">\n";
  out << "<text x=\"" << margin << "\" y=\"" << margin * 0.6 << "\" font-family=\"sans-serif\" font-size=\"14\">"
      << title << " (max |value| = " << scale << ")</text>\n";
  for (const Triangle& tri : mesh.triangles) {
    const double avg = (values[tri.v[0]] + values[tri.v[1]] + values[tri.v[2]]) / 3.0;
    out << "<polygon points=\"";
    for (int v : tri.v) {
      // t increases upwards
      out << margin + (mesh.vertices[v].x - x0) * sx << ',' << margin + size - (mesh.vertices[v].t - t0) * st << ' ';
    }
    const std::string color = diverging_color(avg, scale);
    out << "\" fill=\"" << color << "\" stroke=\"" << color << "\" stroke-width=\"0.3\"/>\n";
  }
  for (const Edge& e : mesh.interface_edges) {
    const Point& a = mesh.vertices[e[0]];
    const Point& b = mesh.vertices[e[1]];
    out << "<line x1=\"" << margin + (a.x - x0) * sx << "\" y1=\"" << margin + size - (a.t - t0) * st << "\" x2=\""
        << margin + (b.x - x0) * sx << "\" y2=\"" << margin + size - (b.t - t0) * st
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  }
  out << "</svg>\n";
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

void write_convergence_svg(const ConvergenceReport& report, const std::filesystem::path& path) {
  if (report.rows.empty()) throw IoError("write_convergence_svg: empty report");
  double lh0 = 1e300, lh1 = -1e300, le0 = 1e300, le1 = -1e300;
  for (const auto& row : report.rows) {
    lh0 = std::min(lh0, std::log10(row.h));
    lh1 = std::max(lh1, std::log10(row.h));
    le0 = std::min(le0, std::log10(row.error));
    le1 = std::max(le1, std::log10(row.error));
  }
  lh0 -= 0.1, lh1 += 0.1, le0 -= 0.1, le1 += 0.1;
  constexpr double w = 500.0, hgt = 400.0, m = 50.0;
  auto px = [&](double h) { return m + (std::log10(h) - lh0) / (lh1 - lh0) * w; };
  auto py = [&](double e) { return m + hgt - (std::log10(e) - le0) / (le1 - le0) * hgt; };
  std::ofstream out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w + 2 * m << "\" height=\"" << hgt + 2 * m << "\">\n";
  out << "<rect x=\"" << m << "\" y=\"" << m << "\" width=\"" << w << "\" height=\"" << hgt
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << m << "\" y=\"" << m * 0.6 << "\" font-family=\"sans-serif\" font-size=\"14\">" << report.preset
      << ": " << report.metric << " error vs h (log-log)</text>\n";
  out << "<polyline fill=\"none\" stroke=\"#b40426\" stroke-width=\"2\" points=\"";
  for (const auto& row : report.rows) out << px(row.h) << ',' << py(row.error) << ' ';
  out << "\"/>\n";
  for (const auto& row : report.rows)
    out << "<circle cx=\"" << px(row.h) << "\" cy=\"" << py(row.error) << "\" r=\"4\" fill=\"#3b4cc0\"/>\n";
  out << "</svg>\n";
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace stcontrol
