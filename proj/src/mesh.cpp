#include "semirobin/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "semirobin/errors.hpp"

namespace semirobin {

namespace {

// 2-point Gauss abscissae on [0,1].
constexpr double kGaussLo = 0.21132486540518711775;
constexpr double kGaussHi = 0.78867513459481288225;

}  // namespace

std::string to_string(Side side) {
  switch (side) {
    case Side::left: return "left";
    case Side::right: return "right";
    case Side::bottom: return "bottom";
    case Side::top: return "top";
  }
  return "left";
}

Side side_from_string(const std::string& name) {
  if (name == "left") return Side::left;
  if (name == "right") return Side::right;
  if (name == "bottom") return Side::bottom;
  if (name == "top") return Side::top;
  throw InvalidArgument("unknown boundary side '" + name + "'");
}

Mesh::Mesh(int dim, Domain domain, std::vector<Point> nodes, std::vector<int> connectivity,
           std::vector<BoundaryFacet> facets)
    : dim_(dim),
      domain_(domain),
      nodes_(std::move(nodes)),
      connectivity_(std::move(connectivity)),
      facets_(std::move(facets)) {
  validate();
  build_quadrature();
}

double Mesh::cell_measure(int e) const {
  const auto c = cell(e);
  if (dim_ == 1) return node(c[1]).x - node(c[0]).x;
  const Point& p0 = node(c[0]);
  const Point& p1 = node(c[1]);
  const Point& p2 = node(c[2]);
  return 0.5 * ((p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y));
}

double Mesh::total_boundary_weight() const {
  double total = 0.0;
  for (const auto& f : facets_) total += f.weight;
  return total;
}

void Mesh::validate() const {
  if (dim_ != 1 && dim_ != 2) throw InvalidArgument("mesh dimension must be 1 or 2");
  if (node_count() < 3) throw InvalidArgument("mesh needs at least 3 nodes");
  if (connectivity_.empty() || connectivity_.size() % static_cast<std::size_t>(nodes_per_cell()) != 0)
    throw InvalidArgument("connectivity length is not a multiple of nodes per cell");
  for (int idx : connectivity_)
    if (idx < 0 || idx >= node_count()) throw InvalidArgument("cell node index out of range");
  for (int e = 0; e < cell_count(); ++e)
    if (!(cell_measure(e) > 0.0))
      throw InvalidArgument("cell " + std::to_string(e) + " has nonpositive measure");

  // Boundary facets must cover the topological boundary exactly once.
  std::map<std::pair<int, int>, int> expected;
  if (dim_ == 1) {
    std::vector<int> degree(static_cast<std::size_t>(node_count()), 0);
    for (int idx : connectivity_) ++degree[static_cast<std::size_t>(idx)];
    for (int i = 0; i < node_count(); ++i)
      if (degree[static_cast<std::size_t>(i)] == 1) expected[{i, -1}] = 0;
  } else {
    std::map<std::pair<int, int>, int> edge_use;
    for (int e = 0; e < cell_count(); ++e) {
      const auto c = cell(e);
      for (int k = 0; k < 3; ++k) {
        int i = c[static_cast<std::size_t>(k)];
        int j = c[static_cast<std::size_t>((k + 1) % 3)];
        ++edge_use[{std::min(i, j), std::max(i, j)}];
      }
    }
    for (const auto& [edge, uses] : edge_use)
      if (uses == 1) expected[edge] = 0;
  }
  for (const auto& f : facets_) {
    if (f.node_count != dim_) throw InvalidArgument("boundary facet has wrong node count");
    for (int k = 0; k < f.node_count; ++k)
      if (f.nodes[static_cast<std::size_t>(k)] < 0 || f.nodes[static_cast<std::size_t>(k)] >= node_count())
        throw InvalidArgument("boundary facet node index out of range");
    if (!(f.weight > 0.0)) throw InvalidArgument("boundary facet weight must be positive");
    std::pair<int, int> key = dim_ == 1 ? std::pair{f.nodes[0], -1}
                                        : std::pair{std::min(f.nodes[0], f.nodes[1]),
                                                    std::max(f.nodes[0], f.nodes[1])};
    auto it = expected.find(key);
    if (it == expected.end()) throw InvalidArgument("boundary facet is not on the boundary");
    if (++it->second > 1) throw InvalidArgument("boundary facet listed twice");
  }
  for (const auto& [edge, count] : expected)
    if (count != 1) throw InvalidArgument("boundary facets do not tile the boundary");
}

void Mesh::build_quadrature() {
  quad_.clear();
  bquad_.clear();
  if (dim_ == 1) {
    quad_.reserve(static_cast<std::size_t>(2 * cell_count()));
    for (int e = 0; e < cell_count(); ++e) {
      const auto c = cell(e);
      const double x0 = node(c[0]).x;
      const double h = cell_measure(e);
      for (double s : {kGaussLo, kGaussHi}) {
        QuadPoint q;
        q.cell = e;
        q.z = {x0 + s * h, 0.0};
        q.weight = 0.5 * h;
        q.shape = {1.0 - s, s, 0.0};
        quad_.push_back(q);
      }
    }
    for (int f = 0; f < static_cast<int>(facets_.size()); ++f) {
      const auto& facet = facets_[static_cast<std::size_t>(f)];
      BoundaryQuadPoint q;
      q.facet = f;
      q.z = node(facet.nodes[0]);
      q.weight = facet.weight;
      q.shape = {1.0, 0.0};
      bquad_.push_back(q);
    }
    return;
  }

  constexpr double kMajor = 2.0 / 3.0;
  constexpr double kMinor = 1.0 / 6.0;
  const std::array<std::array<double, 3>, 3> bary{{{kMajor, kMinor, kMinor},
                                                   {kMinor, kMajor, kMinor},
                                                   {kMinor, kMinor, kMajor}}};
  quad_.reserve(static_cast<std::size_t>(3 * cell_count()));
  for (int e = 0; e < cell_count(); ++e) {
    const auto c = cell(e);
    const double area = cell_measure(e);
    for (const auto& l : bary) {
      QuadPoint q;
      q.cell = e;
      q.z = {l[0] * node(c[0]).x + l[1] * node(c[1]).x + l[2] * node(c[2]).x,
             l[0] * node(c[0]).y + l[1] * node(c[1]).y + l[2] * node(c[2]).y};
      q.weight = area / 3.0;
      q.shape = l;
      quad_.push_back(q);
    }
  }
  for (int f = 0; f < static_cast<int>(facets_.size()); ++f) {
    const auto& facet = facets_[static_cast<std::size_t>(f)];
    const Point& p0 = node(facet.nodes[0]);
    const Point& p1 = node(facet.nodes[1]);
    for (double s : {kGaussLo, kGaussHi}) {
      BoundaryQuadPoint q;
      q.facet = f;
      q.z = {p0.x + s * (p1.x - p0.x), p0.y + s * (p1.y - p0.y)};
      q.weight = 0.5 * facet.weight;
      q.shape = {1.0 - s, s};
      bquad_.push_back(q);
    }
  }
}

Mesh build_interval_mesh(double a, double b, int n) {
  if (!(std::isfinite(a) && std::isfinite(b)) || !(a < b))
    throw InvalidArgument("interval mesh requires finite a < b");
  if (n < 3) throw InvalidArgument("interval mesh requires n >= 3 nodes");
  std::vector<Point> nodes(static_cast<std::size_t>(n));
  const double h = (b - a) / (n - 1);
  for (int i = 0; i < n; ++i) nodes[static_cast<std::size_t>(i)] = {a + i * h, 0.0};
  nodes.back().x = b;
  std::vector<int> conn;
  conn.reserve(static_cast<std::size_t>(2 * (n - 1)));
  for (int i = 0; i + 1 < n; ++i) {
    conn.push_back(i);
    conn.push_back(i + 1);
  }
  std::vector<BoundaryFacet> facets{{{0, -1}, 1, 1.0, Side::left}, {{n - 1, -1}, 1, 1.0, Side::right}};
  Domain d;
  d.kind = Domain::Kind::interval;
  d.a = a;
  d.b = b;
  return Mesh(1, d, std::move(nodes), std::move(conn), std::move(facets));
}

Mesh build_rectangle_mesh(double lx, double ly, int nx, int ny) {
  if (!(std::isfinite(lx) && std::isfinite(ly)) || !(lx > 0.0) || !(ly > 0.0))
    throw InvalidArgument("rectangle mesh requires positive finite dimensions");
  if (nx < 2 || ny < 2) throw InvalidArgument("rectangle mesh requires nx, ny >= 2");
  const double hx = lx / (nx - 1);
  const double hy = ly / (ny - 1);
  auto id = [nx](int i, int j) { return j * nx + i; };
  std::vector<Point> nodes;
  nodes.reserve(static_cast<std::size_t>(nx * ny));
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      nodes.push_back({i == nx - 1 ? lx : i * hx, j == ny - 1 ? ly : j * hy});
  std::vector<int> conn;
  conn.reserve(static_cast<std::size_t>(6 * (nx - 1) * (ny - 1)));
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      const int p00 = id(i, j), p10 = id(i + 1, j), p01 = id(i, j + 1), p11 = id(i + 1, j + 1);
      conn.insert(conn.end(), {p00, p10, p11});
      conn.insert(conn.end(), {p00, p11, p01});
    }
  }
  std::vector<BoundaryFacet> facets;
  for (int i = 0; i + 1 < nx; ++i) facets.push_back({{id(i, 0), id(i + 1, 0)}, 2, hx, Side::bottom});
  for (int j = 0; j + 1 < ny; ++j) facets.push_back({{id(nx - 1, j), id(nx - 1, j + 1)}, 2, hy, Side::right});
  for (int i = nx - 1; i > 0; --i) facets.push_back({{id(i, ny - 1), id(i - 1, ny - 1)}, 2, hx, Side::top});
  for (int j = ny - 1; j > 0; --j) facets.push_back({{id(0, j), id(0, j - 1)}, 2, hy, Side::left});
  Domain d;
  d.kind = Domain::Kind::rectangle;
  d.lx = lx;
  d.ly = ly;
  return Mesh(2, d, std::move(nodes), std::move(conn), std::move(facets));
}

}  // namespace semirobin
