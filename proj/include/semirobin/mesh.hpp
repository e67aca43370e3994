#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

namespace semirobin {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Geometry the mesh was generated from.
struct Domain {
  enum class Kind { interval, rectangle };
  Kind kind = Kind::interval;
  double a = 0.0;   ///< interval left end
  double b = 1.0;   ///< interval right end
  double lx = 1.0;  ///< rectangle [0,lx] x [0,ly]
  double ly = 1.0;

  double measure() const { return kind == Kind::interval ? b - a : lx * ly; }
};

/// Boundary side tags. Intervals use left/right only.
enum class Side { left, right, bottom, top };

std::string to_string(Side side);
Side side_from_string(const std::string& name);

/// Piece of the boundary: a single node in 1D (weight 1, counting measure),
/// an edge in 2D (weight = edge length).
struct BoundaryFacet {
  std::array<int, 2> nodes{-1, -1};
  int node_count = 1;
  double weight = 1.0;
  Side side = Side::left;
};

/// One quadrature point of the interior rule, with the P1 shape values of
/// its cell's nodes evaluated there.
struct QuadPoint {
  int cell = 0;
  Point z;
  double weight = 0.0;
  std::array<double, 3> shape{};
};

/// One quadrature point on a boundary facet.
struct BoundaryQuadPoint {
  int facet = 0;
  Point z;
  double weight = 0.0;
  std::array<double, 2> shape{};
};

/// P1 mesh of an interval (segments) or a rectangle (triangles).
///
/// Interior quadrature is the 2-point Gauss rule per segment and the
/// symmetric 3-point rule per triangle; both integrate products of two P1
/// functions exactly. Quadrature points are computed once at construction.
class Mesh {
 public:
  Mesh(int dim, Domain domain, std::vector<Point> nodes, std::vector<int> connectivity,
       std::vector<BoundaryFacet> facets);

  int dim() const { return dim_; }
  const Domain& domain() const { return domain_; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  int cell_count() const { return static_cast<int>(connectivity_.size()) / nodes_per_cell(); }
  int nodes_per_cell() const { return dim_ + 1; }

  const std::vector<Point>& nodes() const { return nodes_; }
  const Point& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  std::span<const int> cell(int e) const {
    return {connectivity_.data() + static_cast<std::size_t>(e * nodes_per_cell()),
            static_cast<std::size_t>(nodes_per_cell())};
  }
  const std::vector<int>& connectivity() const { return connectivity_; }
  const std::vector<BoundaryFacet>& boundary_facets() const { return facets_; }

  /// Length (1D) or area (2D) of a cell.
  double cell_measure(int e) const;
  double total_boundary_weight() const;

  const std::vector<QuadPoint>& quadrature() const { return quad_; }
  const std::vector<BoundaryQuadPoint>& boundary_quadrature() const { return bquad_; }

 private:
  void validate() const;
  void build_quadrature();

  int dim_;
  Domain domain_;
  std::vector<Point> nodes_;
  std::vector<int> connectivity_;
  std::vector<BoundaryFacet> facets_;
  std::vector<QuadPoint> quad_;
  std::vector<BoundaryQuadPoint> bquad_;
};

/// Uniform mesh of [a,b] with n nodes.
Mesh build_interval_mesh(double a, double b, int n);

/// Structured triangulation of [0,lx] x [0,ly] with nx by ny nodes. Every grid
/// cell is split along its lower-left to upper-right diagonal.
Mesh build_rectangle_mesh(double lx, double ly, int nx, int ny);

}  // namespace semirobin
