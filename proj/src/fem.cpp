#include "semirobin/fem.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "semirobin/errors.hpp"

namespace semirobin {

CoefficientField CoefficientField::constant(double value) {
  CoefficientField f;
  f.kind_ = Kind::constant;
  f.constant_ = value;
  f.label_ = "constant";
  return f;
}

CoefficientField CoefficientField::callable(Function fn, std::string label,
                                            std::vector<Point> singular_points) {
  if (!fn) throw InvalidArgument("empty coefficient callable");
  CoefficientField f;
  f.kind_ = Kind::callable;
  f.fn_ = std::move(fn);
  f.label_ = std::move(label);
  f.singular_ = std::move(singular_points);
  return f;
}

CoefficientField CoefficientField::nodal(std::vector<double> values) {
  CoefficientField f;
  f.kind_ = Kind::nodal;
  f.nodal_ = std::make_shared<const std::vector<double>>(std::move(values));
  f.label_ = "nodal";
  return f;
}

CoefficientField CoefficientField::per_side(double left, double right, double bottom, double top) {
  CoefficientField f;
  f.kind_ = Kind::sides;
  f.sides_ = {left, right, bottom, top};
  f.label_ = "per-side";
  return f;
}

double CoefficientField::evaluate(const Point& z, std::span<const int> nodes,
                                  std::span<const double> shape, std::optional<Side> side) const {
  switch (kind_) {
    case Kind::sides:
      if (!side) throw InvalidArgument("per-side coefficient evaluated away from the boundary");
      return sides_[static_cast<std::size_t>(*side)];
    case Kind::constant: return constant_;
    case Kind::callable: return fn_(z);
    case Kind::nodal: {
      double v = 0.0;
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        const int i = nodes[k];
        if (i < 0) continue;
        if (static_cast<std::size_t>(i) >= nodal_->size())
          throw InvalidArgument("nodal coefficient has fewer values than mesh nodes");
        v += shape[k] * (*nodal_)[static_cast<std::size_t>(i)];
      }
      return v;
    }
  }
  return 0.0;
}

SymmetricForm::SymmetricForm(const SparseMatrix& any) {
  SparseMatrix upper = any.triangularView<Eigen::Upper>();
  SparseMatrix strict = any.triangularView<Eigen::StrictlyUpper>();
  matrix_ = upper + SparseMatrix(strict.transpose());
  matrix_.makeCompressed();
}

SymmetricForm SymmetricForm::from_triplets(int order, const std::vector<Eigen::Triplet<double>>& triplets) {
  SparseMatrix m(order, order);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return SymmetricForm(m);
}

SymmetricForm SymmetricForm::operator+(const SymmetricForm& other) const {
  if (order() != other.order()) throw InvalidArgument("form order mismatch");
  return SymmetricForm(SparseMatrix(matrix_ + other.matrix_));
}

SymmetricForm SymmetricForm::operator-(const SymmetricForm& other) const {
  if (order() != other.order()) throw InvalidArgument("form order mismatch");
  return SymmetricForm(SparseMatrix(matrix_ - other.matrix_));
}

SymmetricForm SymmetricForm::scaled(double factor) const {
  return SymmetricForm(SparseMatrix(factor * matrix_));
}

namespace {

void check_singularities(const Mesh& mesh, const CoefficientField& field) {
  if (field.singular_points().empty()) return;
  const double scale = mesh.domain().kind == Domain::Kind::interval
                           ? mesh.domain().b - mesh.domain().a
                           : std::max(mesh.domain().lx, mesh.domain().ly);
  for (const auto& q : mesh.quadrature())
    for (const auto& s : field.singular_points())
      if (std::hypot(q.z.x - s.x, q.z.y - s.y) <= 1e-14 * scale)
        throw HypothesisError("H(xi)", "quadrature point coincides with a declared singularity of " +
                                           field.label());
}

// Weighted mass matrix: integral of w phi_i phi_j. Local contributions are
// summed per cell in fixed order, then reduced by setFromTriplets.
SymmetricForm weighted_mass(const Mesh& mesh, const CoefficientField* weight) {
  const int npc = mesh.nodes_per_cell();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.cell_count() * npc * npc));
  const auto& quad = mesh.quadrature();
  std::size_t qi = 0;
  for (int e = 0; e < mesh.cell_count(); ++e) {
    const auto c = mesh.cell(e);
    double local[3][3] = {};
    for (; qi < quad.size() && quad[qi].cell == e; ++qi) {
      const auto& q = quad[qi];
      double w = q.weight;
      if (weight != nullptr) {
        const double value = weight->evaluate(q.z, c, std::span<const double>(q.shape.data(), c.size()));
        if (!std::isfinite(value))
          throw HypothesisError("H(xi)", "coefficient " + weight->label() + " is not finite at a quadrature point");
        w *= value;
      }
      for (int a = 0; a < npc; ++a)
        for (int b = a; b < npc; ++b) local[a][b] += w * q.shape[static_cast<std::size_t>(a)] * q.shape[static_cast<std::size_t>(b)];
    }
    for (int a = 0; a < npc; ++a)
      for (int b = a; b < npc; ++b) {
        int i = c[static_cast<std::size_t>(a)], j = c[static_cast<std::size_t>(b)];
        if (i > j) std::swap(i, j);
        triplets.emplace_back(i, j, local[a][b]);
      }
  }
  return SymmetricForm::from_triplets(mesh.node_count(), triplets);
}

}  // namespace

SymmetricForm assemble_mass(const Mesh& mesh) { return weighted_mass(mesh, nullptr); }

SymmetricForm assemble_stiffness(const Mesh& mesh) {
  const int npc = mesh.nodes_per_cell();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.cell_count() * npc * npc));
  for (int e = 0; e < mesh.cell_count(); ++e) {
    const auto c = mesh.cell(e);
    const double meas = mesh.cell_measure(e);
    double gx[3] = {}, gy[3] = {};
    if (mesh.dim() == 1) {
      gx[0] = -1.0 / meas;
      gx[1] = 1.0 / meas;
    } else {
      const Point& p0 = mesh.node(c[0]);
      const Point& p1 = mesh.node(c[1]);
      const Point& p2 = mesh.node(c[2]);
      const double two_area = 2.0 * meas;
      gx[0] = (p1.y - p2.y) / two_area;
      gx[1] = (p2.y - p0.y) / two_area;
      gx[2] = (p0.y - p1.y) / two_area;
      gy[0] = (p2.x - p1.x) / two_area;
      gy[1] = (p0.x - p2.x) / two_area;
      gy[2] = (p1.x - p0.x) / two_area;
    }
    for (int a = 0; a < npc; ++a)
      for (int b = a; b < npc; ++b) {
        int i = c[static_cast<std::size_t>(a)], j = c[static_cast<std::size_t>(b)];
        if (i > j) std::swap(i, j);
        triplets.emplace_back(i, j, meas * (gx[a] * gx[b] + gy[a] * gy[b]));
      }
  }
  return SymmetricForm::from_triplets(mesh.node_count(), triplets);
}

SymmetricForm assemble_potential(const Mesh& mesh, const CoefficientField& xi) {
  check_singularities(mesh, xi);
  return weighted_mass(mesh, &xi);
}

SymmetricForm assemble_boundary(const Mesh& mesh, const CoefficientField& beta) {
  std::vector<Eigen::Triplet<double>> triplets;
  const auto& facets = mesh.boundary_facets();
  for (const auto& q : mesh.boundary_quadrature()) {
    const auto& f = facets[static_cast<std::size_t>(q.facet)];
    const std::span<const int> nodes(f.nodes.data(), static_cast<std::size_t>(f.node_count));
    const std::span<const double> shape(q.shape.data(), static_cast<std::size_t>(f.node_count));
    const double value = beta.evaluate(q.z, nodes, shape, f.side);
    if (!std::isfinite(value) || value < 0.0)
      throw HypothesisError("H(beta)", "boundary coefficient must be finite and nonnegative, got " +
                                           std::to_string(value) + " at (" + std::to_string(q.z.x) +
                                           ", " + std::to_string(q.z.y) + ")");
    for (int a = 0; a < f.node_count; ++a)
      for (int b = a; b < f.node_count; ++b) {
        int i = f.nodes[static_cast<std::size_t>(a)], j = f.nodes[static_cast<std::size_t>(b)];
        if (i > j) std::swap(i, j);
        triplets.emplace_back(i, j, q.weight * value * q.shape[static_cast<std::size_t>(a)] * q.shape[static_cast<std::size_t>(b)]);
      }
  }
  return SymmetricForm::from_triplets(mesh.node_count(), triplets);
}

SymmetricForm compose_gamma(const SymmetricForm& stiffness, const SymmetricForm& potential,
                            const SymmetricForm& boundary) {
  if (stiffness.order() != potential.order() || stiffness.order() != boundary.order())
    throw InvalidArgument("compose_gamma: form order mismatch");
  return stiffness + potential + boundary;
}

SymmetricForm compose_h1(const SymmetricForm& mass, const SymmetricForm& stiffness) {
  if (mass.order() != stiffness.order()) throw InvalidArgument("compose_h1: form order mismatch");
  return mass + stiffness;
}

Discretization discretize(Mesh mesh, CoefficientField xi, CoefficientField beta) {
  SymmetricForm m = assemble_mass(mesh);
  SymmetricForm k = assemble_stiffness(mesh);
  SymmetricForm p = assemble_potential(mesh, xi);
  SymmetricForm b = assemble_boundary(mesh, beta);
  SymmetricForm g = compose_gamma(k, p, b);
  SymmetricForm a = compose_h1(m, k);
  return Discretization{std::move(mesh), std::move(xi), std::move(beta), std::move(m), std::move(k),
                        std::move(p),    std::move(b),  std::move(g),    std::move(a)};
}

void for_each_sample(const Mesh& mesh, const CoefficientField& field,
                     const std::function<void(const QuadPoint&, double)>& fn) {
  for (const auto& q : mesh.quadrature()) {
    const auto c = mesh.cell(q.cell);
    fn(q, field.evaluate(q.z, c, std::span<const double>(q.shape.data(), c.size())));
  }
}

std::pair<double, double> field_range(const Mesh& mesh, const CoefficientField& field) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for_each_sample(mesh, field, [&](const QuadPoint&, double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  });
  return {lo, hi};
}

}  // namespace semirobin
