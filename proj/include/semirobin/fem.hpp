#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <array>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "semirobin/mesh.hpp"

namespace semirobin {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Scalar field on the domain or its boundary, evaluated at quadrature points.
///
/// A constant, a callable of the point, nodal samples interpolated piecewise
/// linearly, or (boundary only) one constant per side. A callable may declare isolated
/// singular points; construction of a form fails if a quadrature point lands
/// on one of them.
class CoefficientField {
 public:
  using Function = std::function<double(const Point&)>;

  CoefficientField() = default;

  static CoefficientField constant(double value);
  static CoefficientField callable(Function fn, std::string label = "callable",
                                   std::vector<Point> singular_points = {});
  static CoefficientField nodal(std::vector<double> values);
  /// Boundary coefficient that is constant on each side of the domain.
  static CoefficientField per_side(double left, double right, double bottom = 0.0, double top = 0.0);

  /// Value at point `z` lying in the cell/facet with the given nodes and P1
  /// shape values there. `side` is required for per-side fields.
  double evaluate(const Point& z, std::span<const int> nodes, std::span<const double> shape,
                  std::optional<Side> side = std::nullopt) const;

  bool is_constant() const { return kind_ == Kind::constant; }
  double constant_value() const { return constant_; }
  const std::string& label() const { return label_; }
  const std::vector<Point>& singular_points() const { return singular_; }

 private:
  enum class Kind { constant, callable, nodal, sides };
  Kind kind_ = Kind::constant;
  double constant_ = 0.0;
  Function fn_;
  std::shared_ptr<const std::vector<double>> nodal_;
  std::vector<Point> singular_;
  std::array<double, 4> sides_{};
  std::string label_ = "constant";
};

/// Sparse symmetric matrix of a bilinear form on the P1 space.
///
/// Only the upper triangle is taken from the input; the lower triangle is its
/// mirror, so the stored matrix is exactly symmetric.
class SymmetricForm {
 public:
  SymmetricForm() = default;
  explicit SymmetricForm(const SparseMatrix& any);
  static SymmetricForm from_triplets(int order, const std::vector<Eigen::Triplet<double>>& triplets);

  int order() const { return static_cast<int>(matrix_.rows()); }
  const SparseMatrix& matrix() const { return matrix_; }
  DenseMatrix dense() const { return DenseMatrix(matrix_); }

  Vector apply(const Vector& u) const { return matrix_ * u; }
  double quadratic(const Vector& u) const { return u.dot(matrix_ * u); }
  double bilinear(const Vector& u, const Vector& v) const { return u.dot(matrix_ * v); }

  SymmetricForm operator+(const SymmetricForm& other) const;
  SymmetricForm operator-(const SymmetricForm& other) const;
  SymmetricForm scaled(double factor) const;

 private:
  SparseMatrix matrix_;
};

/// M_ij = integral of phi_i phi_j.
SymmetricForm assemble_mass(const Mesh& mesh);
/// K_ij = integral of grad phi_i . grad phi_j.
SymmetricForm assemble_stiffness(const Mesh& mesh);
/// Xi_ij = integral of xi phi_i phi_j by interior quadrature.
SymmetricForm assemble_potential(const Mesh& mesh, const CoefficientField& xi);
/// B_ij = boundary integral of beta phi_i phi_j. Rejects negative beta (H(beta)).
SymmetricForm assemble_boundary(const Mesh& mesh, const CoefficientField& beta);

/// G = K + Xi + B, the matrix of the quadratic form gamma.
SymmetricForm compose_gamma(const SymmetricForm& stiffness, const SymmetricForm& potential,
                            const SymmetricForm& boundary);
/// A = M + K, the Gram matrix of the H1 inner product.
SymmetricForm compose_h1(const SymmetricForm& mass, const SymmetricForm& stiffness);

/// Mesh, coefficient fields and every assembled form of one problem.
struct Discretization {
  Mesh mesh;
  CoefficientField xi;
  CoefficientField beta;
  SymmetricForm mass;
  SymmetricForm stiffness;
  SymmetricForm potential;
  SymmetricForm boundary;
  SymmetricForm gamma;
  SymmetricForm h1;

  int order() const { return mesh.node_count(); }
};

Discretization discretize(Mesh mesh, CoefficientField xi, CoefficientField beta);

/// Smallest and largest value of `field` over the interior quadrature points.
std::pair<double, double> field_range(const Mesh& mesh, const CoefficientField& field);

/// Applies `fn(q, value)` to each interior quadrature point.
void for_each_sample(const Mesh& mesh, const CoefficientField& field,
                     const std::function<void(const QuadPoint&, double)>& fn);

}  // namespace semirobin
