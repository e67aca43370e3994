#pragma once

#include <string>
#include <tuple>

#include "semirobin/fem.hpp"
#include "semirobin/spectrum.hpp"

namespace semirobin {

/// Spectral blocks of the splitting around the resonant eigenvalue.
///
///   concave   clusters 1..m        (the block the reduction maximizes over)
///   resonant  cluster m+1
///   upper     clusters >= m+2
///   reduced   resonant + upper     (domain of the reduced functional)
///   linking   clusters m+1..l-1
///   tail      clusters >= l
///
/// Because eigenvectors are stored in ascending order, every block is a
/// contiguous range of columns of the eigenvector matrix.
enum class Block { concave, resonant, upper, reduced, linking, tail };

std::string to_string(Block block);

/// M-orthogonal splitting of the discrete space built from a complete
/// eigendecomposition. Immutable after construction.
class SubspaceSplit {
 public:
  /// Requires l >= m + 2 (H(f)(iv)) and a complete decomposition with at
  /// least l clusters.
  SubspaceSplit(const EigenDecomposition& decomp, const SymmetricForm& mass, int m, int l);

  int m() const { return m_; }
  int l() const { return l_; }
  int order() const { return static_cast<int>(basis_.rows()); }

  /// First column and width of a block.
  std::pair<int, int> range(Block block) const;
  int dimension(Block block) const { return range(block).second; }

  /// Full eigenvector matrix, M-orthonormal columns.
  const DenseMatrix& basis() const { return basis_; }
  auto basis(Block block) const {
    const auto [first, width] = range(block);
    return basis_.middleCols(first, width);
  }
  const Vector& eigenvalues() const { return values_; }

  /// Coordinates of u in the full eigenbasis: basis' M u.
  Vector coordinates(const Vector& u) const { return mass_basis_.transpose() * u; }
  /// Coordinates of u in one block.
  Vector coordinates(Block block, const Vector& u) const;

  /// M-orthogonal projection onto a block.
  Vector project(Block block, const Vector& u) const;

  /// (concave, resonant, upper) components; they sum to u.
  std::tuple<Vector, Vector, Vector> components(const Vector& u) const;

  /// Linear combination of a block's basis vectors.
  Vector lift(Block block, const Vector& coeffs) const;

  /// Offset of `inner` inside `outer` (e.g. linking inside reduced), in columns.
  int offset_in(Block inner, Block outer) const;

  /// Distinct eigenvalues bounding the blocks: lambda_m, lambda_{m+1},
  /// lambda_{l-1}, lambda_l.
  double lambda_m() const { return lambda_m_; }
  double lambda_m1() const { return lambda_m1_; }
  double lambda_l1() const { return lambda_l1_; }
  double lambda_l() const { return lambda_l_; }

 private:
  int m_;
  int l_;
  DenseMatrix basis_;
  DenseMatrix mass_basis_;  // M * basis
  Vector values_;
  int concave_end_;
  int resonant_end_;
  int tail_begin_;
  double lambda_m_, lambda_m1_, lambda_l1_, lambda_l_;
};

}  // namespace semirobin
