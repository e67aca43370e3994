#include "semirobin/subspaces.hpp"

#include "semirobin/errors.hpp"

namespace semirobin {

std::string to_string(Block block) {
  switch (block) {
    case Block::concave: return "concave";
    case Block::resonant: return "resonant";
    case Block::upper: return "upper";
    case Block::reduced: return "reduced";
    case Block::linking: return "linking";
    case Block::tail: return "tail";
  }
  return "concave";
}

SubspaceSplit::SubspaceSplit(const EigenDecomposition& decomp, const SymmetricForm& mass, int m, int l)
    : m_(m), l_(l) {
  if (m < 1) throw InvalidArgument("split index m must be >= 1");
  if (l < m + 2)
    throw HypothesisError("H(f)(iv)", "need l >= m + 2, got m = " + std::to_string(m) +
                                          ", l = " + std::to_string(l));
  if (!decomp.complete())
    throw InvalidArgument("subspace split needs the complete eigendecomposition");
  if (decomp.cluster_count() < l)
    throw InvalidArgument("only " + std::to_string(decomp.cluster_count()) + " clusters available, need " +
                          std::to_string(l) + "; use a finer mesh");
  if (mass.order() != decomp.order()) throw InvalidArgument("mass order does not match decomposition");

  basis_ = decomp.vectors;
  values_ = decomp.values;
  mass_basis_ = mass.matrix() * basis_;
  concave_end_ = decomp.columns_through(m);
  resonant_end_ = decomp.columns_through(m + 1);
  tail_begin_ = decomp.cluster(l).first;
  lambda_m_ = decomp.distinct_value(m);
  lambda_m1_ = decomp.distinct_value(m + 1);
  lambda_l1_ = decomp.distinct_value(l - 1);
  lambda_l_ = decomp.distinct_value(l);
}

std::pair<int, int> SubspaceSplit::range(Block block) const {
  const int n = order();
  switch (block) {
    case Block::concave: return {0, concave_end_};
    case Block::resonant: return {concave_end_, resonant_end_ - concave_end_};
    case Block::upper: return {resonant_end_, n - resonant_end_};
    case Block::reduced: return {concave_end_, n - concave_end_};
    case Block::linking: return {concave_end_, tail_begin_ - concave_end_};
    case Block::tail: return {tail_begin_, n - tail_begin_};
  }
  return {0, 0};
}

int SubspaceSplit::offset_in(Block inner, Block outer) const {
  const auto [fi, wi] = range(inner);
  const auto [fo, wo] = range(outer);
  if (fi < fo || fi + wi > fo + wo)
    throw InvalidArgument(to_string(inner) + " is not contained in " + to_string(outer));
  return fi - fo;
}

Vector SubspaceSplit::coordinates(Block block, const Vector& u) const {
  if (u.size() != order()) throw InvalidArgument("vector order does not match split");
  const auto [first, width] = range(block);
  return mass_basis_.middleCols(first, width).transpose() * u;
}

Vector SubspaceSplit::project(Block block, const Vector& u) const {
  return lift(block, coordinates(block, u));
}

std::tuple<Vector, Vector, Vector> SubspaceSplit::components(const Vector& u) const {
  if (u.size() != order()) throw InvalidArgument("vector order does not match split");
  Vector lower = project(Block::concave, u);
  Vector middle = project(Block::resonant, u);
  // The upper component is the remainder, so the three parts sum to u exactly
  // up to rounding.
  Vector upper = u - lower - middle;
  return {std::move(lower), std::move(middle), std::move(upper)};
}

Vector SubspaceSplit::lift(Block block, const Vector& coeffs) const {
  const auto [first, width] = range(block);
  if (coeffs.size() != width)
    throw InvalidArgument("lift: " + std::to_string(coeffs.size()) + " coefficients for a block of dimension " +
                          std::to_string(width));
  if (width == 0) return Vector::Zero(order());
  return basis_.middleCols(first, width) * coeffs;
}

}  // namespace semirobin
