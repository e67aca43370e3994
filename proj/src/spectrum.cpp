#include "semirobin/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "semirobin/rng.hpp"

namespace semirobin {

const Cluster& EigenDecomposition::cluster(int k) const {
  if (k < 1 || k > cluster_count())
    throw InvalidArgument("distinct eigenvalue " + std::to_string(k) + " was not computed (have " +
                          std::to_string(cluster_count()) + ")");
  return clusters[static_cast<std::size_t>(k - 1)];
}

int EigenDecomposition::columns_through(int k) const {
  if (k <= 0) return 0;
  const Cluster& c = cluster(k);
  return c.first + c.size;
}

std::string to_string(EigenMethod method) {
  switch (method) {
    case EigenMethod::automatic: return "auto";
    case EigenMethod::dense: return "dense";
    case EigenMethod::lanczos: return "lanczos";
  }
  return "auto";
}

std::string to_string(GapSide side) { return side == GapSide::lower ? "lower" : "upper"; }

std::vector<Cluster> cluster_eigenvalues(const Vector& values, double tol) {
  std::vector<Cluster> out;
  const int n = static_cast<int>(values.size());
  int start = 0;
  for (int i = 1; i <= n; ++i) {
    const bool split = i == n || values[i] - values[i - 1] >= tol * (1.0 + std::abs(values[i]));
    if (!split) continue;
    Cluster c;
    c.first = start;
    c.size = i - start;
    c.value = values.segment(start, c.size).mean();
    out.push_back(c);
    start = i;
  }
  return out;
}

namespace {

void normalize_signs(DenseMatrix& vectors) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    Eigen::Index arg = 0;
    vectors.col(j).cwiseAbs().maxCoeff(&arg);
    if (vectors(arg, j) < 0.0) vectors.col(j) *= -1.0;
  }
}

EigenDecomposition dense_pencil(const SymmetricForm& stiff, const SymmetricForm& mass, int count) {
  Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> solver(stiff.dense(), mass.dense(),
                                                               Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (solver.info() != Eigen::Success)
    throw ConvergenceError("dense generalized eigensolver failed (is the mass matrix positive definite?)",
                           std::numeric_limits<double>::infinity());
  EigenDecomposition d;
  d.values = solver.eigenvalues().head(count);
  d.vectors = solver.eigenvectors().leftCols(count);
  return d;
}

// Returns true when mat is numerically positive definite, judged by the pivots
// of its LDL^T factorization.
bool positive_definite(const Eigen::SimplicialLDLT<SparseMatrix>& ldlt) {
  if (ldlt.info() != Eigen::Success) return false;
  const Vector d = ldlt.vectorD();
  return d.minCoeff() > 0.0;
}

// M-orthonormalizes the columns of block against basis and among themselves
// (two Gram-Schmidt passes). Columns that collapse are dropped.
DenseMatrix orthonormalize_block(const DenseMatrix& basis, DenseMatrix block, const SparseMatrix& mass) {
  const Eigen::Index cols = basis.cols();
  for (int pass = 0; pass < 2; ++pass)
    if (cols > 0) block -= basis * (basis.transpose() * (mass * block));
  DenseMatrix out(block.rows(), 0);
  for (Eigen::Index j = 0; j < block.cols(); ++j) {
    Vector x = block.col(j);
    const double before = std::sqrt(std::max(0.0, x.dot(mass * x)));
    for (int pass = 0; pass < 2; ++pass) {
      if (cols > 0) x -= basis * (basis.transpose() * (mass * x));
      if (out.cols() > 0) x -= out * (out.transpose() * (mass * x));
    }
    const double after = std::sqrt(std::max(0.0, x.dot(mass * x)));
    if (!(after > 1e-10 * before) || after == 0.0) continue;
    out.conservativeResize(Eigen::NoChange, out.cols() + 1);
    out.col(out.cols() - 1) = x / after;
  }
  return out;
}

EigenDecomposition lanczos_pencil(const SymmetricForm& stiff, const SymmetricForm& mass, int count,
                                  const PencilOptions& options) {
  const int n = stiff.order();
  const SparseMatrix& g = stiff.matrix();
  const SparseMatrix& m = mass.matrix();

  // Shift below the spectrum: decrease sigma until G - sigma M is positive
  // definite (Sylvester inertia from the LDL^T pivots).
  const double scale = std::max(1.0, g.diagonal().cwiseAbs().maxCoeff() / m.diagonal().maxCoeff());
  double sigma = -1e-3 * scale;
  Eigen::SimplicialLDLT<SparseMatrix> shifted;
  for (int attempt = 0;; ++attempt) {
    shifted.compute(SparseMatrix(g - sigma * m));
    if (positive_definite(shifted)) break;
    if (attempt > 80) throw ConvergenceError("could not find a shift below the spectrum", sigma);
    sigma = sigma < 0.0 ? 2.0 * sigma : -1.0;
  }

  const int block = std::clamp(count, 4, 8);
  const int max_basis = std::min(n, std::max(20 * count + 200, 400));
  Rng rng(options.seed);
  auto random_block = [&](int cols) {
    DenseMatrix x(n, cols);
    for (int j = 0; j < cols; ++j) x.col(j) = rng.normal_vector(n);
    return x;
  };

  DenseMatrix basis(n, 0);
  DenseMatrix next = random_block(block);
  EigenDecomposition best;
  double worst = std::numeric_limits<double>::infinity();
  while (true) {
    DenseMatrix fresh = orthonormalize_block(basis, next, m);
    if (fresh.cols() == 0) {
      if (basis.cols() >= n) break;
      fresh = orthonormalize_block(basis, random_block(block), m);
      if (fresh.cols() == 0) break;
    }
    basis.conservativeResize(Eigen::NoChange, basis.cols() + fresh.cols());
    basis.rightCols(fresh.cols()) = fresh;

    if (basis.cols() >= std::min(n, count + block)) {
      // Rayleigh-Ritz on the Krylov basis.
      const DenseMatrix projected = basis.transpose() * (g * basis);
      Eigen::SelfAdjointEigenSolver<DenseMatrix> ritz(0.5 * (projected + projected.transpose()));
      const int k = std::min<int>(count, static_cast<int>(basis.cols()));
      EigenDecomposition d;
      d.values = ritz.eigenvalues().head(k);
      d.vectors = basis * ritz.eigenvectors().leftCols(k);
      worst = 0.0;
      for (int j = 0; j < k; ++j) {
        const Vector r = g * d.vectors.col(j) - d.values[j] * (m * d.vectors.col(j));
        worst = std::max(worst, r.norm());
      }
      best = std::move(d);
      if (k == count && worst <= 0.1 * options.residual_tol) break;
      if (basis.cols() >= max_basis) break;
    }
    // Next block of the shift-invert Krylov sequence.
    next = shifted.solve(m * fresh);
  }
  if (best.count() < count || worst > options.residual_tol)
    throw ConvergenceError("shift-invert Lanczos did not converge; worst residual " + std::to_string(worst),
                           worst);
  return best;
}

}  // namespace

EigenDecomposition solve_pencil(const SymmetricForm& stiff, const SymmetricForm& mass, int count,
                                const PencilOptions& options) {
  const int n = stiff.order();
  if (mass.order() != n) throw InvalidArgument("solve_pencil: form order mismatch");
  if (count < 1 || count > n) throw InvalidArgument("solve_pencil: requested count must be in [1, n]");

  EigenMethod method = options.method;
  if (method == EigenMethod::automatic)
    method = n <= options.dense_limit ? EigenMethod::dense : EigenMethod::lanczos;
  EigenDecomposition d = method == EigenMethod::dense ? dense_pencil(stiff, mass, count)
                                                      : lanczos_pencil(stiff, mass, count, options);
  normalize_signs(d.vectors);
  d.cluster_tol = options.cluster_tol;
  d.residuals.resize(d.count());
  for (int j = 0; j < d.count(); ++j) {
    const Vector x = d.vectors.col(j);
    d.residuals[j] = (stiff.apply(x) - d.values[j] * mass.apply(x)).norm();
  }
  const double worst = d.residuals.size() > 0 ? d.residuals.maxCoeff() : 0.0;
  if (!(worst <= options.residual_tol))
    throw ConvergenceError("eigenpair residual " + std::to_string(worst) + " exceeds tolerance", worst);
  d.clusters = cluster_eigenvalues(d.values, options.cluster_tol);
  for (auto& c : d.clusters) c.max_residual = d.residuals.segment(c.first, c.size).maxCoeff();
  return d;
}

FirstEigenReport first_eigen_report(const EigenDecomposition& decomp) {
  FirstEigenReport r;
  if (decomp.cluster_count() < 2) throw InvalidArgument("first_eigen_report needs at least two clusters");
  const Cluster& first = decomp.cluster(1);
  r.simple = first.size == 1;

  auto sign_pattern = [&](int col) {
    const auto v = decomp.vectors.col(col);
    const double tiny = 1e-12 * v.cwiseAbs().maxCoeff();
    bool pos = false, neg = false, zero = false;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (v[i] > tiny)
        pos = true;
      else if (v[i] < -tiny)
        neg = true;
      else
        zero = true;
    }
    return std::tuple{pos, neg, zero};
  };

  {
    auto [pos, neg, zero] = sign_pattern(first.first);
    r.fixed_sign = !zero && (pos != neg);
  }
  r.higher_nodal = true;
  for (int k = 2; k <= decomp.cluster_count(); ++k) {
    const Cluster& c = decomp.cluster(k);
    for (int j = c.first; j < c.first + c.size; ++j) {
      auto [pos, neg, zero] = sign_pattern(j);
      if (!(pos && neg)) {
        r.higher_nodal = false;
        r.non_nodal.push_back(k);
        break;
      }
    }
  }
  if (!r.simple)
    r.failure = "simplicity: first eigenvalue has multiplicity " + std::to_string(first.size);
  else if (!r.fixed_sign)
    r.failure = "fixed sign: first eigenvector changes sign or vanishes at a node";
  else if (!r.higher_nodal)
    r.failure = "nodal: an eigenvector of cluster " + std::to_string(r.non_nodal.front()) +
                " does not change sign";
  r.ok = r.failure.empty();
  return r;
}

double rayleigh(const SymmetricForm& gamma, const SymmetricForm& mass, const Vector& u) {
  const double denom = mass.quadratic(u);
  if (!(denom > 0.0)) throw InvalidArgument("rayleigh: vector has zero mass norm");
  return gamma.quadratic(u) / denom;
}

CoercivityCertificate coercivity_shift(const SymmetricForm& gamma, const SymmetricForm& mass,
                                       const SymmetricForm& h1, const PencilOptions& options) {
  CoercivityCertificate c;
  c.lambda1 = solve_pencil(gamma, mass, 1, options).values[0];
  c.mu = std::max(0.0, -c.lambda1) + 1.0;
  c.c0 = solve_pencil(gamma + mass.scaled(c.mu), h1, 1, options).values[0];
  if (!(c.c0 > 0.0))
    throw ConvergenceError("coercivity constant is not positive: " + std::to_string(c.c0), c.c0);
  return c;
}

GapCertificate gap_certificate(GapSide side, const Discretization& disc, const EigenDecomposition& decomp,
                               int m, const CoefficientField& eta) {
  if (m < 1) throw InvalidArgument("gap certificate index must be >= 1");
  const double lambda = decomp.distinct_value(m);
  const double slack = 1e-12 * (1.0 + std::abs(lambda));
  const char* clause = side == GapSide::lower ? "weight above eigenvalue" : "weight below eigenvalue";

  GapCertificate cert;
  cert.side = side;
  cert.index = m;
  cert.eta_label = eta.label();
  cert.eigenvalue = lambda;
  auto [lo, hi] = field_range(disc.mesh, eta);
  cert.eta_min = lo;
  cert.eta_max = hi;
  if (side == GapSide::lower) {
    if (lo < lambda - slack)
      throw HypothesisError(clause, "weight " + std::to_string(lo) + " falls below eigenvalue " +
                                        std::to_string(lambda));
    if (!(hi > lambda + slack))
      throw HypothesisError(clause, "weight coincides with eigenvalue " + std::to_string(lambda));
  } else {
    if (hi > lambda + slack)
      throw HypothesisError(clause, "weight " + std::to_string(hi) + " exceeds eigenvalue " +
                                        std::to_string(lambda));
    if (!(lo < lambda - slack))
      throw HypothesisError(clause, "weight coincides with eigenvalue " + std::to_string(lambda));
  }

  int first = 0, cols = 0;
  if (side == GapSide::lower) {
    cols = decomp.columns_through(m);
  } else {
    if (!decomp.complete())
      throw InvalidArgument("upper gap certificate needs the complete decomposition");
    first = decomp.cluster(m).first;
    cols = decomp.count() - first;
  }
  const DenseMatrix basis = decomp.vectors.middleCols(first, cols);
  const SymmetricForm shifted = disc.gamma - assemble_potential(disc.mesh, eta);
  DenseMatrix h = basis.transpose() * (shifted.matrix() * basis);
  DenseMatrix a = basis.transpose() * (disc.h1.matrix() * basis);
  h = 0.5 * (h + h.transpose()).eval();
  a = 0.5 * (a + a.transpose()).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> solver(h, a, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  if (solver.info() != Eigen::Success)
    throw ConvergenceError("gap certificate eigensolve failed", std::numeric_limits<double>::infinity());
  cert.block_dimension = cols;
  cert.constant = side == GapSide::lower ? -solver.eigenvalues().maxCoeff() : solver.eigenvalues().minCoeff();
  if (!(cert.constant > 0.0))
    throw CertificateError("gap constant is not positive (" + std::to_string(cert.constant) +
                               "); the discrete unique-continuation surrogate failed",
                           cert);
  return cert;
}

}  // namespace semirobin
