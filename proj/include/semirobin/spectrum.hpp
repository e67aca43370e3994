#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semirobin/errors.hpp"
#include "semirobin/fem.hpp"

namespace semirobin {

/// A run of numerically equal eigenvalues, i.e. one distinct eigenvalue and
/// the columns of its eigenspace basis.
struct Cluster {
  double value = 0.0;  ///< mean of the member eigenvalues
  int first = 0;       ///< first column in EigenDecomposition::vectors
  int size = 0;        ///< multiplicity
  double max_residual = 0.0;
};

/// Eigenpairs of the pencil (G, M), smallest first.
///
/// Vectors are M-orthonormal. Clusters are numbered from 1 in the accessors
/// below, matching the usual labelling of the distinct eigenvalues.
struct EigenDecomposition {
  Vector values;
  DenseMatrix vectors;
  Vector residuals;
  std::vector<Cluster> clusters;
  double cluster_tol = 1e-6;

  int order() const { return static_cast<int>(vectors.rows()); }
  int count() const { return static_cast<int>(values.size()); }
  /// True when every eigenpair of the pencil was computed.
  bool complete() const { return count() == order(); }
  int cluster_count() const { return static_cast<int>(clusters.size()); }

  /// Distinct eigenvalue number k (1-based).
  const Cluster& cluster(int k) const;
  double distinct_value(int k) const { return cluster(k).value; }
  /// Number of eigenvector columns in clusters 1..k.
  int columns_through(int k) const;
};

enum class EigenMethod { automatic, dense, lanczos };

struct PencilOptions {
  double cluster_tol = 1e-6;
  EigenMethod method = EigenMethod::automatic;
  /// Largest order solved densely under EigenMethod::automatic.
  int dense_limit = 2000;
  double residual_tol = 1e-8;
  std::uint64_t seed = 1234567;
};

std::string to_string(EigenMethod method);

/// Groups sorted eigenvalues; a new cluster starts where the gap to the
/// previous value reaches tol * (1 + |value|).
std::vector<Cluster> cluster_eigenvalues(const Vector& values, double tol);

/// The `count` smallest eigenpairs of stiff v = lambda mass v.
///
/// Orders up to `dense_limit` use a Cholesky reduction of `mass` and a dense
/// symmetric eigensolver. Larger orders use shift-invert block Lanczos with
/// full reorthogonalization. Both paths are held to the same residual bound;
/// a pair that misses it raises ConvergenceError.
EigenDecomposition solve_pencil(const SymmetricForm& stiff, const SymmetricForm& mass, int count,
                                const PencilOptions& options = {});

/// Structural facts about the bottom of the spectrum.
struct FirstEigenReport {
  bool simple = false;          ///< first cluster has dimension 1
  bool fixed_sign = false;      ///< its eigenvector has one strict sign at every node
  bool higher_nodal = false;    ///< every eigenvector of later clusters changes sign
  std::vector<int> non_nodal;   ///< clusters (1-based) holding a sign-definite vector
  bool ok = false;
  std::string failure;          ///< first violated property, empty when ok
};

FirstEigenReport first_eigen_report(const EigenDecomposition& decomp);

/// u'Gu / u'Mu.
double rayleigh(const SymmetricForm& gamma, const SymmetricForm& mass, const Vector& u);

/// Shift mu making gamma + mu |.|_2^2 bound c0 |.|^2 from below in the H1 norm.
struct CoercivityCertificate {
  double lambda1 = 0.0;  ///< smallest eigenvalue of (G, M)
  double mu = 0.0;
  double c0 = 0.0;       ///< smallest eigenvalue of (G + mu M, A)
};

CoercivityCertificate coercivity_shift(const SymmetricForm& gamma, const SymmetricForm& mass,
                                       const SymmetricForm& h1, const PencilOptions& options = {});

/// Which spectral block a gap constant is measured on.
///  - lower: span of clusters 1..m, bound gamma(u) - int eta u^2 <= -c |u|^2
///  - upper: span of clusters >= m,  bound gamma(u) - int eta u^2 >=  c |u|^2
enum class GapSide { lower, upper };

std::string to_string(GapSide side);

struct GapCertificate {
  GapSide side = GapSide::lower;
  int index = 1;
  std::string eta_label;
  double eta_min = 0.0;
  double eta_max = 0.0;
  double eigenvalue = 0.0;  ///< the distinct eigenvalue the weight is compared against
  double constant = 0.0;    ///< c1 (lower) or c2 (upper), positive when certified
  int block_dimension = 0;
};

/// Raised when a computed gap constant is not positive.
class CertificateError : public Error {
 public:
  CertificateError(const std::string& what, GapCertificate certificate)
      : Error(what), certificate_(std::move(certificate)) {}
  const GapCertificate& certificate() const noexcept { return certificate_; }

 private:
  GapCertificate certificate_;
};

/// Extremal eigenvalue of G - Xi(eta) on a spectral block, measured against
/// the H1 Gram matrix.
///
/// The weight must lie on one side of the m-th distinct eigenvalue at every
/// quadrature point and strictly so at one of them (HypothesisError
/// otherwise). The upper side needs a complete decomposition.
GapCertificate gap_certificate(GapSide side, const Discretization& disc, const EigenDecomposition& decomp,
                               int m, const CoefficientField& eta);

}  // namespace semirobin
