#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/SparseCholesky>

#include "semirobin/reduction.hpp"
#include "semirobin/search.hpp"

namespace semirobin {

/// Controls of the critical-point searches. A zero d_min resolves to
/// 1e-3 * sqrt(|domain|).
struct SearchPlan {
  double rho = 1.0;  ///< initial linking radius (H1 norm)
  int zero_starts = 2;
  int w_starts = 4;
  int e_starts = 2;
  int random_starts = 4;
  int deflation_starts = 6;
  double deflation_shift = 1.0;
  int deflation_iters = 300;  ///< budget of the deflated descent before the polish
  double d_min = 0.0;
  int mp_nodes = 64;
  int mp_iters = 300;
  int max_iter = 3000;
  double tol = 1e-9;       ///< reduced gradient, H1-dual norm
  double tol_res = 1e-7;   ///< weak residual, M^{-1}-dual norm
  double tol_sign = 1e-10;
  int linking_samples = 200;
  int max_halvings = 10;
  int probe_directions = 32;
  std::vector<double> probe_radii{1.0, 10.0, 50.0};
  int concavity_samples = 200;
  std::uint64_t seed = 1234567;

  bool operator==(const SearchPlan&) const = default;
};

enum class Provenance { minimizer, linking, mountain_pass, deflation };
std::string to_string(Provenance p);

/// A verified-or-not critical point of the reduced functional, lifted to the
/// full space as u = v + tau(v).
struct SolutionRecord {
  Vector u;
  Vector v;  ///< reduced coordinates
  Vector y;  ///< concave coordinates, tau(v)
  double energy = 0.0;
  double reduced_grad_norm = 0.0;
  double residual = 0.0;  ///< |Gu - load(u)| in the M^{-1}-dual norm
  double l2_norm = 0.0;   ///< |u|_M
  Provenance provenance = Provenance::minimizer;
  int start_index = 0;
  std::string start_label;
};

/// Factorizations and resolved settings shared by every search.
class SolverContext {
 public:
  SolverContext(std::shared_ptr<const ReductionContext> reduction, SearchPlan plan);

  const ReductionContext& reduction() const { return *reduction_; }
  const EnergyContext& energy() const { return reduction_->energy(); }
  const SearchPlan& plan() const { return plan_; }
  double d_min() const { return plan_.d_min; }
  /// Shift making lambda_k + shift positive on the reduced block.
  double shift() const { return shift_; }

  double mass_norm(const Vector& u) const;
  double mass_dual_norm(const Vector& r) const;
  double h1_dual_norm(const Vector& r) const;

  /// Builds the record for reduced coordinates v with tau(v) = y.
  SolutionRecord make_record(const Vector& v, const Vector& y, Provenance provenance, int start_index,
                             std::string label) const;

 private:
  std::shared_ptr<const ReductionContext> reduction_;
  SearchPlan plan_;
  double shift_;
  std::shared_ptr<Eigen::SimplicialLDLT<SparseMatrix>> mass_ldlt_;
  std::shared_ptr<Eigen::SimplicialLDLT<SparseMatrix>> h1_ldlt_;
};

/// Resolves d_min against the domain size.
double default_d_min(const Mesh& mesh);

struct LinkingRound {
  double rho = 0.0;
  int w_ok = 0;
  int e_ok = 0;
  double w_max = 0.0;  ///< largest reduced value on the linking block samples
  double e_min = 0.0;  ///< smallest reduced value on the tail samples
  double w_grad_max = 0.0;
};

struct LinkingReport {
  int samples = 0;
  double rho = 0.0;  ///< radius of the reported round
  double w_fraction = 0.0;
  double e_fraction = 0.0;
  bool satisfied = false;
  /// Every linking-block sample had |value| <= tol_sign and reduced gradient
  /// <= tol: the degenerate branch where the whole small ball is critical.
  bool w_flat = false;
  std::vector<LinkingRound> rounds;
};

/// Samples the linking block (value <= tol_sign expected) and the tail
/// (value >= -tol_sign expected) inside the H1 ball of radius rho, halving
/// rho until both hold everywhere or max_halvings is reached.
LinkingReport linking_sign_check(const ReductionContext& ctx, double rho, int samples, std::uint64_t seed,
                                 double tol_sign = 1e-10, double grad_tol = 1e-9, int max_halvings = 10);

/// One search attempt, kept for the report.
struct Attempt {
  std::string strategy;
  int start_index = 0;
  std::string start_label;
  bool converged = false;
  bool accepted = false;
  double energy = 0.0;
  double grad_norm = 0.0;
  double distance = 0.0;  ///< |u - u_first|_M when a first point exists
  double l2_norm = 0.0;
  int iterations = 0;  ///< descent iterations before the polish, when known
  std::string note;
};

/// Every strategy of the second-point ladder failed. Not a proof that no
/// second solution exists.
class SearchExhausted : public Error {
 public:
  SearchExhausted(const std::string& what, std::vector<Attempt> attempts)
      : Error(what), attempts_(std::move(attempts)) {}
  const std::vector<Attempt>& attempts() const noexcept { return attempts_; }

 private:
  std::vector<Attempt> attempts_;
};

/// Lowest-energy critical point of the reduced functional over zero,
/// linking-ball and random starts. Ties in energy prefer nontrivial points.
SolutionRecord minimize_reduced(const SolverContext& ctx, std::vector<Attempt>* log = nullptr);

/// Descent plus Newton polish from one start; the starting point is returned
/// unchanged when it is already critical.
SolutionRecord descend_from(const SolverContext& ctx, const Vector& v0, Provenance provenance, int start_index,
                            std::string label, bool* converged = nullptr);

/// A second nontrivial critical point distinct from `first`.
///
/// With a negative first energy: deflated descent, then mountain pass from 0
/// to the first point, then descent from its mirror image and from
/// linking-sphere points. Otherwise the flat linking ball is enumerated, which
/// needs `linking` with w_flat set. Throws SearchExhausted with the attempt log.
SolutionRecord second_critical_point(const SolverContext& ctx, const SolutionRecord& first,
                                     const LinkingReport* linking = nullptr, std::vector<Attempt>* log = nullptr);

/// Points of the flat linking ball at half the linking radius, verified as
/// critical. Used when the minimum of the reduced functional is zero.
std::vector<SolutionRecord> flat_ball_points(const SolverContext& ctx, double rho);

struct EndpointCheck {
  Side side = Side::left;
  double normal_derivative = 0.0;  ///< one-sided difference quotient
  double expected = 0.0;           ///< -beta u
  double tolerance = 0.0;
  bool pass = false;
};

struct VerificationReport {
  double residual = 0.0;
  double l2_norm = 0.0;
  double energy = 0.0;
  double gradient_norm = 0.0;  ///< H1-dual norm of the full gradient
  double tol_res = 0.0;
  double d_min = 0.0;
  bool nontrivial = false;
  bool pass = false;
  std::vector<EndpointCheck> endpoint_checks;  ///< 1D only, informational
};

/// Weak-form check of u as a solution: residual in the M^{-1}-dual norm and
/// nontriviality. Independent of the eigendecomposition.
VerificationReport verify_solution(const EnergyContext& ctx, const Vector& u, double tol_res, double d_min);

/// Full-space criticality of u = v + tau(v) and recovery of u from its
/// reduced coordinates.
struct RoundtripReport {
  double full_gradient_norm = 0.0;
  double reprojection_error = 0.0;  ///< |u - (P_V u + tau(P_V u))|_M
  bool pass = false;
};

RoundtripReport roundtrip_check(const SolverContext& ctx, const SolutionRecord& record, double tol_res,
                                double tol_reproject = 1e-6);

/// How the reaction is chosen once the spectrum is known.
struct ReactionSpec {
  enum class Kind { model, linear, square, custom };
  Kind kind = Kind::model;
  double softening_fraction = 0.3;   ///< a_s as a fraction of lambda_{m+1} - lambda_m
  std::optional<double> softening;   ///< absolute a_s, overrides the fraction
  double band = 0.1;                 ///< delta
  std::optional<double> slope;       ///< linear reaction; default lambda_{m+1}
  std::shared_ptr<const Reaction> custom;
};

std::string to_string(ReactionSpec::Kind kind);

std::shared_ptr<const Reaction> make_reaction(const ReactionSpec& spec, const SpectralLevels& levels, int m, int l);

struct Problem {
  std::shared_ptr<const Discretization> disc;
  int m = 1;
  int l = 3;
  ReactionSpec reaction;
  SearchPlan plan;
  TauControls tau;
  PencilOptions spectrum;
};

/// Everything the pipeline produced, including partial results of a failed run.
struct SolutionSet {
  bool success = false;
  std::string failed_stage;
  std::string failure;

  std::shared_ptr<const Discretization> disc;
  std::shared_ptr<const Reaction> reaction;
  EigenDecomposition spectrum;
  std::optional<FirstEigenReport> first_eigen;
  std::optional<SpectralLevels> levels;
  std::optional<HypothesisReport> hypotheses;
  std::optional<CoercivityCertificate> coercivity;
  std::optional<GapCertificate> concave_gap;
  std::optional<GapCertificate> tail_gap;
  std::optional<ConcavitySample> concavity;
  std::optional<LinkingReport> linking;
  std::optional<CoercivityReport> coercivity_probe;
  double d_min = 0.0;
  bool flat_branch = false;
  std::vector<SolutionRecord> records;
  std::vector<VerificationReport> verifications;
  std::vector<RoundtripReport> roundtrips;
  std::vector<Attempt> attempts;
  double separation = 0.0;  ///< |u_0 - u_1|_M
};

/// Runs every stage and reports failures through SolutionSet::success.
SolutionSet run_pipeline(const Problem& problem);

/// Raised by solve_problem when a stage fails.
class StageError : public Error {
 public:
  StageError(const std::string& stage, const std::string& what, std::shared_ptr<const SolutionSet> partial)
      : Error(stage + ": " + what), stage_(stage), partial_(std::move(partial)) {}
  const std::string& stage() const noexcept { return stage_; }
  const SolutionSet& partial() const noexcept { return *partial_; }

 private:
  std::string stage_;
  std::shared_ptr<const SolutionSet> partial_;
};

/// Like run_pipeline but throws StageError unless two verified solutions were found.
SolutionSet solve_problem(const Problem& problem);

}  // namespace semirobin
