#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "semirobin/fem.hpp"

namespace semirobin {

/// The four distinct eigenvalues the reaction hypotheses refer to.
struct SpectralLevels {
  double lambda_m = 0.0;   ///< top of the concave block
  double lambda_m1 = 0.0;  ///< resonant eigenvalue
  double lambda_l1 = 0.0;  ///< last eigenvalue of the linking block
  double lambda_l = 0.0;   ///< first eigenvalue of the tail
};

/// Constants a reaction declares about itself; the auditor checks them.
struct ReactionParameters {
  int m = 1;
  int l = 3;
  double growth = 0.0;              ///< a:   |f(z,x)| <= a (1 + |x|)
  double monotonicity_floor = 0.0;  ///< eta: (f(x) - f(x'))(x - x') >= eta (x - x')^2
  double band = 0.0;                ///< delta: half-width of the near-zero band
  double band_upper = 0.0;          ///< theta: f(x) x <= theta x^2 on the band
};

/// Caratheodory reaction f(z, x) with primitive F(z, x) = int_0^x f(z, s) ds.
class Reaction {
 public:
  virtual ~Reaction() = default;
  virtual double value(const Point& z, double x) const = 0;
  virtual double primitive(const Point& z, double x) const = 0;
  /// d/dx f(z, x); right-sided at kinks.
  virtual double slope(const Point& z, double x) const = 0;
  virtual const ReactionParameters& parameters() const = 0;
  virtual std::string name() const = 0;
  virtual bool autonomous() const { return true; }
};

/// Odd reaction that satisfies every clause of H(f) by construction:
///
///   f(x) = lambda_{l-1} x                                      for |x| <= delta
///   f(x) = lambda_{m+1} x - a_s x (1+x^2)^{-1/4} + c_j sign x  for |x| >  delta
///
/// with c_j chosen so f is continuous at +-delta. The outer branch has
/// slope at least lambda_{m+1} - a_s and f x - 2F grows like (a_s/3)|x|^{3/2}.
class ModelReaction final : public Reaction {
 public:
  ModelReaction(const SpectralLevels& levels, int m, int l, double softening, double band);

  double value(const Point& z, double x) const override;
  double primitive(const Point& z, double x) const override;
  double slope(const Point& z, double x) const override;
  const ReactionParameters& parameters() const override { return params_; }
  std::string name() const override { return "model"; }

  const SpectralLevels& levels() const { return levels_; }
  double softening() const { return softening_; }
  double joint() const { return joint_; }

 private:
  SpectralLevels levels_;
  double softening_;
  double band_;
  double joint_;
  double band_energy_;
  ReactionParameters params_;
};

/// Validates parameter order and builds the model reaction.
ModelReaction model_reaction(const SpectralLevels& levels, int m, int l, double softening, double band);

/// f(x) = slope x. Violates H(f)(iii) for every slope.
class LinearReaction final : public Reaction {
 public:
  LinearReaction(double slope, int m, int l, double band = 1.0);
  double value(const Point&, double x) const override { return slope_ * x; }
  double primitive(const Point&, double x) const override { return 0.5 * slope_ * x * x; }
  double slope(const Point&, double) const override { return slope_; }
  const ReactionParameters& parameters() const override { return params_; }
  std::string name() const override { return "linear"; }

 private:
  double slope_;
  ReactionParameters params_;
};

/// f(x) = x^2. Violates the linear growth bound; negative control.
class SquareReaction final : public Reaction {
 public:
  SquareReaction(int m, int l);
  double value(const Point&, double x) const override { return x * x; }
  double primitive(const Point&, double x) const override { return x * x * x / 3.0; }
  double slope(const Point&, double x) const override { return 2.0 * x; }
  const ReactionParameters& parameters() const override { return params_; }
  std::string name() const override { return "square"; }

 private:
  ReactionParameters params_;
};

/// User-supplied reaction, possibly z-dependent.
class CallableReaction final : public Reaction {
 public:
  using Fn = std::function<double(const Point&, double)>;
  CallableReaction(Fn f, Fn primitive, Fn slope, ReactionParameters params, std::string name = "callable",
                   bool autonomous = false);
  double value(const Point& z, double x) const override { return f_(z, x); }
  double primitive(const Point& z, double x) const override { return primitive_(z, x); }
  double slope(const Point& z, double x) const override { return slope_(z, x); }
  const ReactionParameters& parameters() const override { return params_; }
  std::string name() const override { return name_; }
  bool autonomous() const override { return autonomous_; }

 private:
  Fn f_, primitive_, slope_;
  ReactionParameters params_;
  std::string name_;
  bool autonomous_;
};

enum class Clause { preamble, growth, monotonicity, resonance, near_zero };

/// Roman-numbered label used in reports, e.g. "(iii) resonance at infinity".
std::string to_string(Clause clause);

struct Witness {
  Point z;
  double x = 0.0;
  std::optional<double> x2;
  double observed = 0.0;
  double bound = 0.0;
};

struct ClauseVerdict {
  Clause clause = Clause::preamble;
  bool pass = true;
  std::string detail;
  std::optional<Witness> witness;
};

struct SamplingGrid {
  double x_max = 0.0;  ///< 0 means max(1000 * band, 1e4)
  double min_spacing = 1e-4;
  int per_decade = 40;
  int band_points = 50;
  std::vector<Point> z_samples;  ///< empty means one representative point
};

struct HypothesisReport {
  std::vector<ClauseVerdict> verdicts;
  std::string grid;
  std::vector<std::string> caveats;

  bool all_pass() const;
  const ClauseVerdict& verdict(Clause clause) const;
  /// First failing clause, if any.
  std::optional<Clause> first_failure() const;
};

/// Samples the reaction and checks the clauses of H(f). Failures are
/// verdicts with a concrete witness, never exceptions.
HypothesisReport audit_hypotheses(const Reaction& reaction, const SpectralLevels& levels,
                                  const SamplingGrid& grid = {});

/// load_i = int f(z, u_h) phi_i.
Vector nemytskii_load(const Mesh& mesh, const Reaction& reaction, const Vector& u);
/// int F(z, u_h).
double nemytskii_energy(const Mesh& mesh, const Reaction& reaction, const Vector& u);
/// J_ij = int f_x(z, u_h) phi_i phi_j.
SymmetricForm nemytskii_jacobian(const Mesh& mesh, const Reaction& reaction, const Vector& u);

}  // namespace semirobin
