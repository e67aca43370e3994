#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "semirobin/solver.hpp"

namespace semirobin {

inline constexpr int kSchemaVersion = 1;

struct DomainConfig {
  enum class Kind { interval, rectangle };
  Kind kind = Kind::interval;
  double a = 0.0;
  double b = 1.0;
  int n = 65;
  double lx = 1.0;
  double ly = 1.0;
  int nx = 17;
  int ny = 17;

  bool operator==(const DomainConfig&) const = default;
};

/// Potential xi: a constant, nodal values from a CSV file, or a built-in.
///
/// Built-ins: "cosine", xi(z) = value * cos(2 pi (x - x0) / L_x), a
/// sign-changing potential with mean zero.
struct PotentialConfig {
  enum class Kind { constant, nodal, builtin };
  Kind kind = Kind::constant;
  double value = 0.0;
  std::string file;
  std::string name;

  bool operator==(const PotentialConfig&) const = default;
};

/// Robin coefficient beta: one constant, one constant per side, or nodal values.
struct BoundaryConfig {
  enum class Kind { constant, sides, nodal };
  Kind kind = Kind::constant;
  double value = 0.0;
  double left = 0.0, right = 0.0, bottom = 0.0, top = 0.0;
  std::string file;

  bool operator==(const BoundaryConfig&) const = default;
};

struct ReactionConfig {
  ReactionSpec::Kind kind = ReactionSpec::Kind::model;
  int m = 1;
  int l = 3;
  double a_s_fraction = 0.3;
  std::optional<double> a_s;
  double delta = 0.1;
  std::optional<double> slope;

  bool operator==(const ReactionConfig&) const = default;
};

struct SpectrumConfig {
  int count = 10;
  double cluster_tol = 1e-6;
  EigenMethod method = EigenMethod::automatic;
  int dense_limit = 2000;
  double residual_tol = 1e-8;

  bool operator==(const SpectrumConfig&) const = default;
};

struct OutputConfig {
  std::string dir = ".";
  std::string prefix = "semirobin";

  bool operator==(const OutputConfig&) const = default;
};

struct SolverConfig {
  SearchPlan plan;
  TauControls tau;

  bool operator==(const SolverConfig&) const = default;
};

/// Fully resolved configuration; every default is explicit.
struct ProblemConfig {
  int schema_version = kSchemaVersion;
  DomainConfig domain;
  PotentialConfig potential;
  BoundaryConfig boundary;
  ReactionConfig reaction;
  SolverConfig solver;
  SpectrumConfig spectrum;
  OutputConfig output;

  bool operator==(const ProblemConfig&) const = default;
};

/// Parses INI text. Syntax errors carry the line; schema errors name the key
/// (and its line when it appears in the text).
ProblemConfig parse_config(const std::string& text);
ProblemConfig load_config(const std::filesystem::path& path);

/// Writes every field, defaults included, with 17 significant digits.
std::string serialize_config(const ProblemConfig& config);

/// Builds the mesh and forms; nodal files are resolved against `base_dir`.
Problem build_problem(const ProblemConfig& config, const std::filesystem::path& base_dir = ".");

std::string to_string(DomainConfig::Kind kind);
std::string to_string(PotentialConfig::Kind kind);
std::string to_string(BoundaryConfig::Kind kind);

}  // namespace semirobin
