#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "semirobin/config.hpp"
#include "semirobin/solver.hpp"

namespace semirobin {

using Json = nlohmann::ordered_json;

/// "%.17g": enough digits to reproduce any double exactly.
std::string format_number(double x);

/// Plain numeric column file: one value per row, or several comma-separated
/// columns of which the last is taken. A non-numeric first row is a header.
std::vector<double> read_nodal_values(const std::filesystem::path& path);

/// Header "row,col,value", one line per stored entry (both triangles).
void write_form_csv(const std::filesystem::path& path, const SymmetricForm& form);
SymmetricForm read_form_csv(const std::filesystem::path& path, int order);

Json mesh_to_json(const Mesh& mesh);
Mesh mesh_from_json(const Json& j);

/// Header "k,lambda,multiplicity,residual"; k counts eigenpairs from 1.
void write_spectrum_csv(const std::filesystem::path& path, const EigenDecomposition& decomp);

/// Header "node,x,u" (1D) or "node,x,y,u" (2D), one row per node.
void write_solution_csv(const std::filesystem::path& path, const Mesh& mesh, const Vector& u);
Vector read_solution_csv(const std::filesystem::path& path, const Mesh& mesh);

Json to_json(const ProblemConfig& config);
Json to_json(const EigenDecomposition& decomp, bool with_vectors = false);
Json to_json(const FirstEigenReport& report);
Json to_json(const CoercivityCertificate& cert);
Json to_json(const GapCertificate& cert);
Json to_json(const HypothesisReport& report);
Json to_json(const SpectralLevels& levels);
Json to_json(const ConcavitySample& sample);
Json to_json(const LinkingReport& report);
Json to_json(const CoercivityReport& report);
Json to_json(const SolutionRecord& record);
Json to_json(const VerificationReport& report);
Json to_json(const RoundtripReport& report);
Json to_json(const Attempt& attempt);
/// Solve report: config echo, certificates, records (vectors go to CSV), diagnostics.
Json to_json(const SolutionSet& set, const ProblemConfig& config);

void write_json(const std::filesystem::path& path, const Json& j);

/// Human-readable table of a hypothesis audit.
std::string format_hypothesis_table(const HypothesisReport& report);

}  // namespace semirobin
