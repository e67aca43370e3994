#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "semirobin/io.hpp"
#include "semirobin/rng.hpp"

using namespace semirobin;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "semirobin_io_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Io, NumbersRoundTrip) {
  Rng rng(41);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.normal() * std::pow(10.0, rng.uniform(-300, 300));
    EXPECT_EQ(std::strtod(format_number(x).c_str(), nullptr), x);
  }
}

TEST(Io, FormCsvRoundTrip) {
  const auto d = semirobin::testing::interval_problem(0.0, 1.0, 20, -0.3, 0.7);
  write_form_csv(scratch("gamma.csv"), d->gamma);
  const SymmetricForm back = read_form_csv(scratch("gamma.csv"), 20);
  EXPECT_EQ((back.dense() - d->gamma.dense()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(read_form_csv(scratch("gamma.csv"), 10), InvalidArgument);
}

TEST(Io, SolutionCsvRoundTrip) {
  const Mesh mesh = build_rectangle_mesh(1.0, 2.0, 4, 5);
  Rng rng(42);
  const Vector u = rng.normal_vector(mesh.node_count());
  write_solution_csv(scratch("u.csv"), mesh, u);
  std::ifstream in(scratch("u.csv"));
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "node,x,y,u");
  EXPECT_EQ(read_solution_csv(scratch("u.csv"), mesh), u);
  EXPECT_THROW(read_solution_csv(scratch("u.csv"), build_interval_mesh(0.0, 1.0, 20)), InvalidArgument);
}

TEST(Io, MeshDescriptorRoundTrip) {
  const Mesh mesh = build_rectangle_mesh(2.0, 1.0, 5, 4);
  const Mesh back = mesh_from_json(Json::parse(mesh_to_json(mesh).dump()));
  ASSERT_EQ(back.node_count(), mesh.node_count());
  ASSERT_EQ(back.connectivity(), mesh.connectivity());
  ASSERT_EQ(back.boundary_facets().size(), mesh.boundary_facets().size());
  for (int i = 0; i < mesh.node_count(); ++i) {
    EXPECT_EQ(back.node(i).x, mesh.node(i).x);
    EXPECT_EQ(back.node(i).y, mesh.node(i).y);
  }
  const auto a = assemble_mass(mesh).dense();
  const auto b = assemble_mass(back).dense();
  EXPECT_EQ((a - b).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(mesh_from_json(Json{{"dim", 1}}), InvalidArgument);
}

TEST(Io, NodalValuesWithOrWithoutHeader) {
  {
    std::ofstream f(scratch("plain.csv"));
    f << "1.5\n-2\n\n3e-1\n";
  }
  EXPECT_EQ(read_nodal_values(scratch("plain.csv")), (std::vector<double>{1.5, -2.0, 0.3}));
  {
    std::ofstream f(scratch("cols.csv"));
    f << "node,x,beta\n0,0,1\n1,0.5,2\n";
  }
  EXPECT_EQ(read_nodal_values(scratch("cols.csv")), (std::vector<double>{1.0, 2.0}));
  {
    std::ofstream f(scratch("bad.csv"));
    f << "1\nabc\n";
  }
  EXPECT_THROW(read_nodal_values(scratch("bad.csv")), InvalidArgument);
}

TEST(Io, SpectrumCsvHasOneRowPerPair) {
  const auto d = semirobin::testing::interval_problem(0.0, 1.0, 12, 0.0, 0.0);
  write_spectrum_csv(scratch("table.csv"), semirobin::testing::full_spectrum(*d));
  std::ifstream in(scratch("table.csv"));
  std::string line;
  int rows = 0;
  std::getline(in, line);
  EXPECT_EQ(line, "k,lambda,multiplicity,residual");
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 12);
}

TEST(Io, HypothesisTableNamesFailures) {
  const LinearReaction r(0.5, 1, 3);
  const auto report = audit_hypotheses(r, {-0.5, 0.5, 0.5, 3.5});
  const std::string table = format_hypothesis_table(report);
  EXPECT_NE(table.find("(iii)"), std::string::npos);
  EXPECT_NE(table.find("FAIL"), std::string::npos);
  EXPECT_NE(table.find("witness"), std::string::npos);
  const Json j = to_json(report);
  EXPECT_FALSE(j["all_pass"].get<bool>());
}
