#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "json.hpp"
#include "sbfem/error.hpp"
#include "sbfem/io.hpp"
#include "sbfem/mesh.hpp"

namespace sbfem {
namespace {

namespace fs = std::filesystem;

Mesh2D one_triangle() {
  return Mesh2D({Vec2(0.1, 0.2), Vec2(4.0 / 3.0, 0.1), Vec2(0.0, 9.0 / 7.0)}, {{{0, 1, 2}, Subdomain::poro}},
                {{{0, 1}, "a"}, {{1, 2}, "a"}, {{2, 0}, "a"}});
}

std::vector<std::string> tokens(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> t;
  std::string w;
  while (in >> w) t.push_back(w);
  return t;
}

TEST(WriteVtk, SingleTriangleLayout) {
  std::ostringstream out;
  using L = VtkField::Location;
  write_vtk(one_triangle(), {{"p", L::point, 1, {1, 2, 3}}, {"v", L::cell, 2, {4, 5}}}, out);
  const std::string s = out.str();
  EXPECT_EQ(s.rfind("# vtk DataFile Version 3.0\n", 0), 0u);
  EXPECT_NE(s.find("DATASET UNSTRUCTURED_GRID"), std::string::npos);
  EXPECT_NE(s.find("POINTS 3 double"), std::string::npos);
  EXPECT_NE(s.find("CELLS 1 4\n3 0 1 2\n"), std::string::npos);
  EXPECT_NE(s.find("CELL_TYPES 1\n5\n"), std::string::npos);
  EXPECT_NE(s.find("POINT_DATA 3\nSCALARS p double 1\nLOOKUP_TABLE default\n1\n2\n3\n"), std::string::npos);
  EXPECT_NE(s.find("CELL_DATA 1\nVECTORS v double\n4 5 0\n"), std::string::npos);
}

TEST(WriteVtk, CoordinatesRoundTripExactly) {
  const Mesh2D m = one_triangle();
  std::ostringstream out;
  write_vtk(m, {}, out);
  const auto t = tokens(out.str());
  auto it = std::find(t.begin(), t.end(), "POINTS");
  ASSERT_NE(it, t.end());
  it += 3;  // POINTS n double
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(std::stod(*it++), m.node(i).x());
    EXPECT_EQ(std::stod(*it++), m.node(i).y());
    EXPECT_EQ(std::stod(*it++), 0.0);
  }
}

TEST(WriteVtk, LengthMismatchThrows) {
  std::ostringstream out;
  using L = VtkField::Location;
  EXPECT_THROW(write_vtk(one_triangle(), {{"p", L::point, 1, {1, 2}}}, out), InvalidArgument);
  EXPECT_THROW(write_vtk(one_triangle(), {{"v", L::point, 2, {1, 2, 3}}}, out), InvalidArgument);
  EXPECT_THROW(write_vtk(one_triangle(), {{"c", L::cell, 1, {1, 2}}}, out), InvalidArgument);
}

TEST(WriteVtk, Deterministic) {
  const Mesh2D m = build_fracture_domain(0.05).poro;
  std::vector<double> v(m.n_nodes());
  for (int i = 0; i < m.n_nodes(); ++i) v[i] = std::sin(1.0 + i);
  std::ostringstream a, b;
  write_vtk(m, {{"f", VtkField::Location::point, 1, v}}, a);
  write_vtk(m, {{"f", VtkField::Location::point, 1, v}}, b);
  EXPECT_EQ(a.str(), b.str());
}

ScenarioConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::size_t error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 9999;
}

TEST(ParseConfig, ReadsStorativity) {
  EXPECT_EQ(parse("[params]\ns0 = 6.89e-2\n").params.s0, 0.0689);
}

TEST(ParseConfig, MissingTimeSectionKeepsDefaults) {
  const ScenarioConfig c = parse("# reservoir\n[params]\nmu = 2e-6\n");
  EXPECT_EQ(c.T, 300.0);
  EXPECT_EQ(c.tau, 1.0);
  EXPECT_EQ(c.params.mu, 2e-6);
}

TEST(ParseConfig, AllSections) {
  const ScenarioConfig c = parse(
      "[params]\nkxx = 1e-10\nkyy = 2e-10\nE = 1e3\nnu = 0\nalpha = 0.5\nalpha_bjs = 0\n"
      "[time]\nT = 10\ntau = 0.5\n"
      "[bc]\ninjection = 2\nboundary_pressure = 10\ninitial_pressure = 20\n"
      "[output]\ndir = out dir\nstride = 5\n"
      "[mesh]\ngeometry = reference\nresolution = 0.05\nelements = low\n");
  EXPECT_EQ(c.params.K[0](0, 0), 1e-10);
  EXPECT_EQ(c.params.K[0](1, 1), 2e-10);
  EXPECT_EQ(c.E, 1e3);
  EXPECT_EQ(c.params.lambda_p[0], 0.0);
  EXPECT_EQ(c.params.mu_p[0], 500.0);
  EXPECT_EQ(c.params.alpha, 0.5);
  EXPECT_EQ(c.params.alpha_bjs, 0.0);
  EXPECT_EQ(c.T, 10.0);
  EXPECT_EQ(c.tau, 0.5);
  EXPECT_EQ(c.injection, 2.0);
  EXPECT_EQ(c.boundary_pressure, 10.0);
  EXPECT_EQ(c.initial_pressure, 20.0);
  EXPECT_EQ(c.output_dir, "out dir");
  EXPECT_EQ(c.output_stride, 5);
  EXPECT_EQ(c.geometry, Geometry::reference);
  EXPECT_EQ(c.resolution, 0.05);
  EXPECT_EQ(c.elements, ElementSet::low);
}

TEST(ParseConfig, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line("[params]\nalpha = 1.5\n"), 2u);
  EXPECT_EQ(error_line("[params]\ns0 = 1\n\ns0 = 2\n"), 4u);
  EXPECT_EQ(error_line("[params]\nporosity = 0.2\n"), 2u);
  EXPECT_EQ(error_line("[time]\nT = three hundred\n"), 2u);
  EXPECT_EQ(error_line("[nonsense]\n"), 1u);
  EXPECT_EQ(error_line("s0 = 1\n"), 1u);
  EXPECT_EQ(error_line("[params]\ns0 1\n"), 2u);
  EXPECT_EQ(error_line("[output]\nstride = 1.5\n"), 2u);
  EXPECT_EQ(error_line("[mesh]\ngeometry = sphere\n"), 2u);
  EXPECT_EQ(error_line("[params]\nnu = 0.5\n"), 2u);
}

TEST(ParseConfig, TimeMustBeMultipleOfStep) {
  EXPECT_THROW(parse("[time]\nT = 1\ntau = 0.3\n"), InvalidArgument);
}

TEST(ApplyOverride, QualifiedAndBareKeys) {
  ScenarioConfig c = example2_config();
  apply_override(c, "time.T=12");
  apply_override(c, "s0 = 0.5");
  apply_override(c, "resolution=0.05");
  EXPECT_EQ(c.T, 12.0);
  EXPECT_EQ(c.params.s0, 0.5);
  EXPECT_EQ(c.resolution, 0.05);
  EXPECT_THROW(apply_override(c, "nokey=1"), ParseError);
  EXPECT_THROW(apply_override(c, "s0"), ParseError);
  EXPECT_THROW(apply_override(c, "time.s0=1"), ParseError);
}

TEST(Manifest, RecordsResolvedConfiguration) {
  ScenarioConfig c = sensitivity_configs()[3];
  ScenarioSummary s;
  s.max_displacement = 4e-8;
  s.steps = 300;
  const std::string text = manifest_json(c, &s);
  EXPECT_EQ(text, manifest_json(c, &s));
  const auto j = nlohmann::json::parse(text);
  EXPECT_EQ(j["version"], version_string);
  EXPECT_EQ(j["scenario"], "sensitivity:D");
  EXPECT_EQ(j["params"]["E"], 1e10);
  EXPECT_EQ(j["params"]["s0"], 1e-2);
  EXPECT_EQ(j["params"]["K"][0][0], 200e-12);
  EXPECT_EQ(j["time"]["T"], 300.0);
  EXPECT_EQ(j["summary"]["steps"], 300);
  EXPECT_EQ(j["summary"]["max_displacement"], 4e-8);
  EXPECT_EQ(j["mesh"]["displacement"], "VecP1");
}

// End-to-end through the command-line binary.
int cli(const std::string& args, const fs::path& out) {
  const std::string cmd = std::string(SBFEM_CLI) + " " + args + " > " + out.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path cli_dir() {
  const fs::path p = fs::temp_directory_path() / "sbfem_cli_test";
  fs::create_directories(p);
  return p;
}

TEST(Cli, ConvergeWritesCsvWithRates) {
  const fs::path out = cli_dir() / "converge.txt";
  ASSERT_EQ(cli("converge --elements low --levels 2 --matching yes", out), 0) << slurp(out);
  std::istringstream in(slurp(out));
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0].rfind("h,e_uf_H1,rate", 0), 0u);
  EXPECT_EQ(std::count(lines[2].begin(), lines[2].end(), ','), 10);
}

TEST(Cli, UsageErrorsExitOne) {
  const fs::path out = cli_dir() / "usage.txt";
  EXPECT_EQ(cli("converge --elements low --matching maybe", out), 1);
  EXPECT_EQ(cli("converge --bogus", out), 1);
  EXPECT_EQ(cli("", out), 1);
  EXPECT_EQ(cli("run --scenario example9", out), 1);
  EXPECT_EQ(cli("run --scenario example2 --set nokey=1", out), 1);
  EXPECT_EQ(cli("diag", out), 1);
  const fs::path bad = cli_dir() / "bad.ini";
  std::ofstream(bad) << "[params]\nfoo = 1\n";
  EXPECT_EQ(cli("run --config " + bad.string(), out), 1);
}

TEST(Cli, RuntimeErrorsExitTwo) {
  const fs::path out = cli_dir() / "runtime.txt";
  EXPECT_EQ(cli("run --scenario example3 --permeability /nonexistent/k.raster", out), 2);
  EXPECT_EQ(cli("mesh --make fracture --resolution 0.5 --out " + (cli_dir() / "m").string(), out), 2);
}

TEST(Cli, RunSensitivityCaseWritesOnlyThatCase) {
  const fs::path dir = cli_dir() / "run_d";
  fs::remove_all(dir);
  const fs::path out = cli_dir() / "run_d.txt";
  ASSERT_EQ(cli("run --scenario sensitivity:D --set T=2 --set resolution=0.05 --out " + dir.string(), out), 0)
      << slurp(out);
  const auto j = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(j["scenario"], "sensitivity:D");
  EXPECT_EQ(j["time"]["T"], 2.0);
  EXPECT_EQ(j["summary"]["steps"], 2);
  int vtk = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".vtk") {
      ++vtk;
      EXPECT_EQ(e.path().filename().string().rfind("sensitivity_D_", 0), 0u);
    }
  }
  EXPECT_EQ(vtk, 2);
}

TEST(Cli, MeshAndDiag) {
  const fs::path out = cli_dir() / "mesh.txt";
  const fs::path m = cli_dir() / "rect.mesh";
  ASSERT_EQ(cli("mesh --make rect --n 4 --out " + m.string(), out), 0) << slurp(out);
  EXPECT_EQ(read_mesh(m.string()).n_cells(), 32);
  ASSERT_EQ(cli("diag --infsup --n 4", out), 0) << slurp(out);
  EXPECT_NE(slurp(out).find("n,beta,kernel_dim"), std::string::npos);
}

}  // namespace
}  // namespace sbfem
