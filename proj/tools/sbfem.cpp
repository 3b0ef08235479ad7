#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sbfem/error.hpp"
#include "sbfem/io.hpp"
#include "sbfem/mesh.hpp"
#include "sbfem/scenarios.hpp"
#include "sbfem/verify.hpp"

#ifndef SBFEM_DATA_DIR
#define SBFEM_DATA_DIR "data"
#endif

namespace {

using namespace sbfem;

struct ConvergeArgs {
  std::string elements = "low";
  int levels = 4;
  std::string matching = "yes";
  std::string out;
};

struct RunArgs {
  std::string scenario = "example2";
  std::vector<std::string> sets;
  std::string config;
  std::string out;
  std::string permeability = std::string(SBFEM_DATA_DIR) + "/permeability.raster";
  std::string porosity = std::string(SBFEM_DATA_DIR) + "/porosity.raster";
};

struct MeshArgs {
  std::string make = "rect";
  int n = 8;
  double resolution = 0.025;
  bool mapped = false;
  std::string out;
};

struct DiagArgs {
  bool infsup = false;
  bool energy = false;
  bool unstable = false;
  int n = 8;
  std::string elements = "low";
};

ElementSet parse_set(const std::string& s) { return s == "high" ? ElementSet::high : ElementSet::low; }

int converge(const ConvergeArgs& a) {
  const ErrorReport r = convergence_study(parse_set(a.elements), a.levels, a.matching == "yes");
  if (a.out.empty()) {
    write_convergence_csv(r, std::cout);
  } else {
    std::ofstream f(a.out);
    if (!f) throw InvalidArgument("cannot open " + a.out);
    write_convergence_csv(r, f);
  }
  return 0;
}

ScenarioConfig scenario_by_name(const RunArgs& a) {
  if (a.scenario == "example2") return example2_config();
  if (a.scenario == "example3") return example3_config(read_raster(a.permeability), read_raster(a.porosity));
  const auto sens = sensitivity_configs();
  for (const auto& c : sens)
    if (c.name == a.scenario) return c;
  throw InvalidArgument("unknown scenario " + a.scenario);
}

int run(const RunArgs& a) {
  ScenarioConfig cfg = scenario_by_name(a);
  if (!a.config.empty()) {
    try {
      cfg = parse_config(a.config, cfg);
    } catch (const ParseError& e) {
      throw CLI::ValidationError("--config", e.what());
    }
  }
  for (const auto& s : a.sets) {
    try {
      apply_override(cfg, s);
    } catch (const ParseError& e) {
      throw CLI::ValidationError("--set", e.what());
    }
  }
  if (!a.out.empty()) cfg.output_dir = a.out;
  const ScenarioResult r = run_scenario(cfg);
  if (!cfg.output_dir.empty()) {
    write_manifest(cfg, &r.summary, (std::filesystem::path(cfg.output_dir) / "manifest.json").string());
  }
  std::cout << manifest_json(cfg, &r.summary);
  return 0;
}

int mesh(const MeshArgs& a) {
  if (a.out.empty()) throw InvalidArgument("mesh: --out is required");
  if (a.make == "rect") {
    write_mesh(build_structured({0.0, 1.0, 0.0, 1.0}, a.n, a.n, Subdomain::poro,
                                {tags::left, tags::right, tags::bottom, tags::top}),
               a.out);
    std::cout << a.out << '\n';
    return 0;
  }
  FractureMeshes m = build_fracture_domain(a.resolution);
  if (a.mapped) {
    m.fluid = apply_domain_map(m.fluid, reservoir_map());
    m.poro = apply_domain_map(m.poro, reservoir_map());
  }
  write_mesh(m.fluid, a.out + ".fluid");
  write_mesh(m.poro, a.out + ".poro");
  std::cout << a.out << ".fluid\n" << a.out << ".poro\n";
  return 0;
}

int diag(const DiagArgs& a) {
  if (a.infsup == a.energy) throw CLI::ValidationError("diag", "exactly one of --infsup and --energy is required");
  if (a.infsup) {
    const InfSupResult r = inf_sup_example1(a.n, a.unstable);
    std::cout << "n,beta,kernel_dim,beta_nonzero\n"
              << a.n << ',' << r.beta << ',' << r.kernel_dim << ',' << r.beta_nonzero << '\n';
    return 0;
  }
  const LevelResult r = run_example1(parse_set(a.elements), a.n, a.n);
  std::cout << "n,max_energy_residual,max_constraint_residual\n"
            << a.n << ',' << r.max_energy_residual << ',' << r.max_constraint_residual << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled Stokes-Biot finite element solver"};
  app.require_subcommand(1);

  ConvergeArgs ca;
  auto* conv = app.add_subcommand("converge", "Manufactured-solution convergence study");
  conv->add_option("--elements", ca.elements)->check(CLI::IsMember({"low", "high"}));
  conv->add_option("--levels", ca.levels)->check(CLI::Range(1, 6));
  conv->add_option("--matching", ca.matching)->check(CLI::IsMember({"yes", "no"}));
  conv->add_option("--out", ca.out, "CSV file (default: stdout)");

  RunArgs ra;
  auto* runc = app.add_subcommand("run", "Fractured reservoir scenario");
  runc->add_option("--scenario", ra.scenario)
      ->check(CLI::IsMember({"example2", "example3", "sensitivity:A", "sensitivity:B", "sensitivity:C", "sensitivity:D"}));
  runc->add_option("--set", ra.sets, "Override, e.g. params.s0=0.01 or T=10");
  runc->add_option("--config", ra.config, "Configuration file")->check(CLI::ExistingFile);
  runc->add_option("--out", ra.out, "Output directory for VTK files and manifest");
  runc->add_option("--permeability", ra.permeability, "Permeability raster (example3)");
  runc->add_option("--porosity", ra.porosity, "Porosity raster (example3)");

  MeshArgs ma;
  auto* meshc = app.add_subcommand("mesh", "Write a mesh");
  meshc->add_option("--make", ma.make)->check(CLI::IsMember({"rect", "fracture"}));
  meshc->add_option("--n", ma.n, "Cells per side (rect)")->check(CLI::PositiveNumber);
  meshc->add_option("--resolution", ma.resolution, "Edge length (fracture)")->check(CLI::PositiveNumber);
  meshc->add_flag("--mapped", ma.mapped, "Apply the reservoir map (fracture)");
  meshc->add_option("--out", ma.out, "Output path")->required();

  DiagArgs da;
  auto* diagc = app.add_subcommand("diag", "Diagnostics");
  diagc->add_flag("--infsup", da.infsup, "Inf-sup constant estimate");
  diagc->add_flag("--energy", da.energy, "Energy identity and constraint residuals");
  diagc->add_flag("--unstable", da.unstable, "Use the unstable P1-P1 Stokes pair (--infsup)");
  diagc->add_option("--n", da.n, "Cells per side")->check(CLI::PositiveNumber);
  diagc->add_option("--elements", da.elements)->check(CLI::IsMember({"low", "high"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*conv) return converge(ca);
    if (*runc) return run(ra);
    if (*meshc) return mesh(ma);
    return diag(da);
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
