#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sbfem/solver.hpp"

namespace sbfem {

/// Cell-centred scalar raster: value(i, j) covers
/// [x0 + i dx, x0 + (i+1) dx] x [y0 + j dy, y0 + (j+1) dy], stored row-major
/// (row j, column i).
struct RasterField {
  int nx = 0, ny = 0;
  double x0 = 0.0, y0 = 0.0, dx = 0.0, dy = 0.0;
  std::vector<double> values;

  /// Value of the cell containing p; throws OutOfBounds outside the raster.
  double at(const Vec2& p) const;
};

/// Format: "raster 1", then "nx ny x0 y0 dx dy", then nx*ny values.
RasterField read_raster(const std::string& path);
void write_raster(const RasterField& r, const std::string& path);

/// Raster value at each cell centroid. Throws OutOfBounds naming the first
/// cell whose centroid lies outside the raster.
std::vector<double> project_raster(const RasterField& r, const Mesh2D& mesh);

/// (lambda_p, mu_p) of an isotropic solid; requires E > 0 and 0 <= nu < 0.5.
std::pair<double, double> lame_from_E_nu(double E, double nu);

/// E = 1e7 (1 - phi / c)^2.1 for 0 <= phi <= c.
double youngs_from_porosity(double phi, double c = 0.5);

/// Layered stand-in for a 60x220 reservoir cross-section on [0,1]x[-1,1]:
/// porosity in [0.05, 0.3] and isotropic permeability in m^2 correlated
/// with it. Deterministic for a given seed.
std::pair<RasterField, RasterField> synthetic_reservoir_rasters(unsigned seed = 2024);

enum class Geometry { reference, mapped };

/// One fractured-reservoir run.
struct ScenarioConfig {
  std::string name;
  Geometry geometry = Geometry::mapped;
  double resolution = 0.025;  ///< target edge length along the fracture (reference domain)

  double E = 1e7;
  double nu = 0.2;
  PhysicalParams params;  ///< lambda_p and mu_p are derived from E and nu unless rasters are given

  /// Heterogeneous data on the reference domain; when set they replace K
  /// (isotropic) and E (through youngs_from_porosity) cell by cell.
  std::optional<RasterField> permeability, porosity;

  double injection = 10.0;  ///< inflow speed into the fracture mouth
  double boundary_pressure = 1000.0;
  double initial_pressure = 1000.0;

  double T = 300.0;
  double tau = 1.0;
  ElementSet elements = ElementSet::high;
  ElementFamily displacement = ElementFamily::VecP1;

  int output_stride = 0;   ///< VTK snapshots every stride steps (0: final only)
  std::string output_dir;  ///< empty: no files
  bool diagnostics = true;  ///< energy identity and constraint residual per step
  /// Solve for the deviation from the hydrostatic state p = initial_pressure
  /// (an exact discrete equilibrium when alpha = 1) and add it back; keeps
  /// the ambient pressure out of the energy balance.
  bool hydrostatic_shift = true;
};

/// Example 2: homogeneous reservoir on the mapped domain.
ScenarioConfig example2_config();
/// Example 3: raster-driven K and E on the reference domain.
ScenarioConfig example3_config(const RasterField& permeability, const RasterField& porosity);
/// Sensitivity cases A, B, C, D in order.
std::array<ScenarioConfig, 4> sensitivity_configs();

/// Material data of a config on a given poro mesh (rasters projected).
PhysicalParams resolve_params(const ScenarioConfig& cfg, const Mesh2D& poro);

/// Boundary and initial data shared by all reservoir scenarios.
ProblemData reservoir_problem(const ScenarioConfig& cfg);

/// Meshes of a config, mapped if requested.
std::pair<std::shared_ptr<const Mesh2D>, std::shared_ptr<const Mesh2D>> scenario_meshes(const ScenarioConfig& cfg);

struct ScenarioSummary {
  double max_darcy_velocity = 0.0;     ///< max |u_p| over cell centroids and vertices
  double near_fracture_pressure = 0.0;  ///< area-weighted mean p_p over cells within 0.1 of the interface
  double max_displacement = 0.0;       ///< max |eta| over displacement nodes
  double pressure_drop = 0.0;          ///< max minus min cell-mean p_p
  double max_fluid_velocity = 0.0;
  double mean_fluid_pressure = 0.0;
  double max_energy_residual = 0.0;
  double max_constraint_residual = 0.0;
  int steps = 0;
};

struct ScenarioResult {
  ScenarioSummary summary;
  std::vector<std::string> files;  ///< VTK files written
  Vector X;                        ///< final state
};

/// Runs a config to T; writes VTK snapshots when output_dir is set.
ScenarioResult run_scenario(const ScenarioConfig& cfg);

/// Runs the given configs as concurrent jobs; results in input order.
std::vector<ScenarioResult> run_scenarios(const std::vector<ScenarioConfig>& cfgs);

/// Summary metrics of one state.
ScenarioSummary summarize(const Discretization& d, const Vector& X);

}  // namespace sbfem
