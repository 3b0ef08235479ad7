#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sbfem/mesh.hpp"
#include "sbfem/scenarios.hpp"

namespace sbfem {

inline constexpr const char* version_string = "sbfem 1.0.0";

/// Named data attached to mesh vertices or cells. `components` is 1 or 2;
/// 2-component data is written as VTK vectors with z = 0.
struct VtkField {
  enum class Location { point, cell };
  std::string name;
  Location location = Location::point;
  int components = 1;
  std::vector<double> values;  ///< interleaved when components == 2
};

/// Legacy ASCII VTK unstructured grid of triangles. Throws InvalidArgument
/// when a field length does not match its entity count.
void write_vtk(const Mesh2D& mesh, const std::vector<VtkField>& fields, const std::string& path);
void write_vtk(const Mesh2D& mesh, const std::vector<VtkField>& fields, std::ostream& out);

/// Applies one `key = value` setting of `section` to `cfg`. Keys:
///   [params] mu, kxx, kyy, E, nu, alpha, s0, alpha_bjs
///   [time]   T, tau
///   [bc]     injection, boundary_pressure, initial_pressure
///   [output] dir, stride
///   [mesh]   geometry (reference|mapped), resolution, elements (low|high)
/// Throws ParseError(line) on unknown keys, malformed numbers and values
/// outside their ranges.
void apply_setting(ScenarioConfig& cfg, const std::string& section, const std::string& key, const std::string& value,
                   std::size_t line = 0);

/// `section.key=value` or `key=value` (key searched in every section).
void apply_override(ScenarioConfig& cfg, const std::string& assignment);

/// Reads a configuration on top of `base`. Duplicate keys within a section
/// are rejected. Missing sections keep the values of `base`.
ScenarioConfig parse_config(std::istream& in, ScenarioConfig base = example2_config());
ScenarioConfig parse_config(const std::string& path, ScenarioConfig base = example2_config());

/// Resolved configuration and summary as pretty-printed JSON.
std::string manifest_json(const ScenarioConfig& cfg, const ScenarioSummary* summary = nullptr);
void write_manifest(const ScenarioConfig& cfg, const ScenarioSummary* summary, const std::string& path);

}  // namespace sbfem
