#include "sbfem/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "sbfem/error.hpp"

namespace sbfem {

void write_vtk(const Mesh2D& mesh, const std::vector<VtkField>& fields, std::ostream& out) {
  for (const auto& f : fields) {
    if (f.components != 1 && f.components != 2) {
      throw InvalidArgument("write_vtk: field '" + f.name + "' must have 1 or 2 components");
    }
    const std::size_t count = f.location == VtkField::Location::point ? mesh.n_nodes() : mesh.n_cells();
    if (f.values.size() != count * f.components) {
      throw InvalidArgument("write_vtk: field '" + f.name + "' has " + std::to_string(f.values.size()) +
                            " values, expected " + std::to_string(count * f.components));
    }
    if (f.name.empty() || f.name.find_first_of(" \t\n") != std::string::npos) {
      throw InvalidArgument("write_vtk: field names must be non-empty without whitespace");
    }
  }
  out << std::setprecision(17);
  out << "# vtk DataFile Version 3.0\n" << version_string << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.n_nodes() << " double\n";
  for (const auto& p : mesh.nodes()) out << p.x() << ' ' << p.y() << " 0\n";
  out << "CELLS " << mesh.n_cells() << ' ' << 4 * mesh.n_cells() << '\n';
  for (const auto& t : mesh.triangles()) out << "3 " << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << '\n';
  out << "CELL_TYPES " << mesh.n_cells() << '\n';
  for (int c = 0; c < mesh.n_cells(); ++c) out << "5\n";

  auto section = [&](VtkField::Location loc, const char* header, int count) {
    bool opened = false;
    for (const auto& f : fields) {
      if (f.location != loc) continue;
      if (!opened) {
        out << header << ' ' << count << '\n';
        opened = true;
      }
      if (f.components == 1) {
        out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
        for (double v : f.values) out << v << '\n';
      } else {
        out << "VECTORS " << f.name << " double\n";
        for (std::size_t k = 0; k < f.values.size(); k += 2) out << f.values[k] << ' ' << f.values[k + 1] << " 0\n";
      }
    }
  };
  section(VtkField::Location::point, "POINT_DATA", mesh.n_nodes());
  section(VtkField::Location::cell, "CELL_DATA", mesh.n_cells());
}

void write_vtk(const Mesh2D& mesh, const std::vector<VtkField>& fields, const std::string& path) {
  std::ostringstream buf;
  write_vtk(mesh, fields, buf);
  std::ofstream out(path);
  if (!out) throw InvalidArgument("write_vtk: cannot open " + path);
  out << buf.str();
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& key, const std::string& v, std::size_t line) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(x)) {
    throw ParseError(line, "'" + key + "' expects a number, got '" + v + "'");
  }
  return x;
}

int parse_int(const std::string& key, const std::string& v, std::size_t line) {
  const double x = parse_number(key, v, line);
  if (x != std::floor(x) || std::abs(x) > 1e9) throw ParseError(line, "'" + key + "' expects an integer");
  return static_cast<int>(x);
}

void require(bool ok, const std::string& key, const char* range, std::size_t line) {
  if (!ok) throw ParseError(line, "'" + key + "' out of range: must be " + range);
}

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> k = {
      {"params", {"mu", "kxx", "kyy", "E", "nu", "alpha", "s0", "alpha_bjs"}},
      {"time", {"T", "tau"}},
      {"bc", {"injection", "boundary_pressure", "initial_pressure"}},
      {"output", {"dir", "stride"}},
      {"mesh", {"geometry", "resolution", "elements"}},
  };
  return k;
}

}  // namespace

void apply_setting(ScenarioConfig& cfg, const std::string& section, const std::string& key, const std::string& value,
                   std::size_t line) {
  const auto& keys = known_keys();
  const auto sec = keys.find(section);
  if (sec == keys.end()) throw ParseError(line, "unknown section [" + section + "]");
  if (!sec->second.count(key)) throw ParseError(line, "unknown key '" + key + "' in [" + section + "]");

  if (section == "params") {
    if (key == "mu") {
      cfg.params.mu = parse_number(key, value, line);
      require(cfg.params.mu > 0.0, key, "positive", line);
    } else if (key == "kxx" || key == "kyy") {
      const double k = parse_number(key, value, line);
      require(k > 0.0, key, "positive", line);
      if (cfg.params.K.size() != 1) cfg.params.K = {Mat2::Identity()};
      cfg.params.K[0](key == "kxx" ? 0 : 1, key == "kxx" ? 0 : 1) = k;
    } else if (key == "E") {
      cfg.E = parse_number(key, value, line);
      require(cfg.E > 0.0, key, "positive", line);
    } else if (key == "nu") {
      cfg.nu = parse_number(key, value, line);
      require(cfg.nu >= 0.0 && cfg.nu < 0.5, key, "in [0, 0.5)", line);
    } else if (key == "alpha") {
      cfg.params.alpha = parse_number(key, value, line);
      require(cfg.params.alpha >= 0.0 && cfg.params.alpha <= 1.0, key, "in [0, 1]", line);
    } else if (key == "s0") {
      cfg.params.s0 = parse_number(key, value, line);
      require(cfg.params.s0 >= 0.0, key, "non-negative", line);
    } else if (key == "alpha_bjs") {
      cfg.params.alpha_bjs = parse_number(key, value, line);
      require(cfg.params.alpha_bjs >= 0.0, key, "non-negative", line);
    }
    if (key == "E" || key == "nu") {
      const auto [lam, mu] = lame_from_E_nu(cfg.E, cfg.nu);
      cfg.params.lambda_p = {lam};
      cfg.params.mu_p = {mu};
    }
  } else if (section == "time") {
    const double v = parse_number(key, value, line);
    require(v > 0.0, key, "positive", line);
    (key == "T" ? cfg.T : cfg.tau) = v;
  } else if (section == "bc") {
    const double v = parse_number(key, value, line);
    if (key == "injection") cfg.injection = v;
    if (key == "boundary_pressure") cfg.boundary_pressure = v;
    if (key == "initial_pressure") cfg.initial_pressure = v;
  } else if (section == "output") {
    if (key == "dir") {
      cfg.output_dir = value;
    } else {
      cfg.output_stride = parse_int(key, value, line);
      require(cfg.output_stride >= 0, key, "non-negative", line);
    }
  } else if (section == "mesh") {
    if (key == "geometry") {
      if (value == "reference") cfg.geometry = Geometry::reference;
      else if (value == "mapped") cfg.geometry = Geometry::mapped;
      else throw ParseError(line, "'geometry' must be 'reference' or 'mapped'");
    } else if (key == "resolution") {
      cfg.resolution = parse_number(key, value, line);
      require(cfg.resolution > 0.0 && cfg.resolution <= 0.05, key, "in (0, 0.05]", line);
    } else {
      if (value == "low") cfg.elements = ElementSet::low;
      else if (value == "high") cfg.elements = ElementSet::high;
      else throw ParseError(line, "'elements' must be 'low' or 'high'");
    }
  }
}

void apply_override(ScenarioConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ParseError(0, "override '" + assignment + "' must have the form key=value");
  std::string key = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  const auto dot = key.find('.');
  if (dot != std::string::npos) {
    apply_setting(cfg, key.substr(0, dot), key.substr(dot + 1), value);
    return;
  }
  for (const auto& [section, keys] : known_keys()) {
    if (keys.count(key)) {
      apply_setting(cfg, section, key, value);
      return;
    }
  }
  throw ParseError(0, "unknown key '" + key + "'");
}

ScenarioConfig parse_config(std::istream& in, ScenarioConfig base) {
  std::string raw, section;
  std::size_t line = 0;
  std::set<std::string> seen_sections, seen_keys;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ParseError(line, "malformed section header '" + s + "'");
      section = trim(s.substr(1, s.size() - 2));
      if (!known_keys().count(section)) throw ParseError(line, "unknown section [" + section + "]");
      if (!seen_sections.insert(section).second) throw ParseError(line, "duplicate section [" + section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError(line, "expected 'key = value'");
    if (section.empty()) throw ParseError(line, "setting outside a section");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (!seen_keys.insert(section + "." + key).second) throw ParseError(line, "duplicate key '" + key + "'");
    apply_setting(base, section, key, value, line);
  }
  step_count(base.T, base.tau);
  return base;
}

ScenarioConfig parse_config(const std::string& path, ScenarioConfig base) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open " + path);
  return parse_config(in, std::move(base));
}

std::string manifest_json(const ScenarioConfig& cfg, const ScenarioSummary* summary) {
  nlohmann::ordered_json j;
  j["version"] = version_string;
  j["scenario"] = cfg.name;
  j["mesh"] = {{"geometry", cfg.geometry == Geometry::mapped ? "mapped" : "reference"},
               {"resolution", cfg.resolution},
               {"elements", cfg.elements == ElementSet::high ? "high" : "low"},
               {"displacement", std::string(to_string(cfg.displacement))}};
  nlohmann::ordered_json params;
  params["mu"] = cfg.params.mu;
  if (cfg.permeability) {
    params["K"] = "raster";
  } else {
    const Mat2& K = cfg.params.K.at(0);
    params["K"] = {{K(0, 0), K(0, 1)}, {K(1, 0), K(1, 1)}};
  }
  params["E"] = cfg.porosity ? nlohmann::ordered_json("porosity raster") : nlohmann::ordered_json(cfg.E);
  params["nu"] = cfg.nu;
  params["alpha"] = cfg.params.alpha;
  params["s0"] = cfg.params.s0;
  params["alpha_bjs"] = cfg.params.alpha_bjs;
  j["params"] = params;
  j["time"] = {{"T", cfg.T}, {"tau", cfg.tau}};
  j["bc"] = {{"injection", cfg.injection},
             {"boundary_pressure", cfg.boundary_pressure},
             {"initial_pressure", cfg.initial_pressure}};
  j["output"] = {{"dir", cfg.output_dir}, {"stride", cfg.output_stride}};
  if (summary) {
    j["summary"] = {{"max_darcy_velocity", summary->max_darcy_velocity},
                    {"near_fracture_pressure", summary->near_fracture_pressure},
                    {"max_displacement", summary->max_displacement},
                    {"pressure_drop", summary->pressure_drop},
                    {"max_fluid_velocity", summary->max_fluid_velocity},
                    {"mean_fluid_pressure", summary->mean_fluid_pressure},
                    {"max_energy_residual", summary->max_energy_residual},
                    {"max_constraint_residual", summary->max_constraint_residual},
                    {"steps", summary->steps}};
  }
  return j.dump(2) + "\n";
}

void write_manifest(const ScenarioConfig& cfg, const ScenarioSummary* summary, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("write_manifest: cannot open " + path);
  out << manifest_json(cfg, summary);
}

}  // namespace sbfem
