// Regenerates the synthetic reservoir rasters shipped in data/.
#include <iostream>
#include <string>

#include "sbfem/scenarios.hpp"

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "data";
  const auto [perm, phi] = sbfem::synthetic_reservoir_rasters();
  sbfem::write_raster(perm, dir + "/permeability.raster");
  sbfem::write_raster(phi, dir + "/porosity.raster");
  std::cout << dir << "/permeability.raster\n" << dir << "/porosity.raster\n";
  return 0;
}
