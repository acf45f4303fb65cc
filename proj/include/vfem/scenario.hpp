#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "vfem/heat.hpp"

namespace vfem {

/// A heat problem plus everything needed to run it from the command line.
struct Scenario {
    std::string name;
    HeatProblem problem;
    MarchOptions march;
    bool radiation_in_kelvin = false;
};

/// Parses the JSON scenario format described in README.md. Errors are
/// ConfigError with the offending field path, e.g. "boundary[0].h_c".
/// Relative mesh paths resolve against base_dir.
Scenario parse_scenario(std::string_view json_text, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);

/// The concrete-slab heating case: P2 on (0, 0.2)^2, rho c = 2.4e6, piecewise
/// linear k, convection + radiation to 1000 C on all sides, dt 10 s, 3 h.
/// Matches configs/exp2.json when n_div = 20.
Scenario slab_scenario(int n_div = 20, bool radiation_in_kelvin = false);

} // namespace vfem
