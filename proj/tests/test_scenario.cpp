#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "vfem/error.hpp"
#include "vfem/scenario.hpp"

using namespace vfem;

namespace {

std::string read(const std::filesystem::path& p) {
    std::ifstream f(p);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string replaced(std::string s, const std::string& from, const std::string& to) {
    const auto at = s.find(from);
    REQUIRE(at != std::string::npos);
    return s.replace(at, from.size(), to);
}

std::string error_of(const std::string& json) {
    try {
        parse_scenario(json);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

const char* kMinimal = R"({
  "order": 1,
  "mesh": {"type": "rectangle", "nx": 2, "ny": 2, "x0": 0, "y0": 0, "x1": 1, "y1": 1},
  "time": {"dt": 0.5, "t_final": 1.0},
  "coefficients": {"m": 1.0, "c": 2.0},
  "initial": 0.0,
  "boundary": [{"type": "dirichlet", "value": 1.0, "tags": [1, 2, 3, 4]}]
})";

} // namespace

TEST_CASE("shipped slab config matches the built-in scenario") {
    const Scenario a = load_scenario(std::filesystem::path(VFEM_CONFIG_DIR) / "exp2.json");
    const Scenario b = slab_scenario();
    CHECK(a.name == b.name);
    CHECK(a.problem.mesh->order() == 2);
    CHECK(a.problem.mesh->num_nodes() == b.problem.mesh->num_nodes());
    CHECK(a.problem.mesh->num_elements() == b.problem.mesh->num_elements());
    CHECK(a.problem.dt == 10.0);
    CHECK(a.problem.t_final == 10800.0);
    CHECK(a.problem.num_steps() == 1080);
    CHECK(a.problem.m.constant_value() == b.problem.m.constant_value());
    for (double T : {-10.0, 0.0, 150.0, 200.0, 640.0, 1000.0, 1200.0}) {
        CHECK(a.problem.c.value(0, 0, 0, T) == b.problem.c.value(0, 0, 0, T));
        CHECK(a.problem.c.derivative(T) == b.problem.c.derivative(T));
    }
    REQUIRE(a.problem.boundary.size() == 4);
    for (const auto& [tag, bc] : a.problem.boundary) {
        const auto& fa = std::get<FluxBC>(bc).flux;
        const auto& fb = std::get<FluxBC>(b.problem.boundary.at(tag)).flux;
        for (double T : {0.0, 300.0, 1000.0}) {
            CHECK(fa.g(T, 0, 0, 0) == doctest::Approx(fb.g(T, 0, 0, 0)).epsilon(1e-15));
            CHECK(fa.dg_dT(T, 0, 0, 0) == doctest::Approx(fb.dg_dT(T, 0, 0, 0)).epsilon(1e-15));
        }
    }
    REQUIRE(a.march.probes.size() == 1);
    CHECK(a.march.probes[0].x == 0.1);
    CHECK(a.march.probes[0].y == 0.1);
    CHECK(a.march.newton.tol_increment == 1e-7);
    CHECK_FALSE(a.radiation_in_kelvin);
}

TEST_CASE("minimal config parses with defaults") {
    const Scenario s = parse_scenario(kMinimal);
    CHECK(s.problem.mesh->num_nodes() == 9);
    CHECK(s.problem.c.constant_value() == 2.0);
    CHECK(s.problem.a.is_zero());
    CHECK(std::holds_alternative<DirichletBC>(s.problem.boundary.at(3)));
}

TEST_CASE("errors carry the field path") {
    CHECK(error_of(replaced(kMinimal, "\"dt\": 0.5", "\"dt\": -1")).find("time.dt") != std::string::npos);
    CHECK(error_of(replaced(kMinimal, "\"value\": 1.0", "\"valu\": 1.0")).find("boundary[0]") != std::string::npos);
    CHECK(error_of(replaced(kMinimal, "[1, 2, 3, 4]", "[1, 2, 3]")).find("4") != std::string::npos);
    CHECK(error_of(replaced(kMinimal, "\"c\": 2.0",
                            "\"c\": {\"type\": \"piecewise_linear\", \"breakpoints\": [0, 1], \"values\": [1, 2, 3]}"))
              .find("coefficients.c") != std::string::npos);
    CHECK(error_of(replaced(kMinimal, "\"order\": 1", "\"order\": 3")).find("order") != std::string::npos);
    CHECK_FALSE(error_of(replaced(kMinimal, "\"initial\"", "\"initail\"")).empty());
    CHECK_FALSE(error_of("{").empty());
}

TEST_CASE("gmsh meshes resolve relative to the config") {
    const auto dir = std::filesystem::temp_directory_path() / "vfem_scenario_test";
    std::filesystem::create_directories(dir);
    std::filesystem::copy_file(std::filesystem::path(VFEM_TEST_FIXTURES) / "unit_square.msh", dir / "sq.msh",
                               std::filesystem::copy_options::overwrite_existing);
    const std::string cfg =
        replaced(replaced(kMinimal, "{\"type\": \"rectangle\", \"nx\": 2, \"ny\": 2, \"x0\": 0, \"y0\": 0, \"x1\": 1, \"y1\": 1}",
                          "{\"type\": \"gmsh\", \"path\": \"sq.msh\"}"),
                 "\"order\": 1", "\"order\": 2");
    {
        std::ofstream f(dir / "case.json");
        f << cfg;
    }
    const Scenario s = load_scenario(dir / "case.json");
    std::filesystem::remove_all(dir);
    CHECK(s.problem.mesh->order() == 2);
    CHECK(s.problem.mesh->num_nodes() == 9);
}

TEST_CASE("bundled config file is readable") { CHECK_FALSE(read(std::filesystem::path(VFEM_CONFIG_DIR) / "exp2.json").empty()); }
