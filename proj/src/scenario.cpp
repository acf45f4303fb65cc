#include "vfem/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace vfem {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

const json& field(const json& obj, const std::string& path, const char* key) {
    if (!obj.is_object()) fail(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(path + "." + key, "missing required field");
    return *it;
}

double number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

double number(const json& obj, const std::string& path, const char* key) {
    return number(field(obj, path, key), path + "." + key);
}

double number_or(const json& obj, const std::string& path, const char* key, double fallback) {
    return obj.contains(key) ? number(obj, path, key) : fallback;
}

int integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<int>();
}

std::string string(const json& obj, const std::string& path, const char* key) {
    const json& v = field(obj, path, key);
    if (!v.is_string()) fail(path + "." + key, "expected a string");
    return v.get<std::string>();
}

bool boolean_or(const json& obj, const std::string& path, const char* key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_boolean()) fail(path + "." + key, "expected true or false");
    return obj[key].get<bool>();
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : obj.items())
        if (!ok.contains(k)) fail(path + "." + k, "unknown field");
}

std::array<double, 3> triple(const json& obj, const std::string& path, const char* key) {
    const json& v = field(obj, path, key);
    const std::string p = path + "." + key;
    if (!v.is_array() || v.size() != 3) fail(p, "expected an array of 3 numbers");
    return {number(v[0], p + "[0]"), number(v[1], p + "[1]"), number(v[2], p + "[2]")};
}

std::shared_ptr<const TriangleMesh> parse_mesh(const json& j, const std::string& path, int order,
                                               const std::filesystem::path& base_dir) {
    const std::string type = string(j, path, "type");
    TriangleMesh mesh = [&] {
        if (type == "rectangle") {
            check_keys(j, path, {"type", "nx", "ny", "x0", "y0", "x1", "y1"});
            const int nx = integer(field(j, path, "nx"), path + ".nx");
            const int ny = integer(field(j, path, "ny"), path + ".ny");
            if (nx < 1) fail(path + ".nx", "must be at least 1");
            if (ny < 1) fail(path + ".ny", "must be at least 1");
            return generate_structured_rectangle(nx, ny, number(j, path, "x0"), number(j, path, "y0"),
                                                 number(j, path, "x1"), number(j, path, "y1"));
        }
        if (type == "gmsh") {
            check_keys(j, path, {"type", "path"});
            std::filesystem::path p = string(j, path, "path");
            if (p.is_relative()) p = base_dir / p;
            return load_gmsh(p);
        }
        fail(path + ".type", "unknown mesh type '" + type + "' (expected rectangle or gmsh)");
    }();
    if (order == 2 && mesh.order() == 1) mesh = promote_to_p2(mesh);
    if (mesh.order() != order) fail(path, "mesh file order does not match the requested order");
    return std::make_shared<const TriangleMesh>(std::move(mesh));
}

CoefficientField parse_coefficient(const json& j, const std::string& path) {
    if (j.is_number()) return CoefficientField::constant(j.get<double>());
    const std::string type = string(j, path, "type");
    if (type == "constant") {
        check_keys(j, path, {"type", "value"});
        return CoefficientField::constant(number(j, path, "value"));
    }
    if (type == "product") {
        check_keys(j, path, {"type", "factors"});
        const json& f = field(j, path, "factors");
        if (!f.is_array() || f.empty()) fail(path + ".factors", "expected a non-empty array of numbers");
        double v = 1.0;
        for (std::size_t i = 0; i < f.size(); ++i) v *= number(f[i], path + ".factors[" + std::to_string(i) + "]");
        return CoefficientField::constant(v);
    }
    if (type == "affine") {
        check_keys(j, path, {"type", "value", "slope"});
        const double v0 = number(j, path, "value");
        const double s = number(j, path, "slope");
        return CoefficientField::state([v0, s](double u) { return v0 + s * u; }, [s](double) { return s; });
    }
    if (type == "piecewise_linear") {
        check_keys(j, path, {"type", "breakpoints", "values"});
        PiecewiseLinearConductivity k{triple(j, path, "breakpoints"), triple(j, path, "values")};
        try {
            return k.as_coefficient();
        } catch (const ConfigError& e) {
            fail(path + ".breakpoints", e.what());
        }
    }
    fail(path + ".type", "unknown coefficient type '" + type + "'");
}

BoundaryCondition parse_bc(const json& j, const std::string& path, bool& kelvin) {
    const std::string type = string(j, path, "type");
    if (type == "dirichlet") {
        check_keys(j, path, {"type", "tags", "value"});
        const double v = number(j, path, "value");
        return DirichletBC{[v](double, double, double) { return v; }};
    }
    if (type == "flux") {
        check_keys(j, path, {"type", "tags", "value"});
        return FluxBC{BoundaryFlux::constant(number(j, path, "value"))};
    }
    if (type == "convection_radiation") {
        check_keys(j, path, {"type", "tags", "h_c", "emissivity", "stefan_boltzmann", "t_ambient", "radiation_in_kelvin"});
        const double h_c = number(j, path, "h_c");
        const double eps = number(j, path, "emissivity");
        const double sigma = number_or(j, path, "stefan_boltzmann", 5.670373e-8);
        const double t_a = number(j, path, "t_ambient");
        const bool k = boolean_or(j, path, "radiation_in_kelvin", false);
        kelvin = kelvin || k;
        if (h_c < 0.0) fail(path + ".h_c", "must be non-negative");
        if (eps < 0.0 || eps > 1.0) fail(path + ".emissivity", "must lie in [0, 1]");
        return FluxBC{BoundaryFlux::convection_radiation(h_c, eps * sigma, t_a, k)};
    }
    fail(path + ".type", "unknown boundary condition type '" + type + "'");
}

} // namespace

Scenario parse_scenario(std::string_view json_text, const std::filesystem::path& base_dir) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    const std::string p = "config";
    if (!root.is_object()) fail(p, "expected an object");
    check_keys(root, p, {"name", "order", "mesh", "time", "coefficients", "initial", "boundary", "probes", "solver",
                         "snapshot_stride"});

    Scenario sc;
    sc.name = root.contains("name") ? string(root, p, "name") : "scenario";
    const int order = integer(field(root, p, "order"), p + ".order");
    if (order != 1 && order != 2) fail(p + ".order", "must be 1 or 2");
    HeatProblem& prob = sc.problem;
    prob.mesh = parse_mesh(field(root, p, "mesh"), p + ".mesh", order, base_dir);

    const json& time = field(root, p, "time");
    check_keys(time, p + ".time", {"dt", "t_final"});
    prob.dt = number(time, p + ".time", "dt");
    prob.t_final = number(time, p + ".time", "t_final");
    if (!(prob.dt > 0.0)) fail(p + ".time.dt", "must be positive");
    if (!(prob.t_final >= 0.0)) fail(p + ".time.t_final", "must be non-negative");

    const json& coeffs = field(root, p, "coefficients");
    const std::string cp = p + ".coefficients";
    check_keys(coeffs, cp, {"m", "c", "a", "f"});
    prob.m = parse_coefficient(field(coeffs, cp, "m"), cp + ".m");
    prob.c = parse_coefficient(field(coeffs, cp, "c"), cp + ".c");
    if (coeffs.contains("a")) prob.a = parse_coefficient(coeffs["a"], cp + ".a");
    if (coeffs.contains("f")) {
        prob.source = parse_coefficient(coeffs["f"], cp + ".f");
        if (prob.source.kind() == CoefficientField::Kind::state) fail(cp + ".f", "source must not depend on the solution");
    }

    if (root.contains("initial")) {
        const double u0 = number(root["initial"], p + ".initial");
        prob.initial = [u0](double, double) { return u0; };
    }

    const json& bcs = field(root, p, "boundary");
    if (!bcs.is_array()) fail(p + ".boundary", "expected an array");
    for (std::size_t i = 0; i < bcs.size(); ++i) {
        const std::string bp = p + ".boundary[" + std::to_string(i) + "]";
        const BoundaryCondition bc = parse_bc(bcs[i], bp, sc.radiation_in_kelvin);
        const json& tags = field(bcs[i], bp, "tags");
        if (!tags.is_array() || tags.empty()) fail(bp + ".tags", "expected a non-empty array of integers");
        for (std::size_t k = 0; k < tags.size(); ++k) {
            const int tag = integer(tags[k], bp + ".tags[" + std::to_string(k) + "]");
            if (!prob.boundary.emplace(tag, bc).second)
                fail(bp + ".tags[" + std::to_string(k) + "]", "tag " + std::to_string(tag) + " is already mapped");
        }
    }
    std::set<int> mesh_tags;
    for (const auto& be : prob.mesh->boundary_edges()) mesh_tags.insert(be.tag);
    for (int tag : mesh_tags)
        if (!prob.boundary.contains(tag)) fail(p + ".boundary", "mesh boundary tag " + std::to_string(tag) + " is not mapped");

    if (root.contains("probes")) {
        const json& pr = root["probes"];
        if (!pr.is_array()) fail(p + ".probes", "expected an array of [x, y] pairs");
        for (std::size_t i = 0; i < pr.size(); ++i) {
            const std::string pp = p + ".probes[" + std::to_string(i) + "]";
            if (!pr[i].is_array() || pr[i].size() != 2) fail(pp, "expected [x, y]");
            sc.march.probes.push_back({number(pr[i][0], pp + "[0]"), number(pr[i][1], pp + "[1]")});
        }
    }

    if (root.contains("solver")) {
        const json& s = root["solver"];
        const std::string sp = p + ".solver";
        check_keys(s, sp, {"newton_tol", "newton_max_iters", "gmres_tol", "gmres_restart", "gmres_max_iters", "jacobi"});
        NewtonConfig& n = sc.march.newton;
        n.tol_increment = number_or(s, sp, "newton_tol", n.tol_increment);
        if (s.contains("newton_max_iters")) n.max_iters = integer(s["newton_max_iters"], sp + ".newton_max_iters");
        n.gmres.tol = number_or(s, sp, "gmres_tol", n.gmres.tol);
        if (s.contains("gmres_restart")) n.gmres.restart = static_cast<std::size_t>(integer(s["gmres_restart"], sp + ".gmres_restart"));
        if (s.contains("gmres_max_iters")) n.gmres.max_iters = static_cast<std::size_t>(integer(s["gmres_max_iters"], sp + ".gmres_max_iters"));
        n.jacobi = boolean_or(s, sp, "jacobi", false);
        if (!(n.tol_increment > 0.0)) fail(sp + ".newton_tol", "must be positive");
        if (!(n.gmres.tol > 0.0)) fail(sp + ".gmres_tol", "must be positive");
        if (n.max_iters < 1) fail(sp + ".newton_max_iters", "must be at least 1");
        if (n.gmres.restart < 1) fail(sp + ".gmres_restart", "must be at least 1");
    }
    if (root.contains("snapshot_stride")) {
        const int s = integer(root["snapshot_stride"], p + ".snapshot_stride");
        if (s < 0) fail(p + ".snapshot_stride", "must be non-negative");
        sc.march.snapshot_stride = static_cast<std::size_t>(s);
    }
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), path.parent_path());
}

Scenario slab_scenario(int n_div, bool radiation_in_kelvin) {
    if (n_div < 1) throw ConfigError("slab_scenario: n_div must be at least 1");
    Scenario sc;
    sc.name = "concrete-slab";
    sc.radiation_in_kelvin = radiation_in_kelvin;
    HeatProblem& p = sc.problem;
    p.mesh = std::make_shared<const TriangleMesh>(
        promote_to_p2(generate_structured_rectangle(n_div, n_div, 0.0, 0.0, 0.2, 0.2)));
    p.m = CoefficientField::constant(2400.0 * 1000.0);
    p.c = PiecewiseLinearConductivity{}.as_coefficient();
    p.a = CoefficientField::constant(0.0);
    p.source = CoefficientField::constant(0.0);
    p.initial = [](double, double) { return 0.0; };
    const FluxBC flux{BoundaryFlux::convection_radiation(10.0, 0.8 * 5.670373e-8, 1000.0, radiation_in_kelvin)};
    for (int tag = 1; tag <= 4; ++tag) p.boundary[tag] = flux;
    p.dt = 10.0;
    p.t_final = 10800.0;
    sc.march.probes = {{0.1, 0.1}};
    return sc;
}

} // namespace vfem
