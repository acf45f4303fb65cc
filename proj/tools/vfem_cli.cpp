#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vfem/assembly.hpp"
#include "vfem/bench.hpp"
#include "vfem/kernels.hpp"
#include "vfem/parallel.hpp"
#include "vfem/scenario.hpp"
#include "vfem/verify.hpp"

namespace {

using namespace vfem;

Target parse_target(const std::string& s) {
    if (s == "mass") return Target::mass;
    if (s == "conductivity") return Target::conductivity;
    if (s == "reaction") return Target::reaction;
    throw CLI::ValidationError("--targets", "unknown target '" + s + "' (mass, conductivity, reaction)");
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    return f;
}

struct BenchArgs {
    int levels = 4;
    int order = 1;
    int base = 8;
    std::vector<std::string> targets{"mass", "conductivity"};
    int reps = 5;
    double memory_cap_mb = 2048.0;
    std::string out;
};

int cmd_bench(const BenchArgs& a) {
    BenchOptions o;
    o.levels = a.levels;
    o.order = a.order;
    o.base_n_div = a.base;
    o.reps = a.reps;
    o.memory_cap_bytes = static_cast<std::size_t>(a.memory_cap_mb * 1024.0 * 1024.0);
    o.targets.clear();
    for (const auto& t : a.targets) o.targets.push_back(parse_target(t));

    const BenchResult res = run_bench(o);
    if (a.out.empty()) {
        write_bench_csv(res, std::cout);
    } else {
        auto f = open_out(a.out);
        write_bench_csv(res, f);
    }
    std::ostream& log = a.out.empty() ? std::cerr : std::cout;
    log << "kernels: " << kernels::active().name << ", threads: " << num_threads() << '\n';
    for (const auto& s : res.slopes)
        log << "slope " << s.target << ' ' << s.algorithm << ' ' << s.quantity << " log(time)/log(n) = " << std::fixed
            << std::setprecision(3) << s.slope << std::defaultfloat << " over " << s.points << " levels\n";
    for (const auto& n : res.notes) log << "note: " << n << '\n';
    for (const auto& r : res.records)
        if (!r.verified) return 1;
    return 0;
}

struct HeatArgs {
    std::string config;
    std::string out;
    std::string summary;
    std::size_t snapshot_stride = 0;
    std::string snapshots;
};

int cmd_heat(const HeatArgs& a) {
    Scenario sc = load_scenario(a.config);
    if (a.snapshot_stride > 0) sc.march.snapshot_stride = a.snapshot_stride;
    const auto t0 = std::chrono::steady_clock::now();
    HeatSolver solver(sc.problem);
    const SolutionHistory h = solver.march(sc.march);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    {
        auto f = open_out(a.out);
        f << "# vfem-probe-csv v1\n";
        f << 't';
        if (h.probes.size() == 1) {
            f << ",value";
        } else {
            for (std::size_t k = 0; k < h.probes.size(); ++k) f << ",value_" << k;
        }
        f << '\n' << std::setprecision(12);
        for (std::size_t s = 0; s < h.times.size(); ++s) {
            f << h.times[s];
            for (const auto& p : h.probes) f << ',' << p.values[s];
            f << '\n';
        }
    }

    if (!a.snapshots.empty()) {
        const auto xy = sc.problem.mesh->coords();
        for (std::size_t k = 0; k < h.snapshots.size(); ++k) {
            std::ostringstream name;
            name << a.snapshots << "_step" << std::setw(6) << std::setfill('0') << h.snapshot_steps[k] << ".csv";
            auto f = open_out(name.str());
            f << "# vfem-snapshot-csv v1\nnode_id,x,y,u\n" << std::setprecision(12);
            for (std::size_t i = 0; i < xy.size(); ++i)
                f << i << ',' << xy[i].x << ',' << xy[i].y << ',' << h.snapshots[k][i] << '\n';
        }
    }

    std::size_t newton = 0, gmres = 0, max_gmres = 0;
    int max_newton = 0;
    for (const auto& s : h.steps) {
        newton += static_cast<std::size_t>(s.newton_iterations);
        gmres += s.gmres_iterations;
        max_gmres = std::max(max_gmres, s.max_gmres_iterations);
        max_newton = std::max(max_newton, s.newton_iterations);
    }
    const auto& t = solver.timings();
    const double other = std::max(0.0, wall - t.assembly_seconds - t.linear_solve_seconds);
    nlohmann::ordered_json j;
    j["format"] = "vfem-heat-summary v1";
    j["scenario"] = sc.name;
    j["config"] = a.config;
    j["order"] = sc.problem.mesh->order();
    j["dofs"] = sc.problem.mesh->num_nodes();
    j["elements"] = sc.problem.mesh->num_elements();
    j["steps"] = h.steps.size();
    j["dt"] = sc.problem.dt;
    j["t_final"] = sc.problem.t_final;
    j["radiation_in_kelvin"] = sc.radiation_in_kelvin;
    j["newton_iterations_total"] = newton;
    j["newton_iterations_mean_per_step"] = h.steps.empty() ? 0.0 : double(newton) / double(h.steps.size());
    j["newton_iterations_max_per_step"] = max_newton;
    j["gmres_iterations_total"] = gmres;
    j["gmres_iterations_max_per_solve"] = max_gmres;
    j["wall_seconds"] = {{"total", wall},
                         {"assembly", t.assembly_seconds},
                         {"linear_solve", t.linear_solve_seconds},
                         {"other", other}};
    j["wall_fraction"] = {{"assembly", t.assembly_seconds / wall},
                          {"linear_solve", t.linear_solve_seconds / wall},
                          {"other", other / wall}};
    nlohmann::ordered_json probes = nlohmann::ordered_json::array();
    for (const auto& p : h.probes) probes.push_back({{"x", p.point.x}, {"y", p.point.y}, {"final", p.values.back()}});
    j["probes"] = probes;
    j["kernels"] = std::string(kernels::active().name);
    j["threads"] = num_threads();
    if (!a.summary.empty()) {
        auto f = open_out(a.summary);
        f << j.dump(2) << '\n';
    }
    std::cout << "steps " << h.steps.size() << ", Newton " << newton << " (max " << max_newton << "/step), GMRES "
              << gmres << " (max " << max_gmres << "/solve), wall " << std::fixed << std::setprecision(2) << wall
              << " s (assembly " << t.assembly_seconds << ", linear solve " << t.linear_solve_seconds << ")\n";
    return 0;
}

struct VerifyArgs {
    std::uint64_t seed = VerifyOptions{}.seed;
    bool quick = false;
    bool brief = false;
    bool flip = false;
    std::vector<std::string> suites;
};

int cmd_verify(const VerifyArgs& a) {
    VerifyOptions o;
    o.seed = a.seed;
    o.quick = a.quick;
    testing::set_conductivity_sign_flip(a.flip);
    std::cout << "verify: seed " << o.seed << (o.quick ? ", quick" : "") << ", kernels " << kernels::active().name
              << ", threads " << num_threads() << '\n';
    const auto reports = run_verify(o, std::cout, a.suites, !a.brief);
    int failed = 0;
    for (const auto& r : reports) failed += r.passed ? 0 : 1;
    std::cout << (failed ? "FAILED " : "OK ") << reports.size() - failed << '/' << reports.size() << " suites passed\n";
    return failed ? 1 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"vfem: vectorized finite element assembly, nonlinear heat solver and verification"};
    app.require_subcommand(1);
    unsigned threads = 1;
    app.add_option("--threads", threads, "worker threads for element batches")->check(CLI::PositiveNumber);
    std::string kernel_choice = "auto";
    app.add_option("--kernels", kernel_choice, "kernel variant: auto, scalar or avx2")
        ->check(CLI::IsMember({"auto", "scalar", "avx2"}));

    BenchArgs ba;
    auto* bench = app.add_subcommand("bench", "time classical and vectorized assembly on a refinement ladder");
    bench->add_option("--levels", ba.levels, "refinement levels (n_div doubles per level)")->check(CLI::PositiveNumber);
    bench->add_option("--order", ba.order, "element order")->check(CLI::IsMember({1, 2}));
    bench->add_option("--base-n-div", ba.base, "n_div at the first level")->check(CLI::PositiveNumber);
    bench->add_option("--targets", ba.targets, "comma-separated targets")->delimiter(',');
    bench->add_option("--reps", ba.reps, "repetitions per cell (median reported, at least 5)");
    bench->add_option("--memory-cap-mb", ba.memory_cap_mb, "stop before a level estimated above this");
    bench->add_option("--out", ba.out, "CSV output (stdout when omitted)");

    HeatArgs ha;
    auto* heat = app.add_subcommand("heat", "run a transient nonlinear heat scenario from a JSON config");
    heat->add_option("--config", ha.config, "scenario JSON")->required()->check(CLI::ExistingFile);
    heat->add_option("--out", ha.out, "probe series CSV")->required();
    heat->add_option("--summary", ha.summary, "summary JSON");
    heat->add_option("--snapshot-stride", ha.snapshot_stride, "keep every K-th state");
    heat->add_option("--snapshots", ha.snapshots, "prefix for node_id,x,y,u snapshot CSVs");

    VerifyArgs va;
    auto* verify = app.add_subcommand("verify", "run the acceptance suites (AC1..AC8)");
    verify->add_option("--seed", va.seed, "random seed");
    verify->add_flag("--quick", va.quick, "smaller meshes and horizons");
    verify->add_flag("--brief", va.brief, "one line per suite");
    verify->add_option("--suite", va.suites, "run only these suite ids (repeatable)");
    verify->add_flag("--mutate-conductivity-sign", va.flip, "test hook: negate Q_c")->group("");

    CLI11_PARSE(app, argc, argv);

    try {
        set_num_threads(threads);
        if (kernel_choice == "scalar") kernels::select(kernels::Isa::scalar);
        if (kernel_choice == "avx2" && !kernels::select(kernels::Isa::avx2))
            std::cerr << "avx2 kernels unavailable, using scalar\n";
        if (*bench) return cmd_bench(ba);
        if (*heat) {
            if (ha.snapshot_stride > 0 && ha.snapshots.empty()) ha.snapshots = ha.out + ".snapshot";
            return cmd_heat(ha);
        }
        if (*verify) return cmd_verify(va);
    } catch (const vfem::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
