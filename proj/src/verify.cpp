#include "vfem/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "vfem/assembly.hpp"
#include "vfem/bench.hpp"
#include "vfem/heat.hpp"
#include "vfem/parallel.hpp"
#include "vfem/scenario.hpp"
#include "vfem/tensor.hpp"

namespace vfem {

namespace {

using Clock = std::chrono::steady_clock;
using Rng = std::mt19937_64;

std::string fmt(double v) {
    std::ostringstream s;
    s << std::setprecision(3) << v;
    return s.str();
}

void at_most(SuiteReport& r, std::string name, double value, double tol) {
    r.checks.push_back({std::move(name), value, "<= " + fmt(tol), std::isfinite(value) && value <= tol});
}

void at_least(SuiteReport& r, std::string name, double value, double lo) {
    r.checks.push_back({std::move(name), value, ">= " + fmt(lo), std::isfinite(value) && value >= lo});
}

void within(SuiteReport& r, std::string name, double value, double lo, double hi) {
    r.checks.push_back({std::move(name), value, "in [" + fmt(lo) + ", " + fmt(hi) + "]",
                        std::isfinite(value) && value >= lo && value <= hi});
}

void holds(SuiteReport& r, std::string name, bool ok) { r.checks.push_back({std::move(name), ok ? 1.0 : 0.0, "== 1", ok}); }

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

std::vector<double> random_vector(Rng& rng, std::size_t n, double lo, double hi) {
    std::vector<double> v(n);
    for (double& x : v) x = uniform(rng, lo, hi);
    return v;
}

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double rel_dense_diff(const DenseMatrix& a, const DenseMatrix& b) {
    std::vector<double> d(a.values().begin(), a.values().end());
    for (std::size_t k = 0; k < d.size(); ++k) d[k] -= b.values()[k];
    const double scale = std::max(frobenius_norm(a.values()), frobenius_norm(b.values()));
    return scale == 0.0 ? frobenius_norm(d) : frobenius_norm(d) / scale;
}

bool bitwise_equal(std::span<const double> a, std::span<const double> b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

// Structured rectangle with random extents, jittered interior nodes and a
// random affine map. Every third mesh goes through a Gmsh file round trip.
TriangleMesh random_mesh(Rng& rng, int index, int min_div = 3, int max_div = 12) {
    std::uniform_int_distribution<int> div(min_div, max_div);
    const double x0 = uniform(rng, -1.0, 1.0), y0 = uniform(rng, -1.0, 1.0);
    TriangleMesh m = generate_structured_rectangle(div(rng), div(rng), x0, y0, x0 + uniform(rng, 0.5, 3.0),
                                                   y0 + uniform(rng, 0.5, 3.0));
    m = jitter_interior_nodes(m, 0.25, rng());
    m = affine_transform(m, 1.0 + uniform(rng, -0.3, 0.3), uniform(rng, -0.5, 0.5), uniform(rng, -0.5, 0.5),
                         1.0 + uniform(rng, -0.3, 0.3), uniform(rng, -2.0, 2.0), uniform(rng, -2.0, 2.0));
    if (index % 3 == 2) {
        const auto path = std::filesystem::temp_directory_path() /
                          ("vfem_verify_" + std::to_string(rng()) + ".msh");
        save_gmsh(m, path);
        TriangleMesh loaded = load_gmsh(path);
        std::filesystem::remove(path);
        return loaded;
    }
    return m;
}

// ---------------------------------------------------------------------------
// AC1

void suite_oracle(const VerifyOptions& opts, SuiteReport& r) {
    Rng rng(opts.seed ^ 0xa1);
    const int meshes = opts.quick ? 4 : 20;
    const auto t0 = Clock::now();
    double worst[3][3] = {};
    const Target targets[] = {Target::mass, Target::conductivity, Target::reaction};
    for (int i = 0; i < meshes; ++i) {
        const TriangleMesh p1 = random_mesh(rng, i);
        for (int order : {1, 2}) {
            const auto mesh = std::make_shared<const TriangleMesh>(order == 1 ? p1 : promote_to_p2(p1));
            const AssemblyPlan plan = build_plan(mesh, targets);
            const double tt = uniform(rng, 0.0, 1.0);
            const std::vector<double> u = random_vector(rng, mesh->num_nodes(), -1.0, 1.0);
            const double c0 = uniform(rng, 0.5, 2.0), sx = uniform(rng, 0.5, 2.0), su = uniform(rng, 0.2, 0.8);
            const CoefficientField coeffs[] = {
                CoefficientField::constant(c0),
                CoefficientField::spatial([sx](double x, double y, double t) {
                    return 1.0 + sx * x * x + std::sin(y) * (1.0 + t);
                }),
                CoefficientField::state([su](double v) { return 1.5 + su * std::sin(v); },
                                        [su](double v) { return su * std::cos(v); }),
            };
            for (int ti = 0; ti < 3; ++ti)
                for (int ci = 0; ci < 3; ++ci) {
                    const CsrMatrix a = assemble(plan, targets[ti], coeffs[ci], tt, u);
                    const CsrMatrix b = classical_assemble(*mesh, targets[ti], coeffs[ci],
                                                           plan.target(targets[ti]).rule, tt, u);
                    worst[ti][ci] = std::max(worst[ti][ci], relative_frobenius_difference(a, b));
                }
        }
    }
    const char* kinds[] = {"constant", "spatial", "state"};
    for (int ti = 0; ti < 3; ++ti)
        for (int ci = 0; ci < 3; ++ci)
            at_most(r, std::string(to_string(targets[ti])) + "/" + kinds[ci] + " max rel Frobenius diff", worst[ti][ci],
                    1e-12);
    at_most(r, "runtime seconds", std::chrono::duration<double>(Clock::now() - t0).count(), 60.0);
}

// ---------------------------------------------------------------------------
// AC2

TriangleMesh reference_triangle() {
    return TriangleMesh({{0, 0}, {1, 0}, {0, 1}}, {0, 1, 2}, 1,
                        {{{0, 1, -1}, 1}, {{1, 2, -1}, 1}, {{2, 0, -1}, 1}});
}

void suite_analytic(const VerifyOptions&, SuiteReport& r) {
    const auto mesh = std::make_shared<const TriangleMesh>(reference_triangle());
    const Target targets[] = {Target::mass, Target::conductivity};
    const AssemblyPlan plan = build_plan(mesh, targets);
    const CoefficientField one = CoefficientField::constant(1.0);
    const double mass[3][3] = {{2, 1, 1}, {1, 2, 1}, {1, 1, 2}};
    const double cond[3][3] = {{2, -1, -1}, {-1, 1, 0}, {-1, 0, 1}};
    for (const bool classical : {false, true}) {
        const char* tag = classical ? "classical" : "vectorized";
        for (Target t : targets) {
            const DenseMatrix m = (classical ? classical_assemble(*mesh, t, one, plan.target(t).rule, 0.0)
                                             : assemble(plan, t, one, 0.0))
                                      .to_dense();
            double err = 0.0;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    const double exact = t == Target::mass ? mass[i][j] / 24.0 : cond[i][j] / 2.0;
                    err = std::max(err, std::abs(m(i, j) - exact));
                }
            at_most(r, std::string(tag) + " " + to_string(t) + " max abs entry error", err, 1e-14);
        }
    }
}

// ---------------------------------------------------------------------------
// AC3

void suite_tensor(const VerifyOptions& opts, SuiteReport& r) {
    Rng rng(opts.seed ^ 0xa3);
    struct Case {
        int order, n_div;
    };
    const Case cases[] = {{1, 4}, {1, 8}, {2, 3}, {2, 4}};
    const CoefficientField m_field =
        CoefficientField::state([](double u) { return 1.0 + 0.3 * u + 0.2 * u * u; }, [](double u) { return 0.3 + 0.4 * u; });
    const CoefficientField c_smooth = CoefficientField::state([](double u) { return 1.0 + 0.5 * std::sin(u); },
                                                             [](double u) { return 0.5 * std::cos(u); });
    const CoefficientField c_pwl = PiecewiseLinearConductivity{}.as_coefficient();
    double mass_vs_oracle = 0.0, mode1_vs_mode2 = 0.0, free_vs_mode1 = 0.0, cond_vs_oracle = 0.0;
    std::size_t max_n = 0;
    for (const Case& cs : cases) {
        TriangleMesh m = jitter_interior_nodes(generate_structured_unit_square(cs.n_div), 0.25, rng());
        if (cs.order == 2) m = promote_to_p2(m);
        const auto mesh = std::make_shared<const TriangleMesh>(std::move(m));
        max_n = std::max(max_n, mesh->num_nodes());
        const Target targets[] = {Target::mass_tensor, Target::conductivity_tensor};
        const AssemblyPlan plan = build_plan(mesh, targets);
        const std::size_t n = mesh->num_nodes();

        const std::vector<double> u = random_vector(rng, n, -1.0, 1.0);
        const std::vector<double> v = random_vector(rng, n, -1.0, 1.0);
        const SparseTensor3 tm = explicit_global_tensor(*mesh, TensorKind::mass, m_field,
                                                        plan.target(Target::mass_tensor).rule, u);
        const DenseMatrix d2 = contract(tm, v, 2), d1 = contract(tm, v, 1);
        const DenseMatrix free = contract_mass_tensor(plan, m_field, u, v, 0.0).to_dense();
        mass_vs_oracle = std::max(mass_vs_oracle, rel_dense_diff(free, d2));
        free_vs_mode1 = std::max(free_vs_mode1, rel_dense_diff(free, d1));
        mode1_vs_mode2 = std::max(mode1_vs_mode2, rel_dense_diff(d1, d2));

        const std::vector<double> temps = random_vector(rng, n, 0.0, 1000.0);
        for (const auto& [coeff, state] : {std::pair{&c_smooth, &u}, std::pair{&c_pwl, &temps}}) {
            const SparseTensor3 tc = explicit_global_tensor(*mesh, TensorKind::conductivity, *coeff,
                                                            plan.target(Target::conductivity_tensor).rule, *state);
            const DenseMatrix oracle = contract(tc, *state, 2);
            const DenseMatrix path = contract_cond_tensor_mode2(plan, *coeff, *state, 0.0).to_dense();
            cond_vs_oracle = std::max(cond_vs_oracle, rel_dense_diff(path, oracle));
        }
    }
    at_most(r, "largest mesh size n", static_cast<double>(max_n), 100.0);
    at_most(r, "mass contraction (matrix-free) vs explicit mode-2", mass_vs_oracle, 1e-12);
    at_most(r, "conductivity contraction (phi kron J path) vs explicit mode-2", cond_vs_oracle, 1e-12);
    at_most(r, "mass contraction (matrix-free) vs explicit mode-1", free_vs_mode1, 1e-12);
    at_most(r, "explicit mass tensor mode-1 vs mode-2", mode1_vs_mode2, 1e-13);
}

// ---------------------------------------------------------------------------
// AC4

void suite_jacobian(const VerifyOptions& opts, SuiteReport& r) {
    Rng rng(opts.seed ^ 0xa4);
    Scenario sc = slab_scenario(opts.quick ? 4 : 6);
    HeatSolver solver(sc.problem);
    const std::size_t n = solver.num_dofs();
    const auto xy = sc.problem.mesh->coords();

    std::vector<std::pair<std::vector<double>, std::vector<double>>> states;
    {
        std::vector<double> u = random_vector(rng, n, 0.0, 1000.0);
        std::vector<double> prev(n);
        for (std::size_t i = 0; i < n; ++i) prev[i] = u[i] - uniform(rng, 0.0, 10.0);
        states.emplace_back(u, prev);
    }
    {
        HeatProblem p = sc.problem;
        p.t_final = 50.0;
        MarchOptions mo = sc.march;
        mo.snapshot_stride = 1;
        const SolutionHistory h = HeatSolver(p).march(mo);
        states.emplace_back(h.snapshots.back(), h.snapshots[h.snapshots.size() - 2]);
    }
    {
        std::vector<double> u(n), prev(n);
        for (std::size_t i = 0; i < n; ++i) {
            u[i] = 300.0 + 2500.0 * xy[i].x + 1500.0 * xy[i].y + uniform(rng, -20.0, 20.0);
            prev[i] = u[i] - uniform(rng, 0.0, 5.0);
        }
        states.emplace_back(u, prev);
    }

    double worst = 0.0, min_asym = 1e300;
    const double t_next = 20.0;
    for (const auto& [u, prev] : states) {
        const CsrMatrix jac = solver.jacobian(u, prev, t_next);
        min_asym = std::min(min_asym, asymmetry(jac) / frobenius_norm(jac));
        for (int d = 0; d < 5; ++d) {
            std::vector<double> v(n);
            std::normal_distribution<double> g;
            for (double& x : v) x = g(rng);
            const double h = 1e-6 * norm2(u) / norm2(v);
            std::vector<double> up(u), um(u);
            for (std::size_t i = 0; i < n; ++i) {
                up[i] += h * v[i];
                um[i] -= h * v[i];
            }
            const std::vector<double> fp = solver.residual(up, prev, t_next);
            const std::vector<double> fm = solver.residual(um, prev, t_next);
            const std::vector<double> jv = matvec(jac, v);
            std::vector<double> diff(n);
            for (std::size_t i = 0; i < n; ++i) diff[i] = (fp[i] - fm[i]) / (2.0 * h) - jv[i];
            worst = std::max(worst, norm2(diff) / norm2(jv));
        }
    }
    at_most(r, "directional FD vs Jacobian, max relative error (3 states x 5 directions)", worst, 1e-5);
    at_least(r, "relative asymmetry ||J - J^T|| / ||J|| (c' != 0)", min_asym, 1e-12);
}

// ---------------------------------------------------------------------------
// AC5

void suite_slab(const VerifyOptions& opts, SuiteReport& r) {
    const auto t0 = Clock::now();
    Scenario sc = slab_scenario(20);
    within(r, "P2 DOFs", static_cast<double>(sc.problem.mesh->num_nodes()), 1000.0, 3000.0);
    HeatSolver solver(sc.problem);
    const SolutionHistory h = solver.march(sc.march);

    int max_newton = 0;
    std::size_t max_gmres = 0;
    double total_newton = 0.0;
    for (const auto& s : h.steps) {
        max_newton = std::max(max_newton, s.newton_iterations);
        max_gmres = std::max(max_gmres, s.max_gmres_iterations);
        total_newton += s.newton_iterations;
    }
    within(r, "steps taken", static_cast<double>(h.steps.size()), 1080.0, 1080.0);
    at_most(r, "(a) max Newton iterations per step", max_newton, 5.0);
    at_most(r, "(a) mean Newton iterations per step", total_newton / static_cast<double>(h.steps.size()), 5.0);
    at_most(r, "(b) max unpreconditioned GMRES iterations per solve", static_cast<double>(max_gmres), 100.0);

    const auto& c = h.probes.at(0).values;
    double min_increment = 0.0, max_value = -1e300;
    for (std::size_t i = 1; i < c.size(); ++i) min_increment = std::min(min_increment, c[i] - c[i - 1]);
    for (double x : c) max_value = std::max(max_value, x);
    at_least(r, "(c) min step-to-step change of the center temperature", min_increment, -1e-9);
    at_most(r, "(c) max center temperature", max_value, 1000.0);

    // continue from t = T to 10 T; quick mode takes 100 s steps for this leg
    HeatProblem longer = sc.problem;
    longer.t_final = 9.0 * sc.problem.t_final;
    if (opts.quick) longer.dt = 100.0;
    MarchOptions mo = sc.march;
    mo.initial_state = h.final_state;
    const SolutionHistory h2 = HeatSolver(longer).march(mo);
    at_most(r, "(d) |T_center(10 T) - 1000|", std::abs(h2.probes.at(0).values.back() - 1000.0), 5.0);
    at_most(r, "runtime seconds", std::chrono::duration<double>(Clock::now() - t0).count(), 300.0);
}

// ---------------------------------------------------------------------------
// AC6

struct SteadyResult {
    double l2 = 0.0;
    double nodal_max = 0.0;
};

SteadyResult solve_poisson(std::shared_ptr<const TriangleMesh> mesh, const std::function<double(double, double)>& exact,
                           const std::function<double(double, double)>& source) {
    HeatProblem p;
    p.mesh = mesh;
    p.m = CoefficientField::constant(0.0);
    p.c = CoefficientField::constant(1.0);
    p.source = CoefficientField::spatial([source](double x, double y, double) { return source(x, y); });
    for (const auto& be : mesh->boundary_edges())
        p.boundary[be.tag] = DirichletBC{[exact](double x, double y, double) { return exact(x, y); }};
    p.dt = 1.0;
    p.t_final = 1.0;
    MarchOptions mo;
    mo.newton.tol_increment = 1e-10;
    mo.newton.max_iters = 4;
    mo.newton.jacobi = true;
    mo.newton.gmres.tol = 1e-13;
    mo.newton.gmres.restart = 400;
    mo.newton.gmres.max_iters = 20000;
    const SolutionHistory h = HeatSolver(p).march(mo);
    SteadyResult out;
    out.l2 = l2_error(*mesh, h.final_state, exact);
    const std::vector<double> ex = interpolate(*mesh, exact);
    for (std::size_t i = 0; i < ex.size(); ++i) out.nodal_max = std::max(out.nodal_max, std::abs(h.final_state[i] - ex[i]));
    return out;
}

void suite_convergence(const VerifyOptions& opts, SuiteReport& r) {
    const auto t0 = Clock::now();
    using std::numbers::pi;
    const auto exact = [](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); };
    const auto source = [](double x, double y) { return 2.0 * pi * pi * std::sin(pi * x) * std::sin(pi * y); };
    for (int order : {1, 2}) {
        const int base = order == 1 ? 8 : 4;
        std::vector<double> err;
        for (int l = 0; l < 4; ++l) {
            TriangleMesh m = generate_structured_unit_square(base << l);
            if (order == 2) m = promote_to_p2(m);
            err.push_back(solve_poisson(std::make_shared<const TriangleMesh>(std::move(m)), exact, source).l2);
        }
        const double expect = order + 1.0;
        for (std::size_t l = 1; l < err.size(); ++l)
            within(r, "P" + std::to_string(order) + " observed L2 order, n_div " + std::to_string(base << (l - 1)) +
                          " -> " + std::to_string(base << l),
                   std::log2(err[l - 1] / err[l]), expect - 0.2, expect + 0.2);
    }
    Rng rng(opts.seed ^ 0xa6);
    const TriangleMesh m = promote_to_p2(jitter_interior_nodes(generate_structured_unit_square(6), 0.25, rng()));
    const SteadyResult q = solve_poisson(std::make_shared<const TriangleMesh>(m),
                                         [](double x, double y) { return x * x + y * y; },
                                         [](double, double) { return -4.0; });
    at_most(r, "P2 reproduces x^2 + y^2: max nodal error", q.nodal_max, 1e-8);
    at_most(r, "runtime seconds", std::chrono::duration<double>(Clock::now() - t0).count(), 120.0);
}

// ---------------------------------------------------------------------------
// AC7

void suite_scaling(const VerifyOptions& opts, SuiteReport& r) {
    BenchOptions bo;
    bo.levels = 4;
    bo.order = 1;
    bo.base_n_div = opts.quick ? 32 : 64;
    bo.reps = 7;
    const BenchResult res = run_bench(bo);
    std::size_t verified = 0;
    bool split = true;
    for (const auto& rec : res.records) {
        verified += rec.verified ? 1 : 0;
        split = split && rec.formation_seconds > 0.0 && rec.scatter_seconds > 0.0;
    }
    at_least(r, "verified records (2 algorithms x 2 targets x 4 levels)", static_cast<double>(verified), 16.0);
    holds(r, "formation/scatter split reported for every record", split);
    for (const auto& s : res.slopes)
        if (s.algorithm == "vectorized" && s.quantity == "formation")
            within(r, s.target + " vectorized formation log-log slope over " + std::to_string(s.points) + " levels",
                   s.slope, 0.85, 1.25);
}

// ---------------------------------------------------------------------------
// AC8

void suite_invariants(const VerifyOptions& opts, SuiteReport& r) {
    Rng rng(opts.seed ^ 0xa8);

    // partition of unity and zero gradient sums at random reference points
    double pou = 0.0, grad = 0.0;
    for (int order : {1, 2}) {
        const std::size_t np = order == 1 ? 3 : 6;
        std::vector<double> phi(np);
        for (int k = 0; k < 1000; ++k) {
            double x = uniform(rng, 0.0, 1.0), y = uniform(rng, 0.0, 1.0);
            if (x + y > 1.0) {
                x = 1.0 - x;
                y = 1.0 - y;
            }
            eval_basis(order, RefElement::triangle, {x, y}, phi);
            double s = 0.0;
            for (double p : phi) s += p;
            pou = std::max(pou, std::abs(s - 1.0));
            const DenseMatrix g = eval_basis_gradients(order, RefElement::triangle, {x, y});
            for (std::size_t c = 0; c < 2; ++c) {
                double gs = 0.0;
                for (std::size_t i = 0; i < np; ++i) gs += g(i, c);
                grad = std::max(grad, std::abs(gs));
            }
        }
    }
    at_most(r, "partition of unity |sum phi - 1| (1000 points, P1 and P2)", pou, 1e-14);
    at_most(r, "gradient sum |sum grad phi| (1000 points, P1 and P2)", grad, 1e-13);

    // zero row sums, symmetry, reuse determinism on random meshes
    double row_sum = 0.0, asym = 0.0;
    bool reuse = true, refill_rebuild = true, threads = true;
    const Target targets[] = {Target::mass, Target::conductivity, Target::reaction};
    for (int i = 0; i < 3; ++i) {
        const TriangleMesh p1 = random_mesh(rng, i);
        for (int order : {1, 2}) {
            const auto mesh = std::make_shared<const TriangleMesh>(order == 1 ? p1 : promote_to_p2(p1));
            const AssemblyPlan plan = build_plan(mesh, targets);
            const std::vector<double> u = random_vector(rng, mesh->num_nodes(), -1.0, 1.0);
            const std::vector<double> ones(mesh->num_nodes(), 1.0);
            const double c0 = uniform(rng, 0.5, 2.0);
            const CoefficientField coeffs[] = {
                CoefficientField::constant(c0),
                CoefficientField::spatial([](double x, double y, double) { return 2.0 + std::sin(x + 2.0 * y); }),
                CoefficientField::state([](double v) { return 2.0 + v * v; }, [](double v) { return 2.0 * v; }),
            };
            for (const auto& coeff : coeffs) {
                const CsrMatrix c = assemble(plan, Target::conductivity, coeff, 0.0, u);
                row_sum = std::max(row_sum, max_abs(matvec(c, ones)) / frobenius_norm(c));
                for (Target t : targets) {
                    const CsrMatrix a = assemble(plan, t, coeff, 0.0, u);
                    const CsrMatrix b = assemble(plan, t, coeff, 0.0, u);
                    asym = std::max(asym, asymmetry(a) / frobenius_norm(a));
                    reuse = reuse && bitwise_equal(a.values(), b.values());

                    const auto& d = plan.target(t);
                    const DenseMatrix lam = build_lambda(eval_S(plan, t, coeff, 0.0, u), d.rule.weights,
                                                         plan.geometry().det);
                    const DenseMatrix v = t == Target::conductivity ? form_element_conductivity(plan, lam)
                                                                    : form_element_mass(plan, lam, t);
                    CsrMatrix refilled(plan.pattern());
                    refill(refilled, plan.scatter(), v.values());
                    refill_rebuild = refill_rebuild && bitwise_equal(refilled.values(), a.values());

                    TripletBuffer tb(mesh->num_nodes(), mesh->num_nodes());
                    const std::size_t np = plan.nodes_per_element();
                    for (std::size_t e = 0; e < mesh->num_elements(); ++e) {
                        const auto nodes = mesh->element(e);
                        for (std::size_t jj = 0; jj < np; ++jj)
                            for (std::size_t ii = 0; ii < np; ++ii) tb.add(nodes[ii], nodes[jj], v(ii + jj * np, e));
                    }
                    const CsrWithMap fresh = triplets_to_csr(tb);
                    refill_rebuild = refill_rebuild && bitwise_equal(fresh.matrix.values(), a.values());

                    const unsigned saved = num_threads();
                    set_num_threads(3);
                    const CsrMatrix par = assemble(plan, t, coeff, 0.0, u);
                    set_num_threads(saved);
                    threads = threads && bitwise_equal(par.values(), a.values());
                }
            }
        }
    }
    at_most(r, "conductivity ||C 1||_inf / ||C||_F", row_sum, 1e-11);
    at_most(r, "relative asymmetry of mass/conductivity/reaction", asym, 1e-13);
    holds(r, "plan reuse: two assemblies bitwise identical", reuse);
    holds(r, "refill vs rebuild from triplets bitwise identical", refill_rebuild);
    holds(r, "3 workers vs 1 worker bitwise identical", threads);

    // quadrature exactness
    double tri_err = 0.0, int_err = 0.0;
    for (int deg = 0; deg <= 6; ++deg) {
        const QuadratureRule q = triangle_rule(deg);
        for (int i = 0; i <= q.exact_degree; ++i)
            for (int j = 0; i + j <= q.exact_degree; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < q.size(); ++k)
                    s += q.weights[k] * std::pow(q.nodes[k].x, i) * std::pow(q.nodes[k].y, j);
                const double exact = std::tgamma(i + 1.0) * std::tgamma(j + 1.0) / std::tgamma(i + j + 3.0);
                tri_err = std::max(tri_err, std::abs(s - exact));
            }
    }
    for (int deg = 0; deg <= 13; ++deg) {
        const QuadratureRule q = interval_rule(deg);
        for (int i = 0; i <= q.exact_degree; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k < q.size(); ++k) s += q.weights[k] * std::pow(q.nodes[k].x, i);
            int_err = std::max(int_err, std::abs(s - 1.0 / (i + 1.0)));
        }
    }
    at_most(r, "triangle rules: monomial exactness error", tri_err, 1e-13);
    at_most(r, "interval rules: monomial exactness error", int_err, 1e-13);
}

} // namespace

const std::vector<Suite>& acceptance_suites() {
    static const std::vector<Suite> suites = {
        {"AC1", "oracle-equivalence", suite_oracle},
        {"AC2", "analytic-element-matrices", suite_analytic},
        {"AC3", "tensor-contraction-oracle", suite_tensor},
        {"AC4", "jacobian-finite-difference", suite_jacobian},
        {"AC5", "slab-heating-desk-scale", suite_slab},
        {"AC6", "convergence-rates", suite_convergence},
        {"AC7", "scaling-shape", suite_scaling},
        {"AC8", "invariant-suite", suite_invariants},
    };
    return suites;
}

SuiteReport run_suite(const Suite& suite, const VerifyOptions& opts) {
    SuiteReport r;
    r.id = suite.id;
    r.name = suite.name;
    const auto t0 = Clock::now();
    try {
        suite.run(opts, r);
        r.passed = !r.checks.empty() &&
                   std::all_of(r.checks.begin(), r.checks.end(), [](const CheckResult& c) { return c.passed; });
    } catch (const std::exception& e) {
        r.error = e.what();
        r.passed = false;
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return r;
}

void print_report(const SuiteReport& r, std::ostream& os, bool details) {
    os << (r.passed ? "PASS " : "FAIL ") << r.id << ' ' << r.name << " (" << std::fixed << std::setprecision(2)
       << r.seconds << " s)" << std::defaultfloat << '\n';
    if (!r.error.empty()) os << "    error: " << r.error << '\n';
    if (!details) return;
    for (const auto& c : r.checks)
        os << "    " << (c.passed ? "ok   " : "FAIL ") << c.name << ": " << std::setprecision(6) << c.value << ' '
           << c.bound << '\n';
}

std::vector<SuiteReport> run_verify(const VerifyOptions& opts, std::ostream& os, const std::vector<std::string>& only,
                                    bool details) {
    std::vector<SuiteReport> out;
    for (const auto& s : acceptance_suites()) {
        if (!only.empty() && std::find(only.begin(), only.end(), s.id) == only.end()) continue;
        out.push_back(run_suite(s, opts));
        print_report(out.back(), os, details);
        os.flush();
    }
    return out;
}

} // namespace vfem
