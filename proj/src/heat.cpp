#include "vfem/heat.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <string>

#include "vfem/tensor.hpp"

namespace vfem {

namespace {

using Clock = std::chrono::steady_clock;

struct ScopedTimer {
    double& acc;
    Clock::time_point t0 = Clock::now();
    ~ScopedTimer() { acc += std::chrono::duration<double>(Clock::now() - t0).count(); }
};

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

} // namespace

// ---------------------------------------------------------------------------

void PiecewiseLinearConductivity::validate() const {
    if (!(breakpoints[0] < breakpoints[1] && breakpoints[1] < breakpoints[2]))
        throw ConfigError("piecewise-linear conductivity: breakpoints must be strictly increasing");
}

double PiecewiseLinearConductivity::slope(double T) const {
    if (T < breakpoints[1]) return (values[1] - values[0]) / (breakpoints[1] - breakpoints[0]);
    return (values[2] - values[1]) / (breakpoints[2] - breakpoints[1]);
}

double PiecewiseLinearConductivity::value(double T) const {
    if (T < breakpoints[1]) return values[0] + slope(T) * (T - breakpoints[0]);
    return values[1] + slope(T) * (T - breakpoints[1]);
}

CoefficientField PiecewiseLinearConductivity::as_coefficient() const {
    validate();
    const PiecewiseLinearConductivity self = *this;
    return CoefficientField::state([self](double T) { return self.value(T); },
                                   [self](double T) { return self.slope(T); });
}

// ---------------------------------------------------------------------------

void HeatProblem::validate() const {
    if (!mesh) throw ConfigError("heat problem has no mesh");
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    if (!(t_final >= 0.0)) throw ConfigError("final time must be non-negative");
    if (source.kind() == CoefficientField::Kind::state)
        throw ConfigError("source term must be constant or spatial");
    if (!initial) throw ConfigError("heat problem has no initial condition");
    for (const auto& be : mesh->boundary_edges())
        if (!boundary.contains(be.tag))
            throw ConfigError("boundary tag " + std::to_string(be.tag) + " has no boundary condition");
    for (const auto& [tag, bc] : boundary) {
        if (const auto* d = std::get_if<DirichletBC>(&bc); d && !d->value)
            throw ConfigError("Dirichlet condition on tag " + std::to_string(tag) + " has no value function");
        if (const auto* f = std::get_if<FluxBC>(&bc); f && (!f->flux.g || !f->flux.dg_dT))
            throw ConfigError("flux condition on tag " + std::to_string(tag) + " needs g and dg/dT");
    }
}

std::size_t HeatProblem::num_steps() const { return static_cast<std::size_t>(std::llround(t_final / dt)); }

// ---------------------------------------------------------------------------

namespace {

std::vector<Target> solver_targets(const HeatProblem& p) {
    std::vector<Target> t{Target::mass, Target::conductivity, Target::load};
    if (!p.a.is_zero()) t.push_back(Target::reaction);
    if (p.m.kind() == CoefficientField::Kind::state || p.a.kind() == CoefficientField::Kind::state)
        t.push_back(Target::mass_tensor);
    if (p.c.kind() == CoefficientField::Kind::state) t.push_back(Target::conductivity_tensor);
    return t;
}

// The Jacobian is the exact derivative of the discrete residual only when a
// matrix and its derivative tensor share one quadrature rule.
std::map<Target, QuadratureRule> solver_rules(const HeatProblem& p) {
    const int order = p.mesh->order();
    std::map<Target, QuadratureRule> rules;
    if (p.c.kind() == CoefficientField::Kind::state)
        rules[Target::conductivity] = triangle_rule(default_rule_degree(IntegrandKind::conductivity_tensor, order));
    if (p.m.kind() == CoefficientField::Kind::state || p.a.kind() == CoefficientField::Kind::state) {
        const QuadratureRule r = triangle_rule(default_rule_degree(IntegrandKind::mass_tensor, order));
        rules[Target::mass] = r;
        rules[Target::reaction] = r;
        rules[Target::mass_tensor] = r;
    }
    return rules;
}

HeatProblem validated(HeatProblem p) {
    p.validate();
    return p;
}

} // namespace

HeatSolver::HeatSolver(HeatProblem problem)
    : problem_(validated(std::move(problem))),
      plan_(build_plan(problem_.mesh, solver_targets(problem_), solver_rules(problem_))) {
    const auto& mesh = *problem_.mesh;
    std::vector<int> bc_of_node(mesh.num_nodes(), -1);
    for (const auto& [tag, bc] : problem_.boundary) {
        if (const auto* f = std::get_if<FluxBC>(&bc)) {
            const int degree = mesh.order() + 2;
            flux_parts_.push_back({build_edge_plan(problem_.mesh, {tag}, plan_.pattern(), degree, degree), f->flux});
        } else {
            const auto& d = std::get<DirichletBC>(bc);
            const int idx = static_cast<int>(dirichlet_bcs_.size());
            dirichlet_bcs_.push_back(d);
            for (const auto& be : mesh.boundary_edges())
                if (be.tag == tag)
                    for (int k = 0; k < mesh.nodes_per_edge(); ++k)
                        if (bc_of_node[be.nodes[k]] < 0) bc_of_node[be.nodes[k]] = idx;
        }
    }
    std::vector<DirichletBC> per_node;
    for (std::size_t i = 0; i < bc_of_node.size(); ++i)
        if (bc_of_node[i] >= 0) {
            dirichlet_nodes_.push_back(static_cast<int>(i));
            per_node.push_back(dirichlet_bcs_[static_cast<std::size_t>(bc_of_node[i])]);
        }
    dirichlet_bcs_ = std::move(per_node);

    if (problem_.m.kind() == CoefficientField::Kind::constant)
        constant_mass_ = assemble(plan_, Target::mass, problem_.m, 0.0);
    if (problem_.c.kind() == CoefficientField::Kind::constant && problem_.a.kind() == CoefficientField::Kind::constant) {
        CsrMatrix k = assemble(plan_, Target::conductivity, problem_.c, 0.0);
        if (!problem_.a.is_zero()) k.add_scaled(assemble(plan_, Target::reaction, problem_.a, 0.0), 1.0);
        constant_stiffness_ = std::move(k);
    }
}

std::vector<double> HeatSolver::initial_state() const { return interpolate(*problem_.mesh, problem_.initial); }

CsrMatrix HeatSolver::mass_matrix(std::span<const double> u, double t) {
    if (constant_mass_) return *constant_mass_;
    ScopedTimer timer{timings_.assembly_seconds};
    return assemble(plan_, Target::mass, problem_.m, t, u);
}

CsrMatrix HeatSolver::stiffness_matrix(std::span<const double> u, double t) {
    if (constant_stiffness_) return *constant_stiffness_;
    ScopedTimer timer{timings_.assembly_seconds};
    CsrMatrix k = assemble(plan_, Target::conductivity, problem_.c, t, u);
    if (!problem_.a.is_zero()) k.add_scaled(assemble(plan_, Target::reaction, problem_.a, t, u), 1.0);
    return k;
}

std::vector<double> HeatSolver::residual(std::span<const double> u, std::span<const double> u_prev, double t_next) {
    const std::size_t n = num_dofs();
    if (u.size() != n || u_prev.size() != n) throw DimensionError("residual: DOF vector length does not match the mesh");
    const double dt = problem_.dt;

    std::vector<double> du(n);
    for (std::size_t i = 0; i < n; ++i) du[i] = u[i] - u_prev[i];
    std::vector<double> f = matvec(mass_matrix(u, t_next), du);
    const std::vector<double> ku = matvec(stiffness_matrix(u, t_next), u);
    {
        ScopedTimer timer{timings_.assembly_seconds};
        std::vector<double> rhs = assemble_load(plan_, problem_.source, t_next);
        for (const auto& part : flux_parts_) {
            const auto g = assemble_flux_vector(part.plan, part.flux, u, t_next);
            for (std::size_t i = 0; i < n; ++i) rhs[i] += g[i];
        }
        for (std::size_t i = 0; i < n; ++i) f[i] += dt * (ku[i] - rhs[i]);
    }
    const auto xy = problem_.mesh->coords();
    for (std::size_t k = 0; k < dirichlet_nodes_.size(); ++k) {
        const auto i = static_cast<std::size_t>(dirichlet_nodes_[k]);
        f[i] = u[i] - dirichlet_bcs_[k].value(xy[i].x, xy[i].y, t_next);
    }
    return f;
}

CsrMatrix HeatSolver::jacobian(std::span<const double> u, std::span<const double> u_prev, double t_next) {
    const std::size_t n = num_dofs();
    if (u.size() != n || u_prev.size() != n) throw DimensionError("jacobian: DOF vector length does not match the mesh");
    const double dt = problem_.dt;

    CsrMatrix jac = mass_matrix(u, t_next);
    jac.add_scaled(stiffness_matrix(u, t_next), dt);
    {
        ScopedTimer timer{timings_.assembly_seconds};
        if (problem_.m.kind() == CoefficientField::Kind::state) {
            std::vector<double> du(n);
            for (std::size_t i = 0; i < n; ++i) du[i] = u[i] - u_prev[i];
            jac.add_scaled(contract_mass_tensor(plan_, problem_.m, u, du, t_next), 1.0);
        }
        if (problem_.c.kind() == CoefficientField::Kind::state)
            jac.add_scaled(contract_cond_tensor_mode2(plan_, problem_.c, u, t_next), dt);
        if (problem_.a.kind() == CoefficientField::Kind::state)
            jac.add_scaled(contract_mass_tensor(plan_, problem_.a, u, u, t_next), dt);
        for (const auto& part : flux_parts_)
            jac.add_scaled(assemble_flux_jacobian(part.plan, part.flux, u, t_next), -dt);
    }
    for (int i : dirichlet_nodes_) jac.set_identity_row(static_cast<std::size_t>(i));
    return jac;
}

NewtonResult HeatSolver::newton_solve(std::span<const double> u_guess, std::span<const double> u_prev, double t_next,
                                      const NewtonConfig& cfg) {
    if (!(cfg.tol_increment > 0.0)) throw ConfigError("Newton tolerance must be positive");
    NewtonResult res;
    res.u.assign(u_guess.begin(), u_guess.end());
    const std::size_t n = res.u.size();
    const std::vector<double> zero(n, 0.0);
    for (int it = 1; it <= cfg.max_iters; ++it) {
        const std::vector<double> f = residual(res.u, u_prev, t_next);
        const CsrMatrix jac = jacobian(res.u, u_prev, t_next);

        GmresOptions opts = cfg.gmres;
        if (cfg.jacobi) {
            opts.jacobi_inverse_diagonal.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double d = jac.at(i, i);
                opts.jacobi_inverse_diagonal[i] = d != 0.0 ? 1.0 / d : 1.0;
            }
        }
        GmresResult lin;
        {
            ScopedTimer timer{timings_.linear_solve_seconds};
            lin = gmres([&jac](std::span<const double> x, std::span<double> y) { matvec(jac, x, y); }, f, zero, opts);
        }
        res.gmres_iterations += lin.iterations;
        res.max_gmres_iterations = std::max(res.max_gmres_iterations, lin.iterations);
        res.linear_solver_failed = res.linear_solver_failed || !lin.converged;

        for (std::size_t i = 0; i < n; ++i) res.u[i] -= lin.x[i];
        const double inc = norm2(lin.x);
        res.increment_norms.push_back(inc);
        res.iterations = it;
        if (!std::isfinite(inc)) break;
        if (inc <= cfg.tol_increment) {
            res.converged = true;
            break;
        }
    }
    return res;
}

SolutionHistory HeatSolver::march(const MarchOptions& opts) {
    SolutionHistory hist;
    std::vector<double> u = opts.initial_state ? *opts.initial_state : initial_state();
    if (u.size() != num_dofs()) throw DimensionError("initial state length does not match the mesh");
    const auto& mesh = *problem_.mesh;

    std::vector<PointLocation> where;
    for (const auto& p : opts.probes) {
        where.push_back(locate_point(mesh, p));
        hist.probes.push_back({p, {}});
    }
    auto record = [&](std::size_t step, double t) {
        hist.times.push_back(t);
        for (std::size_t k = 0; k < where.size(); ++k) hist.probes[k].values.push_back(evaluate_at(mesh, u, where[k]));
        if (opts.snapshot_stride > 0 && step % opts.snapshot_stride == 0) {
            hist.snapshot_steps.push_back(step);
            hist.snapshots.push_back(u);
        }
        if (opts.observer) opts.observer(step, t, u);
    };
    record(0, 0.0);

    const std::size_t steps = problem_.num_steps();
    hist.steps.reserve(steps);
    for (std::size_t s = 1; s <= steps; ++s) {
        const double t = static_cast<double>(s) * problem_.dt;
        NewtonResult r = newton_solve(u, u, t, opts.newton);
        if (!r.converged) {
            std::ostringstream msg;
            msg << "Newton failed at step " << s << " (t = " << t << " s) after " << r.iterations
                << " iterations; increment norms:";
            for (double x : r.increment_norms) msg << ' ' << x;
            if (r.linear_solver_failed) msg << "; GMRES did not converge in at least one solve";
            throw NewtonFailure(s, msg.str());
        }
        u = std::move(r.u);
        hist.steps.push_back({r.iterations, r.gmres_iterations, r.max_gmres_iterations});
        record(s, t);
    }
    hist.final_state = u;
    return hist;
}

// ---------------------------------------------------------------------------

PointLocation locate_point(const TriangleMesh& mesh, Point2 p) {
    const auto xy = mesh.coords();
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto t = mesh.element(e);
        const Point2 a = xy[t[0]], b = xy[t[1]], c = xy[t[2]];
        const double det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
        const double l1 = ((p.x - a.x) * (c.y - a.y) - (c.x - a.x) * (p.y - a.y)) / det;
        const double l2 = ((b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y)) / det;
        const double l0 = 1.0 - l1 - l2;
        constexpr double tol = 1e-10;
        if (l0 >= -tol && l1 >= -tol && l2 >= -tol) return {e, {l1, l2}};
    }
    throw Error("point (" + std::to_string(p.x) + ", " + std::to_string(p.y) + ") lies outside the mesh");
}

double evaluate_at(const TriangleMesh& mesh, std::span<const double> u, const PointLocation& loc) {
    double phi[6];
    const auto nodes = mesh.element(loc.element);
    eval_basis(mesh.order(), RefElement::triangle, loc.reference, std::span<double>(phi, nodes.size()));
    double v = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) v += phi[i] * u[static_cast<std::size_t>(nodes[i])];
    return v;
}

double probe(const TriangleMesh& mesh, std::span<const double> u, Point2 p) {
    if (u.size() != mesh.num_nodes()) throw DimensionError("probe: DOF vector length does not match the mesh");
    return evaluate_at(mesh, u, locate_point(mesh, p));
}

std::vector<double> interpolate(const TriangleMesh& mesh, const std::function<double(double, double)>& f) {
    std::vector<double> u;
    u.reserve(mesh.num_nodes());
    for (const auto& p : mesh.coords()) u.push_back(f(p.x, p.y));
    return u;
}

double l2_error(const TriangleMesh& mesh, std::span<const double> u, const std::function<double(double, double)>& exact) {
    const QuadratureRule rule = triangle_rule(6);
    const BasisTable basis = basis_table(mesh.order(), rule);
    const auto xy = mesh.coords();
    double sum = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto t = mesh.element(e);
        const Point2 a = xy[t[0]], b = xy[t[1]], c = xy[t[2]];
        const double det = std::abs((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Point2 r = rule.nodes[q];
            const double x = a.x + (b.x - a.x) * r.x + (c.x - a.x) * r.y;
            const double y = a.y + (b.y - a.y) * r.x + (c.y - a.y) * r.y;
            double uh = 0.0;
            for (std::size_t i = 0; i < t.size(); ++i) uh += basis.phi(i, q) * u[static_cast<std::size_t>(t[i])];
            const double d = uh - exact(x, y);
            sum += rule.weights[q] * det * d * d;
        }
    }
    return std::sqrt(sum);
}

} // namespace vfem
