#pragma once

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "vfem/assembly.hpp"
#include "vfem/boundary.hpp"
#include "vfem/coefficient.hpp"
#include "vfem/error.hpp"
#include "vfem/gmres.hpp"
#include "vfem/mesh.hpp"
#include "vfem/sparse.hpp"

namespace vfem {

/// k(T) linear between three breakpoints, extended linearly beyond them.
/// The slope at the middle breakpoint is the right segment's.
struct PiecewiseLinearConductivity {
    std::array<double, 3> breakpoints{0.0, 200.0, 1000.0};
    std::array<double, 3> values{1.5, 0.7, 0.5};

    void validate() const;
    double value(double T) const;
    double slope(double T) const;
    CoefficientField as_coefficient() const;
};

struct DirichletBC {
    std::function<double(double x, double y, double t)> value;
};

struct FluxBC {
    BoundaryFlux flux;
};

using BoundaryCondition = std::variant<DirichletBC, FluxBC>;

/// m du/dt - div(c grad u) + a u = f with per-tag boundary conditions.
struct HeatProblem {
    std::shared_ptr<const TriangleMesh> mesh;
    CoefficientField m = CoefficientField::constant(1.0);
    CoefficientField c = CoefficientField::constant(1.0);
    CoefficientField a = CoefficientField::constant(0.0);
    CoefficientField source = CoefficientField::constant(0.0);  ///< constant or spatial
    std::map<int, BoundaryCondition> boundary;
    std::function<double(double x, double y)> initial = [](double, double) { return 0.0; };
    double t_final = 1.0;
    double dt = 1.0;

    /// Every boundary tag of the mesh must be mapped; dt > 0.
    void validate() const;
    std::size_t num_steps() const;
};

struct NewtonConfig {
    double tol_increment = 1e-7;
    int max_iters = 25;
    GmresOptions gmres;          ///< tol 1e-7, restart 50, max 1000 by default
    bool jacobi = false;         ///< diagonal right preconditioner for GMRES
};

struct NewtonResult {
    std::vector<double> u;
    int iterations = 0;          ///< number of linear solves
    bool converged = false;
    bool linear_solver_failed = false;
    std::vector<double> increment_norms;
    std::size_t gmres_iterations = 0;
    std::size_t max_gmres_iterations = 0;
};

class NewtonFailure : public Error {
public:
    NewtonFailure(std::size_t step, const std::string& what) : Error(what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

struct ProbeSeries {
    Point2 point;
    std::vector<double> values;
};

struct StepStats {
    int newton_iterations = 0;
    std::size_t gmres_iterations = 0;
    std::size_t max_gmres_iterations = 0;
};

struct SolutionHistory {
    std::vector<double> times;                   ///< t^0 .. t^N
    std::vector<std::size_t> snapshot_steps;
    std::vector<std::vector<double>> snapshots;
    std::vector<ProbeSeries> probes;
    std::vector<StepStats> steps;                ///< one per time step
    std::vector<double> final_state;
};

struct SolverTimings {
    double assembly_seconds = 0.0;
    double linear_solve_seconds = 0.0;
};

struct MarchOptions {
    NewtonConfig newton;
    std::vector<Point2> probes;
    std::size_t snapshot_stride = 0;  ///< 0 keeps no snapshots
    /// Overrides the problem's initial condition when set.
    std::optional<std::vector<double>> initial_state;
    std::function<void(std::size_t step, double t, std::span<const double> u)> observer;
};

/// Implicit Euler + Newton-GMRES driver. Owns the assembly plans.
///
/// F(u) = M(u)(u - u_prev) + dt (C(u) + A(u)) u - dt (load + flux(u)), with
/// Dirichlet rows replaced by u_i - g_D(x_i, t). The Jacobian adds the tensor
/// contractions M' o_2 (u - u_prev), dt C' o_2 u and dt A' o_2 u, and -dt B(u).
class HeatSolver {
public:
    explicit HeatSolver(HeatProblem problem);

    const HeatProblem& problem() const noexcept { return problem_; }
    const AssemblyPlan& plan() const noexcept { return plan_; }
    std::span<const int> dirichlet_nodes() const noexcept { return dirichlet_nodes_; }
    std::size_t num_dofs() const noexcept { return problem_.mesh->num_nodes(); }

    std::vector<double> initial_state() const;

    std::vector<double> residual(std::span<const double> u, std::span<const double> u_prev,
                                 double t_next);
    CsrMatrix jacobian(std::span<const double> u, std::span<const double> u_prev, double t_next);

    /// Newton from u_guess until ||delta||_2 <= tol_increment.
    NewtonResult newton_solve(std::span<const double> u_guess, std::span<const double> u_prev,
                              double t_next, const NewtonConfig& cfg);

    /// Throws NewtonFailure naming the step when a step fails to converge.
    SolutionHistory march(const MarchOptions& opts);

    const SolverTimings& timings() const noexcept { return timings_; }

private:
    CsrMatrix mass_matrix(std::span<const double> u, double t);
    CsrMatrix stiffness_matrix(std::span<const double> u, double t);

    HeatProblem problem_;
    AssemblyPlan plan_;
    struct FluxPart {
        EdgePlan plan;
        BoundaryFlux flux;
    };
    std::vector<FluxPart> flux_parts_;
    std::vector<int> dirichlet_nodes_;
    std::vector<DirichletBC> dirichlet_bcs_;   ///< per entry of dirichlet_nodes_
    std::optional<CsrMatrix> constant_mass_;
    std::optional<CsrMatrix> constant_stiffness_;
    SolverTimings timings_;
};

struct PointLocation {
    std::size_t element = 0;
    Point2 reference;
};

/// Finds the element containing p (barycentric tolerance 1e-10); throws if none.
PointLocation locate_point(const TriangleMesh& mesh, Point2 p);
double probe(const TriangleMesh& mesh, std::span<const double> u, Point2 p);
double evaluate_at(const TriangleMesh& mesh, std::span<const double> u, const PointLocation& loc);

/// Nodal interpolant of f.
std::vector<double> interpolate(const TriangleMesh& mesh,
                                const std::function<double(double, double)>& f);

/// ||u_h - exact||_{L2} with a degree-6 rule.
double l2_error(const TriangleMesh& mesh, std::span<const double> u,
                const std::function<double(double, double)>& exact);

} // namespace vfem
