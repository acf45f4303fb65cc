#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "vfem/coefficient.hpp"
#include "vfem/dense.hpp"
#include "vfem/mesh.hpp"
#include "vfem/quadrature.hpp"
#include "vfem/sparse.hpp"

namespace vfem {

enum class Target { mass, conductivity, reaction, mass_tensor, conductivity_tensor, load };

constexpr std::size_t kNumTargets = 6;

const char* to_string(Target t) noexcept;
IntegrandKind integrand_kind(Target t) noexcept;

/// Everything an assembly target needs that does not depend on coefficients.
struct TargetData {
    QuadratureRule rule;
    BasisTable basis;
    /// mass/reaction/load/mass_tensor: Phi (.) Phi, n_p^2 x n_q.
    /// conductivity: [J_q kron J_q]_q, n_p^2 x 4 n_q.
    /// conductivity_tensor: [phi_q kron J_q]_q, n_p^2 x 2 n_q (mode-2 contraction).
    DenseMatrix q;
    /// mass_tensor: Phi (.) Phi (.) Phi; conductivity_tensor: [phi_q kron J_q kron J_q]_q.
    DenseMatrix q_tensor;
    DenseMatrix phi_t;            ///< Phi^T, n_q x n_p
    std::vector<double> quad_x;   ///< physical quadrature nodes, n_q x n_e column-major
    std::vector<double> quad_y;
};

/// Precomputed state for loop-free reassembly on one mesh: Q matrices,
/// quadrature, geometry batch and the frozen CSR pattern with its scatter map.
/// Every area target shares the element pattern (N_e(i), N_e(j)).
class AssemblyPlan {
public:
    const TriangleMesh& mesh() const noexcept { return *mesh_; }
    const std::shared_ptr<const TriangleMesh>& mesh_ptr() const noexcept { return mesh_; }
    const GeometryBatch& geometry() const noexcept { return geometry_; }
    int order() const noexcept { return mesh_->order(); }
    std::size_t num_elements() const noexcept { return mesh_->num_elements(); }
    std::size_t nodes_per_element() const noexcept { return static_cast<std::size_t>(mesh_->nodes_per_element()); }

    bool has(Target t) const noexcept { return targets_[static_cast<std::size_t>(t)].has_value(); }
    const TargetData& target(Target t) const;

    const std::shared_ptr<const SparsityPattern>& pattern() const noexcept { return pattern_; }
    const ScatterMap& scatter() const noexcept { return scatter_; }

    /// Throws unless `mesh` is the mesh this plan was built from.
    void check_mesh(const TriangleMesh& mesh) const;

private:
    friend AssemblyPlan build_plan(std::shared_ptr<const TriangleMesh>, std::span<const Target>,
                                   const std::map<Target, QuadratureRule>&);

    std::shared_ptr<const TriangleMesh> mesh_;
    GeometryBatch geometry_;
    std::array<std::optional<TargetData>, kNumTargets> targets_;
    std::shared_ptr<const SparsityPattern> pattern_;
    ScatterMap scatter_;
};

/// Builds Q matrices once per target. Rules default to the minimal exact
/// degree; an override must be at least that exact.
AssemblyPlan build_plan(std::shared_ptr<const TriangleMesh> mesh, std::span<const Target> targets,
                        const std::map<Target, QuadratureRule>& rules = {});

/// Column-wise Kronecker product: column j is kron(a_j, b_j).
DenseMatrix khatri_rao(const DenseMatrix& a, const DenseMatrix& b);

/// u_h at the quadrature nodes of a target, n_q x n_e (Phi^T times gathered DOFs).
DenseMatrix interpolate_at_quadrature(const AssemblyPlan& plan, Target target,
                                      std::span<const double> u);

/// Coefficient evaluations S (n_q x n_e). State fields need u; with
/// use_derivative the derivative in u is evaluated instead.
DenseMatrix eval_S(const AssemblyPlan& plan, Target target, const CoefficientField& coeff,
                   double t, std::optional<std::span<const double>> u = std::nullopt,
                   bool use_derivative = false);

/// Lambda = S * (w b^T) without forming w b^T.
DenseMatrix build_lambda(const DenseMatrix& s, std::span<const double> w, std::span<const double> b);

/// V = Q Lambda for a mass-type target; column e is vec(M_e).
DenseMatrix form_element_mass(const AssemblyPlan& plan, const DenseMatrix& lambda,
                              Target target = Target::mass);

/// V = Q_c (Lambda (.) W); column e is vec(C_e).
DenseMatrix form_element_conductivity(const AssemblyPlan& plan, const DenseMatrix& lambda);
DenseMatrix form_element_conductivity(const AssemblyPlan& plan, const DenseMatrix& lambda,
                                      const DenseMatrix& metric);

struct AssemblyTimings {
    double formation_seconds = 0.0;
    double scatter_seconds = 0.0;
};

/// Full loop-free assembly: eval_S, Lambda, Q X, refill.
CsrMatrix assemble(const AssemblyPlan& plan, Target target, const CoefficientField& coeff,
                   double t, std::optional<std::span<const double>> u = std::nullopt,
                   AssemblyTimings* timings = nullptr);

/// Refills `out` in place; out must live on plan.pattern().
void assemble_into(const AssemblyPlan& plan, Target target, const CoefficientField& coeff,
                   double t, std::optional<std::span<const double>> u, CsrMatrix& out,
                   AssemblyTimings* timings = nullptr);

/// Load vector (integral of f phi_i) using the load target.
std::vector<double> assemble_load(const AssemblyPlan& plan, const CoefficientField& f, double t,
                                  std::optional<std::span<const double>> u = std::nullopt);

/// Element matrices by the element-by-element double loop (the oracle).
/// Returns the n_p^2 x n_e batch in the same layout as the vectorized path.
DenseMatrix classical_element_batch(const TriangleMesh& mesh, Target target,
                                    const CoefficientField& coeff, const QuadratureRule& rule,
                                    double t, std::optional<std::span<const double>> u = std::nullopt);

/// Element loop followed by triplet accumulation and sorting.
CsrMatrix classical_assemble(const TriangleMesh& mesh, Target target, const CoefficientField& coeff,
                             const QuadratureRule& rule, double t,
                             std::optional<std::span<const double>> u = std::nullopt,
                             AssemblyTimings* timings = nullptr);

namespace testing {
/// Mutation canary: negates Q_c in plans built while set.
void set_conductivity_sign_flip(bool enabled) noexcept;
bool conductivity_sign_flip() noexcept;
} // namespace testing

} // namespace vfem
