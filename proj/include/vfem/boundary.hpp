#pragma once

#include <functional>
#include <memory>
#include <set>
#include <span>
#include <vector>

#include "vfem/dense.hpp"
#include "vfem/mesh.hpp"
#include "vfem/quadrature.hpp"
#include "vfem/sparse.hpp"

namespace vfem {

/// Boundary flux g_N(T, x, y, t) entering as k grad T . n = g_N, with dg_N/dT.
struct BoundaryFlux {
    std::function<double(double T, double x, double y, double t)> g;
    std::function<double(double T, double x, double y, double t)> dg_dT;

    static BoundaryFlux constant(double value);
    /// h_c (T_a - T) + h_r (T_a^4 - T^4). With kelvin set, T and T_a are
    /// shifted by 273.15 inside the radiation term.
    static BoundaryFlux convection_radiation(double h_c, double h_r, double t_ambient,
                                             bool kelvin = false);
};

/// Edge-batch data for flux integrals on a set of boundary tags.
struct EdgePlan {
    std::shared_ptr<const TriangleMesh> mesh;
    std::vector<std::size_t> edges;       ///< indices into mesh.boundary_edges()
    std::vector<double> length;           ///< L_e per selected edge
    std::size_t n_p = 0;                  ///< nodes per edge
    QuadratureRule vector_rule;
    QuadratureRule matrix_rule;
    BasisTable vector_basis;
    BasisTable matrix_basis;
    DenseMatrix q_matrix;                 ///< Phi_edge (.) Phi_edge for matrix_rule
    std::vector<double> vx, vy;           ///< physical nodes of vector_rule, n_q x n_edges
    std::vector<double> mx, my;           ///< physical nodes of matrix_rule
    std::shared_ptr<const SparsityPattern> pattern;
    ScatterMap scatter;                   ///< n_p^2 per edge into pattern
};

/// Rules default to degree order+2 (vector) and 2*order (matrix). When
/// `pattern` is given, B(u) is scattered into it (it must contain every
/// boundary pair); otherwise a boundary-only pattern is built.
EdgePlan build_edge_plan(std::shared_ptr<const TriangleMesh> mesh, const std::set<int>& tags,
                         std::shared_ptr<const SparsityPattern> pattern = nullptr,
                         int vector_degree = -1, int matrix_degree = -1);

/// f_i = sum over edges of int g_N(u_h) phi_i dS.
std::vector<double> assemble_flux_vector(const EdgePlan& plan, const BoundaryFlux& flux,
                                         std::span<const double> u, double t);

/// B_ik = int g_N'(u_h) phi_i phi_k dS, as V = Q_edge Lambda_edge.
CsrMatrix assemble_flux_jacobian(const EdgePlan& plan, const BoundaryFlux& flux,
                                 std::span<const double> u, double t);

} // namespace vfem
