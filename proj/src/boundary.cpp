#include "vfem/boundary.hpp"

#include <cmath>
#include <string>

#include "vfem/assembly.hpp"
#include "vfem/error.hpp"
#include "vfem/kernels.hpp"

namespace vfem {

BoundaryFlux BoundaryFlux::constant(double value) {
    return {[value](double, double, double, double) { return value; },
            [](double, double, double, double) { return 0.0; }};
}

BoundaryFlux BoundaryFlux::convection_radiation(double h_c, double h_r, double t_ambient, bool kelvin) {
    const double shift = kelvin ? 273.15 : 0.0;
    const double ta = t_ambient + shift;
    const double ta4 = ta * ta * ta * ta;
    return {[=](double T, double, double, double) {
                const double tr = T + shift;
                return h_c * (t_ambient - T) + h_r * (ta4 - tr * tr * tr * tr);
            },
            [=](double T, double, double, double) {
                const double tr = T + shift;
                return -h_c - 4.0 * h_r * tr * tr * tr;
            }};
}

namespace {

void edge_nodes_at(const EdgePlan& plan, const QuadratureRule& rule, std::vector<double>& xs, std::vector<double>& ys) {
    const auto xy = plan.mesh->coords();
    const std::size_t nq = rule.size();
    xs.resize(nq * plan.edges.size());
    ys.resize(nq * plan.edges.size());
    for (std::size_t e = 0; e < plan.edges.size(); ++e) {
        const auto& be = plan.mesh->boundary_edges()[plan.edges[e]];
        const Point2 a = xy[be.nodes[0]], b = xy[be.nodes[1]];
        for (std::size_t q = 0; q < nq; ++q) {
            const double s = rule.nodes[q].x;
            xs[e * nq + q] = a.x + s * (b.x - a.x);
            ys[e * nq + q] = a.y + s * (b.y - a.y);
        }
    }
}

// S(q, e) = fn(u_h(x_q), x_q, y_q, t) over the selected edges
template <class Fn>
DenseMatrix edge_S(const EdgePlan& plan, const BasisTable& basis, std::span<const double> xs,
                   std::span<const double> ys, std::span<const double> u, double t, const Fn& fn) {
    if (u.size() != plan.mesh->num_nodes()) throw DimensionError("flux: DOF vector length does not match the mesh");
    const std::size_t nq = basis.num_points(), ne = plan.edges.size(), np = plan.n_p;
    DenseMatrix gathered(np, ne);
    for (std::size_t e = 0; e < ne; ++e) {
        const auto& be = plan.mesh->boundary_edges()[plan.edges[e]];
        for (std::size_t i = 0; i < np; ++i) gathered(i, e) = u[static_cast<std::size_t>(be.nodes[i])];
    }
    const DenseMatrix phi_t = transpose(basis.phi);
    DenseMatrix s(nq, ne);
    kernels::active().gemm(phi_t.data(), nq, np, gathered.data(), s.data(), ne);
    for (std::size_t k = 0; k < nq * ne; ++k) s.data()[k] = fn(s.data()[k], xs[k], ys[k], t);
    return s;
}

} // namespace

EdgePlan build_edge_plan(std::shared_ptr<const TriangleMesh> mesh, const std::set<int>& tags,
                         std::shared_ptr<const SparsityPattern> pattern, int vector_degree, int matrix_degree) {
    if (!mesh) throw Error("build_edge_plan: null mesh");
    EdgePlan p;
    p.mesh = mesh;
    const int order = mesh->order();
    p.n_p = static_cast<std::size_t>(order + 1);
    const auto xy = mesh->coords();
    for (std::size_t i = 0; i < mesh->boundary_edges().size(); ++i) {
        const auto& be = mesh->boundary_edges()[i];
        if (!tags.contains(be.tag)) continue;
        p.edges.push_back(i);
        const Point2 a = xy[be.nodes[0]], b = xy[be.nodes[1]];
        p.length.push_back(std::hypot(b.x - a.x, b.y - a.y));
    }
    p.vector_rule = interval_rule(vector_degree < 0 ? order + 2 : vector_degree);
    p.matrix_rule = interval_rule(matrix_degree < 0 ? 2 * order : matrix_degree);
    p.vector_basis = basis_table(order, p.vector_rule);
    p.matrix_basis = basis_table(order, p.matrix_rule);
    p.q_matrix = khatri_rao(p.matrix_basis.phi, p.matrix_basis.phi);
    edge_nodes_at(p, p.vector_rule, p.vx, p.vy);
    edge_nodes_at(p, p.matrix_rule, p.mx, p.my);

    const std::size_t np = p.n_p, ne = p.edges.size();
    std::vector<std::int32_t> rows(np * np * ne), cols(np * np * ne);
    for (std::size_t e = 0; e < ne; ++e) {
        const auto& be = mesh->boundary_edges()[p.edges[e]];
        for (std::size_t j = 0; j < np; ++j)
            for (std::size_t i = 0; i < np; ++i) {
                rows[e * np * np + i + j * np] = be.nodes[i];
                cols[e * np * np + i + j * np] = be.nodes[j];
            }
    }
    if (pattern) {
        p.pattern = std::move(pattern);
        p.scatter.slot.resize(rows.size());
        for (std::size_t k = 0; k < rows.size(); ++k) {
            const auto slot = p.pattern->find(static_cast<std::size_t>(rows[k]), static_cast<std::size_t>(cols[k]));
            if (slot < 0) throw Error("build_edge_plan: boundary pair missing from the supplied pattern");
            p.scatter.slot[k] = slot;
        }
    } else {
        auto [pat, map] = build_pattern(mesh->num_nodes(), mesh->num_nodes(), rows, cols);
        p.pattern = std::move(pat);
        p.scatter = std::move(map);
    }
    return p;
}

std::vector<double> assemble_flux_vector(const EdgePlan& plan, const BoundaryFlux& flux, std::span<const double> u,
                                         double t) {
    std::vector<double> out(plan.mesh->num_nodes(), 0.0);
    const std::size_t np = plan.n_p, ne = plan.edges.size();
    if (ne == 0) return out;
    const DenseMatrix s = edge_S(plan, plan.vector_basis, plan.vx, plan.vy, u, t, flux.g);
    const DenseMatrix lambda = build_lambda(s, plan.vector_rule.weights, plan.length);
    DenseMatrix v(np, ne);
    kernels::active().gemm(plan.vector_basis.phi.data(), np, plan.vector_rule.size(), lambda.data(), v.data(), ne);
    for (std::size_t e = 0; e < ne; ++e) {
        const auto& be = plan.mesh->boundary_edges()[plan.edges[e]];
        for (std::size_t i = 0; i < np; ++i) out[static_cast<std::size_t>(be.nodes[i])] += v(i, e);
    }
    return out;
}

CsrMatrix assemble_flux_jacobian(const EdgePlan& plan, const BoundaryFlux& flux, std::span<const double> u, double t) {
    CsrMatrix out(plan.pattern);
    const std::size_t ne = plan.edges.size();
    if (ne == 0) return out;
    const DenseMatrix s = edge_S(plan, plan.matrix_basis, plan.mx, plan.my, u, t, flux.dg_dT);
    const DenseMatrix lambda = build_lambda(s, plan.matrix_rule.weights, plan.length);
    DenseMatrix v(plan.q_matrix.rows(), ne);
    kernels::active().gemm(plan.q_matrix.data(), plan.q_matrix.rows(), plan.q_matrix.cols(), lambda.data(), v.data(), ne);
    refill(out, plan.scatter, v.values());
    return out;
}

} // namespace vfem
