#include "vfem/tensor.hpp"

#include <algorithm>
#include <string>
#include <tuple>

#include "vfem/error.hpp"
#include "vfem/kernels.hpp"

namespace vfem {

namespace {

DenseMatrix column_as_matrix(const DenseMatrix& m, std::size_t j) {
    DenseMatrix c(m.rows(), 1);
    for (std::size_t i = 0; i < m.rows(); ++i) c(i, 0) = m(i, j);
    return c;
}

void hstack_into(DenseMatrix& out, const DenseMatrix& block, std::size_t col0) {
    for (std::size_t c = 0; c < block.cols(); ++c)
        for (std::size_t r = 0; r < block.rows(); ++r) out(r, col0 + c) = block(r, c);
}

DenseMatrix gemm(const DenseMatrix& q, const DenseMatrix& x) {
    DenseMatrix v(q.rows(), x.cols());
    kernels::active().gemm(q.data(), q.rows(), q.cols(), x.data(), v.data(), x.cols());
    return v;
}

void check_len(const AssemblyPlan& plan, std::span<const double> u, const char* what) {
    if (u.size() != plan.mesh().num_nodes())
        throw DimensionError(std::string(what) + " has length " + std::to_string(u.size()) + ", mesh has " +
                             std::to_string(plan.mesh().num_nodes()) + " nodes");
}

} // namespace

double SparseTensor3::at(std::size_t i, std::size_t j, std::size_t k) const {
    const Entry key{static_cast<std::int32_t>(i), static_cast<std::int32_t>(j), static_cast<std::int32_t>(k), 0.0};
    const auto less = [](const Entry& a, const Entry& b) {
        return std::tie(a.k, a.j, a.i) < std::tie(b.k, b.j, b.i);
    };
    const auto it = std::lower_bound(entries.begin(), entries.end(), key, less);
    if (it == entries.end() || less(key, *it)) return 0.0;
    return it->value;
}

DenseMatrix build_Q_mass_tensor(const BasisTable& basis) {
    return khatri_rao(basis.phi, khatri_rao(basis.phi, basis.phi));
}

DenseMatrix build_Q_cond_tensor(const BasisTable& basis) {
    const std::size_t np = basis.num_basis(), nq = basis.num_points(), d2 = basis.dim() * basis.dim();
    DenseMatrix q(np * np * np, d2 * nq);
    for (std::size_t k = 0; k < nq; ++k)
        hstack_into(q, kron(column_as_matrix(basis.phi, k), kron(basis.jac[k], basis.jac[k])), k * d2);
    return q;
}

DenseMatrix build_Q_cond_contraction(const BasisTable& basis) {
    const std::size_t np = basis.num_basis(), nq = basis.num_points(), d = basis.dim();
    DenseMatrix q(np * np, d * nq);
    for (std::size_t k = 0; k < nq; ++k) hstack_into(q, kron(column_as_matrix(basis.phi, k), basis.jac[k]), k * d);
    return q;
}

ElementTensorBatch form_element_mass_tensor(const AssemblyPlan& plan, const DenseMatrix& lambda) {
    const auto& d = plan.target(Target::mass_tensor);
    if (lambda.rows() != d.rule.size() || lambda.cols() != plan.num_elements())
        throw DimensionError("form_element_mass_tensor: Lambda has the wrong shape");
    return {plan.nodes_per_element(), gemm(d.q_tensor, lambda)};
}

ElementTensorBatch form_element_cond_tensor(const AssemblyPlan& plan, const DenseMatrix& lambda) {
    const auto& d = plan.target(Target::conductivity_tensor);
    if (lambda.rows() != d.rule.size() || lambda.cols() != plan.num_elements())
        throw DimensionError("form_element_cond_tensor: Lambda has the wrong shape");
    return {plan.nodes_per_element(), gemm(d.q_tensor, khatri_rao(lambda, plan.geometry().metric))};
}

CsrMatrix contract_mass_tensor(const AssemblyPlan& plan, const CoefficientField& coeff, std::span<const double> u,
                               std::span<const double> v, double t) {
    check_len(plan, u, "u");
    check_len(plan, v, "v");
    const auto& d = plan.target(Target::mass_tensor);
    CsrMatrix out(plan.pattern());
    if (coeff.kind() != CoefficientField::Kind::state) return out;
    DenseMatrix s = eval_S(plan, Target::mass_tensor, coeff, t, u, true);
    const DenseMatrix vh = interpolate_at_quadrature(plan, Target::mass_tensor, v);
    for (std::size_t k = 0; k < s.size(); ++k) s.data()[k] *= vh.data()[k];
    const DenseMatrix lambda = build_lambda(s, d.rule.weights, plan.geometry().det);
    refill(out, plan.scatter(), form_element_mass(plan, lambda, Target::mass_tensor).values());
    return out;
}

CsrMatrix contract_cond_tensor_mode2(const AssemblyPlan& plan, const CoefficientField& coeff,
                                     std::span<const double> u, double t) {
    check_len(plan, u, "u");
    const auto& d = plan.target(Target::conductivity_tensor);
    CsrMatrix out(plan.pattern());
    if (coeff.kind() != CoefficientField::Kind::state) return out;
    const std::size_t np = plan.nodes_per_element(), nq = d.rule.size(), ne = plan.num_elements();

    const DenseMatrix lambda =
        build_lambda(eval_S(plan, Target::conductivity_tensor, coeff, t, u, true), d.rule.weights, plan.geometry().det);

    // reference gradients of u_h at every node: row 2q + c of D is column c of J_q
    DenseMatrix D(2 * nq, np);
    for (std::size_t q = 0; q < nq; ++q)
        for (std::size_t i = 0; i < np; ++i)
            for (std::size_t c = 0; c < 2; ++c) D(2 * q + c, i) = d.basis.jac[q](i, c);
    DenseMatrix gathered(np, ne);
    const auto tri = plan.mesh().tri_nodes();
    for (std::size_t k = 0; k < np * ne; ++k) gathered.data()[k] = u[static_cast<std::size_t>(tri[k])];
    DenseMatrix x = gemm(D, gathered);

    // x(:, e) <- lambda_qe * A_e * grad_ref u_h
    const DenseMatrix& W = plan.geometry().metric;
    for (std::size_t e = 0; e < ne; ++e)
        for (std::size_t q = 0; q < nq; ++q) {
            double& g0 = x(2 * q, e);
            double& g1 = x(2 * q + 1, e);
            const double l = lambda(q, e);
            const double y0 = W(0, e) * g0 + W(2, e) * g1;
            const double y1 = W(1, e) * g0 + W(3, e) * g1;
            g0 = l * y0;
            g1 = l * y1;
        }
    refill(out, plan.scatter(), gemm(d.q, x).values());
    return out;
}

SparseTensor3 explicit_global_tensor(const TriangleMesh& mesh, TensorKind kind, const CoefficientField& coeff,
                                     const QuadratureRule& rule, std::span<const double> u, double t) {
    if (mesh.num_nodes() > 200)
        throw Error("explicit_global_tensor is limited to meshes with at most 200 nodes, got " +
                    std::to_string(mesh.num_nodes()));
    const Target target = kind == TensorKind::mass ? Target::mass_tensor : Target::conductivity_tensor;
    const Target targets[] = {target};
    const AssemblyPlan plan = build_plan(std::make_shared<TriangleMesh>(mesh), targets, {{target, rule}});
    const DenseMatrix lambda =
        build_lambda(eval_S(plan, target, coeff, t, u, true), plan.target(target).rule.weights, plan.geometry().det);
    const ElementTensorBatch batch =
        kind == TensorKind::mass ? form_element_mass_tensor(plan, lambda) : form_element_cond_tensor(plan, lambda);

    const std::size_t np = batch.n_p;
    SparseTensor3 out;
    out.n = mesh.num_nodes();
    out.entries.reserve(np * np * np * mesh.num_elements());
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto nodes = mesh.element(e);
        for (std::size_t k = 0; k < np; ++k)
            for (std::size_t j = 0; j < np; ++j)
                for (std::size_t i = 0; i < np; ++i)
                    out.entries.push_back({nodes[i], nodes[j], nodes[k], batch(i, j, k, e)});
    }
    std::stable_sort(out.entries.begin(), out.entries.end(), [](const auto& a, const auto& b) {
        return std::tie(a.k, a.j, a.i) < std::tie(b.k, b.j, b.i);
    });
    std::vector<SparseTensor3::Entry> merged;
    for (const auto& en : out.entries) {
        if (!merged.empty() && merged.back().i == en.i && merged.back().j == en.j && merged.back().k == en.k)
            merged.back().value += en.value;
        else
            merged.push_back(en);
    }
    out.entries = std::move(merged);
    return out;
}

DenseMatrix contract(const SparseTensor3& tensor, std::span<const double> v, int mode) {
    if (v.size() != tensor.n) throw DimensionError("contract: vector length does not match the tensor");
    if (mode < 1 || mode > 3) throw Error("contract: mode must be 1, 2 or 3");
    DenseMatrix out(tensor.n, tensor.n);
    for (const auto& en : tensor.entries) {
        switch (mode) {
            case 1: out(en.j, en.k) += en.value * v[en.i]; break;
            case 2: out(en.i, en.k) += en.value * v[en.j]; break;
            default: out(en.i, en.j) += en.value * v[en.k]; break;
        }
    }
    return out;
}

} // namespace vfem
