#include "vfem/assembly.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <string>

#include "vfem/error.hpp"
#include "vfem/kernels.hpp"
#include "vfem/parallel.hpp"
#include "vfem/tensor.hpp"

namespace vfem {

namespace {

constexpr std::size_t kChunk = 8192;

std::atomic<bool> g_flip_qc{false};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool is_mass_type(Target t) {
    return t == Target::mass || t == Target::reaction || t == Target::mass_tensor || t == Target::load;
}

// [J_1 kron J_1, ..., J_nq kron J_nq]
DenseMatrix build_Q_conductivity(const BasisTable& basis) {
    const std::size_t np = basis.num_basis(), nq = basis.num_points(), d2 = basis.dim() * basis.dim();
    DenseMatrix q(np * np, d2 * nq);
    for (std::size_t k = 0; k < nq; ++k) {
        const DenseMatrix block = kron(basis.jac[k], basis.jac[k]);
        for (std::size_t c = 0; c < d2; ++c)
            for (std::size_t r = 0; r < np * np; ++r) q(r, k * d2 + c) = block(r, c);
    }
    return q;
}

// V = Q X in chunks of element columns
void chunked_gemm(const DenseMatrix& q, const DenseMatrix& x, DenseMatrix& v) {
    const auto& k = kernels::active();
    v.resize(q.rows(), x.cols());
    parallel_for_chunks(x.cols(), kChunk, [&](std::size_t b, std::size_t e) {
        k.gemm(q.data(), q.rows(), q.cols(), x.data() + b * x.rows(), v.data() + b * v.rows(), e - b);
    });
}

void check_u(const AssemblyPlan& plan, std::span<const double> u) {
    if (u.size() != plan.mesh().num_nodes())
        throw DimensionError("DOF vector has length " + std::to_string(u.size()) + ", mesh has " +
                             std::to_string(plan.mesh().num_nodes()) + " nodes");
}

} // namespace

const char* to_string(Target t) noexcept {
    switch (t) {
        case Target::mass: return "mass";
        case Target::conductivity: return "conductivity";
        case Target::reaction: return "reaction";
        case Target::mass_tensor: return "mass_tensor";
        case Target::conductivity_tensor: return "conductivity_tensor";
        case Target::load: return "load";
    }
    return "?";
}

IntegrandKind integrand_kind(Target t) noexcept {
    switch (t) {
        case Target::mass:
        case Target::reaction: return IntegrandKind::mass_matrix;
        case Target::conductivity: return IntegrandKind::conductivity_matrix;
        case Target::mass_tensor: return IntegrandKind::mass_tensor;
        case Target::conductivity_tensor: return IntegrandKind::conductivity_tensor;
        case Target::load: return IntegrandKind::load_vector;
    }
    return IntegrandKind::mass_matrix;
}

const TargetData& AssemblyPlan::target(Target t) const {
    const auto& d = targets_[static_cast<std::size_t>(t)];
    if (!d) throw Error(std::string("assembly plan was not built for target ") + to_string(t));
    return *d;
}

void AssemblyPlan::check_mesh(const TriangleMesh& mesh) const {
    if (mesh.id() != mesh_->id()) throw Error("assembly plan belongs to a different mesh");
}

AssemblyPlan build_plan(std::shared_ptr<const TriangleMesh> mesh, std::span<const Target> targets,
                        const std::map<Target, QuadratureRule>& rules) {
    if (!mesh) throw Error("build_plan: null mesh");
    AssemblyPlan plan;
    plan.mesh_ = mesh;
    plan.geometry_ = compute_geometry_batch(*mesh);
    const int order = mesh->order();
    const std::size_t ne = mesh->num_elements();
    const std::size_t np = plan.nodes_per_element();

    for (Target t : targets) {
        auto& slot = plan.targets_[static_cast<std::size_t>(t)];
        if (slot) continue;
        const int min_degree = default_rule_degree(integrand_kind(t), order);
        TargetData d;
        if (const auto it = rules.find(t); it != rules.end()) {
            if (it->second.element != RefElement::triangle)
                throw Error(std::string("rule for ") + to_string(t) + " is not a triangle rule");
            if (it->second.exact_degree < min_degree)
                throw Error(std::string("rule for ") + to_string(t) + " is exact to degree " +
                            std::to_string(it->second.exact_degree) + ", need " + std::to_string(min_degree));
            d.rule = it->second;
        } else {
            d.rule = triangle_rule(min_degree);
        }
        d.basis = basis_table(order, d.rule);
        d.phi_t = transpose(d.basis.phi);
        switch (t) {
            case Target::conductivity:
                d.q = build_Q_conductivity(d.basis);
                if (testing::conductivity_sign_flip())
                    for (double& v : d.q.values()) v = -v;
                break;
            case Target::conductivity_tensor:
                d.q = build_Q_cond_contraction(d.basis);
                d.q_tensor = build_Q_cond_tensor(d.basis);
                break;
            case Target::mass_tensor:
                d.q = khatri_rao(d.basis.phi, d.basis.phi);
                d.q_tensor = build_Q_mass_tensor(d.basis);
                break;
            default:
                d.q = khatri_rao(d.basis.phi, d.basis.phi);
                break;
        }
        const std::size_t nq = d.rule.size();
        d.quad_x.resize(nq * ne);
        d.quad_y.resize(nq * ne);
        for (std::size_t e = 0; e < ne; ++e) {
            const auto& B = plan.geometry_.jacobian[e];
            const Point2 o = plan.geometry_.corners[e][0];
            for (std::size_t q = 0; q < nq; ++q) {
                const Point2 r = d.rule.nodes[q];
                d.quad_x[e * nq + q] = o.x + B[0] * r.x + B[2] * r.y;
                d.quad_y[e * nq + q] = o.y + B[1] * r.x + B[3] * r.y;
            }
        }
        slot = std::move(d);
    }

    // (N_e(i), N_e(j)) for local index i + j n_p within column e
    std::vector<std::int32_t> rows(np * np * ne), cols(np * np * ne);
    for (std::size_t e = 0; e < ne; ++e) {
        const auto nodes = mesh->element(e);
        for (std::size_t j = 0; j < np; ++j)
            for (std::size_t i = 0; i < np; ++i) {
                const std::size_t k = e * np * np + i + j * np;
                rows[k] = nodes[i];
                cols[k] = nodes[j];
            }
    }
    auto [pattern, map] = build_pattern(mesh->num_nodes(), mesh->num_nodes(), rows, cols);
    plan.pattern_ = std::move(pattern);
    plan.scatter_ = std::move(map);
    return plan;
}

DenseMatrix khatri_rao(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.cols())
        throw DimensionError("khatri_rao: column counts differ (" + std::to_string(a.cols()) + " vs " +
                             std::to_string(b.cols()) + ")");
    DenseMatrix out(a.rows() * b.rows(), a.cols());
    kernels::active().khatri_rao(a.data(), a.rows(), b.data(), b.rows(), out.data(), a.cols());
    return out;
}

DenseMatrix interpolate_at_quadrature(const AssemblyPlan& plan, Target target, std::span<const double> u) {
    check_u(plan, u);
    const auto& d = plan.target(target);
    const std::size_t np = plan.nodes_per_element(), ne = plan.num_elements();
    DenseMatrix gathered(np, ne);
    const auto tri = plan.mesh().tri_nodes();
    for (std::size_t k = 0; k < np * ne; ++k) gathered.data()[k] = u[static_cast<std::size_t>(tri[k])];
    DenseMatrix uh;
    chunked_gemm(d.phi_t, gathered, uh);
    return uh;
}

namespace {

// S for elements [b, e) into out (nq x (e - b), column-major); g is scratch.
void eval_S_range(const AssemblyPlan& plan, const TargetData& d, const CoefficientField& coeff, double t,
                  const std::optional<std::span<const double>>& u, bool use_derivative, std::size_t b,
                  std::size_t e, double* out, std::vector<double>& g) {
    const std::size_t nq = d.rule.size(), m = e - b, n = nq * m;
    switch (coeff.kind()) {
        case CoefficientField::Kind::constant:
            std::fill_n(out, n, use_derivative ? 0.0 : coeff.constant_value());
            break;
        case CoefficientField::Kind::spatial:
            if (use_derivative) {
                std::fill_n(out, n, 0.0);
                break;
            }
            for (std::size_t k = 0; k < n; ++k) out[k] = coeff.value(d.quad_x[b * nq + k], d.quad_y[b * nq + k], t, 0.0);
            break;
        case CoefficientField::Kind::state: {
            const std::size_t np = plan.nodes_per_element();
            const auto tri = plan.mesh().tri_nodes();
            g.resize(np * m);
            for (std::size_t k = 0; k < np * m; ++k) g[k] = (*u)[static_cast<std::size_t>(tri[b * np + k])];
            kernels::active().gemm(d.phi_t.data(), nq, np, g.data(), out, m);
            for (std::size_t k = 0; k < n; ++k)
                out[k] = use_derivative ? coeff.derivative(out[k]) : coeff.value(0.0, 0.0, t, out[k]);
            break;
        }
    }
}

struct ChunkBuffers {
    std::vector<double> s, lambda, x, g;
};

// Element matrices for [b, e) into v (n_p^2 x (e - b)).
void form_range(const AssemblyPlan& plan, Target target, const TargetData& d, const CoefficientField& coeff, double t,
                const std::optional<std::span<const double>>& u, std::size_t b, std::size_t e, double* v,
                ChunkBuffers& buf) {
    const auto& k = kernels::active();
    const std::size_t nq = d.rule.size(), m = e - b;
    buf.s.resize(nq * m);
    buf.lambda.resize(nq * m);
    eval_S_range(plan, d, coeff, t, u, false, b, e, buf.s.data(), buf.g);
    k.scale_lambda(buf.s.data(), d.rule.weights.data(), nq, plan.geometry().det.data() + b, buf.lambda.data(), m);
    if (target == Target::conductivity) {
        buf.x.resize(4 * nq * m);
        k.khatri_rao(buf.lambda.data(), nq, plan.geometry().metric.data() + 4 * b, 4, buf.x.data(), m);
        k.gemm(d.q.data(), d.q.rows(), d.q.cols(), buf.x.data(), v, m);
    } else {
        k.gemm(d.q.data(), d.q.rows(), d.q.cols(), buf.lambda.data(), v, m);
    }
}

} // namespace

DenseMatrix eval_S(const AssemblyPlan& plan, Target target, const CoefficientField& coeff, double t,
                   std::optional<std::span<const double>> u, bool use_derivative) {
    const auto& d = plan.target(target);
    const std::size_t nq = d.rule.size(), ne = plan.num_elements();
    if (coeff.kind() == CoefficientField::Kind::state) {
        if (!u) throw Error("state-dependent coefficient evaluated without a DOF vector");
        check_u(plan, *u);
    }
    DenseMatrix s(nq, ne);
    parallel_for_chunks(ne, kChunk, [&](std::size_t b, std::size_t e) {
        std::vector<double> g;
        eval_S_range(plan, d, coeff, t, u, use_derivative, b, e, s.data() + b * nq, g);
    });
    return s;
}

DenseMatrix build_lambda(const DenseMatrix& s, std::span<const double> w, std::span<const double> b) {
    if (s.rows() != w.size() || s.cols() != b.size())
        throw DimensionError("build_lambda: S is " + std::to_string(s.rows()) + "x" + std::to_string(s.cols()) +
                             ", w has " + std::to_string(w.size()) + ", b has " + std::to_string(b.size()));
    DenseMatrix out(s.rows(), s.cols());
    kernels::active().scale_lambda(s.data(), w.data(), w.size(), b.data(), out.data(), b.size());
    return out;
}

DenseMatrix form_element_mass(const AssemblyPlan& plan, const DenseMatrix& lambda, Target target) {
    if (!is_mass_type(target)) throw Error(std::string("form_element_mass: ") + to_string(target) + " is not mass-type");
    const auto& d = plan.target(target);
    if (lambda.rows() != d.rule.size() || lambda.cols() != plan.num_elements())
        throw DimensionError("form_element_mass: Lambda has the wrong shape");
    DenseMatrix v;
    chunked_gemm(d.q, lambda, v);
    return v;
}

DenseMatrix form_element_conductivity(const AssemblyPlan& plan, const DenseMatrix& lambda) {
    return form_element_conductivity(plan, lambda, plan.geometry().metric);
}

DenseMatrix form_element_conductivity(const AssemblyPlan& plan, const DenseMatrix& lambda, const DenseMatrix& metric) {
    const auto& d = plan.target(Target::conductivity);
    const std::size_t nq = d.rule.size(), ne = plan.num_elements();
    if (lambda.rows() != nq || lambda.cols() != ne || metric.rows() != 4 || metric.cols() != ne)
        throw DimensionError("form_element_conductivity: Lambda or W has the wrong shape");
    const auto& k = kernels::active();
    DenseMatrix v(d.q.rows(), ne);
    parallel_for_chunks(ne, kChunk, [&](std::size_t b, std::size_t e) {
        std::vector<double> x(4 * nq * (e - b));
        k.khatri_rao(lambda.data() + b * nq, nq, metric.data() + b * 4, 4, x.data(), e - b);
        k.gemm(d.q.data(), d.q.rows(), d.q.cols(), x.data(), v.data() + b * v.rows(), e - b);
    });
    return v;
}

void assemble_into(const AssemblyPlan& plan, Target target, const CoefficientField& coeff, double t,
                   std::optional<std::span<const double>> u, CsrMatrix& out, AssemblyTimings* timings) {
    if (target == Target::conductivity_tensor || target == Target::load)
        throw Error(std::string("assemble: ") + to_string(target) + " does not produce a matrix");
    if (out.pattern_ptr() != plan.pattern()) throw Error("assemble_into: output matrix is not on the plan's pattern");
    if (coeff.kind() == CoefficientField::Kind::state) {
        if (!u) throw Error("state-dependent coefficient evaluated without a DOF vector");
        check_u(plan, *u);
    }
    const auto& d = plan.target(target);
    const std::size_t ne = plan.num_elements(), np2 = d.q.rows();
    const auto slot = std::span<const std::int64_t>(plan.scatter().slot);
    auto vals = out.values();

    // Same per-element arithmetic and the same scatter order as
    // form_element_* followed by refill, so results are bitwise identical.
    thread_local ChunkBuffers buf;
    thread_local std::vector<double> v;
    double formation = 0.0, scatter = 0.0;
    out.set_zero();
    if (num_threads() == 1 || ne <= kChunk) {
        v.resize(np2 * std::min(ne, kChunk));
        for (std::size_t b = 0; b < ne; b += kChunk) {
            const std::size_t e = std::min(ne, b + kChunk);
            const auto t0 = Clock::now();
            form_range(plan, target, d, coeff, t, u, b, e, v.data(), buf);
            const auto t1 = Clock::now();
            const std::int64_t* sl = slot.data() + b * np2;
            for (std::size_t k = 0; k < np2 * (e - b); ++k) vals[static_cast<std::size_t>(sl[k])] += v[k];
            formation += std::chrono::duration<double>(t1 - t0).count();
            scatter += seconds_since(t1);
        }
    } else {
        const auto t0 = Clock::now();
        v.resize(np2 * ne);
        parallel_for_chunks(ne, kChunk, [&](std::size_t b, std::size_t e) {
            ChunkBuffers local;
            form_range(plan, target, d, coeff, t, u, b, e, v.data() + b * np2, local);
        });
        const auto t1 = Clock::now();
        for (std::size_t k = 0; k < np2 * ne; ++k) vals[static_cast<std::size_t>(slot[k])] += v[k];
        formation = std::chrono::duration<double>(t1 - t0).count();
        scatter = seconds_since(t1);
    }
    if (timings) {
        timings->formation_seconds += formation;
        timings->scatter_seconds += scatter;
    }
}

CsrMatrix assemble(const AssemblyPlan& plan, Target target, const CoefficientField& coeff, double t,
                   std::optional<std::span<const double>> u, AssemblyTimings* timings) {
    CsrMatrix m(plan.pattern());
    assemble_into(plan, target, coeff, t, u, m, timings);
    return m;
}

std::vector<double> assemble_load(const AssemblyPlan& plan, const CoefficientField& f, double t,
                                  std::optional<std::span<const double>> u) {
    const auto& d = plan.target(Target::load);
    const std::size_t np = plan.nodes_per_element(), ne = plan.num_elements();
    std::vector<double> out(plan.mesh().num_nodes(), 0.0);
    if (f.is_zero()) return out;
    const DenseMatrix lambda = build_lambda(eval_S(plan, Target::load, f, t, u), d.rule.weights, plan.geometry().det);
    DenseMatrix v;
    chunked_gemm(d.basis.phi, lambda, v);
    const auto tri = plan.mesh().tri_nodes();
    for (std::size_t k = 0; k < np * ne; ++k) out[static_cast<std::size_t>(tri[k])] += v.data()[k];
    return out;
}

// ---------------------------------------------------------------------------
// Element-by-element reference

DenseMatrix classical_element_batch(const TriangleMesh& mesh, Target target, const CoefficientField& coeff,
                                    const QuadratureRule& rule, double t, std::optional<std::span<const double>> u) {
    const bool conductivity = target == Target::conductivity;
    if (!conductivity && target != Target::mass && target != Target::reaction)
        throw Error(std::string("classical assembly does not handle target ") + to_string(target));
    if (coeff.kind() == CoefficientField::Kind::state && !u)
        throw Error("state-dependent coefficient evaluated without a DOF vector");
    if (u && u->size() != mesh.num_nodes()) throw DimensionError("DOF vector length does not match the mesh");

    const BasisTable basis = basis_table(mesh.order(), rule);
    const std::size_t np = basis.num_basis(), nq = rule.size(), ne = mesh.num_elements();
    const auto xy = mesh.coords();
    DenseMatrix batch(np * np, ne);
    DenseMatrix local(np, np), ja(np, 2);
    for (std::size_t e = 0; e < ne; ++e) {
        const auto nodes = mesh.element(e);
        const Point2 a = xy[nodes[0]], b = xy[nodes[1]], c = xy[nodes[2]];
        const double B[2][2] = {{b.x - a.x, c.x - a.x}, {b.y - a.y, c.y - a.y}};
        const double det = B[0][0] * B[1][1] - B[0][1] * B[1][0];
        if (det == 0.0) throw DegenerateElementError(e, "degenerate element " + std::to_string(e));
        // A_e = (B^T B)^{-1} = B^{-1} B^{-T}
        const double Bi[2][2] = {{B[1][1] / det, -B[0][1] / det}, {-B[1][0] / det, B[0][0] / det}};
        double A[2][2];
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) A[i][j] = Bi[i][0] * Bi[j][0] + Bi[i][1] * Bi[j][1];
        local.fill(0.0);
        for (std::size_t q = 0; q < nq; ++q) {
            const Point2 r = rule.nodes[q];
            const double x = a.x + B[0][0] * r.x + B[0][1] * r.y;
            const double y = a.y + B[1][0] * r.x + B[1][1] * r.y;
            double uh = 0.0;
            if (u)
                for (std::size_t i = 0; i < np; ++i) uh += basis.phi(i, q) * (*u)[static_cast<std::size_t>(nodes[i])];
            const double scale = rule.weights[q] * coeff.value(x, y, t, uh) * std::abs(det);
            if (conductivity) {
                const DenseMatrix& J = basis.jac[q];
                for (std::size_t i = 0; i < np; ++i)
                    for (int k = 0; k < 2; ++k) ja(i, k) = J(i, 0) * A[0][k] + J(i, 1) * A[1][k];
                for (std::size_t j = 0; j < np; ++j)
                    for (std::size_t i = 0; i < np; ++i)
                        local(i, j) += scale * (ja(i, 0) * J(j, 0) + ja(i, 1) * J(j, 1));
            } else {
                for (std::size_t j = 0; j < np; ++j)
                    for (std::size_t i = 0; i < np; ++i) local(i, j) += scale * basis.phi(i, q) * basis.phi(j, q);
            }
        }
        std::copy(local.data(), local.data() + np * np, batch.col(e).data());
    }
    return batch;
}

CsrMatrix classical_assemble(const TriangleMesh& mesh, Target target, const CoefficientField& coeff,
                             const QuadratureRule& rule, double t, std::optional<std::span<const double>> u,
                             AssemblyTimings* timings) {
    const auto t0 = Clock::now();
    const DenseMatrix batch = classical_element_batch(mesh, target, coeff, rule, t, u);
    const auto t1 = Clock::now();
    const std::size_t np = static_cast<std::size_t>(mesh.nodes_per_element());
    TripletBuffer tb(mesh.num_nodes(), mesh.num_nodes());
    tb.rows.reserve(batch.size());
    tb.cols.reserve(batch.size());
    tb.vals.reserve(batch.size());
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto nodes = mesh.element(e);
        for (std::size_t j = 0; j < np; ++j)
            for (std::size_t i = 0; i < np; ++i) tb.add(nodes[i], nodes[j], batch(i + j * np, e));
    }
    CsrMatrix m = triplets_to_csr(tb).matrix;
    if (timings) {
        timings->formation_seconds += std::chrono::duration<double>(t1 - t0).count();
        timings->scatter_seconds += seconds_since(t1);
    }
    return m;
}

namespace testing {
void set_conductivity_sign_flip(bool enabled) noexcept { g_flip_qc = enabled; }
bool conductivity_sign_flip() noexcept { return g_flip_qc; }
} // namespace testing

} // namespace vfem
