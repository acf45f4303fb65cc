#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>

#include "helpers.hpp"
#include "vfem/error.hpp"
#include "vfem/tensor.hpp"

using namespace vfem;

namespace {

const std::vector<Target> kTensorTargets{Target::mass, Target::conductivity, Target::mass_tensor,
                                         Target::conductivity_tensor};

CoefficientField cubic_m() {
    return CoefficientField::state([](double u) { return 1.0 + 0.3 * u + 0.2 * u * u; },
                                   [](double u) { return 0.3 + 0.4 * u; });
}

CoefficientField smooth_c() {
    return CoefficientField::state([](double u) { return 2.0 + std::sin(u); }, [](double u) { return std::cos(u); });
}

CoefficientField linear_state(double slope) {
    return CoefficientField::state([slope](double u) { return slope * u; }, [slope](double) { return slope; });
}

double dense_rel_diff(const DenseMatrix& a, const CsrMatrix& b) {
    const DenseMatrix bd = b.to_dense();
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        num += (a.values()[k] - bd.values()[k]) * (a.values()[k] - bd.values()[k]);
        den += a.values()[k] * a.values()[k];
    }
    return std::sqrt(num / den);
}

double max_abs(const CsrMatrix& m) {
    double s = 0.0;
    for (double v : m.values()) s = std::max(s, std::abs(v));
    return s;
}

} // namespace

TEST_CASE("mass tensor Q at the centroid") {
    const BasisTable b = basis_table(1, triangle_rule(1));
    const DenseMatrix q = build_Q_mass_tensor(b);
    CHECK(q.rows() == 27);
    CHECK(q.cols() == 1);
    for (double v : q.values()) CHECK(v == doctest::Approx(1.0 / 27.0));
}

TEST_CASE("mass tensor Q columns sum to one and equal the nested Khatri-Rao product") {
    for (int order : {1, 2}) {
        const BasisTable b = basis_table(order, triangle_rule(6));
        const DenseMatrix q = build_Q_mass_tensor(b);
        for (std::size_t c = 0; c < q.cols(); ++c) CHECK(test::sum(q.col(c)) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(q == khatri_rao(b.phi, khatri_rao(b.phi, b.phi)));
    }
}

TEST_CASE("conductivity tensor Q block structure") {
    const BasisTable b = basis_table(1, triangle_rule(1));
    const DenseMatrix q = build_Q_cond_tensor(b);
    CHECK(q.rows() == 27);
    CHECK(q.cols() == 4);
    const DenseMatrix jj = kron(b.jac[0], b.jac[0]);
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t r = 0; r < 9; ++r)
            for (std::size_t c = 0; c < 4; ++c) CHECK(q(9 * k + r, c) == doctest::Approx(jj(r, c) / 3.0));

    const BasisTable b2 = basis_table(2, triangle_rule(3));
    const DenseMatrix q2 = build_Q_cond_tensor(b2);
    CHECK(q2.rows() == 216);
    CHECK(q2.cols() == 24);

    // block q applied to vec(I) gives phi_q(k) (J_q J_q^T)(i, j)
    for (std::size_t qi = 0; qi < b2.num_points(); ++qi) {
        const DenseMatrix jjt = matmul(b2.jac[qi], transpose(b2.jac[qi]));
        for (std::size_t k = 0; k < 6; ++k)
            for (std::size_t j = 0; j < 6; ++j)
                for (std::size_t i = 0; i < 6; ++i) {
                    const std::size_t row = i + 6 * (j + 6 * k);
                    const double applied = q2(row, 4 * qi) + q2(row, 4 * qi + 3);
                    CHECK(applied == doctest::Approx(b2.phi(k, qi) * jjt(i, j)).epsilon(1e-13));
                }
    }
}

TEST_CASE("element mass tensor on the reference triangle") {
    const auto ref = test::shared(test::reference_triangle());
    const AssemblyPlan plan = build_plan(ref, kTensorTargets);
    const auto& d = plan.target(Target::mass_tensor);
    const auto u = std::vector<double>{0.3, 0.7, 0.1};
    const ElementTensorBatch t = form_element_mass_tensor(
        plan, build_lambda(eval_S(plan, Target::mass_tensor, linear_state(1.0), 0.0, u, true), d.rule.weights,
                           plan.geometry().det));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t k = 0; k < 3; ++k) {
                std::array<int, 3> p{0, 0, 0};
                ++p[i];
                ++p[j];
                ++p[k];
                // int of l0^a l1^b l2^c = a! b! c! 2A / (a + b + c + 2)!, A = 1/2
                const double exact =
                    std::tgamma(p[0] + 1) * std::tgamma(p[1] + 1) * std::tgamma(p[2] + 1) / std::tgamma(6);
                CHECK(std::abs(t(i, j, k, 0) - exact) <= 1e-15);
            }

    const ElementTensorBatch z = form_element_mass_tensor(
        plan, build_lambda(eval_S(plan, Target::mass_tensor, linear_state(0.0), 0.0, u, true), d.rule.weights,
                           plan.geometry().det));
    for (double v : z.values.values()) CHECK(v == 0.0);
}

TEST_CASE("element mass tensors are symmetric in all modes") {
    const auto mesh = test::square(3, 2, 0.2);
    const AssemblyPlan plan = build_plan(mesh, kTensorTargets);
    const auto& d = plan.target(Target::mass_tensor);
    const auto u = test::random_vector(mesh->num_nodes(), -1, 1, 3);
    const ElementTensorBatch t = form_element_mass_tensor(
        plan, build_lambda(eval_S(plan, Target::mass_tensor, cubic_m(), 0.0, u, true), d.rule.weights,
                           plan.geometry().det));
    const std::size_t n = t.n_p;
    bool ij_exact = true;
    double worst = 0.0;
    for (std::size_t e = 0; e < plan.num_elements(); ++e) {
        double scale = 0.0;
        for (double v : t.values.col(e)) scale = std::max(scale, std::abs(v));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t k = 0; k < n; ++k) {
                    const double v = t(i, j, k, e);
                    ij_exact = ij_exact && v == t(j, i, k, e);
                    for (double w : {t(k, j, i, e), t(i, k, j, e), t(j, k, i, e), t(k, i, j, e)})
                        worst = std::max(worst, std::abs(v - w) / scale);
                }
    }
    CHECK(ij_exact);
    CHECK(worst <= 1e-15);
}

TEST_CASE("element conductivity tensor on the reference triangle") {
    const auto ref = test::shared(test::reference_triangle());
    const AssemblyPlan plan = build_plan(ref, kTensorTargets);
    const auto& d = plan.target(Target::conductivity_tensor);
    const auto u = std::vector<double>{0.3, 0.7, 0.1};
    const ElementTensorBatch t = form_element_cond_tensor(
        plan, build_lambda(eval_S(plan, Target::conductivity_tensor, linear_state(1.0), 0.0, u, true),
                           d.rule.weights, plan.geometry().det));
    const double g[3][3] = {{2, -1, -1}, {-1, 1, 0}, {-1, 0, 1}};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t k = 0; k < 3; ++k) {
                CHECK(std::abs(t(i, j, k, 0) - g[i][j] / 6.0) <= 1e-15);
                CHECK(t(i, j, k, 0) == t(j, i, k, 0));
            }

    const ElementTensorBatch z = form_element_cond_tensor(
        plan, build_lambda(eval_S(plan, Target::conductivity_tensor, linear_state(0.0), 0.0, u, true),
                           d.rule.weights, plan.geometry().det));
    for (double v : z.values.values()) CHECK(v == 0.0);
}

TEST_CASE("matrix-free contractions match the explicit tensor") {
    for (int order : {1, 2}) {
        const auto mesh = test::square(order == 1 ? 8 : 4, order, 0.25, 5);
        REQUIRE(mesh->num_nodes() <= 100);
        const AssemblyPlan plan = build_plan(mesh, kTensorTargets);
        const auto u = test::random_vector(mesh->num_nodes(), -1, 1, 10 + order);
        const auto v = test::random_vector(mesh->num_nodes(), -1, 1, 20 + order);

        const SparseTensor3 mt = explicit_global_tensor(*mesh, TensorKind::mass, cubic_m(),
                                                        plan.target(Target::mass_tensor).rule, u);
        const CsrMatrix m2 = contract_mass_tensor(plan, cubic_m(), u, v, 0.0);
        CHECK(dense_rel_diff(contract(mt, v, 2), m2) <= 1e-12);
        CHECK(dense_rel_diff(contract(mt, v, 1), m2) <= 1e-12);
        CHECK(asymmetry(m2) <= 1e-13 * frobenius_norm(m2));

        const SparseTensor3 ct = explicit_global_tensor(*mesh, TensorKind::conductivity, smooth_c(),
                                                        plan.target(Target::conductivity_tensor).rule, u);
        const CsrMatrix c2 = contract_cond_tensor_mode2(plan, smooth_c(), u, 0.0);
        CHECK(dense_rel_diff(contract(ct, u, 2), c2) <= 1e-12);
        CHECK(dense_rel_diff(contract(ct, u, 1), c2) <= 1e-12);
        CHECK(asymmetry(c2) > 1e-6 * frobenius_norm(c2));
    }
}

TEST_CASE("mass tensor contracted with ones is the mass matrix of m'(u_h)") {
    const auto mesh = test::square(4, 2, 0.2);
    const AssemblyPlan tplan = build_plan(mesh, kTensorTargets);
    const auto& rule = tplan.target(Target::mass_tensor).rule;
    const AssemblyPlan mplan = build_plan(mesh, std::vector<Target>{Target::mass}, {{Target::mass, rule}});
    const auto u = test::random_vector(mesh->num_nodes(), -1, 1, 6);
    const std::vector<double> ones(mesh->num_nodes(), 1.0);
    const auto dm = CoefficientField::state([](double u) { return 0.3 + 0.4 * u; }, [](double) { return 0.4; });
    const CsrMatrix expected = assemble(mplan, Target::mass, dm, 0.0, u);
    CHECK(relative_frobenius_difference(contract_mass_tensor(tplan, cubic_m(), u, ones, 0.0), expected) <= 1e-12);

    const SparseTensor3 mt = explicit_global_tensor(*mesh, TensorKind::mass, cubic_m(), rule, u);
    CHECK(dense_rel_diff(contract(mt, ones, 2), expected) <= 1e-12);
}

TEST_CASE("zero derivatives and constant states give zero contractions") {
    const auto mesh = test::square(4, 2);
    const AssemblyPlan plan = build_plan(mesh, kTensorTargets);
    const auto u = test::random_vector(mesh->num_nodes(), -1, 1, 1);
    const std::vector<double> constant(mesh->num_nodes(), 3.25);
    CHECK(max_abs(contract_mass_tensor(plan, linear_state(0.0), u, u, 0.0)) == 0.0);
    CHECK(max_abs(contract_mass_tensor(plan, CoefficientField::constant(2.0), u, u, 0.0)) == 0.0);
    CHECK(max_abs(contract_cond_tensor_mode2(plan, linear_state(0.0), u, 0.0)) == 0.0);
    CHECK(max_abs(contract_cond_tensor_mode2(plan, smooth_c(), constant, 0.0)) <= 1e-13);
}

TEST_CASE("mass tensor contraction is linear in v") {
    const auto mesh = test::square(5, 1, 0.2);
    const AssemblyPlan plan = build_plan(mesh, kTensorTargets);
    const auto u = test::random_vector(mesh->num_nodes(), -1, 1, 1);
    const auto v1 = test::random_vector(mesh->num_nodes(), -1, 1, 2);
    const auto v2 = test::random_vector(mesh->num_nodes(), -1, 1, 3);
    const double alpha = -1.7;
    std::vector<double> comb(v1.size());
    for (std::size_t i = 0; i < comb.size(); ++i) comb[i] = v1[i] + alpha * v2[i];
    CsrMatrix lhs = contract_mass_tensor(plan, cubic_m(), u, comb, 0.0);
    CsrMatrix rhs = contract_mass_tensor(plan, cubic_m(), u, v1, 0.0);
    rhs.add_scaled(contract_mass_tensor(plan, cubic_m(), u, v2, 0.0), alpha);
    CHECK(relative_frobenius_difference(lhs, rhs) <= 1e-13);
}

TEST_CASE("explicit tensor bookkeeping") {
    const auto mesh = test::square(1);
    const auto u = std::vector<double>{0.1, 0.2, 0.3, 0.4};
    const SparseTensor3 t = explicit_global_tensor(*mesh, TensorKind::mass, cubic_m(), triangle_rule(3), u);
    CHECK(t.entries.size() <= 2 * 27);
    CHECK(t.entries.size() < 2 * 27);
    for (const auto& e : t.entries) {
        CHECK(t.at(e.j, e.i, e.k) == e.value);
        CHECK(t.at(e.k, e.j, e.i) == doctest::Approx(e.value).epsilon(1e-15));
        CHECK(t.at(e.i, e.k, e.j) == doctest::Approx(e.value).epsilon(1e-15));
    }
    CHECK_THROWS(explicit_global_tensor(*test::square(14), TensorKind::mass, cubic_m(), triangle_rule(3),
                                        std::vector<double>(225, 0.0)));
    CHECK_THROWS_AS(contract(t, std::vector<double>(3, 1.0), 2), DimensionError);
    CHECK_THROWS(contract(t, u, 4));
}
