#include <doctest.h>

#include <cmath>

#include "vfem/error.hpp"
#include "vfem/quadrature.hpp"

using namespace vfem;

namespace {

// int over the unit triangle of x^a y^b = a! b! / (a + b + 2)!
double triangle_monomial(int a, int b) {
    return std::tgamma(a + 1) * std::tgamma(b + 1) / std::tgamma(a + b + 3);
}

} // namespace

TEST_CASE("triangle rules pick the smallest symmetric rule") {
    CHECK(triangle_rule(0).size() == 1);
    CHECK(triangle_rule(1).size() == 1);
    CHECK(triangle_rule(2).size() == 3);
    CHECK(triangle_rule(3).size() == 6);
    CHECK(triangle_rule(4).size() == 6);
    CHECK(triangle_rule(5).size() == 12);
    CHECK(triangle_rule(6).size() == 12);
    CHECK_THROWS(triangle_rule(7));
}

TEST_CASE("triangle rules integrate monomials up to their degree") {
    for (int deg = 0; deg <= 6; ++deg) {
        const QuadratureRule r = triangle_rule(deg);
        CHECK(r.exact_degree >= deg);
        double wsum = 0.0;
        for (double w : r.weights) wsum += w;
        CHECK(wsum == doctest::Approx(0.5).epsilon(1e-15));
        for (int a = 0; a <= r.exact_degree; ++a)
            for (int b = 0; a + b <= r.exact_degree; ++b) {
                double s = 0.0;
                for (std::size_t q = 0; q < r.size(); ++q)
                    s += r.weights[q] * std::pow(r.nodes[q].x, a) * std::pow(r.nodes[q].y, b);
                CHECK(std::abs(s - triangle_monomial(a, b)) <= 1e-13);
            }
    }
}

TEST_CASE("interval rules are Gauss-Legendre on [0, 1]") {
    CHECK(interval_rule(1).size() == 1);
    CHECK(interval_rule(3).size() == 2);
    CHECK(interval_rule(4).size() == 3);
    for (int deg = 0; deg <= 9; ++deg) {
        const QuadratureRule r = interval_rule(deg);
        CHECK(r.element == RefElement::edge);
        for (int a = 0; a <= deg; ++a) {
            double s = 0.0;
            for (std::size_t q = 0; q < r.size(); ++q) s += r.weights[q] * std::pow(r.nodes[q].x, a);
            CHECK(std::abs(s - 1.0 / (a + 1)) <= 1e-13);
        }
    }
}

TEST_CASE("Lagrange basis is nodal and sums to one") {
    for (RefElement el : {RefElement::triangle, RefElement::edge})
        for (int order : {1, 2}) {
            const auto nodes = reference_nodes(order, el);
            std::vector<double> phi(nodes.size());
            for (std::size_t j = 0; j < nodes.size(); ++j) {
                eval_basis(order, el, nodes[j], phi);
                for (std::size_t i = 0; i < nodes.size(); ++i)
                    CHECK(phi[i] == doctest::Approx(i == j ? 1.0 : 0.0));
            }
            eval_basis(order, el, {0.21, 0.33}, phi);
            double s = 0.0;
            for (double p : phi) s += p;
            CHECK(s == doctest::Approx(1.0).epsilon(1e-15));
        }
}

TEST_CASE("reference P2 nodes follow the edge-opposite ordering") {
    const auto n = reference_nodes(2, RefElement::triangle);
    REQUIRE(n.size() == 6);
    CHECK((n[3].x == 0.5 && n[3].y == 0.5));
    CHECK((n[4].x == 0.0 && n[4].y == 0.5));
    CHECK((n[5].x == 0.5 && n[5].y == 0.0));
}

TEST_CASE("basis gradients match central differences and sum to zero") {
    const double h = 1e-6;
    for (int order : {1, 2}) {
        const Point2 p{0.27, 0.41};
        const DenseMatrix g = eval_basis_gradients(order, RefElement::triangle, p);
        const std::size_t np = g.rows();
        std::vector<double> a(np), b(np);
        for (int d = 0; d < 2; ++d) {
            const Point2 pp = d == 0 ? Point2{p.x + h, p.y} : Point2{p.x, p.y + h};
            const Point2 pm = d == 0 ? Point2{p.x - h, p.y} : Point2{p.x, p.y - h};
            eval_basis(order, RefElement::triangle, pp, a);
            eval_basis(order, RefElement::triangle, pm, b);
            double s = 0.0;
            for (std::size_t i = 0; i < np; ++i) {
                CHECK(g(i, d) == doctest::Approx((a[i] - b[i]) / (2 * h)).epsilon(1e-7));
                s += g(i, d);
            }
            CHECK(std::abs(s) <= 1e-13);
        }
    }
}

TEST_CASE("basis table shapes") {
    const QuadratureRule r = triangle_rule(4);
    const BasisTable t = basis_table(2, r);
    CHECK(t.num_basis() == 6);
    CHECK(t.num_points() == r.size());
    CHECK(t.jac.size() == r.size());
    CHECK(t.jac[0].rows() == 6);
    CHECK(t.jac[0].cols() == 2);
    const BasisTable e = basis_table(2, interval_rule(4));
    CHECK(e.num_basis() == 3);
    CHECK(e.dim() == 1);
}

TEST_CASE("default rule degrees") {
    CHECK(default_rule_degree(IntegrandKind::mass_matrix, 1) == 2);
    CHECK(default_rule_degree(IntegrandKind::mass_matrix, 2) == 4);
    CHECK(default_rule_degree(IntegrandKind::conductivity_matrix, 1) == 0);
    CHECK(default_rule_degree(IntegrandKind::conductivity_matrix, 2) == 2);
    CHECK(default_rule_degree(IntegrandKind::mass_tensor, 2) == 6);
    CHECK(default_rule_degree(IntegrandKind::conductivity_tensor, 2) == 4);
}
