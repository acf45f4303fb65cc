#include "vfem/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "vfem/error.hpp"

namespace vfem {

namespace {

// Symmetric rules on the unit triangle. Weights below are normalized to sum
// to 1 and halved when the rule is built.
struct Orbit3 {
    double a;  // point (a, a, 1-2a) in barycentric coordinates
    double w;
};
struct Orbit6 {
    double a, b;  // point (a, b, 1-a-b) and its 6 permutations
    double w;
};

void push_orbit3(QuadratureRule& r, Orbit3 o) {
    const double c = 1.0 - 2.0 * o.a;
    for (Point2 p : {Point2{o.a, o.a}, Point2{c, o.a}, Point2{o.a, c}}) {
        r.nodes.push_back(p);
        r.weights.push_back(0.5 * o.w);
    }
}

void push_orbit6(QuadratureRule& r, Orbit6 o) {
    const double c = 1.0 - o.a - o.b;
    for (Point2 p : {Point2{o.a, o.b}, Point2{o.b, o.a}, Point2{o.b, c}, Point2{c, o.b}, Point2{c, o.a},
                     Point2{o.a, c}}) {
        r.nodes.push_back(p);
        r.weights.push_back(0.5 * o.w);
    }
}

} // namespace

QuadratureRule triangle_rule(int min_degree) {
    if (min_degree > 6) throw Error("no triangle rule of degree " + std::to_string(min_degree) + " (max 6)");
    QuadratureRule r;
    r.element = RefElement::triangle;
    if (min_degree <= 1) {
        r.exact_degree = 1;
        r.nodes = {{1.0 / 3.0, 1.0 / 3.0}};
        r.weights = {0.5};
    } else if (min_degree == 2) {
        r.exact_degree = 2;
        push_orbit3(r, {1.0 / 6.0, 1.0 / 3.0});
    } else if (min_degree <= 4) {
        r.exact_degree = 4;
        push_orbit3(r, {0.44594849091596488631832925388305, 0.22338158967801146569500700843312});
        push_orbit3(r, {0.091576213509770743459571463402202, 0.10995174365532186763832632490021});
    } else {
        r.exact_degree = 6;
        push_orbit3(r, {0.24928674517091042129163855310702, 0.11678627572637936602528961138558});
        push_orbit3(r, {0.063089014491502228340331602870819, 0.050844906370206816920936809106869});
        push_orbit6(r, {0.053145049844816947353249671631398, 0.31035245103378440541660773395655,
                        0.082851075618373575193553456420442});
    }
    return r;
}

QuadratureRule interval_rule(int min_degree) {
    if (min_degree > 13) throw Error("no interval rule of degree " + std::to_string(min_degree) + " (max 13)");
    const int n = std::max(1, (min_degree + 2) / 2);
    QuadratureRule r;
    r.element = RefElement::edge;
    r.exact_degree = 2 * n - 1;
    // Newton on P_n from the Chebyshev-like initial guess; nodes mapped to [0,1].
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 1.0, p0 = 1.0, p1 = x;
        for (int it = 0; it < 100; ++it) {
            p0 = 1.0;
            p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_n(x), p0 = P_{n-1}(x)
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        r.nodes.push_back({0.5 * (1.0 - x), 0.0});
        r.weights.push_back(1.0 / ((1.0 - x * x) * dp * dp));
    }
    return r;
}

// ---------------------------------------------------------------------------

void eval_basis(int order, RefElement element, Point2 p, std::span<double> out) {
    if (element == RefElement::edge) {
        const double s = p.x;
        if (order == 1) {
            out[0] = 1.0 - s;
            out[1] = s;
        } else {
            out[0] = (1.0 - s) * (1.0 - 2.0 * s);
            out[1] = s * (2.0 * s - 1.0);
            out[2] = 4.0 * s * (1.0 - s);
        }
        return;
    }
    const double l0 = 1.0 - p.x - p.y, l1 = p.x, l2 = p.y;
    if (order == 1) {
        out[0] = l0;
        out[1] = l1;
        out[2] = l2;
    } else {
        out[0] = l0 * (2.0 * l0 - 1.0);
        out[1] = l1 * (2.0 * l1 - 1.0);
        out[2] = l2 * (2.0 * l2 - 1.0);
        out[3] = 4.0 * l1 * l2;
        out[4] = 4.0 * l2 * l0;
        out[5] = 4.0 * l0 * l1;
    }
}

DenseMatrix eval_basis_gradients(int order, RefElement element, Point2 p) {
    if (element == RefElement::edge) {
        const double s = p.x;
        DenseMatrix g(static_cast<std::size_t>(order + 1), 1);
        if (order == 1) {
            g(0, 0) = -1.0;
            g(1, 0) = 1.0;
        } else {
            g(0, 0) = 4.0 * s - 3.0;
            g(1, 0) = 4.0 * s - 1.0;
            g(2, 0) = 4.0 - 8.0 * s;
        }
        return g;
    }
    static constexpr double grad_l[3][2] = {{-1.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}};
    if (order == 1) {
        DenseMatrix g(3, 2);
        for (int i = 0; i < 3; ++i)
            for (int d = 0; d < 2; ++d) g(i, d) = grad_l[i][d];
        return g;
    }
    const double l[3] = {1.0 - p.x - p.y, p.x, p.y};
    DenseMatrix g(6, 2);
    for (int i = 0; i < 3; ++i)
        for (int d = 0; d < 2; ++d) g(i, d) = (4.0 * l[i] - 1.0) * grad_l[i][d];
    // midside node 3 + i couples the two corners other than i
    for (int i = 0; i < 3; ++i) {
        const int a = (i + 1) % 3, b = (i + 2) % 3;
        for (int d = 0; d < 2; ++d) g(3 + i, d) = 4.0 * (l[a] * grad_l[b][d] + l[b] * grad_l[a][d]);
    }
    return g;
}

std::vector<Point2> reference_nodes(int order, RefElement element) {
    if (element == RefElement::edge) {
        if (order == 1) return {{0.0, 0.0}, {1.0, 0.0}};
        return {{0.0, 0.0}, {1.0, 0.0}, {0.5, 0.0}};
    }
    if (order == 1) return {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    return {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {0.5, 0.5}, {0.0, 0.5}, {0.5, 0.0}};
}

BasisTable basis_table(int order, const QuadratureRule& rule) {
    if (order != 1 && order != 2) throw Error("basis order must be 1 or 2");
    BasisTable t;
    t.order = order;
    t.element = rule.element;
    const std::size_t np = rule.element == RefElement::edge ? order + 1 : (order == 1 ? 3 : 6);
    t.phi.resize(np, rule.size());
    t.jac.reserve(rule.size());
    for (std::size_t q = 0; q < rule.size(); ++q) {
        eval_basis(order, rule.element, rule.nodes[q], t.phi.col(q));
        t.jac.push_back(eval_basis_gradients(order, rule.element, rule.nodes[q]));
    }
    return t;
}

int default_rule_degree(IntegrandKind kind, int order) {
    switch (kind) {
        case IntegrandKind::mass_matrix: return 2 * order;
        case IntegrandKind::conductivity_matrix: return 2 * (order - 1);
        case IntegrandKind::mass_tensor: return 3 * order;
        case IntegrandKind::conductivity_tensor: return 2 * (order - 1) + order;
        case IntegrandKind::load_vector: return order + 2;
    }
    return 0;
}

} // namespace vfem
