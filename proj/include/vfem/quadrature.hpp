#pragma once

#include <vector>

#include "vfem/dense.hpp"
#include "vfem/mesh.hpp"

namespace vfem {

enum class RefElement { triangle, edge };

/// Quadrature on the unit triangle {x, y >= 0, x + y <= 1} (weights sum to 1/2)
/// or on the unit interval [0, 1] (weights sum to 1).
struct QuadratureRule {
    RefElement element = RefElement::triangle;
    std::vector<double> weights;
    std::vector<Point2> nodes;  ///< y unused on the interval
    int exact_degree = 0;

    std::size_t size() const noexcept { return weights.size(); }
};

/// Smallest symmetric rule from {1, 3, 6, 12 points} exact to min_degree (<= 6).
QuadratureRule triangle_rule(int min_degree);

/// Gauss-Legendre on [0,1] with the fewest points such that 2n-1 >= min_degree.
QuadratureRule interval_rule(int min_degree);

/// Lagrange basis values and reference gradients at the nodes of a rule.
struct BasisTable {
    int order = 1;
    RefElement element = RefElement::triangle;
    DenseMatrix phi;                ///< n_p x n_q, column q = basis at node q
    std::vector<DenseMatrix> jac;   ///< n_q matrices of shape n_p x d

    std::size_t num_basis() const noexcept { return phi.rows(); }
    std::size_t num_points() const noexcept { return phi.cols(); }
    std::size_t dim() const noexcept { return element == RefElement::triangle ? 2 : 1; }
};

BasisTable basis_table(int order, const QuadratureRule& rule);

/// Basis functions at one reference point; out must hold n_p values.
void eval_basis(int order, RefElement element, Point2 ref, std::span<double> out);

/// Reference gradients at one point as an n_p x d matrix.
DenseMatrix eval_basis_gradients(int order, RefElement element, Point2 ref);

/// Reference node coordinates in local ordering.
std::vector<Point2> reference_nodes(int order, RefElement element);

enum class IntegrandKind { mass_matrix, conductivity_matrix, mass_tensor, conductivity_tensor, load_vector };

/// Polynomial degree of the integrand for constant coefficients on affine elements.
int default_rule_degree(IntegrandKind kind, int order);

} // namespace vfem
