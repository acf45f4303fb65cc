#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vfem/assembly.hpp"

namespace vfem {

/// Batch of element 3-tensors; column e is vec(T_e) with (i, j, k) stored at
/// i + j n_p + k n_p^2 (mode 1 fastest).
struct ElementTensorBatch {
    std::size_t n_p = 0;
    DenseMatrix values;  ///< n_p^3 x n_e

    double operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t e) const {
        return values(i + n_p * (j + n_p * k), e);
    }
};

/// Global 3-tensor in coordinate form, duplicates summed, sorted by (k, j, i).
struct SparseTensor3 {
    struct Entry {
        std::int32_t i, j, k;
        double value;
    };
    std::size_t n = 0;
    std::vector<Entry> entries;

    double at(std::size_t i, std::size_t j, std::size_t k) const;
};

/// Phi (.) Phi (.) Phi, n_p^3 x n_q.
DenseMatrix build_Q_mass_tensor(const BasisTable& basis);

/// [phi_q kron J_q kron J_q]_q, n_p^3 x 4 n_q.
DenseMatrix build_Q_cond_tensor(const BasisTable& basis);

/// [phi_q kron J_q]_q, n_p^2 x 2 n_q; maps stacked A_e grad(u_h) to vec of
/// the mode-2 contracted element matrix.
DenseMatrix build_Q_cond_contraction(const BasisTable& basis);

/// V = Q Lambda' with Lambda' from m' (mass_tensor target).
ElementTensorBatch form_element_mass_tensor(const AssemblyPlan& plan, const DenseMatrix& lambda);

/// V = Q (Lambda' (.) W) with Lambda' from c' (conductivity_tensor target).
ElementTensorBatch form_element_cond_tensor(const AssemblyPlan& plan, const DenseMatrix& lambda);

/// M'(u) o_2 v: entries sum_j int m'(u_h) phi_i phi_j phi_k v_j, assembled as a
/// mass-type matrix with per-node weight m'(u_h) v_h. Never forms the tensor.
CsrMatrix contract_mass_tensor(const AssemblyPlan& plan, const CoefficientField& coeff,
                               std::span<const double> u, std::span<const double> v, double t);

/// C'(u) o_2 u: entries int c'(u_h) (grad phi_i . grad u_h) phi_k. Nonsymmetric.
CsrMatrix contract_cond_tensor_mode2(const AssemblyPlan& plan, const CoefficientField& coeff,
                                     std::span<const double> u, double t);

enum class TensorKind { mass, conductivity };

/// Scatters the element tensors of the whole mesh into a SparseTensor3.
/// Oracle scale only: throws when the mesh has more than 200 nodes.
SparseTensor3 explicit_global_tensor(const TriangleMesh& mesh, TensorKind kind,
                                     const CoefficientField& coeff, const QuadratureRule& rule,
                                     std::span<const double> u, double t = 0.0);

/// Mode-m contraction (m in 1..3) of a global tensor with v, as a dense matrix
/// indexed by the two remaining modes in order.
DenseMatrix contract(const SparseTensor3& tensor, std::span<const double> v, int mode);

} // namespace vfem
