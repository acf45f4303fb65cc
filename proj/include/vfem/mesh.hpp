#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "vfem/dense.hpp"

namespace vfem {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// A boundary edge: 2 nodes (P1) or end, end, midside (P2), plus its tag.
struct BoundaryEdge {
    std::array<int, 3> nodes{-1, -1, -1};
    int tag = 0;
};

/// Triangular mesh with P1 or P2 node layout.
///
/// Local P2 ordering: corners 0, 1, 2 (counterclockwise), then node 3 at the
/// midpoint of edge (1,2), node 4 at the midpoint of edge (2,0) and node 5 at
/// the midpoint of edge (0,1), i.e. each midside node sits opposite the
/// corner with the same index minus three. The reference basis uses the same
/// ordering.
///
/// Construction validates connectivity, reorients clockwise elements and
/// checks that each boundary edge belongs to exactly one triangle. The mesh is
/// immutable afterwards; id() identifies it for plans built from it.
class TriangleMesh {
public:
    TriangleMesh(std::vector<Point2> coords, std::vector<int> tri_nodes, int order,
                 std::vector<BoundaryEdge> boundary_edges);

    int order() const noexcept { return order_; }
    int nodes_per_element() const noexcept { return order_ == 1 ? 3 : 6; }
    int nodes_per_edge() const noexcept { return order_ + 1; }
    std::size_t num_nodes() const noexcept { return coords_.size(); }
    std::size_t num_elements() const noexcept { return tri_nodes_.size() / nodes_per_element(); }

    std::span<const Point2> coords() const noexcept { return coords_; }
    std::span<const int> tri_nodes() const noexcept { return tri_nodes_; }
    std::span<const int> element(std::size_t e) const {
        const auto np = static_cast<std::size_t>(nodes_per_element());
        return {tri_nodes_.data() + e * np, np};
    }
    std::span<const BoundaryEdge> boundary_edges() const noexcept { return edges_; }

    double signed_area(std::size_t e) const;
    std::uint64_t id() const noexcept { return id_; }

private:
    std::vector<Point2> coords_;
    std::vector<int> tri_nodes_;
    std::vector<BoundaryEdge> edges_;
    int order_;
    std::uint64_t id_;
};

/// Reads Gmsh MSH 2.2 ASCII. Accepts 3-node triangles (type 2) and 2-node
/// lines (type 1), or 6-node triangles (type 9) and 3-node lines (type 8).
/// Point elements (type 15) are skipped. Boundary tags come from the physical
/// tag, or the elementary tag when no physical tag is set.
TriangleMesh load_gmsh(const std::filesystem::path& path);
TriangleMesh parse_gmsh(std::string_view text);

/// Writes the mesh as Gmsh MSH 2.2 ASCII (physical = elementary = tag).
void save_gmsh(const TriangleMesh& mesh, const std::filesystem::path& path);

/// (n_div+1)^2 nodes on [0,1]^2, each cell split along its SW-NE diagonal.
/// Boundary tags: 1 bottom, 2 right, 3 top, 4 left.
TriangleMesh generate_structured_unit_square(int n_div);

/// Same layout on [x0,x1] x [y0,y1] with nx by ny cells.
TriangleMesh generate_structured_rectangle(int nx, int ny, double x0, double y0, double x1,
                                           double y1);

/// Adds one midside node per unique edge. Corner nodes keep their indices.
TriangleMesh promote_to_p2(const TriangleMesh& mesh);

/// Moves every interior node by a random offset of at most `amplitude` times
/// the local minimum edge length, keeping element orientation. P1 only.
TriangleMesh jitter_interior_nodes(const TriangleMesh& mesh, double amplitude,
                                   std::uint64_t seed);

/// Applies x -> (a*x + b*y + tx, c*x + d*y + ty) to every node. det must be nonzero.
TriangleMesh affine_transform(const TriangleMesh& mesh, double a, double b, double c,
                              double d, double tx = 0.0, double ty = 0.0);

/// Per-element affine geometry: b_e = |det B_e| and column e of W equal to
/// vec(A_e) with A_e = (B_e^T B_e)^{-1}, stored (A11, A21, A12, A22).
struct GeometryBatch {
    std::vector<double> det;             ///< b, length n_e
    DenseMatrix metric;                  ///< W, 4 x n_e
    std::vector<std::array<Point2, 3>> corners;   ///< corner triple per element
    std::vector<std::array<double, 4>> jacobian;  ///< B_e = [c1-c0, c2-c0], column-major
};

GeometryBatch compute_geometry_batch(const TriangleMesh& mesh);

double mesh_area(const TriangleMesh& mesh);

} // namespace vfem
