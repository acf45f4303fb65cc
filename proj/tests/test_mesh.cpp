#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "helpers.hpp"
#include "vfem/error.hpp"
#include "vfem/mesh.hpp"

using namespace vfem;

namespace {

const char* kTwoTriangles = R"($MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
4
1 0 0 0
2 1 0 0
3 1 1 0
4 0 1 0
$EndNodes
$Elements
6
1 1 2 1 1 1 2
2 1 2 2 2 2 3
3 1 2 3 3 3 4
4 1 2 4 4 4 1
5 2 2 10 1 1 2 3
6 2 2 10 1 1 3 4
$EndElements
)";

std::string replace_elements(const std::string& elements) {
    std::string s = kTwoTriangles;
    const auto b = s.find("$Elements");
    return s.substr(0, b) + elements;
}

} // namespace

TEST_CASE("structured unit square counts") {
    const TriangleMesh m1 = generate_structured_unit_square(1);
    CHECK(m1.num_nodes() == 4);
    CHECK(m1.num_elements() == 2);
    CHECK(m1.boundary_edges().size() == 4);

    const TriangleMesh m2 = generate_structured_unit_square(2);
    CHECK(m2.num_nodes() == 9);
    CHECK(m2.num_elements() == 8);
    CHECK(m2.boundary_edges().size() == 8);

    for (int n : {1, 2, 3, 5, 8}) {
        const TriangleMesh m = generate_structured_unit_square(n);
        const GeometryBatch g = compute_geometry_batch(m);
        double area = 0.0;
        for (double b : g.det) area += b / 2.0;
        CHECK(area == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(mesh_area(m) == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(generate_structured_unit_square(0), MeshError);
}

TEST_CASE("structured square boundary tags are bottom, right, top, left") {
    const TriangleMesh m = generate_structured_unit_square(3);
    const auto xy = m.coords();
    std::map<int, int> count;
    for (const auto& e : m.boundary_edges()) {
        ++count[e.tag];
        const Point2 a = xy[e.nodes[0]], b = xy[e.nodes[1]];
        switch (e.tag) {
            case 1: CHECK((a.y == 0.0 && b.y == 0.0)); break;
            case 2: CHECK((a.x == 1.0 && b.x == 1.0)); break;
            case 3: CHECK((a.y == 1.0 && b.y == 1.0)); break;
            case 4: CHECK((a.x == 0.0 && b.x == 0.0)); break;
            default: FAIL("unexpected tag");
        }
    }
    CHECK(count == std::map<int, int>{{1, 3}, {2, 3}, {3, 3}, {4, 3}});
}

TEST_CASE("elements have positive signed area") {
    const TriangleMesh m = generate_structured_rectangle(3, 4, -1.0, 2.0, 0.5, 3.0);
    for (std::size_t e = 0; e < m.num_elements(); ++e) CHECK(m.signed_area(e) > 0.0);
}

TEST_CASE("clockwise input is reoriented") {
    const TriangleMesh m({{0, 0}, {1, 0}, {0, 1}}, {0, 2, 1}, 1, {});
    CHECK(m.signed_area(0) == doctest::Approx(0.5));
}

TEST_CASE("constructor rejects bad connectivity") {
    CHECK_THROWS_AS(TriangleMesh({{0, 0}, {1, 0}, {0, 1}}, {0, 1, 3}, 1, {}), MeshError);
    CHECK_THROWS_AS(TriangleMesh({{0, 0}, {1, 0}, {0, 1}, {1, 1}}, {0, 1, 2}, 1, {{{1, 3, -1}, 1}}), MeshError);
    CHECK_THROWS_AS(TriangleMesh({{0, 0}, {1, 0}, {0, 1}}, {0, 1}, 1, {}), MeshError);
}

TEST_CASE("promote_to_p2 on two triangles") {
    const TriangleMesh p1 = generate_structured_unit_square(1);
    const TriangleMesh p2 = promote_to_p2(p1);
    CHECK(p2.order() == 2);
    CHECK(p2.num_nodes() == 9);
    CHECK(p2.num_elements() == 2);

    // the diagonal midpoint is shared by both elements
    std::map<int, int> refs;
    for (std::size_t e = 0; e < 2; ++e)
        for (std::size_t k = 3; k < 6; ++k) ++refs[p2.element(e)[k]];
    int shared_nodes = 0;
    for (const auto& [node, n] : refs) shared_nodes += n == 2 ? 1 : 0;
    CHECK(shared_nodes == 1);
    CHECK(refs.size() == 5);

    // boundary edges carry their midside node
    const auto xy = p2.coords();
    for (const auto& be : p2.boundary_edges()) {
        const Point2 a = xy[be.nodes[0]], b = xy[be.nodes[1]], m = xy[be.nodes[2]];
        CHECK(m.x == doctest::Approx((a.x + b.x) / 2));
        CHECK(m.y == doctest::Approx((a.y + b.y) / 2));
    }
    CHECK_THROWS_AS(promote_to_p2(p2), MeshError);
}

TEST_CASE("P2 local ordering: node 3 on edge (1,2), 4 on (2,0), 5 on (0,1)") {
    const TriangleMesh p2 = promote_to_p2(generate_structured_unit_square(2));
    const auto xy = p2.coords();
    for (std::size_t e = 0; e < p2.num_elements(); ++e) {
        const auto n = p2.element(e);
        const int pairs[3][2] = {{1, 2}, {2, 0}, {0, 1}};
        for (int k = 0; k < 3; ++k) {
            const Point2 a = xy[n[pairs[k][0]]], b = xy[n[pairs[k][1]]], m = xy[n[3 + k]];
            CHECK(m.x == doctest::Approx((a.x + b.x) / 2));
            CHECK(m.y == doctest::Approx((a.y + b.y) / 2));
        }
    }
}

TEST_CASE("P2 DOF count on n_div = 8 is 289") {
    CHECK(promote_to_p2(generate_structured_unit_square(8)).num_nodes() == 289);
}

TEST_CASE("promotion then restriction to corners reproduces the P1 mesh") {
    const TriangleMesh p1 = jitter_interior_nodes(generate_structured_unit_square(4), 0.2, 3);
    const TriangleMesh p2 = promote_to_p2(p1);
    for (std::size_t i = 0; i < p1.num_nodes(); ++i) {
        CHECK(p2.coords()[i].x == p1.coords()[i].x);
        CHECK(p2.coords()[i].y == p1.coords()[i].y);
    }
    for (std::size_t e = 0; e < p1.num_elements(); ++e)
        for (std::size_t k = 0; k < 3; ++k) CHECK(p2.element(e)[k] == p1.element(e)[k]);
}

TEST_CASE("geometry batch on reference and scaled triangles") {
    const GeometryBatch g = compute_geometry_batch(test::reference_triangle());
    CHECK(g.det[0] == 1.0);
    CHECK(g.metric(0, 0) == 1.0);
    CHECK(g.metric(1, 0) == 0.0);
    CHECK(g.metric(2, 0) == 0.0);
    CHECK(g.metric(3, 0) == 1.0);

    const TriangleMesh big({{0, 0}, {2, 0}, {0, 2}}, {0, 1, 2}, 1, {});
    const GeometryBatch h = compute_geometry_batch(big);
    CHECK(h.det[0] == 4.0);
    CHECK(h.metric(0, 0) == doctest::Approx(0.25));
    CHECK(h.metric(1, 0) == doctest::Approx(0.0));
    CHECK(h.metric(2, 0) == doctest::Approx(0.0));
    CHECK(h.metric(3, 0) == doctest::Approx(0.25));
}

TEST_CASE("degenerate element is reported by index") {
    const TriangleMesh ok_then_flat({{0, 0}, {1, 0}, {0, 1}, {2, 0}}, {0, 1, 2, 0, 1, 3}, 1, {});
    try {
        compute_geometry_batch(ok_then_flat);
        FAIL("expected DegenerateElementError");
    } catch (const DegenerateElementError& e) {
        CHECK(e.element() == 1);
    }
}

TEST_CASE("geometry invariants on a jittered, sheared mesh") {
    const TriangleMesh m =
        affine_transform(jitter_interior_nodes(generate_structured_unit_square(6), 0.3, 11), 1.2, 0.4, -0.3, 0.9);
    const GeometryBatch g = compute_geometry_batch(m);
    for (std::size_t e = 0; e < m.num_elements(); ++e) {
        const double a11 = g.metric(0, e), a21 = g.metric(1, e), a12 = g.metric(2, e), a22 = g.metric(3, e);
        CHECK(a21 == doctest::Approx(a12));
        CHECK(a11 + a22 > 0.0);
        const double det = a11 * a22 - a12 * a21;
        CHECK(det > 0.0);
        CHECK(g.det[e] * std::sqrt(det) == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("uniform scaling by s scales b by s^2 and A by s^-2") {
    const TriangleMesh m = jitter_interior_nodes(generate_structured_unit_square(4), 0.2, 5);
    const double s = 3.7;
    const GeometryBatch g = compute_geometry_batch(m);
    const GeometryBatch h = compute_geometry_batch(affine_transform(m, s, 0, 0, s));
    for (std::size_t e = 0; e < m.num_elements(); ++e) {
        CHECK(h.det[e] == doctest::Approx(g.det[e] * s * s).epsilon(1e-12));
        for (std::size_t k = 0; k < 4; ++k)
            CHECK(h.metric(k, e) == doctest::Approx(g.metric(k, e) / (s * s)).epsilon(1e-12));
    }
}

TEST_CASE("jitter keeps boundary nodes and orientation") {
    const TriangleMesh m = generate_structured_unit_square(5);
    const TriangleMesh j = jitter_interior_nodes(m, 0.4, 99);
    std::set<int> boundary;
    for (const auto& be : m.boundary_edges()) boundary.insert({be.nodes[0], be.nodes[1]});
    bool moved = false;
    for (std::size_t i = 0; i < m.num_nodes(); ++i) {
        const bool same = m.coords()[i].x == j.coords()[i].x && m.coords()[i].y == j.coords()[i].y;
        if (boundary.contains(static_cast<int>(i))) CHECK(same);
        moved = moved || !same;
    }
    CHECK(moved);
    for (std::size_t e = 0; e < j.num_elements(); ++e) CHECK(j.signed_area(e) > 0.0);
}

TEST_CASE("gmsh: two triangles over the unit square") {
    const TriangleMesh m = parse_gmsh(kTwoTriangles);
    CHECK(m.num_nodes() == 4);
    CHECK(m.num_elements() == 2);
    CHECK(m.boundary_edges().size() == 4);
    std::set<int> tags;
    for (const auto& e : m.boundary_edges()) tags.insert(e.tag);
    CHECK(tags == std::set<int>{1, 2, 3, 4});
}

TEST_CASE("gmsh: fixture file on disk") {
    const TriangleMesh m = load_gmsh(std::filesystem::path(VFEM_TEST_FIXTURES) / "unit_square.msh");
    CHECK(m.num_elements() == 2);
    CHECK(mesh_area(m) == doctest::Approx(1.0));
}

TEST_CASE("gmsh: clockwise triangle comes back counterclockwise") {
    const TriangleMesh m = parse_gmsh(replace_elements("$Elements\n1\n1 2 2 10 1 1 4 3\n$EndElements\n"));
    CHECK(m.signed_area(0) > 0.0);
}

TEST_CASE("gmsh: rejections") {
    auto message = [](const std::string& text) {
        try {
            parse_gmsh(text);
        } catch (const MeshError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message(replace_elements("$Elements\n1\n1 3 2 10 1 1 2 3 4\n$EndElements\n")).find("type 3") !=
          std::string::npos);
    CHECK(message(replace_elements("$Elements\n1\n1 2 2 10 1 1 2 7\n$EndElements\n")).find("undefined node 7") !=
          std::string::npos);
    std::string binary = kTwoTriangles;
    binary.replace(binary.find("2.2 0 8"), 7, "2.2 1 8");
    CHECK(message(binary).find("binary") != std::string::npos);
    CHECK(message("$MeshFormat\n4.1 0 8\n$EndMeshFormat\n").find("version") != std::string::npos);
    CHECK_FALSE(message("").empty());
}

TEST_CASE("gmsh: point elements are skipped and elementary tag is the fallback") {
    const TriangleMesh m =
        parse_gmsh(replace_elements("$Elements\n3\n1 15 2 0 5 1\n2 1 2 0 7 1 2\n3 2 2 10 1 1 2 3\n$EndElements\n"));
    CHECK(m.num_elements() == 1);
    REQUIRE(m.boundary_edges().size() == 1);
    CHECK(m.boundary_edges()[0].tag == 7);
}

TEST_CASE("gmsh: save and load round trip, P1 and P2") {
    for (int order : {1, 2}) {
        TriangleMesh m = jitter_interior_nodes(generate_structured_unit_square(3), 0.2, 1);
        if (order == 2) m = promote_to_p2(m);
        const auto path = std::filesystem::temp_directory_path() / ("vfem_roundtrip_" + std::to_string(order) + ".msh");
        save_gmsh(m, path);
        const TriangleMesh back = load_gmsh(path);
        std::filesystem::remove(path);
        CHECK(back.order() == order);
        REQUIRE(back.num_nodes() == m.num_nodes());
        REQUIRE(back.num_elements() == m.num_elements());
        CHECK(back.boundary_edges().size() == m.boundary_edges().size());
        for (std::size_t i = 0; i < m.num_nodes(); ++i) {
            CHECK(back.coords()[i].x == m.coords()[i].x);
            CHECK(back.coords()[i].y == m.coords()[i].y);
        }
        for (std::size_t k = 0; k < m.tri_nodes().size(); ++k) CHECK(back.tri_nodes()[k] == m.tri_nodes()[k]);
    }
}

TEST_CASE("mesh ids are unique") {
    const TriangleMesh a = generate_structured_unit_square(1);
    const TriangleMesh b = generate_structured_unit_square(1);
    CHECK(a.id() != b.id());
}
