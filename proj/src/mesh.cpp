#include "vfem/mesh.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>

#include "vfem/error.hpp"

namespace vfem {

namespace {

std::atomic<std::uint64_t> g_next_mesh_id{1};

std::uint64_t edge_key(int a, int b) {
    const auto lo = static_cast<std::uint64_t>(std::min(a, b));
    const auto hi = static_cast<std::uint64_t>(std::max(a, b));
    return (lo << 32) | hi;
}

double signed_area_of(Point2 a, Point2 b, Point2 c) {
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

double dist(Point2 a, Point2 b) { return std::hypot(b.x - a.x, b.y - a.y); }

// Local midside slot for the edge between local corners a and b.
int midside_slot(int a, int b) {
    // node 3 is opposite corner 0, i.e. on edge (1,2); 4 on (2,0); 5 on (0,1)
    return 3 + (3 - a - b);
}

} // namespace

TriangleMesh::TriangleMesh(std::vector<Point2> coords, std::vector<int> tri_nodes, int order,
                           std::vector<BoundaryEdge> boundary_edges)
    : coords_(std::move(coords)),
      tri_nodes_(std::move(tri_nodes)),
      edges_(std::move(boundary_edges)),
      order_(order),
      id_(g_next_mesh_id++) {
    if (order_ != 1 && order_ != 2) throw MeshError("mesh order must be 1 or 2, got " + std::to_string(order_));
    const int np = nodes_per_element();
    if (tri_nodes_.size() % static_cast<std::size_t>(np) != 0)
        throw MeshError("element connectivity length is not a multiple of " + std::to_string(np));
    const auto n = static_cast<int>(coords_.size());
    for (int idx : tri_nodes_)
        if (idx < 0 || idx >= n) throw MeshError("element references node " + std::to_string(idx) + " of " + std::to_string(n));

    const std::size_t ne = num_elements();
    std::unordered_map<std::uint64_t, std::pair<int, std::size_t>> edge_use;  // count, element
    edge_use.reserve(ne * 2);
    for (std::size_t e = 0; e < ne; ++e) {
        int* t = tri_nodes_.data() + e * np;
        if (signed_area_of(coords_[t[0]], coords_[t[1]], coords_[t[2]]) < 0.0) {
            std::swap(t[1], t[2]);
            if (order_ == 2) std::swap(t[4], t[5]);
        }
        if (order_ == 2) {
            const double h = std::max({dist(coords_[t[0]], coords_[t[1]]), dist(coords_[t[1]], coords_[t[2]]),
                                       dist(coords_[t[2]], coords_[t[0]])});
            for (int a = 0; a < 3; ++a) {
                const int b = (a + 1) % 3;
                const Point2 m = coords_[t[midside_slot(a, b)]];
                const Point2 pa = coords_[t[a]], pb = coords_[t[b]];
                const double off = std::hypot(m.x - 0.5 * (pa.x + pb.x), m.y - 0.5 * (pa.y + pb.y));
                if (off > 1e-12 * std::max(h, 1e-300))
                    throw MeshError("element " + std::to_string(e) + ": midside node is not at the edge midpoint");
            }
        }
        for (int a = 0; a < 3; ++a) {
            auto& slot = edge_use[edge_key(t[a], t[(a + 1) % 3])];
            ++slot.first;
            slot.second = e;
        }
    }

    const int ne_nodes = nodes_per_edge();
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        const auto& be = edges_[i];
        for (int k = 0; k < ne_nodes; ++k)
            if (be.nodes[k] < 0 || be.nodes[k] >= n)
                throw MeshError("boundary edge " + std::to_string(i) + " references node " + std::to_string(be.nodes[k]));
        const auto it = edge_use.find(edge_key(be.nodes[0], be.nodes[1]));
        if (it == edge_use.end() || it->second.first != 1)
            throw MeshError("boundary edge " + std::to_string(i) + " is not the edge of exactly one triangle");
        if (order_ == 2) {
            const int* t = tri_nodes_.data() + it->second.second * np;
            int la = -1, lb = -1;
            for (int a = 0; a < 3; ++a) {
                if (t[a] == be.nodes[0]) la = a;
                if (t[a] == be.nodes[1]) lb = a;
            }
            if (t[midside_slot(la, lb)] != be.nodes[2])
                throw MeshError("boundary edge " + std::to_string(i) + " midside node does not match its triangle");
        }
    }
}

double TriangleMesh::signed_area(std::size_t e) const {
    const auto t = element(e);
    return signed_area_of(coords_[t[0]], coords_[t[1]], coords_[t[2]]);
}

// ---------------------------------------------------------------------------
// Gmsh MSH 2.2 ASCII

TriangleMesh parse_gmsh(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    bool have_format = false;
    std::vector<Point2> coords;
    std::unordered_map<long, int> node_index;
    struct RawElement {
        int type;
        int tag;
        std::vector<long> nodes;
    };
    std::vector<RawElement> elements;

    auto expect_end = [&](const std::string& name) {
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line == "$End" + name) return;
        }
        throw MeshError("missing $End" + name);
    };

    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line == "$MeshFormat") {
            if (!std::getline(in, line)) throw MeshError("truncated $MeshFormat");
            std::istringstream f(line);
            std::string version;
            int file_type = -1, data_size = 0;
            f >> version >> file_type >> data_size;
            if (!f) throw MeshError("malformed $MeshFormat line: " + line);
            if (file_type != 0) throw MeshError("binary MSH files are not supported");
            if (version.empty() || version[0] != '2') throw MeshError("unsupported MSH version " + version + " (need 2.2 ASCII)");
            have_format = true;
            expect_end("MeshFormat");
        } else if (line == "$Nodes") {
            if (!have_format) throw MeshError("$Nodes before $MeshFormat");
            std::size_t count = 0;
            if (!(in >> count)) throw MeshError("malformed node count");
            coords.reserve(count);
            for (std::size_t i = 0; i < count; ++i) {
                long id;
                double x, y, z;
                if (!(in >> id >> x >> y >> z)) throw MeshError("truncated $Nodes section");
                if (!node_index.emplace(id, static_cast<int>(coords.size())).second)
                    throw MeshError("duplicate node id " + std::to_string(id));
                coords.push_back({x, y});
            }
            expect_end("Nodes");
        } else if (line == "$Elements") {
            std::size_t count = 0;
            if (!(in >> count)) throw MeshError("malformed element count");
            for (std::size_t i = 0; i < count; ++i) {
                long id;
                int type, ntags;
                if (!(in >> id >> type >> ntags)) throw MeshError("truncated $Elements section");
                std::vector<int> tags(static_cast<std::size_t>(std::max(ntags, 0)));
                for (auto& t : tags) in >> t;
                int nn = 0;
                switch (type) {
                    case 1: nn = 2; break;
                    case 2: nn = 3; break;
                    case 8: nn = 3; break;
                    case 9: nn = 6; break;
                    case 15: nn = 1; break;
                    default: throw MeshError("unsupported element type " + std::to_string(type));
                }
                RawElement el{type, 0, std::vector<long>(static_cast<std::size_t>(nn))};
                for (auto& v : el.nodes) in >> v;
                if (!in) throw MeshError("truncated element " + std::to_string(id));
                if (!tags.empty()) el.tag = tags[0] != 0 ? tags[0] : (tags.size() > 1 ? tags[1] : 0);
                if (type != 15) elements.push_back(std::move(el));
            }
            expect_end("Elements");
        } else if (line.front() == '$') {
            expect_end(line.substr(1));
        }
    }
    if (!have_format) throw MeshError("missing $MeshFormat section");

    bool p1 = false, p2 = false;
    for (const auto& el : elements) {
        if (el.type == 1 || el.type == 2) p1 = true;
        if (el.type == 8 || el.type == 9) p2 = true;
    }
    if (p1 && p2) throw MeshError("mixed first- and second-order elements");
    const int order = p2 ? 2 : 1;

    auto resolve = [&](long gid) {
        const auto it = node_index.find(gid);
        if (it == node_index.end()) throw MeshError("element references undefined node " + std::to_string(gid));
        return it->second;
    };

    std::vector<int> tri;
    std::vector<BoundaryEdge> edges;
    for (const auto& el : elements) {
        if (el.type == 2) {
            for (long v : el.nodes) tri.push_back(resolve(v));
        } else if (el.type == 9) {
            static constexpr int from_gmsh[6] = {0, 1, 2, 4, 5, 3};
            for (int k : from_gmsh) tri.push_back(resolve(el.nodes[k]));
        } else {
            BoundaryEdge be;
            for (std::size_t k = 0; k < el.nodes.size(); ++k) be.nodes[k] = resolve(el.nodes[k]);
            be.tag = el.tag;
            edges.push_back(be);
        }
    }
    if (tri.empty()) throw MeshError("mesh has no triangles");
    return TriangleMesh(std::move(coords), std::move(tri), order, std::move(edges));
}

TriangleMesh load_gmsh(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw MeshError("cannot open " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_gmsh(ss.str());
}

void save_gmsh(const TriangleMesh& mesh, const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) throw MeshError("cannot write " + path.string());
    f.precision(17);
    f << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n" << mesh.num_nodes() << "\n";
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i)
        f << i + 1 << ' ' << mesh.coords()[i].x << ' ' << mesh.coords()[i].y << " 0\n";
    f << "$EndNodes\n$Elements\n" << mesh.boundary_edges().size() + mesh.num_elements() << "\n";
    std::size_t id = 1;
    const int edge_type = mesh.order() == 1 ? 1 : 8;
    for (const auto& be : mesh.boundary_edges()) {
        f << id++ << ' ' << edge_type << " 2 " << be.tag << ' ' << be.tag;
        for (int k = 0; k < mesh.nodes_per_edge(); ++k) f << ' ' << be.nodes[k] + 1;
        f << '\n';
    }
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto t = mesh.element(e);
        f << id++ << ' ' << (mesh.order() == 1 ? 2 : 9) << " 2 0 0";
        if (mesh.order() == 1) {
            for (int v : t) f << ' ' << v + 1;
        } else {
            static constexpr int to_gmsh[6] = {0, 1, 2, 5, 3, 4};
            for (int k : to_gmsh) f << ' ' << t[k] + 1;
        }
        f << '\n';
    }
    f << "$EndElements\n";
}

// ---------------------------------------------------------------------------
// Generators and transformations

TriangleMesh generate_structured_rectangle(int nx, int ny, double x0, double y0, double x1, double y1) {
    if (nx < 1 || ny < 1) throw MeshError("structured mesh needs at least one cell per direction");
    std::vector<Point2> coords;
    coords.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            coords.push_back({x0 + (x1 - x0) * i / nx, y0 + (y1 - y0) * j / ny});
    auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
    std::vector<int> tri;
    tri.reserve(static_cast<std::size_t>(6 * nx * ny));
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int sw = id(i, j), se = id(i + 1, j), ne = id(i + 1, j + 1), nw = id(i, j + 1);
            tri.insert(tri.end(), {sw, se, ne, sw, ne, nw});
        }
    std::vector<BoundaryEdge> edges;
    for (int i = 0; i < nx; ++i) edges.push_back({{id(i, 0), id(i + 1, 0), -1}, 1});
    for (int j = 0; j < ny; ++j) edges.push_back({{id(nx, j), id(nx, j + 1), -1}, 2});
    for (int i = nx; i > 0; --i) edges.push_back({{id(i, ny), id(i - 1, ny), -1}, 3});
    for (int j = ny; j > 0; --j) edges.push_back({{id(0, j), id(0, j - 1), -1}, 4});
    return TriangleMesh(std::move(coords), std::move(tri), 1, std::move(edges));
}

TriangleMesh generate_structured_unit_square(int n_div) {
    if (n_div < 1) throw MeshError("n_div must be positive");
    return generate_structured_rectangle(n_div, n_div, 0.0, 0.0, 1.0, 1.0);
}

TriangleMesh promote_to_p2(const TriangleMesh& mesh) {
    if (mesh.order() != 1) throw MeshError("promote_to_p2 expects a first-order mesh");
    std::vector<Point2> coords(mesh.coords().begin(), mesh.coords().end());
    std::unordered_map<std::uint64_t, int> mid;
    mid.reserve(mesh.num_elements() * 2);
    auto midpoint = [&](int a, int b) {
        const auto [it, inserted] = mid.emplace(edge_key(a, b), static_cast<int>(coords.size()));
        if (inserted) {
            const Point2 pa = coords[a], pb = coords[b];
            coords.push_back({0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y)});
        }
        return it->second;
    };
    std::vector<int> tri;
    tri.reserve(mesh.num_elements() * 6);
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto t = mesh.element(e);
        const int m3 = midpoint(t[1], t[2]);
        const int m4 = midpoint(t[2], t[0]);
        const int m5 = midpoint(t[0], t[1]);
        tri.insert(tri.end(), {t[0], t[1], t[2], m3, m4, m5});
    }
    std::vector<BoundaryEdge> edges;
    edges.reserve(mesh.boundary_edges().size());
    for (const auto& be : mesh.boundary_edges())
        edges.push_back({{be.nodes[0], be.nodes[1], mid.at(edge_key(be.nodes[0], be.nodes[1]))}, be.tag});
    return TriangleMesh(std::move(coords), std::move(tri), 2, std::move(edges));
}

TriangleMesh jitter_interior_nodes(const TriangleMesh& mesh, double amplitude, std::uint64_t seed) {
    if (mesh.order() != 1) throw MeshError("jitter_interior_nodes expects a first-order mesh");
    const std::size_t n = mesh.num_nodes();
    std::vector<char> on_boundary(n, 0);
    for (const auto& be : mesh.boundary_edges()) on_boundary[be.nodes[0]] = on_boundary[be.nodes[1]] = 1;
    std::vector<double> hmin(n, std::numeric_limits<double>::infinity());
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto t = mesh.element(e);
        for (int a = 0; a < 3; ++a) {
            const int i = t[a], j = t[(a + 1) % 3];
            const double h = dist(mesh.coords()[i], mesh.coords()[j]);
            hmin[i] = std::min(hmin[i], h);
            hmin[j] = std::min(hmin[j], h);
        }
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<Point2> offset(n);
    for (std::size_t i = 0; i < n; ++i) {
        double dx, dy;
        do {
            dx = unit(rng);
            dy = unit(rng);
        } while (dx * dx + dy * dy > 1.0);
        offset[i] = {dx * hmin[i], dy * hmin[i]};
    }
    std::vector<int> tri(mesh.tri_nodes().begin(), mesh.tri_nodes().end());
    for (double amp = amplitude; amp > 1e-6; amp *= 0.5) {
        std::vector<Point2> coords(mesh.coords().begin(), mesh.coords().end());
        for (std::size_t i = 0; i < n; ++i)
            if (!on_boundary[i]) {
                coords[i].x += amp * offset[i].x;
                coords[i].y += amp * offset[i].y;
            }
        bool ok = true;
        for (std::size_t e = 0; e < mesh.num_elements() && ok; ++e) {
            const int* t = tri.data() + 3 * e;
            ok = signed_area_of(coords[t[0]], coords[t[1]], coords[t[2]]) > 0.0;
        }
        if (ok)
            return TriangleMesh(std::move(coords), tri, 1,
                                std::vector<BoundaryEdge>(mesh.boundary_edges().begin(), mesh.boundary_edges().end()));
    }
    return mesh;
}

TriangleMesh affine_transform(const TriangleMesh& mesh, double a, double b, double c, double d, double tx,
                              double ty) {
    if (a * d - b * c == 0.0) throw MeshError("affine_transform: singular map");
    std::vector<Point2> coords;
    coords.reserve(mesh.num_nodes());
    for (const auto& p : mesh.coords()) coords.push_back({a * p.x + b * p.y + tx, c * p.x + d * p.y + ty});
    return TriangleMesh(std::move(coords), std::vector<int>(mesh.tri_nodes().begin(), mesh.tri_nodes().end()),
                        mesh.order(),
                        std::vector<BoundaryEdge>(mesh.boundary_edges().begin(), mesh.boundary_edges().end()));
}

// ---------------------------------------------------------------------------

GeometryBatch compute_geometry_batch(const TriangleMesh& mesh) {
    const std::size_t ne = mesh.num_elements();
    GeometryBatch g;
    g.det.resize(ne);
    g.metric.resize(4, ne);
    g.corners.resize(ne);
    g.jacobian.resize(ne);
    const auto xy = mesh.coords();
    for (std::size_t e = 0; e < ne; ++e) {
        const auto t = mesh.element(e);
        const Point2 p0 = xy[t[0]], p1 = xy[t[1]], p2 = xy[t[2]];
        const double b11 = p1.x - p0.x, b21 = p1.y - p0.y;
        const double b12 = p2.x - p0.x, b22 = p2.y - p0.y;
        const double det = b11 * b22 - b12 * b21;
        const double diam = std::max({dist(p0, p1), dist(p1, p2), dist(p2, p0)});
        if (!(std::abs(det) >= 1e-14 * diam * diam) || diam == 0.0)
            throw DegenerateElementError(e, "degenerate element " + std::to_string(e));
        const double g11 = b11 * b11 + b21 * b21;
        const double g12 = b11 * b12 + b21 * b22;
        const double g22 = b12 * b12 + b22 * b22;
        const double inv = 1.0 / (det * det);
        g.det[e] = std::abs(det);
        g.metric(0, e) = g22 * inv;
        g.metric(1, e) = -g12 * inv;
        g.metric(2, e) = -g12 * inv;
        g.metric(3, e) = g11 * inv;
        g.corners[e] = {p0, p1, p2};
        g.jacobian[e] = {b11, b21, b12, b22};
    }
    return g;
}

double mesh_area(const TriangleMesh& mesh) {
    double a = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) a += mesh.signed_area(e);
    return a;
}

} // namespace vfem
