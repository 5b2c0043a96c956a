#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "blm/common.hpp"
#include "blm/geometry.hpp"

namespace blm {

enum class BoundaryTag { inflow, outflow, wall, obstacle };

inline const char* tag_name(BoundaryTag t) {
    switch (t) {
        case BoundaryTag::inflow: return "inflow";
        case BoundaryTag::outflow: return "outflow";
        case BoundaryTag::wall: return "wall";
        case BoundaryTag::obstacle: return "obstacle";
    }
    return "?";
}

inline bool parse_tag(const std::string& s, BoundaryTag& out) {
    if (s == "inflow") out = BoundaryTag::inflow;
    else if (s == "outflow") out = BoundaryTag::outflow;
    else if (s == "wall") out = BoundaryTag::wall;
    else if (s == "obstacle") out = BoundaryTag::obstacle;
    else return false;
    return true;
}

// Conforming triangular mesh of the channel-minus-obstacle domain.
//
// P2 nodes are the vertices followed by the edge midpoints: node n is
// vertices[n] for n < n_vertices() and the midpoint of edge n - n_vertices()
// otherwise. Triangles are stored counterclockwise.
struct Mesh {
    struct BoundaryEdge {
        int a = 0, b = 0;  // vertex indices
        BoundaryTag tag = BoundaryTag::wall;
    };

    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<std::array<int, 2>> edges;      // unique pairs, a < b
    std::vector<std::array<int, 3>> tri_edges;  // edge index of (v0,v1),(v1,v2),(v2,v0)
    std::vector<BoundaryEdge> boundary_edges;
    std::vector<double> wall_distance;  // per P2 node; empty if no solid boundary
    std::vector<double> elem_width;     // per triangle, longest edge

    int n_vertices() const { return static_cast<int>(vertices.size()); }
    int n_triangles() const { return static_cast<int>(triangles.size()); }
    int n_edges() const { return static_cast<int>(edges.size()); }
    int n_p2_nodes() const { return n_vertices() + n_edges(); }

    Vec2 p2_node(int n) const {
        if (n < n_vertices()) return vertices[n];
        const auto& e = edges[n - n_vertices()];
        return 0.5 * (vertices[e[0]] + vertices[e[1]]);
    }

    // P2 node index of local node a (0..5) of triangle t.
    int p2_local_node(int t, int a) const {
        return a < 3 ? triangles[t][a] : n_vertices() + tri_edges[t][a - 3];
    }

    double tri_area(int t) const {
        const auto& tri = triangles[t];
        const Vec2 p0 = vertices[tri[0]], p1 = vertices[tri[1]], p2 = vertices[tri[2]];
        return 0.5 * cross(p1 - p0, p2 - p0);
    }

    double area() const {
        double s = 0.0;
        for (int t = 0; t < n_triangles(); ++t) s += tri_area(t);
        return s;
    }
};

inline double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return norm(p - (a + t * ab));
}

// The solid part of the boundary: wall and obstacle segments. Inflow and
// outflow sections do not count as walls for the distance field.
struct WallSegments {
    std::vector<std::pair<Vec2, Vec2>> segments;

    static WallSegments of(const Mesh& mesh) {
        WallSegments w;
        for (const auto& be : mesh.boundary_edges)
            if (be.tag == BoundaryTag::wall || be.tag == BoundaryTag::obstacle)
                w.segments.emplace_back(mesh.vertices[be.a], mesh.vertices[be.b]);
        return w;
    }

    bool empty() const { return segments.empty(); }

    double distance(Vec2 p) const {
        double d = std::numeric_limits<double>::infinity();
        for (const auto& s : segments)
            d = std::min(d, point_segment_distance(p, s.first, s.second));
        return d;
    }
};

// Distance from every P2 node to the nearest solid boundary segment.
inline std::vector<double> compute_wall_distance(const Mesh& mesh) {
    const WallSegments walls = WallSegments::of(mesh);
    if (walls.empty())
        throw Error("compute_wall_distance: mesh has no wall or obstacle boundary edges");
    std::vector<double> dist(mesh.n_p2_nodes());
    for (int n = 0; n < mesh.n_p2_nodes(); ++n) dist[n] = walls.distance(mesh.p2_node(n));
    return dist;
}

inline std::vector<double> compute_elem_width(const Mesh& mesh) {
    std::vector<double> h(mesh.n_triangles());
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        double hmax = 0.0;
        for (int k = 0; k < 3; ++k)
            hmax = std::max(hmax, norm(mesh.vertices[tri[(k + 1) % 3]] - mesh.vertices[tri[k]]));
        h[t] = hmax;
    }
    return h;
}

namespace detail {

// Builds edge table and tri_edges, checks orientation/area, verifies that the
// declared boundary edges are exactly the topological boundary, then fills the
// derived per-node / per-element fields.
inline void finalize_mesh(Mesh& mesh) {
    const int nv = mesh.n_vertices();
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        for (int k = 0; k < 3; ++k) {
            const int v = mesh.triangles[t][k];
            if (v < 0 || v >= nv)
                throw Error("mesh: triangle " + std::to_string(t) + " references vertex " +
                            std::to_string(v) + " out of range");
        }
        if (!(mesh.tri_area(t) > 0.0))
            throw Error("mesh: triangle " + std::to_string(t) +
                        " has non-positive area (clockwise or degenerate)");
    }

    std::map<std::pair<int, int>, int> edge_index;
    std::vector<int> incidence;
    mesh.edges.clear();
    mesh.tri_edges.assign(mesh.n_triangles(), {0, 0, 0});
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        for (int k = 0; k < 3; ++k) {
            int a = tri[k], b = tri[(k + 1) % 3];
            if (a > b) std::swap(a, b);
            auto [it, inserted] = edge_index.try_emplace({a, b}, mesh.n_edges());
            if (inserted) {
                mesh.edges.push_back({a, b});
                incidence.push_back(0);
            }
            mesh.tri_edges[t][k] = it->second;
            ++incidence[it->second];
        }
    }

    for (int e = 0; e < mesh.n_edges(); ++e)
        if (incidence[e] > 2)
            throw Error("mesh: edge shared by more than two triangles (non-manifold)");

    std::vector<int> boundary_mark(mesh.n_edges(), 0);
    for (const auto& be : mesh.boundary_edges) {
        int a = be.a, b = be.b;
        if (a > b) std::swap(a, b);
        auto it = edge_index.find({a, b});
        if (it == edge_index.end())
            throw Error("mesh: boundary edge (" + std::to_string(be.a) + "," +
                        std::to_string(be.b) + ") is not an edge of any triangle");
        if (incidence[it->second] != 1)
            throw Error("mesh: boundary edge (" + std::to_string(be.a) + "," +
                        std::to_string(be.b) + ") is interior");
        if (++boundary_mark[it->second] > 1)
            throw Error("mesh: boundary edge listed twice");
    }
    for (int e = 0; e < mesh.n_edges(); ++e)
        if (incidence[e] == 1 && boundary_mark[e] == 0)
            throw Error("mesh: topological boundary edge (" + std::to_string(mesh.edges[e][0]) +
                        "," + std::to_string(mesh.edges[e][1]) + ") carries no tag");

    mesh.elem_width = compute_elem_width(mesh);
    bool has_solid = false;
    for (const auto& be : mesh.boundary_edges)
        if (be.tag == BoundaryTag::wall || be.tag == BoundaryTag::obstacle) has_solid = true;
    mesh.wall_distance = has_solid ? compute_wall_distance(mesh) : std::vector<double>{};
}

// One-dimensional node distribution for a segment [a,b]. h_near applies at the
// end(s) adjacent to the obstacle, growing geometrically to at most h_far.
// Sizes are rescaled so the nodes hit both endpoints exactly.
inline std::vector<double> segment_nodes(double a, double b, double h_near, double h_far,
                                         bool fine_at_left, bool fine_at_right) {
    const double len = b - a;
    const double ratio = 1.4;
    std::vector<double> sizes;
    if (fine_at_left && fine_at_right) {
        // symmetric: grade from both ends toward the middle
        double s = h_near, acc = 0.0;
        std::vector<double> half;
        while (acc < 0.5 * len) {
            half.push_back(s);
            acc += s;
            s = std::min(s * ratio, h_far);
        }
        const double scale = 0.5 * len / acc;
        sizes = half;
        for (auto it = half.rbegin(); it != half.rend(); ++it) sizes.push_back(*it);
        for (double& v : sizes) v *= scale;
    } else if (fine_at_left || fine_at_right) {
        double s = h_near, acc = 0.0;
        while (acc < len) {
            sizes.push_back(s);
            acc += s;
            s = std::min(s * ratio, h_far);
        }
        const double scale = len / acc;
        for (double& v : sizes) v *= scale;
        if (fine_at_right) std::reverse(sizes.begin(), sizes.end());
    } else {
        const int n = std::max(1, static_cast<int>(std::ceil(len / h_far - 1e-12)));
        sizes.assign(n, len / n);
    }
    std::vector<double> pts;
    pts.push_back(a);
    double x = a;
    for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
        x += sizes[k];
        pts.push_back(x);
    }
    pts.push_back(b);  // pin the far endpoint exactly
    return pts;
}

// Graded axis through the whole channel extent. When an obstacle interval is
// present its endpoints become grid lines and spacing refines toward it.
inline std::vector<double> graded_axis(double lo, double hi, bool has_obstacle, double olo,
                                       double ohi, double h_coarse, double h_fine) {
    if (!has_obstacle) return segment_nodes(lo, hi, h_coarse, h_coarse, false, false);
    std::vector<double> pts = segment_nodes(lo, olo, h_fine, h_coarse, false, true);
    const std::vector<double> mid = segment_nodes(olo, ohi, h_fine, h_fine, true, true);
    const std::vector<double> right = segment_nodes(ohi, hi, h_fine, h_coarse, true, false);
    pts.insert(pts.end(), mid.begin() + 1, mid.end());
    pts.insert(pts.end(), right.begin() + 1, right.end());
    return pts;
}

}  // namespace detail

// Structured graded triangulation of the benchmark geometry. Grid lines are
// placed so the obstacle boundary coincides with mesh lines; each grid cell is
// split into two counterclockwise triangles. Cell diagonals are kept at or
// below target_h (and target_h/refine_factor adjacent to the obstacle), so
// the element width bound holds for the triangle diameter.
inline Mesh generate_channel_mesh(const Geometry& geom, double target_h,
                                  double refine_factor = 1.0) {
    geom.validate();
    if (!(target_h > 0.0)) throw Error("generate_channel_mesh: target_h must be positive");
    if (!(refine_factor >= 1.0)) throw Error("generate_channel_mesh: refine_factor must be >= 1");

    const double h_coarse = target_h / std::sqrt(2.0);
    const double h_fine = h_coarse / refine_factor;
    const std::vector<double> xs =
        detail::graded_axis(geom.channel_min.x, geom.channel_max.x, geom.has_obstacle,
                            geom.obstacle_min.x, geom.obstacle_max.x, h_coarse, h_fine);
    const std::vector<double> ys =
        detail::graded_axis(geom.channel_min.y, geom.channel_max.y, geom.has_obstacle,
                            geom.obstacle_min.y, geom.obstacle_max.y, h_coarse, h_fine);
    const int nx = static_cast<int>(xs.size()), ny = static_cast<int>(ys.size());

    const auto in_obstacle = [&](double x, double y) {
        return geom.has_obstacle && x > geom.obstacle_min.x && x < geom.obstacle_max.x &&
               y > geom.obstacle_min.y && y < geom.obstacle_max.y;
    };

    Mesh mesh;
    std::vector<int> vid(static_cast<std::size_t>(nx) * ny, -1);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            if (in_obstacle(xs[i], ys[j])) continue;  // grid points strictly inside the hole
            vid[static_cast<std::size_t>(j) * nx + i] = mesh.n_vertices();
            mesh.vertices.push_back({xs[i], ys[j]});
        }

    const auto cell_void = [&](int i, int j) {
        const double cx = 0.5 * (xs[i] + xs[i + 1]);
        const double cy = 0.5 * (ys[j] + ys[j + 1]);
        return in_obstacle(cx, cy);
    };

    for (int j = 0; j + 1 < ny; ++j)
        for (int i = 0; i + 1 < nx; ++i) {
            if (cell_void(i, j)) continue;
            const int v00 = vid[static_cast<std::size_t>(j) * nx + i];
            const int v10 = vid[static_cast<std::size_t>(j) * nx + i + 1];
            const int v01 = vid[static_cast<std::size_t>(j + 1) * nx + i];
            const int v11 = vid[static_cast<std::size_t>(j + 1) * nx + i + 1];
            mesh.triangles.push_back({v00, v10, v11});
            mesh.triangles.push_back({v00, v11, v01});
        }

    // Tag the topological boundary by position: channel sides first, anything
    // else must lie on the obstacle perimeter.
    std::map<std::pair<int, int>, int> count;
    for (const auto& tri : mesh.triangles)
        for (int k = 0; k < 3; ++k) {
            int a = tri[k], b = tri[(k + 1) % 3];
            if (a > b) std::swap(a, b);
            ++count[{a, b}];
        }
    const double tol = 1e-12;
    for (const auto& [e, c] : count) {
        if (c != 1) continue;
        const Vec2 pa = mesh.vertices[e.first], pb = mesh.vertices[e.second];
        const Vec2 m = 0.5 * (pa + pb);
        BoundaryTag tag;
        if (std::abs(m.x - geom.channel_min.x) < tol) tag = BoundaryTag::inflow;
        else if (std::abs(m.x - geom.channel_max.x) < tol) tag = BoundaryTag::outflow;
        else if (std::abs(m.y - geom.channel_min.y) < tol || std::abs(m.y - geom.channel_max.y) < tol)
            tag = BoundaryTag::wall;
        else tag = BoundaryTag::obstacle;
        mesh.boundary_edges.push_back({e.first, e.second, tag});
    }

    detail::finalize_mesh(mesh);
    return mesh;
}

// Uniform n-by-n triangulation of the unit square (2n^2 triangles).
inline Mesh unit_square_mesh(int n) {
    return generate_channel_mesh(Geometry::unit_square(), std::sqrt(2.0) / n, 1.0);
}

// Red refinement: every triangle splits into four congruent children through
// its edge midpoints, so element shapes are preserved exactly across levels.
inline Mesh uniform_refine(const Mesh& mesh) {
    Mesh fine;
    fine.vertices = mesh.vertices;
    for (const auto& e : mesh.edges)
        fine.vertices.push_back(0.5 * (mesh.vertices[e[0]] + mesh.vertices[e[1]]));

    const int nv = mesh.n_vertices();
    fine.triangles.reserve(4 * mesh.n_triangles());
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        const int m01 = nv + mesh.tri_edges[t][0];
        const int m12 = nv + mesh.tri_edges[t][1];
        const int m20 = nv + mesh.tri_edges[t][2];
        fine.triangles.push_back({tri[0], m01, m20});
        fine.triangles.push_back({tri[1], m12, m01});
        fine.triangles.push_back({tri[2], m20, m12});
        fine.triangles.push_back({m01, m12, m20});
    }

    std::map<std::pair<int, int>, int> edge_of;
    for (int e = 0; e < mesh.n_edges(); ++e)
        edge_of[{mesh.edges[e][0], mesh.edges[e][1]}] = e;
    for (const auto& be : mesh.boundary_edges) {
        int a = be.a, b = be.b;
        if (a > b) std::swap(a, b);
        const int mid = nv + edge_of.at({a, b});
        fine.boundary_edges.push_back({be.a, mid, be.tag});
        fine.boundary_edges.push_back({mid, be.b, be.tag});
    }

    detail::finalize_mesh(fine);
    return fine;
}

}  // namespace blm
