#pragma once

#include <vector>

#include "blm/mesh.hpp"

namespace blm {

enum class SpaceKind { VelocityP2, PressureP1 };

// Degree-of-freedom layout for the Taylor-Hood pair. Velocity dofs interleave
// the two components over P2 nodes (node n, component c -> 2n + c); pressure
// dofs are the vertex indices.
struct DofMap {
    SpaceKind kind = SpaceKind::VelocityP2;
    int n_nodes = 0;
    std::vector<int> dirichlet;  // sorted, unique dof indices

    int n_dofs() const { return kind == SpaceKind::VelocityP2 ? 2 * n_nodes : n_nodes; }

    static DofMap velocity(const Mesh& mesh) {
        return {SpaceKind::VelocityP2, mesh.n_p2_nodes(), {}};
    }
    static DofMap pressure(const Mesh& mesh) {
        return {SpaceKind::PressureP1, mesh.n_vertices(), {}};
    }

    static int vdof(int node, int comp) { return 2 * node + comp; }
};

// Coefficient vector of a finite element function.
struct Field {
    SpaceKind kind = SpaceKind::VelocityP2;
    std::vector<double> coef;

    static Field velocity(const Mesh& mesh) {
        return {SpaceKind::VelocityP2, std::vector<double>(2 * mesh.n_p2_nodes(), 0.0)};
    }
    static Field pressure(const Mesh& mesh) {
        return {SpaceKind::PressureP1, std::vector<double>(mesh.n_vertices(), 0.0)};
    }

    int size() const { return static_cast<int>(coef.size()); }
};

// Nodal interpolation of an analytic velocity (u1, u2)(x, y).
template <class F>
Field interpolate_velocity(const Mesh& mesh, F&& fn) {
    Field u = Field::velocity(mesh);
    for (int n = 0; n < mesh.n_p2_nodes(); ++n) {
        const Vec2 p = mesh.p2_node(n);
        const Vec2 v = fn(p.x, p.y);
        u.coef[DofMap::vdof(n, 0)] = v.x;
        u.coef[DofMap::vdof(n, 1)] = v.y;
    }
    return u;
}

template <class F>
Field interpolate_pressure(const Mesh& mesh, F&& fn) {
    Field p = Field::pressure(mesh);
    for (int v = 0; v < mesh.n_vertices(); ++v)
        p.coef[v] = fn(mesh.vertices[v].x, mesh.vertices[v].y);
    return p;
}

}  // namespace blm
