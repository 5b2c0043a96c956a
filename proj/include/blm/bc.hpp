#pragma once

#include <map>
#include <vector>

#include "blm/dofmap.hpp"
#include "blm/mesh.hpp"
#include "blm/model.hpp"

namespace blm {

// Velocity Dirichlet data plus the pressure gauge choice. With a natural
// (do-nothing) outflow the pressure level is fixed by the boundary term; an
// all-Dirichlet velocity boundary leaves the pressure defined only up to a
// constant, in which case one pressure dof is pinned to zero.
struct BoundaryConditions {
    std::vector<int> dofs;  // velocity dof indices, sorted
    std::vector<double> values;
    bool pin_pressure = false;
};

namespace detail {

// All P2 nodes lying on boundary edges, classified by the strongest condition
// touching them: solid no-slip beats inflow beats natural.
enum class NodeClass { free = 0, inflow = 1, solid = 2 };

inline std::vector<NodeClass> classify_boundary_nodes(const Mesh& mesh) {
    std::map<std::pair<int, int>, int> edge_of;
    for (int e = 0; e < mesh.n_edges(); ++e)
        edge_of[{mesh.edges[e][0], mesh.edges[e][1]}] = e;

    std::vector<NodeClass> cls(mesh.n_p2_nodes(), NodeClass::free);
    const auto raise = [&](int node, NodeClass c) {
        if (static_cast<int>(c) > static_cast<int>(cls[node])) cls[node] = c;
    };
    for (const auto& be : mesh.boundary_edges) {
        NodeClass c = NodeClass::free;
        if (be.tag == BoundaryTag::wall || be.tag == BoundaryTag::obstacle) c = NodeClass::solid;
        else if (be.tag == BoundaryTag::inflow) c = NodeClass::inflow;
        else continue;  // outflow stays natural
        int a = be.a, b = be.b;
        if (a > b) std::swap(a, b);
        const int mid = mesh.n_vertices() + edge_of.at({a, b});
        raise(be.a, c);
        raise(be.b, c);
        raise(mid, c);
    }
    return cls;
}

}  // namespace detail

// No-slip on walls and obstacle, parabolic profile on the inflow, natural
// outflow.
inline BoundaryConditions benchmark_bc(const Mesh& mesh) {
    const auto cls = detail::classify_boundary_nodes(mesh);
    BoundaryConditions bc;
    for (int n = 0; n < mesh.n_p2_nodes(); ++n) {
        if (cls[n] == detail::NodeClass::free) continue;
        Vec2 v{0.0, 0.0};
        if (cls[n] == detail::NodeClass::inflow) v = inflow_profile(mesh.p2_node(n).y);
        bc.dofs.push_back(DofMap::vdof(n, 0));
        bc.values.push_back(v.x);
        bc.dofs.push_back(DofMap::vdof(n, 1));
        bc.values.push_back(v.y);
    }
    bool has_outflow = false;
    for (const auto& be : mesh.boundary_edges)
        if (be.tag == BoundaryTag::outflow) has_outflow = true;
    bc.pin_pressure = !has_outflow;
    return bc;
}

// Prescribes (u1, u2)(x, y) on the entire boundary regardless of tags.
template <class F>
BoundaryConditions dirichlet_everywhere(const Mesh& mesh, F&& fn) {
    std::map<std::pair<int, int>, int> edge_of;
    for (int e = 0; e < mesh.n_edges(); ++e)
        edge_of[{mesh.edges[e][0], mesh.edges[e][1]}] = e;
    std::vector<char> on_boundary(mesh.n_p2_nodes(), 0);
    for (const auto& be : mesh.boundary_edges) {
        int a = be.a, b = be.b;
        if (a > b) std::swap(a, b);
        on_boundary[be.a] = on_boundary[be.b] = 1;
        on_boundary[mesh.n_vertices() + edge_of.at({a, b})] = 1;
    }
    BoundaryConditions bc;
    bc.pin_pressure = true;
    for (int n = 0; n < mesh.n_p2_nodes(); ++n) {
        if (!on_boundary[n]) continue;
        const Vec2 p = mesh.p2_node(n);
        const Vec2 v = fn(p.x, p.y);
        bc.dofs.push_back(DofMap::vdof(n, 0));
        bc.values.push_back(v.x);
        bc.dofs.push_back(DofMap::vdof(n, 1));
        bc.values.push_back(v.y);
    }
    return bc;
}

inline BoundaryConditions homogeneous_bc(const Mesh& mesh) {
    return dirichlet_everywhere(mesh, [](double, double) { return Vec2{0.0, 0.0}; });
}

}  // namespace blm
