#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "blm/assembly.hpp"
#include "blm/mesh.hpp"

namespace blm {

// Mixing-length law selection. l1 follows the capped near-wall law
// 0.41*ybar up to 0.41*0.2*Re^(-1/2); l2 ties the length to the local
// element width as h^(2/3); Const is a spatially uniform value.
enum class MixingKind { L1, L2, Const };

struct MixingSpec {
    MixingKind kind = MixingKind::L1;
    double const_value = 0.0;

    static MixingSpec l1() { return {MixingKind::L1, 0.0}; }
    static MixingSpec l2() { return {MixingKind::L2, 0.0}; }
    static MixingSpec constant(double v) {
        if (!(v >= 0.0)) throw Error("mixing length constant must be nonnegative");
        return {MixingKind::Const, v};
    }

    std::string name() const {
        switch (kind) {
            case MixingKind::L1: return "l1";
            case MixingKind::L2: return "l2";
            case MixingKind::Const: {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "const:%g", const_value);
                return buf;
            }
        }
        return "?";
    }
};

inline double mixing_length_l1(double wall_dist, double reynolds) {
    if (!(reynolds > 0.0)) throw Error("mixing_length_l1: Re must be positive");
    if (!(wall_dist >= 0.0)) throw Error("mixing_length_l1: wall distance must be nonnegative");
    const double cap_dist = 0.2 / std::sqrt(reynolds);
    return 0.41 * (wall_dist < cap_dist ? wall_dist : cap_dist);
}

inline double mixing_length_l2(double h) {
    if (!(h > 0.0)) throw Error("mixing_length_l2: element width must be positive");
    return std::cbrt(h * h);
}

// Parabolic inflow (4y(1-y), 0) peaking at 1 in mid-channel.
inline Vec2 inflow_profile(double y) {
    if (y < 0.0 || y > 1.0) throw Error("inflow_profile: y outside [0,1]");
    return {4.0 * y * (1.0 - y), 0.0};
}

// Re is normalized with the peak inflow speed (1) and the channel height (1),
// so the sweep adjusts viscosity as nu = 1/Re.
inline double reynolds_to_viscosity(double reynolds) {
    if (!(reynolds > 0.0)) throw Error("reynolds_to_viscosity: Re must be positive");
    return 1.0 / reynolds;
}

struct ModelParams {
    double nu = 0.01;       // kinematic viscosity
    double beta = 10.0;     // backscatter calibration parameter
    double reynolds = 100;  // nominal sweep value, used by the l1 law
    MixingSpec mixing = MixingSpec::l1();

    // Derived once the mesh is known (fill_mixing): extremes of l over the
    // quadrature points.
    double ell_max = 0.0;
    double ell_0 = 0.0;

    static ModelParams from_reynolds(double re, double beta_, MixingSpec mix) {
        ModelParams p;
        p.reynolds = re;
        p.nu = reynolds_to_viscosity(re);
        p.beta = beta_;
        p.mixing = mix;
        return p;
    }
};

// Mixing length evaluated at every quadrature point of the mesh.
struct MixingField {
    std::vector<double> l_qp;   // flattened (element, point)
    std::vector<double> l2_qp;  // squared values (the eddy-viscosity weight)
};

// Evaluates l at the quadrature points and records ell_max / ell_0 in params.
// The l1 law measures the exact distance from each quadrature point to the
// nearest solid boundary segment, consistent with the per-node field.
inline MixingField fill_mixing(const Mesh& mesh, ModelParams& params) {
    const int nq = QuadBasis::get().rule.size();
    MixingField f;
    f.l_qp.resize(static_cast<std::size_t>(mesh.n_triangles()) * nq);

    if (params.mixing.kind == MixingKind::L1) {
        const WallSegments walls = WallSegments::of(mesh);
        if (walls.empty()) throw Error("mixing length l1 requires wall or obstacle boundaries");
        const std::vector<Vec2> pts = quad_points(mesh);
        for (std::size_t k = 0; k < pts.size(); ++k)
            f.l_qp[k] = mixing_length_l1(walls.distance(pts[k]), params.reynolds);
    } else if (params.mixing.kind == MixingKind::L2) {
        for (int t = 0; t < mesh.n_triangles(); ++t) {
            const double l = mixing_length_l2(mesh.elem_width[t]);
            for (int q = 0; q < nq; ++q) f.l_qp[static_cast<std::size_t>(t) * nq + q] = l;
        }
    } else {
        std::fill(f.l_qp.begin(), f.l_qp.end(), params.mixing.const_value);
    }

    f.l2_qp.resize(f.l_qp.size());
    for (std::size_t k = 0; k < f.l_qp.size(); ++k) f.l2_qp[k] = f.l_qp[k] * f.l_qp[k];

    params.ell_max = f.l_qp.empty() ? 0.0 : *std::max_element(f.l_qp.begin(), f.l_qp.end());
    params.ell_0 = f.l_qp.empty() ? 0.0 : *std::min_element(f.l_qp.begin(), f.l_qp.end());
    return f;
}

}  // namespace blm
