#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "blm/basis.hpp"
#include "blm/dofmap.hpp"
#include "blm/mesh.hpp"
#include "blm/quadrature.hpp"
#include "blm/sparse.hpp"

namespace blm {

// Affine map from the reference triangle onto element t.
struct ElementGeom {
    Vec2 v0;
    double J[2][2];      // [x1-x0  x2-x0; y1-y0  y2-y0]
    double invJT[2][2];  // maps reference gradients to physical gradients
    double detJ;

    static ElementGeom of(const Mesh& mesh, int t) {
        const auto& tri = mesh.triangles[t];
        const Vec2 p0 = mesh.vertices[tri[0]], p1 = mesh.vertices[tri[1]], p2 = mesh.vertices[tri[2]];
        ElementGeom g;
        g.v0 = p0;
        g.J[0][0] = p1.x - p0.x; g.J[0][1] = p2.x - p0.x;
        g.J[1][0] = p1.y - p0.y; g.J[1][1] = p2.y - p0.y;
        g.detJ = g.J[0][0] * g.J[1][1] - g.J[0][1] * g.J[1][0];
        const double inv = 1.0 / g.detJ;
        // inv(J) = inv * [J11 -J01; -J10 J00]; invJT is its transpose
        g.invJT[0][0] = inv * g.J[1][1];
        g.invJT[0][1] = inv * -g.J[1][0];
        g.invJT[1][0] = inv * -g.J[0][1];
        g.invJT[1][1] = inv * g.J[0][0];
        return g;
    }

    Vec2 to_physical(double xi, double eta) const {
        return {v0.x + J[0][0] * xi + J[0][1] * eta, v0.y + J[1][0] * xi + J[1][1] * eta};
    }

    // Inverse of the affine map; valid for any point, inside or not.
    void to_reference(Vec2 p, double& xi, double& eta) const {
        const double rx = p.x - v0.x, ry = p.y - v0.y;
        const double inv = 1.0 / detJ;
        xi = inv * (J[1][1] * rx - J[0][1] * ry);
        eta = inv * (-J[1][0] * rx + J[0][0] * ry);
    }

    void physical_grad(const double gref[2], double gphys[2]) const {
        gphys[0] = invJT[0][0] * gref[0] + invJT[0][1] * gref[1];
        gphys[1] = invJT[1][0] * gref[0] + invJT[1][1] * gref[1];
    }
};

// P2/P1 basis values and reference gradients tabulated at the shared rule.
struct QuadBasis {
    const TriQuadrature& rule = TriQuadrature::degree5();
    std::vector<std::array<double, 6>> phi;
    std::vector<std::array<std::array<double, 2>, 6>> gref;
    std::vector<std::array<double, 3>> psi;

    static const QuadBasis& get() {
        static const QuadBasis qb = [] {
            QuadBasis b;
            const auto& q = b.rule;
            b.phi.resize(q.size());
            b.gref.resize(q.size());
            b.psi.resize(q.size());
            for (int k = 0; k < q.size(); ++k) {
                double p[6], g[6][2], s[3];
                p2_values(q.xi[k], q.eta[k], p);
                p2_ref_grads(q.xi[k], q.eta[k], g);
                p1_values(q.xi[k], q.eta[k], s);
                for (int a = 0; a < 6; ++a) {
                    b.phi[k][a] = p[a];
                    b.gref[k][a] = {g[a][0], g[a][1]};
                }
                for (int a = 0; a < 3; ++a) b.psi[k][a] = s[a];
            }
            return b;
        }();
        return qb;
    }
};

// ---------------------------------------------------------------------------
// Point evaluation of finite element fields
// ---------------------------------------------------------------------------

inline Vec2 velocity_at(const Mesh& mesh, const Field& u, int t, double xi, double eta) {
    double phi[6];
    p2_values(xi, eta, phi);
    Vec2 v{0.0, 0.0};
    for (int a = 0; a < 6; ++a) {
        const int n = mesh.p2_local_node(t, a);
        v.x += u.coef[DofMap::vdof(n, 0)] * phi[a];
        v.y += u.coef[DofMap::vdof(n, 1)] * phi[a];
    }
    return v;
}

// grad[i][j] = d u_i / d x_j
inline void velocity_grad_at(const Mesh& mesh, const Field& u, int t, double xi, double eta,
                             double grad[2][2]) {
    const ElementGeom geom = ElementGeom::of(mesh, t);
    double gref[6][2];
    p2_ref_grads(xi, eta, gref);
    grad[0][0] = grad[0][1] = grad[1][0] = grad[1][1] = 0.0;
    for (int a = 0; a < 6; ++a) {
        double g[2];
        geom.physical_grad(gref[a], g);
        const int n = mesh.p2_local_node(t, a);
        const double ux = u.coef[DofMap::vdof(n, 0)], uy = u.coef[DofMap::vdof(n, 1)];
        grad[0][0] += ux * g[0];
        grad[0][1] += ux * g[1];
        grad[1][0] += uy * g[0];
        grad[1][1] += uy * g[1];
    }
}

// Scalar curl d1 u2 - d2 u1 of the piecewise-quadratic interpolant.
inline double curl2d(const Mesh& mesh, const Field& u, int t, double xi, double eta) {
    double grad[2][2];
    velocity_grad_at(mesh, u, t, xi, eta, grad);
    return grad[1][0] - grad[0][1];
}

inline double pressure_at(const Mesh& mesh, const Field& p, int t, double xi, double eta) {
    double psi[3];
    p1_values(xi, eta, psi);
    double v = 0.0;
    for (int a = 0; a < 3; ++a) v += p.coef[mesh.triangles[t][a]] * psi[a];
    return v;
}

// ---------------------------------------------------------------------------
// Per-quadrature-point caches
// ---------------------------------------------------------------------------

// w_q * detJ for every (element, quadrature point), flattened.
inline std::vector<double> quad_scales(const Mesh& mesh) {
    const auto& qb = QuadBasis::get();
    const int nq = qb.rule.size();
    std::vector<double> s(static_cast<std::size_t>(mesh.n_triangles()) * nq);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const double detJ = 2.0 * mesh.tri_area(t);
        for (int q = 0; q < nq; ++q) s[static_cast<std::size_t>(t) * nq + q] = qb.rule.w[q] * detJ;
    }
    return s;
}

inline std::vector<Vec2> quad_points(const Mesh& mesh) {
    const auto& qb = QuadBasis::get();
    const int nq = qb.rule.size();
    std::vector<Vec2> pts(static_cast<std::size_t>(mesh.n_triangles()) * nq);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const ElementGeom geom = ElementGeom::of(mesh, t);
        for (int q = 0; q < nq; ++q)
            pts[static_cast<std::size_t>(t) * nq + q] = geom.to_physical(qb.rule.xi[q], qb.rule.eta[q]);
    }
    return pts;
}

inline std::vector<double> curl_at_quadrature(const Mesh& mesh, const Field& u) {
    const auto& qb = QuadBasis::get();
    const int nq = qb.rule.size();
    std::vector<double> c(static_cast<std::size_t>(mesh.n_triangles()) * nq);
    for (int t = 0; t < mesh.n_triangles(); ++t)
        for (int q = 0; q < nq; ++q)
            c[static_cast<std::size_t>(t) * nq + q] = curl2d(mesh, u, t, qb.rule.xi[q], qb.rule.eta[q]);
    return c;
}

// ---------------------------------------------------------------------------
// Assembly kernels. Each kernel reports (row, col, value) triplets through a
// sink; callers use the same kernel once to build the pattern and once to
// fill values.
// ---------------------------------------------------------------------------

namespace kernels {

// Physical gradients of the six P2 basis functions at every rule point.
struct ElementBasis {
    double gphys[7][6][2];  // [q][a][xy]
    double detJ;
    ElementGeom geom;

    ElementBasis(const Mesh& mesh, int t) : geom(ElementGeom::of(mesh, t)) {
        const auto& qb = QuadBasis::get();
        detJ = geom.detJ;
        for (int q = 0; q < qb.rule.size(); ++q)
            for (int a = 0; a < 6; ++a) geom.physical_grad(qb.gref[q][a].data(), gphys[q][a]);
    }
};

// (u, v): same-component coupling.
template <class Sink>
void mass(const Mesh& mesh, Sink&& sink) {
    const auto& qb = QuadBasis::get();
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const double detJ = 2.0 * mesh.tri_area(t);
        double local[6][6] = {};
        for (int q = 0; q < qb.rule.size(); ++q) {
            const double wq = qb.rule.w[q] * detJ;
            for (int a = 0; a < 6; ++a)
                for (int b = 0; b < 6; ++b) local[a][b] += wq * (qb.phi[q][a] * qb.phi[q][b]);
        }
        for (int a = 0; a < 6; ++a) {
            const int na = mesh.p2_local_node(t, a);
            for (int b = 0; b < 6; ++b) {
                const int nb = mesh.p2_local_node(t, b);
                for (int c = 0; c < 2; ++c)
                    sink(DofMap::vdof(na, c), DofMap::vdof(nb, c), local[a][b]);
            }
        }
    }
}

// (grad u, grad v): same-component coupling.
template <class Sink>
void stiffness(const Mesh& mesh, Sink&& sink) {
    const auto& qb = QuadBasis::get();
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const ElementBasis eb(mesh, t);
        double local[6][6] = {};
        for (int q = 0; q < qb.rule.size(); ++q) {
            const double wq = qb.rule.w[q] * eb.detJ;
            for (int a = 0; a < 6; ++a)
                for (int b = 0; b < 6; ++b)
                    local[a][b] += wq * (eb.gphys[q][a][0] * eb.gphys[q][b][0] +
                                         eb.gphys[q][a][1] * eb.gphys[q][b][1]);
        }
        for (int a = 0; a < 6; ++a) {
            const int na = mesh.p2_local_node(t, a);
            for (int b = 0; b < 6; ++b) {
                const int nb = mesh.p2_local_node(t, b);
                for (int c = 0; c < 2; ++c)
                    sink(DofMap::vdof(na, c), DofMap::vdof(nb, c), local[a][b]);
            }
        }
    }
}

// (weight curl u, curl v) with a nonnegative per-quadrature-point weight.
// curl pairs component 0 with -d2 phi and component 1 with +d1 phi, so this
// couples the two velocity components.
template <class Sink>
void weighted_curlcurl(const Mesh& mesh, std::span<const double> weight_qp, Sink&& sink) {
    const auto& qb = QuadBasis::get();
    const int nq = qb.rule.size();
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const ElementBasis eb(mesh, t);
        double local[12][12] = {};
        for (int q = 0; q < nq; ++q) {
            const double w = weight_qp[static_cast<std::size_t>(t) * nq + q];
            const double wq = qb.rule.w[q] * eb.detJ * w;
            double r[12];  // curl coefficient of local dof 2a+c
            for (int a = 0; a < 6; ++a) {
                r[2 * a] = -eb.gphys[q][a][1];
                r[2 * a + 1] = eb.gphys[q][a][0];
            }
            for (int i = 0; i < 12; ++i)
                for (int j = 0; j < 12; ++j) local[i][j] += wq * (r[i] * r[j]);
        }
        for (int a = 0; a < 6; ++a) {
            const int na = mesh.p2_local_node(t, a);
            for (int b = 0; b < 6; ++b) {
                const int nb = mesh.p2_local_node(t, b);
                for (int ca = 0; ca < 2; ++ca)
                    for (int cb = 0; cb < 2; ++cb)
                        sink(DofMap::vdof(na, ca), DofMap::vdof(nb, cb),
                             local[2 * a + ca][2 * b + cb]);
            }
        }
    }
}

// Skew-symmetrized convection 1/2 [ (w . grad u, v) - (w . grad v, u) ].
// Skew-symmetrizing each element matrix gives the skew part of the assembled
// matrix exactly, so v^T C v = 0 to rounding for every v.
template <class Sink>
void convection_skew(const Mesh& mesh, const Field& w, Sink&& sink) {
    const auto& qb = QuadBasis::get();
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const ElementBasis eb(mesh, t);
        double n_loc[6][6] = {};
        for (int q = 0; q < qb.rule.size(); ++q) {
            const double wq = qb.rule.w[q] * eb.detJ;
            Vec2 wv{0.0, 0.0};
            for (int a = 0; a < 6; ++a) {
                const int n = mesh.p2_local_node(t, a);
                wv.x += w.coef[DofMap::vdof(n, 0)] * qb.phi[q][a];
                wv.y += w.coef[DofMap::vdof(n, 1)] * qb.phi[q][a];
            }
            for (int a = 0; a < 6; ++a)
                for (int b = 0; b < 6; ++b) {
                    const double adv = wv.x * eb.gphys[q][b][0] + wv.y * eb.gphys[q][b][1];
                    n_loc[a][b] += wq * adv * qb.phi[q][a];
                }
        }
        for (int a = 0; a < 6; ++a) {
            const int na = mesh.p2_local_node(t, a);
            for (int b = 0; b < 6; ++b) {
                const int nb = mesh.p2_local_node(t, b);
                const double skew = 0.5 * (n_loc[a][b] - n_loc[b][a]);
                for (int c = 0; c < 2; ++c)
                    sink(DofMap::vdof(na, c), DofMap::vdof(nb, c), skew);
            }
        }
    }
}

// (r, div u) with P1 test functions r: pressure rows, velocity columns.
template <class Sink>
void divergence(const Mesh& mesh, Sink&& sink) {
    const auto& qb = QuadBasis::get();
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const ElementBasis eb(mesh, t);
        double local[3][12] = {};
        for (int q = 0; q < qb.rule.size(); ++q) {
            const double wq = qb.rule.w[q] * eb.detJ;
            for (int r = 0; r < 3; ++r)
                for (int b = 0; b < 6; ++b)
                    for (int c = 0; c < 2; ++c)
                        local[r][2 * b + c] += wq * qb.psi[q][r] * eb.gphys[q][b][c];
        }
        for (int r = 0; r < 3; ++r) {
            const int pr = mesh.triangles[t][r];
            for (int b = 0; b < 6; ++b) {
                const int nb = mesh.p2_local_node(t, b);
                for (int c = 0; c < 2; ++c)
                    sink(pr, DofMap::vdof(nb, c), local[r][2 * b + c]);
            }
        }
    }
}

}  // namespace kernels

// ---------------------------------------------------------------------------
// Stand-alone assembled operators
// ---------------------------------------------------------------------------

namespace detail {

template <class Kernel>
CsrMatrix assemble_square(int n, Kernel&& kernel) {
    PatternBuilder builder(n, n);
    kernel([&](int i, int j, double) { builder.add(i, j); });
    CsrMatrix m(builder.build());
    kernel([&](int i, int j, double v) { m.add(i, j, v); });
    return m;
}

}  // namespace detail

inline CsrMatrix assemble_mass(const Mesh& mesh) {
    const int n = 2 * mesh.n_p2_nodes();
    return detail::assemble_square(n,
                                   [&](auto&& s) { kernels::mass(mesh, s); });
}

inline CsrMatrix assemble_stiffness(const Mesh& mesh) {
    const int n = 2 * mesh.n_p2_nodes();
    return detail::assemble_square(n,
                                   [&](auto&& s) { kernels::stiffness(mesh, s); });
}

inline CsrMatrix assemble_weighted_curlcurl(const Mesh& mesh, std::span<const double> weight_qp) {
    const std::size_t need = static_cast<std::size_t>(mesh.n_triangles()) * QuadBasis::get().rule.size();
    if (weight_qp.size() != need)
        throw Error("assemble_weighted_curlcurl: weight array has wrong length");
    for (double w : weight_qp)
        if (!(w >= 0.0) || !std::isfinite(w))
            throw Error("assemble_weighted_curlcurl: weight must be finite and nonnegative");
    const int n = 2 * mesh.n_p2_nodes();
    return detail::assemble_square(
        n, [&](auto&& s) { kernels::weighted_curlcurl(mesh, weight_qp, s); });
}

inline CsrMatrix assemble_convection_skew(const Mesh& mesh, const Field& w) {
    const int n = 2 * mesh.n_p2_nodes();
    return detail::assemble_square(n,
                                   [&](auto&& s) { kernels::convection_skew(mesh, w, s); });
}

inline CsrMatrix assemble_divergence(const Mesh& mesh) {
    PatternBuilder builder(mesh.n_vertices(), 2 * mesh.n_p2_nodes());
    kernels::divergence(mesh, [&](int i, int j, double) { builder.add(i, j); });
    CsrMatrix b(builder.build());
    kernels::divergence(mesh, [&](int i, int j, double v) { b.add(i, j, v); });
    return b;
}

// Load vector (f, v) for an analytic body force.
template <class F>
std::vector<double> assemble_load(const Mesh& mesh, F&& force) {
    const auto& qb = QuadBasis::get();
    std::vector<double> load(2 * mesh.n_p2_nodes(), 0.0);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const ElementGeom geom = ElementGeom::of(mesh, t);
        for (int q = 0; q < qb.rule.size(); ++q) {
            const double wq = qb.rule.w[q] * geom.detJ;
            const Vec2 p = geom.to_physical(qb.rule.xi[q], qb.rule.eta[q]);
            const Vec2 f = force(p.x, p.y);
            for (int a = 0; a < 6; ++a) {
                const int n = mesh.p2_local_node(t, a);
                load[DofMap::vdof(n, 0)] += wq * f.x * qb.phi[q][a];
                load[DofMap::vdof(n, 1)] += wq * f.y * qb.phi[q][a];
            }
        }
    }
    return load;
}

// Symmetric elimination of Dirichlet rows/columns: constrained rows become
// identity, couplings move to the right-hand side, symmetry is preserved.
inline void apply_dirichlet(CsrMatrix& a, std::vector<double>& rhs, const std::vector<int>& dofs,
                            const std::vector<double>& values) {
    if (dofs.size() != values.size())
        throw Error("apply_dirichlet: a Dirichlet dof is missing its value");
    const int n = a.rows();
    std::vector<char> constrained(n, 0);
    std::vector<double> g(n, 0.0);
    for (std::size_t k = 0; k < dofs.size(); ++k) {
        const int d = dofs[k];
        if (d < 0 || d >= n) throw Error("apply_dirichlet: dof index out of range");
        if (constrained[d]) throw Error("apply_dirichlet: duplicate Dirichlet dof");
        constrained[d] = 1;
        g[d] = values[k];
    }

    const auto& rp = a.pattern->row_ptr;
    const auto& ci = a.pattern->col_idx;
    for (int i = 0; i < n; ++i) {
        if (constrained[i]) {
            for (int k = rp[i]; k < rp[i + 1]; ++k) a.val[k] = (ci[k] == i) ? 1.0 : 0.0;
            rhs[i] = g[i];
        } else {
            for (int k = rp[i]; k < rp[i + 1]; ++k) {
                const int j = ci[k];
                if (constrained[j]) {
                    rhs[i] -= a.val[k] * g[j];
                    a.val[k] = 0.0;
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Direct quadrature integrals (used by the statistics and checks; these go
// through point evaluation, not through the assembled matrices)
// ---------------------------------------------------------------------------

inline double integrate_velocity_l2sq(const Mesh& mesh, const Field& u) {
    const auto& qb = QuadBasis::get();
    double s = 0.0;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const double detJ = 2.0 * mesh.tri_area(t);
        for (int q = 0; q < qb.rule.size(); ++q) {
            const Vec2 v = velocity_at(mesh, u, t, qb.rule.xi[q], qb.rule.eta[q]);
            s += qb.rule.w[q] * detJ * (v.x * v.x + v.y * v.y);
        }
    }
    return s;
}

inline double integrate_gradient_sq(const Mesh& mesh, const Field& u) {
    const auto& qb = QuadBasis::get();
    double s = 0.0;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const double detJ = 2.0 * mesh.tri_area(t);
        for (int q = 0; q < qb.rule.size(); ++q) {
            double grad[2][2];
            velocity_grad_at(mesh, u, t, qb.rule.xi[q], qb.rule.eta[q], grad);
            s += qb.rule.w[q] * detJ *
                 (sq(grad[0][0]) + sq(grad[0][1]) + sq(grad[1][0]) + sq(grad[1][1]));
        }
    }
    return s;
}

// int weight * (curl u)^power with a per-quadrature-point weight.
inline double integrate_weighted_curl_pow(const Mesh& mesh, const Field& u,
                                          std::span<const double> weight_qp, double power) {
    const auto& qb = QuadBasis::get();
    const int nq = qb.rule.size();
    double s = 0.0;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const double detJ = 2.0 * mesh.tri_area(t);
        for (int q = 0; q < nq; ++q) {
            const double c = curl2d(mesh, u, t, qb.rule.xi[q], qb.rule.eta[q]);
            s += qb.rule.w[q] * detJ * weight_qp[static_cast<std::size_t>(t) * nq + q] *
                 std::pow(std::abs(c), power);
        }
    }
    return s;
}

}  // namespace blm
