#pragma once

namespace blm {

// Lagrange bases on the reference triangle with vertices
// (0,0), (1,0), (0,1) and barycentric coordinates
//   l0 = 1 - xi - eta,  l1 = xi,  l2 = eta.
//
// P2 local node order: three vertices, then the midpoints of local edges
// (0,1), (1,2), (2,0).

inline void p2_values(double xi, double eta, double phi[6]) {
    const double l0 = 1.0 - xi - eta, l1 = xi, l2 = eta;
    phi[0] = l0 * (2.0 * l0 - 1.0);
    phi[1] = l1 * (2.0 * l1 - 1.0);
    phi[2] = l2 * (2.0 * l2 - 1.0);
    phi[3] = 4.0 * l0 * l1;
    phi[4] = 4.0 * l1 * l2;
    phi[5] = 4.0 * l2 * l0;
}

// Gradients with respect to (xi, eta).
inline void p2_ref_grads(double xi, double eta, double g[6][2]) {
    const double l0 = 1.0 - xi - eta, l1 = xi, l2 = eta;
    g[0][0] = -(4.0 * l0 - 1.0); g[0][1] = -(4.0 * l0 - 1.0);
    g[1][0] = 4.0 * l1 - 1.0;    g[1][1] = 0.0;
    g[2][0] = 0.0;               g[2][1] = 4.0 * l2 - 1.0;
    g[3][0] = 4.0 * (l0 - l1);   g[3][1] = -4.0 * l1;
    g[4][0] = 4.0 * l2;          g[4][1] = 4.0 * l1;
    g[5][0] = -4.0 * l2;         g[5][1] = 4.0 * (l0 - l2);
}

inline void p1_values(double xi, double eta, double psi[3]) {
    psi[0] = 1.0 - xi - eta;
    psi[1] = xi;
    psi[2] = eta;
}

inline void p1_ref_grads(double g[3][2]) {
    g[0][0] = -1.0; g[0][1] = -1.0;
    g[1][0] = 1.0;  g[1][1] = 0.0;
    g[2][0] = 0.0;  g[2][1] = 1.0;
}

}  // namespace blm
