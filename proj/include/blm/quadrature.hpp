#pragma once

#include <cmath>
#include <vector>

namespace blm {

// Quadrature rule on the reference triangle {(xi,eta): xi,eta >= 0, xi+eta <= 1}.
// Weights sum to the reference area 1/2, so on a physical element
//   int_T g dx = sum_q w_q * detJ * g(x_q).
//
// A single rule of polynomial exactness degree 5 serves every form in the
// discretization, including the cubic curl integrand (curl of a quadratic
// velocity is linear per element, so |curl u|^3-type terms are piecewise
// cubic and integrate exactly with margin).
struct TriQuadrature {
    std::vector<double> xi, eta, w;
    int degree = 0;

    int size() const { return static_cast<int>(w.size()); }

    // Radon 7-point rule, degree 5.
    static const TriQuadrature& degree5() {
        static const TriQuadrature rule = [] {
            TriQuadrature q;
            q.degree = 5;
            const double s15 = std::sqrt(15.0);
            const double a = (6.0 - s15) / 21.0;   // near-vertex family
            const double b = (6.0 + s15) / 21.0;   // near-edge family
            const double wa = (155.0 - s15) / 1200.0 / 2.0;
            const double wb = (155.0 + s15) / 1200.0 / 2.0;
            const double wc = 9.0 / 40.0 / 2.0;
            q.xi  = {1.0 / 3.0, 1.0 - 2.0 * a, a, a, 1.0 - 2.0 * b, b, b};
            q.eta = {1.0 / 3.0, a, 1.0 - 2.0 * a, a, b, 1.0 - 2.0 * b, b};
            q.w   = {wc, wa, wa, wa, wb, wb, wb};
            return q;
        }();
        return rule;
    }
};

}  // namespace blm
