#ifndef KS_ODE_HPP
#define KS_ODE_HPP

#include <array>
#include <cmath>
#include <cstddef>

#include "ks/errors.hpp"

namespace ks {

/// Dormand-Prince 5(4) embedded pair with standard error-based step control.
///
/// Integrates y' = f(x, y) from x0 to x_end. When out_nodes is non-empty the
/// integrator lands exactly on each node in (x0, x_end] and calls
/// on_node(x, y) there; the nominal step size is preserved across such
/// clipped landings. Returns the state at x_end.
template <std::size_t N, class Rhs, class NodeFn>
std::array<double, N> dopri5_integrate(Rhs&& f, double x0, std::array<double, N> y,
                                       double x_end, double rel_tol, double abs_tol,
                                       NodeFn&& on_node,
                                       const double* out_nodes = nullptr,
                                       std::size_t n_out = 0) {
    using State = std::array<double, N>;

    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // b - b*: weights for the embedded error estimate
    static constexpr double d1 = 71.0 / 57600, d3 = -71.0 / 16695, d4 = 71.0 / 1920,
                            d5 = -17253.0 / 339200, d6 = 22.0 / 525, d7 = -1.0 / 40;

    double x = x0;
    State k1 = f(x, y);
    double h_nom = 1e-4 * (x_end - x0);
    std::size_t next_out = 0;
    while (out_nodes && next_out < n_out && out_nodes[next_out] <= x0) ++next_out;

    const double h_min = 1e-14 * (x_end - x0);
    State t, k2, k3, k4, k5, k6, k7, y5;
    while (x < x_end) {
        double h = h_nom;
        bool clipped_end = false, clipped_node = false;
        if (x + h >= x_end) { h = x_end - x; clipped_end = true; }
        if (out_nodes && next_out < n_out && x + h >= out_nodes[next_out]) {
            h = out_nodes[next_out] - x;
            clipped_node = true;
            clipped_end = false;
        }

        for (std::size_t i = 0; i < N; ++i) t[i] = y[i] + h * a21 * k1[i];
        k2 = f(x + c2 * h, t);
        for (std::size_t i = 0; i < N; ++i) t[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        k3 = f(x + c3 * h, t);
        for (std::size_t i = 0; i < N; ++i)
            t[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        k4 = f(x + c4 * h, t);
        for (std::size_t i = 0; i < N; ++i)
            t[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        k5 = f(x + c5 * h, t);
        for (std::size_t i = 0; i < N; ++i)
            t[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                               a65 * k5[i]);
        k6 = f(x + h, t);
        for (std::size_t i = 0; i < N; ++i)
            y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        k7 = f(x + h, y5);

        double err = 0;
        for (std::size_t i = 0; i < N; ++i) {
            double e = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] +
                            d7 * k7[i]);
            double sc = abs_tol + rel_tol * std::max(std::fabs(y[i]), std::fabs(y5[i]));
            double q = e / sc;
            err += q * q;
        }
        err = std::sqrt(err / N);
        if (!std::isfinite(err)) throw integration_error("non-finite state in dopri5", x);

        if (err <= 1.0) {
            x = clipped_node ? out_nodes[next_out] : (clipped_end ? x_end : x + h);
            y = y5;
            k1 = k7;  // FSAL
            if (clipped_node) {
                on_node(x, y);
                ++next_out;
            }
            double fac = err > 0 ? std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)))
                                 : 5.0;
            double h_new = h * fac;
            // a step clipped to land on a node must not shrink the nominal step
            h_nom = (clipped_node || clipped_end) ? std::max(h_nom, h_new) : h_new;
        } else {
            h_nom = h * std::max(0.1, 0.9 * std::pow(err, -0.2));
        }
        if (h_nom < h_min) throw integration_error("step size underflow in dopri5", x);
    }
    return y;
}

} // namespace ks

#endif
