#ifndef KS_CUBIC_SPLINE_HPP
#define KS_CUBIC_SPLINE_HPP

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ks {

/// Cubic interpolating spline with not-a-knot end conditions.
/// Nodes must be strictly increasing; evaluation outside the node range
/// throws std::domain_error.
class CubicSpline {
public:
    CubicSpline() = default;

    CubicSpline(std::vector<double> x, std::vector<double> f)
        : x_(std::move(x)), f_(std::move(f)) {
        const std::size_t n = x_.size();
        if (n != f_.size() || n < 2)
            throw std::invalid_argument("CubicSpline: need >= 2 matching nodes");
        for (std::size_t i = 0; i + 1 < n; ++i)
            if (!(x_[i] < x_[i + 1]))
                throw std::invalid_argument("CubicSpline: nodes must be strictly increasing");
        m_.assign(n, 0.0);
        if (n == 2) return;  // linear interpolant, second derivatives stay zero

        std::vector<double> h(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) h[i] = x_[i + 1] - x_[i];

        // Tridiagonal system for the interior second derivatives m_1..m_{n-2};
        // the not-a-knot rows for m_0 and m_{n-1} are folded into the first
        // and last interior equations.
        const std::size_t m = n - 2;
        std::vector<double> lo(m, 0.0), di(m, 0.0), up(m, 0.0), rhs(m, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            std::size_t k = i - 1;
            lo[k] = h[i - 1] / 6.0;
            di[k] = (h[i - 1] + h[i]) / 3.0;
            up[k] = h[i] / 6.0;
            rhs[k] = (f_[i + 1] - f_[i]) / h[i] - (f_[i] - f_[i - 1]) / h[i - 1];
        }
        if (n == 3) {
            // single parabola through three points
            m_[1] = 2.0 * rhs[0] / (h[0] + h[1]);
            m_[0] = m_[1];
            m_[2] = m_[1];
            return;
        }
        // not-a-knot left: h1*m0 = (h0+h1)*m1 - h0*m2
        di[0] += lo[0] * (h[0] + h[1]) / h[1];
        up[0] -= lo[0] * h[0] / h[1];
        lo[0] = 0.0;
        // not-a-knot right: h_{n-3}*m_{n-1} = (h_{n-2}+h_{n-3})*m_{n-2} - h_{n-2}*m_{n-3}
        di[m - 1] += up[m - 1] * (h[n - 2] + h[n - 3]) / h[n - 3];
        lo[m - 1] -= up[m - 1] * h[n - 2] / h[n - 3];
        up[m - 1] = 0.0;

        // Thomas algorithm
        for (std::size_t k = 1; k < m; ++k) {
            double w = lo[k] / di[k - 1];
            di[k] -= w * up[k - 1];
            rhs[k] -= w * rhs[k - 1];
        }
        std::vector<double> sol(m);
        sol[m - 1] = rhs[m - 1] / di[m - 1];
        for (std::size_t k = m - 1; k-- > 0;) sol[k] = (rhs[k] - up[k] * sol[k + 1]) / di[k];
        for (std::size_t k = 0; k < m; ++k) m_[k + 1] = sol[k];
        m_[0] = ((h[0] + h[1]) * m_[1] - h[0] * m_[2]) / h[1];
        m_[n - 1] = ((h[n - 2] + h[n - 3]) * m_[n - 2] - h[n - 2] * m_[n - 3]) / h[n - 3];
    }

    double operator()(double x) const {
        const std::size_t n = x_.size();
        if (x < x_.front() || x > x_.back())
            throw std::domain_error("CubicSpline: evaluation outside node range");
        std::size_t i = std::upper_bound(x_.begin(), x_.end(), x) - x_.begin();
        if (i == 0) i = 1;
        if (i >= n) i = n - 1;
        --i;
        double h = x_[i + 1] - x_[i];
        double A = (x_[i + 1] - x) / h, B = (x - x_[i]) / h;
        return A * f_[i] + B * f_[i + 1] +
               ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * h * h / 6.0;
    }

    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }

private:
    std::vector<double> x_, f_, m_;
};

} // namespace ks

#endif
