#ifndef KS_GRID_HPP
#define KS_GRID_HPP

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ks {

/// Periodic square box [-L, L)^2 sampled on n x n points, n a power of two.
struct GridSpec {
    int n = 0;
    double half_width = 0;

    GridSpec() = default;
    GridSpec(int n_, double half_width_) : n(n_), half_width(half_width_) {
        if (n < 32 || (n & (n - 1)) != 0)
            throw std::invalid_argument("GridSpec: n must be a power of two >= 32");
        if (!(half_width > 0)) throw std::invalid_argument("GridSpec: half_width must be > 0");
    }

    double dx() const { return 2.0 * half_width / n; }
    double coord(int i) const { return -half_width + dx() * i; }
    std::size_t size() const { return static_cast<std::size_t>(n) * n; }
    bool operator==(const GridSpec&) const = default;
};

/// Real scalar samples on a GridSpec, row-major with x fastest:
/// value(i, j) = f(coord(i), coord(j)).
class Field {
public:
    Field() = default;
    explicit Field(const GridSpec& g, double fill = 0.0) : grid_(g), v_(g.size(), fill) {}

    template <class F>
    static Field sample(const GridSpec& g, F&& f) {
        Field out(g);
        for (int j = 0; j < g.n; ++j) {
            double y = g.coord(j);
            for (int i = 0; i < g.n; ++i) out(i, j) = f(g.coord(i), y);
        }
        return out;
    }

    double& operator()(int i, int j) { return v_[static_cast<std::size_t>(j) * grid_.n + i]; }
    double operator()(int i, int j) const {
        return v_[static_cast<std::size_t>(j) * grid_.n + i];
    }

    const GridSpec& grid() const { return grid_; }
    std::vector<double>& data() { return v_; }
    const std::vector<double>& data() const { return v_; }

private:
    GridSpec grid_;
    std::vector<double> v_;
};

/// Complex spectral coefficients in raw DFT layout: index i holds the signed
/// mode m = i < n/2 ? i : i - n, wavenumber k = (pi / L) * m.
class SpectralField {
public:
    SpectralField() = default;
    explicit SpectralField(const GridSpec& g) : grid_(g), c_(g.size()) {}

    std::complex<double>& operator()(int i, int j) {
        return c_[static_cast<std::size_t>(j) * grid_.n + i];
    }
    std::complex<double> operator()(int i, int j) const {
        return c_[static_cast<std::size_t>(j) * grid_.n + i];
    }

    const GridSpec& grid() const { return grid_; }
    std::vector<std::complex<double>>& data() { return c_; }
    const std::vector<std::complex<double>>& data() const { return c_; }

private:
    GridSpec grid_;
    std::vector<std::complex<double>> c_;
};

} // namespace ks

#endif
