#include "ks/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "ks/errors.hpp"

namespace ks {

namespace {

constexpr double kPi = std::numbers::pi;

struct Plans {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

/// Per-size plan cache. FFTW_ESTIMATE keeps planning deterministic and
/// FFTW_UNALIGNED lets the plans run on ordinary vector storage.
Plans& plans_for(int n) {
    static std::mutex mu;
    static std::map<int, Plans> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    std::vector<std::complex<double>> a(static_cast<std::size_t>(n) * n),
        b(static_cast<std::size_t>(n) * n);
    Plans p;
    p.fwd = fftw_plan_dft_2d(n, n, reinterpret_cast<fftw_complex*>(a.data()),
                             reinterpret_cast<fftw_complex*>(b.data()), FFTW_FORWARD,
                             FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.bwd = fftw_plan_dft_2d(n, n, reinterpret_cast<fftw_complex*>(a.data()),
                             reinterpret_cast<fftw_complex*>(b.data()), FFTW_BACKWARD,
                             FFTW_ESTIMATE | FFTW_UNALIGNED);
    return cache.emplace(n, p).first->second;
}

} // namespace

namespace fft {

void forward(const GridSpec& g, const double* in, std::complex<double>* out) {
    std::vector<std::complex<double>> tmp(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) tmp[i] = in[i];
    Plans& p = plans_for(g.n);
    fftw_execute_dft(p.fwd, reinterpret_cast<fftw_complex*>(tmp.data()),
                     reinterpret_cast<fftw_complex*>(out));
    double scale = 1.0 / static_cast<double>(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) out[i] *= scale;
}

void backward(const GridSpec& g, const std::complex<double>* in, double* out) {
    std::vector<std::complex<double>> tmp(g.size());
    Plans& p = plans_for(g.n);
    fftw_execute_dft(p.bwd, reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                     reinterpret_cast<fftw_complex*>(tmp.data()));
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = tmp[i].real();
}

} // namespace fft

SpectralField transform(const Field& f) {
    SpectralField F(f.grid());
    fft::forward(f.grid(), f.data().data(), F.data().data());
    return F;
}

Field inverse_transform(const SpectralField& F) {
    Field f(F.grid());
    fft::backward(F.grid(), F.data().data(), f.data().data());
    return f;
}

std::pair<Field, Field> gradient(const Field& f) {
    const GridSpec& g = f.grid();
    SpectralField F = transform(f);
    SpectralField Gx(g), Gy(g);
    const int nyq = g.n / 2;
    for (int j = 0; j < g.n; ++j) {
        double ky = (j == nyq) ? 0.0 : wavenumber(g, j);
        for (int i = 0; i < g.n; ++i) {
            double kx = (i == nyq) ? 0.0 : wavenumber(g, i);
            std::complex<double> c = F(i, j);
            Gx(i, j) = std::complex<double>(0, kx) * c;
            Gy(i, j) = std::complex<double>(0, ky) * c;
        }
    }
    return {inverse_transform(Gx), inverse_transform(Gy)};
}

Field laplacian(const Field& f) {
    const GridSpec& g = f.grid();
    SpectralField F = transform(f);
    const int nyq = g.n / 2;
    for (int j = 0; j < g.n; ++j) {
        double ky = (j == nyq) ? 0.0 : wavenumber(g, j);
        for (int i = 0; i < g.n; ++i) {
            double kx = (i == nyq) ? 0.0 : wavenumber(g, i);
            F(i, j) *= -(kx * kx + ky * ky);
        }
    }
    return inverse_transform(F);
}

Field divergence(const Field& fx, const Field& fy) {
    if (!(fx.grid() == fy.grid()))
        throw std::invalid_argument("divergence: component grids differ");
    const GridSpec& g = fx.grid();
    SpectralField Fx = transform(fx), Fy = transform(fy);
    const int nyq = g.n / 2;
    for (int j = 0; j < g.n; ++j) {
        double ky = (j == nyq) ? 0.0 : wavenumber(g, j);
        for (int i = 0; i < g.n; ++i) {
            double kx = (i == nyq) ? 0.0 : wavenumber(g, i);
            Fx(i, j) = std::complex<double>(0, kx) * Fx(i, j) +
                       std::complex<double>(0, ky) * Fy(i, j);
        }
    }
    return inverse_transform(Fx);
}

Field heat_propagate(const Field& f, double t) {
    if (t < 0) throw std::invalid_argument("heat_propagate: t must be >= 0");
    if (t == 0) return f;
    const GridSpec& g = f.grid();
    SpectralField F = transform(f);
    for (int j = 0; j < g.n; ++j) {
        double ky = wavenumber(g, j);
        for (int i = 0; i < g.n; ++i) {
            double kx = wavenumber(g, i);
            F(i, j) *= std::exp(-(kx * kx + ky * ky) * t);
        }
    }
    return inverse_transform(F);
}

Field heat_kernel_field(double M, double t, const GridSpec& g) {
    if (!(t > 0)) throw std::invalid_argument("heat_kernel_field: t must be > 0");
    double c = M / (4.0 * kPi * t);
    return Field::sample(g, [&](double x, double y) {
        return c * std::exp(-(x * x + y * y) / (4.0 * t));
    });
}

double lp_norm(const Field& f, double p) {
    if (std::isinf(p)) return field_max_abs(f);
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
    double da = f.grid().dx() * f.grid().dx();
    double acc = 0;
    if (p == 1.0) {
        for (double v : f.data()) acc += std::fabs(v);
    } else if (p == 2.0) {
        for (double v : f.data()) acc += v * v;
    } else {
        for (double v : f.data()) acc += std::pow(std::fabs(v), p);
    }
    return std::pow(acc * da, 1.0 / p);
}

double integral(const Field& f) {
    double acc = 0;
    for (double v : f.data()) acc += v;
    return acc * f.grid().dx() * f.grid().dx();
}

double weighted_l2_norm(const Field& f, double theta) {
    if (!(theta > 0)) throw std::invalid_argument("weighted_l2_norm: theta must be > 0");
    const GridSpec& g = f.grid();
    // boundary check first: weight times integrand must be negligible there
    double worst = 0;
    auto probe = [&](int i, int j) {
        double x = g.coord(i), y = g.coord(j);
        double v = f(i, j);
        worst = std::max(worst, v * v * std::exp(theta * (x * x + y * y) / 4.0));
    };
    for (int i = 0; i < g.n; ++i) {
        probe(i, 0);
        probe(i, g.n - 1);
        probe(0, i);
        probe(g.n - 1, i);
    }
    if (worst > 1e-10)
        throw weight_overflow_error("weighted_l2_norm: weighted integrand at boundary = " +
                                    std::to_string(worst));
    double acc = 0;
    for (int j = 0; j < g.n; ++j) {
        double y = g.coord(j);
        for (int i = 0; i < g.n; ++i) {
            double x = g.coord(i);
            double v = f(i, j);
            acc += v * v * std::exp(theta * (x * x + y * y) / 4.0);
        }
    }
    return std::sqrt(acc * g.dx() * g.dx());
}

void dealias_inplace(SpectralField& F) {
    const GridSpec& g = F.grid();
    const int cut = g.n / 3;
    for (int j = 0; j < g.n; ++j) {
        int mj = std::abs(mode_of(g, j));
        for (int i = 0; i < g.n; ++i) {
            int mi = std::abs(mode_of(g, i));
            if (mi > cut || mj > cut) F(i, j) = 0.0;
        }
    }
}

SpectralField dealias(const SpectralField& F) {
    SpectralField out = F;
    dealias_inplace(out);
    return out;
}

Field dilate(const Field& f, double lambda, double amplitude) {
    const GridSpec& g = f.grid();
    const int n = g.n;
    SpectralField F = transform(f);

    // Evaluate the interpolant at x' = lambda * coord(i) with phases measured
    // from the grid origin: f(x) = sum_m c_m e^{2 pi i m (x + L) / (2L)}.
    // Separable: two n^3 partial summations. The Nyquist column/row is
    // dropped (its coefficient is at machine noise for localized fields and
    // has no symmetric partner).
    std::vector<std::complex<double>> E(static_cast<std::size_t>(n) * n);
    const int nyq = n / 2;
    for (int t = 0; t < n; ++t) {
        double u = (lambda * g.coord(t) + g.half_width) / (2.0 * g.half_width);
        for (int m = 0; m < n; ++m) {
            E[static_cast<std::size_t>(t) * n + m] =
                (m == nyq) ? 0.0 : std::polar(1.0, 2.0 * kPi * mode_of(g, m) * u);
        }
    }

    // A[j][i'] = sum_i C[j][i] E[i'][i]
    std::vector<std::complex<double>> A(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        const std::complex<double>* row = &F.data()[static_cast<std::size_t>(j) * n];
        for (int ip = 0; ip < n; ++ip) {
            const std::complex<double>* e = &E[static_cast<std::size_t>(ip) * n];
            std::complex<double> acc = 0;
            for (int i = 0; i < n; ++i) acc += row[i] * e[i];
            A[static_cast<std::size_t>(j) * n + ip] = acc;
        }
    }
    // out[j'][i'] = Re sum_j A[j][i'] E[j'][j]
    Field out(g);
    for (int jp = 0; jp < n; ++jp) {
        const std::complex<double>* e = &E[static_cast<std::size_t>(jp) * n];
        for (int ip = 0; ip < n; ++ip) {
            std::complex<double> acc = 0;
            for (int j = 0; j < n; ++j) acc += A[static_cast<std::size_t>(j) * n + ip] * e[j];
            out(ip, jp) = amplitude * acc.real();
        }
    }
    return out;
}

double boundary_max(const Field& f) {
    const GridSpec& g = f.grid();
    double mx = 0;
    for (int i = 0; i < g.n; ++i) {
        mx = std::max(mx, std::fabs(f(i, 0)));
        mx = std::max(mx, std::fabs(f(i, g.n - 1)));
        mx = std::max(mx, std::fabs(f(0, i)));
        mx = std::max(mx, std::fabs(f(g.n - 1, i)));
    }
    return mx;
}

double field_max_abs(const Field& f) {
    double mx = 0;
    for (double v : f.data()) mx = std::max(mx, std::fabs(v));
    return mx;
}

double field_min(const Field& f) {
    double mn = f.data().empty() ? 0.0 : f.data()[0];
    for (double v : f.data()) mn = std::min(mn, v);
    return mn;
}

} // namespace ks
