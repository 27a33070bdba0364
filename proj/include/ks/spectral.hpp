#ifndef KS_SPECTRAL_HPP
#define KS_SPECTRAL_HPP

#include <complex>
#include <utility>

#include "ks/grid.hpp"

namespace ks {

namespace fft {
/// Forward DFT of real samples, normalized by 1/n^2 (coefficients of the
/// trigonometric interpolant). Backward sums the series and keeps the real
/// part. Plans are cached per grid size; execution is thread-safe.
void forward(const GridSpec& g, const double* in, std::complex<double>* out);
void backward(const GridSpec& g, const std::complex<double>* in, double* out);
} // namespace fft

SpectralField transform(const Field& f);
Field inverse_transform(const SpectralField& F);

/// Signed mode integer for coefficient index i.
inline int mode_of(const GridSpec& g, int i) { return i < g.n / 2 ? i : i - g.n; }
/// Wavenumber for coefficient index i.
inline double wavenumber(const GridSpec& g, int i) {
    return 3.14159265358979323846 / g.half_width * mode_of(g, i);
}

/// Spectral derivatives. Odd operators zero the Nyquist mode of their own
/// direction so that divergence(gradient(f)) == laplacian(f) holds exactly.
std::pair<Field, Field> gradient(const Field& f);
Field laplacian(const Field& f);
Field divergence(const Field& fx, const Field& fy);

/// Multiply the spectrum by e^{-|k|^2 t}; t = 0 is the identity and the zero
/// mode is preserved exactly. Rejects t < 0.
Field heat_propagate(const Field& f, double t);

/// Samples of M * G(x, t) with G the heat kernel; requires t > 0.
Field heat_kernel_field(double M, double t, const GridSpec& g);

/// Rectangle-rule L^p norm, p in [1, inf]; p = inf is the grid max.
double lp_norm(const Field& f, double p);

/// Rectangle-rule integral (the p = 1 quadrature without absolute value).
double integral(const Field& f);

/// Quadrature of |f|^2 e^{theta |xi|^2 / 4}. Fails with weight_overflow_error
/// when the weighted integrand at the boundary ring exceeds 1e-10.
double weighted_l2_norm(const Field& f, double theta);

/// 2/3-rule: zero every mode with max(|k_x|, |k_y|) above two thirds of the
/// Nyquist wavenumber.
SpectralField dealias(const SpectralField& F);
void dealias_inplace(SpectralField& F);

/// g(x) = amplitude * f(lambda x), evaluated from the trigonometric
/// interpolant (periodic extension outside the box). Callers are responsible
/// for checking that f is localized when lambda maps points outside the box.
Field dilate(const Field& f, double lambda, double amplitude);

/// max |f| on the outermost ring of samples.
double boundary_max(const Field& f);
/// max |f| over the grid.
double field_max_abs(const Field& f);
/// min value over the grid.
double field_min(const Field& f);

} // namespace ks

#endif
