#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "ks/errors.hpp"
#include "ks/spectral.hpp"

using namespace ks;

namespace {
constexpr double kPi = std::numbers::pi;

Field random_field(const GridSpec& g, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Field f(g);
    for (double& v : f.data()) v = unif(rng);
    return f;
}

double rel_l2(const Field& a, const Field& b) {
    double num = 0, den = 0;
    for (std::size_t k = 0; k < a.data().size(); ++k) {
        double d = a.data()[k] - b.data()[k];
        num += d * d;
        den += b.data()[k] * b.data()[k];
    }
    return std::sqrt(num / den);
}
} // namespace

TEST_CASE("GridSpec rejects bad sizes") {
    CHECK_THROWS_AS(GridSpec(48, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(GridSpec(16, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(GridSpec(64, -1.0), std::invalid_argument);
    GridSpec g(64, 3.0);
    CHECK(g.dx() == doctest::Approx(6.0 / 64));
}

TEST_CASE("transform round trip and special spectra") {
    GridSpec g(64, 2.0);

    Field c(g, 3.25);
    SpectralField C = transform(c);
    CHECK(C(0, 0).real() == doctest::Approx(3.25).epsilon(1e-14));
    double off = 0;
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i)
            if (i || j) off = std::max(off, std::abs(C(i, j)));
    CHECK(off < 1e-14);

    // single cosine mode -> one conjugate coefficient pair
    Field cosf =
        Field::sample(g, [&](double x, double) { return std::cos(3.0 * kPi / 2.0 * x); });
    SpectralField F = transform(cosf);
    CHECK(std::abs(F(3, 0)) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(F(g.n - 3, 0)) == doctest::Approx(0.5).epsilon(1e-12));

    Field r = random_field(g, 7);
    CHECK(rel_l2(inverse_transform(transform(r)), r) < 1e-12);
}

TEST_CASE("spectral derivatives") {
    GridSpec g(128, 5.0);
    Field f = Field::sample(g, [&](double x, double) { return std::cos(kPi * x / 5.0); });
    auto [fx, fy] = gradient(f);
    Field want = Field::sample(
        g, [&](double x, double) { return -(kPi / 5.0) * std::sin(kPi * x / 5.0); });
    double worst = 0;
    for (std::size_t k = 0; k < fx.data().size(); ++k)
        worst = std::max(worst, std::fabs(fx.data()[k] - want.data()[k]));
    CHECK(worst < 1e-12);
    CHECK(field_max_abs(fy) < 1e-12);

    // centered Gaussian Laplacian against the closed form
    const double s = 0.7;
    Field gau = Field::sample(
        g, [&](double x, double y) { return std::exp(-(x * x + y * y) / (2 * s * s)); });
    Field lap = laplacian(gau);
    double worst2 = 0;
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            double x = g.coord(i), y = g.coord(j), r2 = x * x + y * y;
            double want2 =
                (r2 / (s * s * s * s) - 2.0 / (s * s)) * std::exp(-r2 / (2 * s * s));
            worst2 = std::max(worst2, std::fabs(lap(i, j) - want2));
        }
    CHECK(worst2 < 1e-8);

    // operator identity on a random field
    Field r = random_field(g, 3);
    auto [rx, ry] = gradient(r);
    Field div = divergence(rx, ry);
    Field lap_r = laplacian(r);
    double worst3 = 0;
    for (std::size_t k = 0; k < div.data().size(); ++k)
        worst3 = std::max(worst3, std::fabs(div.data()[k] - lap_r.data()[k]));
    CHECK(worst3 < 1e-10 * field_max_abs(lap_r));
}

TEST_CASE("heat propagation") {
    // box chosen so the final Gaussian's boundary trace is < 1e-14
    GridSpec g(128, 14.0);
    const double t0 = 0.5, t = 0.75;
    Field u0 = heat_kernel_field(1.0, t0, g);

    SUBCASE("identity at t = 0 and exact zero-mode preservation") {
        Field same = heat_propagate(u0, 0.0);
        CHECK(rel_l2(same, u0) == 0.0);
        SpectralField a = transform(u0);
        SpectralField b = transform(heat_propagate(u0, 1.0));
        CHECK(a(0, 0).real() == b(0, 0).real());
        CHECK_THROWS_AS(heat_propagate(u0, -1.0), std::invalid_argument);
    }

    SUBCASE("Gaussian composition law") {
        Field prop = heat_propagate(u0, t);
        Field want = heat_kernel_field(1.0, t0 + t, g);
        double worst = 0;
        for (std::size_t k = 0; k < prop.data().size(); ++k)
            worst = std::max(worst, std::fabs(prop.data()[k] - want.data()[k]));
        CHECK(worst < 1e-10);
    }

    SUBCASE("semigroup property") {
        Field one = heat_propagate(heat_propagate(u0, 0.3), 0.45);
        Field two = heat_propagate(u0, 0.75);
        CHECK(rel_l2(one, two) < 1e-12);
    }
}

TEST_CASE("heat kernel samples") {
    GridSpec g(128, 12.0);
    const double M = 2.5, t = 1.25;
    Field f = heat_kernel_field(M, t, g);
    CHECK(integral(f) == doctest::Approx(M).epsilon(1e-10));
    CHECK(field_max_abs(f) == doctest::Approx(M / (4 * kPi * t)).epsilon(1e-14));
    // ||M G(t)||_p = M (4 pi t)^{-(1-1/p)} p^{-1/p} at p = 2
    double want = M * std::pow(4 * kPi * t, -0.5) / std::sqrt(2.0);
    CHECK(lp_norm(f, 2.0) == doctest::Approx(want).epsilon(1e-8));
    CHECK_THROWS_AS(heat_kernel_field(1.0, 0.0, g), std::invalid_argument);
}

TEST_CASE("lp norms") {
    GridSpec g(64, 8.0);
    Field bump =
        Field::sample(g, [](double x, double y) { return std::exp(-(x * x + y * y)); });
    double n1 = lp_norm(bump, 1.0);
    Field scaled = bump;
    for (double& v : scaled.data()) v *= -2.5;
    CHECK(lp_norm(scaled, 1.0) == doctest::Approx(2.5 * n1).epsilon(1e-14));
    CHECK(lp_norm(scaled, std::numeric_limits<double>::infinity()) ==
          doctest::Approx(2.5).epsilon(1e-14));

    Field gau = heat_kernel_field(3.0, 0.7, g);
    CHECK(lp_norm(gau, 1.0) == doctest::Approx(3.0).epsilon(1e-10));
    CHECK_THROWS_AS(lp_norm(gau, 0.5), std::invalid_argument);
}

TEST_CASE("weighted L2 norm") {
    GridSpec g(128, 12.0);
    // f = e^{-|xi|^2/4} = K_1^{-1}, theta = 1: the weighted square integral
    // collapses to int e^{-|xi|^2/4} = 4 pi
    Field f = Field::sample(
        g, [](double x, double y) { return std::exp(-(x * x + y * y) / 4.0); });
    double w = weighted_l2_norm(f, 1.0);
    CHECK(w * w == doctest::Approx(4 * kPi).epsilon(1e-8));
    CHECK(std::isfinite(w));

    Field half = f;
    for (double& v : half.data()) v *= 0.5;
    CHECK(weighted_l2_norm(half, 1.0) == doctest::Approx(0.5 * w).epsilon(1e-12));

    // a field that decays too slowly for the weight must be rejected
    Field wide = Field::sample(
        g, [](double x, double y) { return std::exp(-(x * x + y * y) / 100.0); });
    CHECK_THROWS_AS(weighted_l2_norm(wide, 1.0), weight_overflow_error);
    CHECK_THROWS_AS(weighted_l2_norm(f, -1.0), std::invalid_argument);
}

TEST_CASE("dealiasing") {
    GridSpec g(32, kPi);
    const int cut = g.n / 3;

    // band-limited field below the cutoff is unchanged
    Field low = Field::sample(
        g, [&](double x, double y) { return std::cos(3.0 * x) + std::sin(2.0 * y); });
    SpectralField L = dealias(transform(low));
    CHECK(rel_l2(inverse_transform(L), low) < 1e-13);

    // product of modes 8 and 7: cos 8x cos 7x = (cos x + cos 15x)/2 and the
    // mode-15 half lies above the cutoff
    Field f1 = Field::sample(g, [&](double x, double) { return std::cos(8.0 * x); });
    Field f2 = Field::sample(g, [&](double x, double) { return std::cos(7.0 * x); });
    Field prod(g);
    for (std::size_t k = 0; k < prod.data().size(); ++k)
        prod.data()[k] = f1.data()[k] * f2.data()[k];
    SpectralField P = dealias(transform(prod));
    for (int i = 0; i < g.n; ++i) {
        int m = std::abs(mode_of(g, i));
        if (m > cut) CHECK(std::abs(P(i, 0)) == 0.0);
    }
    CHECK(std::abs(P(1, 0)) == doctest::Approx(0.25).epsilon(1e-12));

    // direct dense convolution agreement on every retained mode
    SpectralField A = transform(f1), B = transform(f2);
    const int n = g.n;
    double worst = 0;
    for (int mj = -cut; mj <= cut; ++mj) {
        for (int mi = -cut; mi <= cut; ++mi) {
            std::complex<double> conv = 0;
            for (int qj = 0; qj < n; ++qj)
                for (int qi = 0; qi < n; ++qi) {
                    int pi = mi - mode_of(g, qi), pj = mj - mode_of(g, qj);
                    if (pi < -n / 2 || pi >= n / 2 || pj < -n / 2 || pj >= n / 2) continue;
                    int ii = pi < 0 ? pi + n : pi, jj = pj < 0 ? pj + n : pj;
                    conv += A(qi, qj) * B(ii, jj);
                }
            int ii = mi < 0 ? mi + n : mi, jj = mj < 0 ? mj + n : mj;
            worst = std::max(worst, std::abs(P(ii, jj) - conv));
        }
    }
    CHECK(worst < 1e-12);

    // idempotent
    SpectralField PP = dealias(P);
    bool same = true;
    for (std::size_t k = 0; k < P.data().size(); ++k)
        same = same && PP.data()[k] == P.data()[k];
    CHECK(same);
}

TEST_CASE("drift-diffusion eigenfunction identity") {
    // -(laplacian + theta xi/2 . grad) e^{-theta |xi|^2/4} = theta e^{-theta |xi|^2/4}
    for (double theta : {1.0, 0.5}) {
        // the box must hold the eigenfunction's tail below roundoff
        GridSpec g(256, theta == 1.0 ? 12.0 : 16.0);
        Field f = Field::sample(g, [&](double x, double y) {
            return std::exp(-theta * (x * x + y * y) / 4.0);
        });
        Field lap = laplacian(f);
        auto [fx, fy] = gradient(f);
        double worst = 0;
        for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.n; ++i) {
                double x = g.coord(i), y = g.coord(j);
                if (x * x + y * y > 36.0) continue;  // interior error only
                double lhs = -(lap(i, j) + theta * 0.5 * (x * fx(i, j) + y * fy(i, j)));
                worst = std::max(worst, std::fabs(lhs - theta * f(i, j)));
            }
        CHECK(worst < 1e-8);
    }
}

TEST_CASE("dilation evaluates the interpolant at scaled points") {
    GridSpec g(128, 10.0);
    const double s = 0.8;
    Field f = Field::sample(
        g, [&](double x, double y) { return std::exp(-(x * x + y * y) / (2 * s * s)); });
    const double lam = 1.3;
    Field d = dilate(f, lam, 2.0);
    double worst = 0;
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            double x = lam * g.coord(i), y = lam * g.coord(j);
            double want = 2.0 * std::exp(-(x * x + y * y) / (2 * s * s));
            worst = std::max(worst, std::fabs(d(i, j) - want));
        }
    CHECK(worst < 1e-10);
}
