#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ks/errors.hpp"
#include "ks/profile.hpp"
#include "reference_ode.hpp"

using namespace ks;

namespace {
constexpr double kPi = std::numbers::pi;

// frozen oracle values (dual-integrator agreement checked below)
constexpr double kMass_a1_eps1 = 12.723566070074504;   // M(1, 1)
constexpr double kA_4pi_eps05 = 1.1064601912143726;    // invert_mass(4 pi, 0.5)
constexpr double kA_of_1 = 4.69348449872318984756801;  // e^{1/2} / (2 - e^{1/2})
} // namespace

TEST_CASE("ode_rhs matches direct substitution") {
    auto r = ode_rhs(1.0, {0.5, 0.2, 0.3}, 1.0);
    CHECK(r[0] == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(r[1] == doctest::Approx(-0.2 / 4.0 - 0.2 * 0.3 / 2.0).epsilon(1e-15));
    CHECK(r[2] == doctest::Approx(0.2 - 0.25 * 0.3).epsilon(1e-15));

    auto z = ode_rhs(3.7, {0.9, 0.0, 0.4}, 2.0);
    CHECK(z[1] == 0.0);
    CHECK(z[2] == doctest::Approx(-0.5 * 0.4).epsilon(1e-15));

    auto w = ode_rhs(2.0, {1.0, 0.1, 0.4}, 0.5);
    CHECK(w[1] == doctest::Approx(-0.035).epsilon(1e-12));
    CHECK(w[2] == doctest::Approx(0.05).epsilon(1e-12));

    CHECK_THROWS_AS(ode_rhs(0.0, {0, 1, 0}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ode_rhs(1.0, {0, std::nan(""), 0}, 1.0), std::invalid_argument);
}

TEST_CASE("series_start limits and Richardson consistency") {
    CHECK_THROWS_AS(series_start(1.0, 1.0, 0.0), std::invalid_argument);

    // h -> 0: phi'(h) -> a and S(h)/h -> a
    auto tiny = series_start(1.0, 1.0, 1e-12);
    CHECK(tiny[1] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(tiny[2] / 1e-12 == doctest::Approx(1.0).epsilon(1e-10));

    // phi''(0) = -a/4 - a^2/2
    auto s = series_start(1.0, 1.0, 1e-4);
    CHECK(s[1] == doctest::Approx(1.0 - 0.75e-4).epsilon(1e-12));
    auto s2 = series_start(2.0, 0.5, 1e-6);
    CHECK((s2[1] - 2.0) / 1e-6 == doctest::Approx(-2.5).epsilon(1e-9));

    // start from h and from h/10 must agree once integrated to the same point
    const double eps = 1.0, h = 1e-4;
    auto from_h = series_start(1.0, eps, h);
    auto fine = series_start(1.0, eps, h / 10.0);
    // march the fine start to h with tiny RK4 steps (independent of dopri5)
    std::array<double, 3> st = fine;
    double y = h / 10.0;
    int nstep = 2000;
    double dh = (h - y) / nstep;
    for (int i = 0; i < nstep; ++i) {
        auto f = [&](double yy, std::array<double, 3> v) {
            return ode_rhs(yy, v, eps);
        };
        auto k1 = f(y, st);
        std::array<double, 3> t;
        for (int j = 0; j < 3; ++j) t[j] = st[j] + 0.5 * dh * k1[j];
        auto k2 = f(y + 0.5 * dh, t);
        for (int j = 0; j < 3; ++j) t[j] = st[j] + 0.5 * dh * k2[j];
        auto k3 = f(y + 0.5 * dh, t);
        for (int j = 0; j < 3; ++j) t[j] = st[j] + dh * k3[j];
        auto k4 = f(y + dh, t);
        for (int j = 0; j < 3; ++j)
            st[j] += dh / 6.0 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
        y += dh;
    }
    // the second-order start carries an O(h^3) truncation of its own
    CHECK(st[1] == doctest::Approx(from_h[1]).epsilon(1e-7));
    CHECK(st[2] == doctest::Approx(from_h[2]).epsilon(1e-6));
}

TEST_CASE("integrate_profile: bounds, mass window, tail decay") {
    ShootingConfig cfg;
    cfg.a = 1.0;
    cfg.epsilon = 1.0;
    cfg.dy_out = 0.01;
    ProfileSolution sol = integrate_profile(cfg);

    CHECK(sol.y.front() == 0.0);
    CHECK(sol.phi.front() == 0.0);
    CHECK(sol.phi_prime.front() == 1.0);
    CHECK(sol.S.front() == 0.0);

    ProfileBounds b = check_profile_bounds(sol);
    CHECK(b.all_ok());
    CHECK(b.eps_s_applicable);

    // mass in [4 pi, 8 pi) and equal to the frozen oracle constant
    CHECK(sol.mass >= 4.0 * kPi);
    CHECK(sol.mass < 8.0 * kPi);
    CHECK(sol.mass == doctest::Approx(kMass_a1_eps1).epsilon(1e-9));

    // phi'(4) <= e^{-1}
    for (std::size_t i = 0; i < sol.y.size(); ++i) {
        if (sol.y[i] >= 4.0) {
            CHECK(sol.phi_prime[i] <= std::exp(-1.0) * (1 + 1e-12));
            break;
        }
    }
}

TEST_CASE("mass lower bound near zero shooting parameter") {
    // M/(8 pi) >= a min(1,eps) / (a + min(1,eps)); at a = 1e-6 the ratio is
    // within 1e-6 of one
    double m = mass_of(1e-6, 1.0);
    double ratio = m / (8.0 * kPi * 1e-6);
    CHECK(ratio > 0.999999);
    CHECK(ratio < 1.0);
}

TEST_CASE("oracle equivalence of the two integrators") {
    for (double a : {0.5, 1.0, 2.0}) {
        for (double eps : {0.5, 1.0, 2.0}) {
            double adaptive = mass_of(a, eps);
            double reference = ks_test::reference_mass(a, eps).mass;
            CHECK(std::fabs(adaptive - reference) / adaptive < 1e-8);
        }
    }
}

TEST_CASE("tail correction: doubling y_max is inert") {
    ShootingConfig cfg;
    cfg.rel_tol = 1e-12;
    cfg.abs_tol = 1e-18;
    for (auto [a, eps] : {std::pair{1.0, 1.0}, std::pair{2.0, 0.5}}) {
        cfg.a = a;
        cfg.epsilon = eps;
        cfg.y_max = 80.0;
        double m80 = integrate_profile(cfg).mass;
        cfg.y_max = 160.0;
        double m160 = integrate_profile(cfg).mass;
        CHECK(std::fabs(m160 - m80) / m80 < 1e-10);
    }
}

TEST_CASE("mass map is monotone and saturates at 8 pi") {
    CHECK(mass_of(2.0, 0.5) > mass_of(1.0, 0.5));
    CHECK(mass_of(1e4, 0.5) > 0.99 * 8.0 * kPi);
    CHECK(mass_of(0.3, 2.0) > 0.0);
}

TEST_CASE("invert_mass round trips and rejects out-of-range masses") {
    for (double eps : {0.5, 1.0}) {
        for (double a0 : {0.1, 1.0, 3.0}) {
            if (eps == 1.0 && a0 >= std::max(A_of(eps), 1.0)) continue;
            double M = mass_of(a0, eps);
            if (M >= tildeM_of(eps)) continue;
            double a = invert_mass(M, eps);
            CHECK(std::fabs(a - a0) / a0 < 1e-6);
        }
    }
    double a4pi = invert_mass(4.0 * kPi, 0.5);
    CHECK(a4pi == doctest::Approx(kA_4pi_eps05).epsilon(1e-7));
    double check = ks_test::reference_mass(a4pi, 0.5).mass;
    CHECK(std::fabs(check - 4.0 * kPi) / (4.0 * kPi) < 1e-7);

    CHECK_THROWS_AS(invert_mass(tildeM_of(0.5), 0.5), std::domain_error);
    CHECK_THROWS_AS(invert_mass(-1.0, 0.5), std::invalid_argument);

    // M -> 0: a stays below the rearranged lower-bound scale
    double a_small = invert_mass(1e-4, 1.0);
    CHECK(a_small < 2.0 * 1e-4 / (8.0 * kPi - 1e-4));
}

TEST_CASE("closed-form thresholds") {
    CHECK(A_of(0.4) == std::numeric_limits<double>::infinity());
    CHECK(A_of(1.0) == doctest::Approx(kA_of_1).epsilon(1e-13));
    CHECK(A_of(0.5 * (1.0 + 1e-9)) > 1e8);

    CHECK(tildeM_of(0.3) == 8.0 * kPi);
    CHECK(tildeM_of(0.5) == 8.0 * kPi);
    CHECK(tildeM_of(0.75) == doctest::Approx(17.5377829676363781).epsilon(1e-13));
    CHECK(tildeM_of(2.0) == doctest::Approx(13.3015033996796980).epsilon(1e-13));
    for (int i = 1; i <= 100; ++i) {
        double eps = 0.1 * i;
        double tm = tildeM_of(eps);
        CHECK(tm >= 4.0 * kPi * (1 - 1e-14));
        CHECK(tm <= 8.0 * kPi * (1 + 1e-14));
    }
}

TEST_CASE("sweep_mass_map: degenerate grid and monotone scan") {
    MassMap single = sweep_mass_map(1.0, {1.0});
    CHECK(single.a.size() == 1);
    CHECK(single.mstar_estimate == doctest::Approx(kMass_a1_eps1).epsilon(1e-8));

    std::vector<double> grid;
    for (int i = 0; i < 12; ++i) grid.push_back(1e-2 * std::pow(1e4, i / 11.0));
    MassMap map = sweep_mass_map(0.5, grid);
    for (std::size_t i = 1; i < map.mass.size(); ++i) CHECK(map.mass[i] > map.mass[i - 1]);
    CHECK(map.mstar_estimate <= 8.0 * kPi * (1 + 1e-12));
}

TEST_CASE("reconstruct_profile invariants and elliptic residual") {
    ShootingConfig cfg;
    cfg.a = 1.0;
    cfg.epsilon = 0.5;
    cfg.dy_out = 0.002;
    ProfileSolution sol = integrate_profile(cfg);

    std::vector<double> rg;
    for (int i = 0; i <= 4000; ++i) rg.push_back(std::sqrt(80.0) * i / 4000.0);
    RadialProfile prof = reconstruct_profile(sol, rg);

    CHECK(prof.U.front() == doctest::Approx(2.0 * sol.a).epsilon(1e-12));
    CHECK(prof.V_prime.front() == 0.0);
    CHECK(prof.sigma > 0);

    // U decreasing toward sigma e^{-r^2/4}; V' -> 0
    CHECK(std::fabs(prof.V_prime.back()) < 1e-4);
    std::size_t last = prof.r.size() - 1;
    CHECK(prof.U[last] / std::exp(-prof.r[last] * prof.r[last] / 4.0) ==
          doctest::Approx(prof.sigma).epsilon(1e-3));

    // finite-difference residual of V'' + V'/r + (eps r / 2) V' + U on [0.1, 5]
    const double dr = 1e-3;
    double worst = 0;
    std::vector<double> rfd;
    for (double r = 0.1 - dr; r <= 5.0 + 1.5 * dr; r += dr) rfd.push_back(r);
    RadialProfile fd = reconstruct_profile(sol, rfd);
    for (std::size_t i = 1; i + 1 < rfd.size(); ++i) {
        double vpp = (fd.V[i + 1] - 2 * fd.V[i] + fd.V[i - 1]) / (dr * dr);
        double vp = (fd.V[i + 1] - fd.V[i - 1]) / (2 * dr);
        double res = vpp + vp / fd.r[i] + 0.5 * cfg.epsilon * fd.r[i] * vp + fd.U[i];
        worst = std::max(worst, std::fabs(res));
    }
    CHECK(worst < 1e-5);

    // r grid outside the stored domain must be rejected
    CHECK_THROWS_AS(reconstruct_profile(sol, std::vector<double>{0.0, 9.5}),
                    std::domain_error);
}

TEST_CASE("profile continuity in the mass parameter") {
    std::vector<double> coarse = {4.0, 4.4, 4.8};
    std::vector<double> fine = {4.0, 4.2, 4.4, 4.6, 4.8};
    ContinuityReport c = profile_continuity_check(coarse, 0.5, 1.0, 2.0);
    ContinuityReport f = profile_continuity_check(fine, 0.5, 1.0, 2.0);
    CHECK(c.max_dU_p > 0);
    CHECK(f.max_dU_p > 0);
    // halving the spacing roughly halves the adjacent distances
    CHECK(f.max_dU_p / c.max_dU_p == doctest::Approx(0.5).epsilon(0.2));
    CHECK(f.max_dVp_r / c.max_dVp_r == doctest::Approx(0.5).epsilon(0.2));

    ContinuityReport same = profile_continuity_check({5.0, 5.0}, 0.5, 1.0, 2.0);
    CHECK(same.max_dU_p == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("configuration validation") {
    ShootingConfig cfg;
    cfg.a = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.a = 1.0;
    cfg.y_max = 10.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
