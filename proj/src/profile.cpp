#include "ks/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>

#include "ks/cubic_spline.hpp"
#include "ks/errors.hpp"
#include "ks/ode.hpp"

namespace ks {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

double min1(double eps) { return std::min(1.0, eps); }

/// Upper envelope of S from the comparison argument:
/// S(y) <= m a y / ((m + a) e^{m y / 4} - a),  m = min{1, eps}.
double upper_s(double y, double a, double eps) {
    double m = min1(eps);
    double arg = m * y / 4.0;
    if (arg > 200.0)  // denominator is dominated by the exponential
        return m * a * y / (m + a) * std::exp(-arg);
    return m * a * y / ((m + a) * std::exp(arg) - a);
}

struct Violation {
    const char* what = nullptr;
    double y = 0;
};

ProfileBounds scan_bounds(const ProfileSolution& sol, Violation* first) {
    ProfileBounds b;
    b.increasing_concave = true;
    b.phi_prime_bound = true;
    b.s_bound = true;
    b.phi_sandwich = true;
    const double a = sol.a, eps = sol.epsilon;
    const double phi_inf = sol.mass / kTwoPi;
    const double slack = 4e-12;
    auto fail = [&](bool& flag, const char* what, double y) {
        flag = false;
        if (first && !first->what) *first = {what, y};
    };

    for (std::size_t i = 0; i < sol.y.size(); ++i) {
        double y = sol.y[i], phi = sol.phi[i], dphi = sol.phi_prime[i], S = sol.S[i];
        if (i > 0) {
            // strict increase, except where the increment is not representable
            double pred = sol.phi_prime[i] * (y - sol.y[i - 1]);
            bool strict_ok = phi > sol.phi[i - 1];
            if (!strict_ok && pred > 8.0 * std::numeric_limits<double>::epsilon() * phi)
                fail(b.increasing_concave, "phi not strictly increasing", y);
            if (!(phi >= sol.phi[i - 1]))
                fail(b.increasing_concave, "phi decreased", y);
            if (!(dphi < sol.phi_prime[i - 1]))
                fail(b.increasing_concave, "phi' not strictly decreasing (concavity)", y);
        }
        if (!(dphi > 0) || dphi > a * std::exp(-y / 4.0) * (1.0 + slack))
            fail(b.phi_prime_bound, "phi' outside (0, a e^{-y/4}]", y);
        if (y > 0) {
            if (!(S > 0) || S > upper_s(y, a, eps) * (1.0 + slack))
                fail(b.s_bound, "S outside (0, upper envelope]", y);
        }
        if (phi > phi_inf * (1.0 + slack) ||
            phi < phi_inf * (1.0 - std::exp(-y / 4.0)) * (1.0 - 1e-9) - 1e-14)
            fail(b.phi_sandwich, "phi outside its sandwich bounds", y);
    }

    b.eps_s_applicable = a < std::max(A_of(eps), 1.0);
    if (b.eps_s_applicable) {
        b.eps_s_lt_2 = true;
        for (std::size_t i = 0; i < sol.y.size(); ++i) {
            if (!(eps * sol.S[i] < 2.0)) {
                fail(b.eps_s_lt_2, "eps*S reached 2 inside the uniqueness range", sol.y[i]);
            }
        }
    }
    return b;
}

struct Start4 {
    std::array<double, 4> state;  // phi, phi', S, v_quad
};

Start4 series_start4(double a, double eps, double h) {
    double ddphi0 = -a / 4.0 - a * a / 2.0;
    double ddS0 = ddphi0 - eps * a / 4.0;
    return {{a * h + ddphi0 * h * h / 2.0, a + ddphi0 * h, a * h + ddS0 * h * h / 2.0,
             a * h / 2.0 + ddS0 * h * h / 8.0}};
}

} // namespace

void ShootingConfig::validate() const {
    if (!(epsilon > 0)) throw std::invalid_argument("ShootingConfig: epsilon must be > 0");
    if (!(a > 0)) throw std::invalid_argument("ShootingConfig: a must be > 0");
    if (!(y_max >= 40.0)) throw std::invalid_argument("ShootingConfig: y_max must be >= 40");
    if (!(rel_tol > 0 && rel_tol <= 1e-3) || !(abs_tol > 0 && abs_tol <= 1e-3))
        throw std::invalid_argument("ShootingConfig: tolerances must be in (0, 1e-3]");
    if (!(h_init > 0 && h_init <= 1e-3))
        throw std::invalid_argument("ShootingConfig: h_init must be in (0, 1e-3]");
    if (dy_out < 0) throw std::invalid_argument("ShootingConfig: dy_out must be >= 0");
}

std::array<double, 3> ode_rhs(double y, const std::array<double, 3>& state, double epsilon) {
    if (!(y > 0)) throw std::invalid_argument("ode_rhs: y must be > 0");
    for (double v : state)
        if (!std::isfinite(v)) throw std::invalid_argument("ode_rhs: non-finite state");
    double dphi = state[1], S = state[2];
    return {dphi, -dphi / 4.0 - dphi * S / (2.0 * y), dphi - epsilon / 4.0 * S};
}

std::array<double, 3> series_start(double a, double epsilon, double h) {
    if (!(h > 0)) throw std::invalid_argument("series_start: h must be > 0");
    auto s = series_start4(a, epsilon, h);
    return {s.state[0], s.state[1], s.state[2]};
}

ProfileSolution integrate_profile(const ShootingConfig& config) {
    config.validate();
    const double a = config.a, eps = config.epsilon;

    ProfileSolution sol;
    sol.a = a;
    sol.epsilon = eps;

    // Output nodes. Without dy_out, a coarse uniform grid still gets stored so
    // the bounds can be checked on every returned solution.
    double dy = config.dy_out > 0 ? config.dy_out : config.y_max / 512.0;
    std::size_t n_nodes = static_cast<std::size_t>(std::llround(config.y_max / dy));
    std::vector<double> nodes(n_nodes);
    for (std::size_t k = 0; k < n_nodes; ++k) nodes[k] = dy * static_cast<double>(k + 1);
    nodes.back() = config.y_max;

    std::size_t cap = n_nodes + 1;
    sol.y.reserve(cap), sol.phi.reserve(cap), sol.phi_prime.reserve(cap);
    sol.S.reserve(cap), sol.v_quad.reserve(cap);
    sol.y.push_back(0.0);
    sol.phi.push_back(0.0);
    sol.phi_prime.push_back(a);
    sol.S.push_back(0.0);
    sol.v_quad.push_back(0.0);

    // The Taylor start is second order; keep a*h small so its truncation
    // error stays below the integrator tolerance for large shooting values.
    double h0 = std::min(config.h_init, 1e-4 / (1.0 + a));
    auto start = series_start4(a, eps, h0);

    auto rhs = [eps](double y, const std::array<double, 4>& st) -> std::array<double, 4> {
        double dphi = st[1], S = st[2];
        return {dphi, -dphi / 4.0 - dphi * S / (2.0 * y), dphi - eps / 4.0 * S,
                S / (2.0 * y)};
    };
    auto on_node = [&](double y, const std::array<double, 4>& st) {
        if (!(st[1] > 0)) throw integration_error("phi' crossed zero", y);
        if (!(st[2] > 0)) throw integration_error("S crossed zero", y);
        for (double v : st)
            if (!std::isfinite(v)) throw integration_error("non-finite state", y);
        sol.y.push_back(y);
        sol.phi.push_back(st[0]);
        sol.phi_prime.push_back(st[1]);
        sol.S.push_back(st[2]);
        sol.v_quad.push_back(st[3]);
    };

    dopri5_integrate<4>(rhs, h0, start.state, config.y_max, config.rel_tol, config.abs_tol,
                        on_node, nodes.data(), nodes.size());

    sol.tail_correction = 4.0 * sol.phi_prime.back();
    sol.mass = kTwoPi * (sol.phi.back() + sol.tail_correction);

    Violation v;
    ProfileBounds b = scan_bounds(sol, &v);
    if (!b.all_ok())
        throw invariant_error(std::string("profile bound violated: ") + v.what, v.y);
    return sol;
}

ProfileBounds check_profile_bounds(const ProfileSolution& sol) {
    return scan_bounds(sol, nullptr);
}

double mass_of(double a, double epsilon) {
    ShootingConfig cfg;
    cfg.a = a;
    cfg.epsilon = epsilon;
    return integrate_profile(cfg).mass;
}

double mass_of(double a, double epsilon, const ShootingConfig& base) {
    ShootingConfig cfg = base;
    cfg.a = a;
    cfg.epsilon = epsilon;
    return integrate_profile(cfg).mass;
}

double A_of(double epsilon) {
    if (!(epsilon > 0)) throw std::invalid_argument("A_of: epsilon must be > 0");
    if (epsilon <= 0.5) return std::numeric_limits<double>::infinity();
    double e = std::exp(1.0 - 1.0 / (2.0 * epsilon));
    return min1(epsilon) * e / (2.0 * epsilon - e);
}

double tildeM_of(double epsilon) {
    if (!(epsilon > 0)) throw std::invalid_argument("tildeM_of: epsilon must be > 0");
    if (epsilon <= 0.5) return 8.0 * kPi;
    double e = std::exp(1.0 - 1.0 / (2.0 * epsilon));
    if (epsilon < 1.0) return 4.0 * kPi * e;
    return 4.0 * kPi * std::max(1.0, e / epsilon);
}

double invert_mass(double M, double epsilon, double rel_tol) {
    if (!(epsilon > 0)) throw std::invalid_argument("invert_mass: epsilon must be > 0");
    if (!(M > 0)) throw std::invalid_argument("invert_mass: M must be > 0");
    if (M >= tildeM_of(epsilon))
        throw std::domain_error("invert_mass: M is outside the uniqueness range (0, tildeM)");

    double a_lo = 1e-8, a_hi = std::min(std::max(A_of(epsilon), 1.0), 1e6);
    double m_lo = mass_of(a_lo, epsilon);
    while (m_lo > M) {
        a_lo *= 1e-2;
        if (a_lo < 1e-300) throw numerical_error("invert_mass: lower bracket failure");
        m_lo = mass_of(a_lo, epsilon);
    }
    double m_hi = mass_of(a_hi, epsilon);
    while (m_hi < M) {
        if (a_hi >= 1e8) throw numerical_error("invert_mass: upper bracket failure");
        a_hi *= 10.0;
        m_hi = mass_of(a_hi, epsilon);
    }

    for (int it = 0; it < 240; ++it) {
        double mid = std::sqrt(a_lo * a_hi);
        double m = mass_of(mid, epsilon);
        if (std::fabs(m - M) / M < rel_tol) return mid;
        (m < M ? a_lo : a_hi) = mid;
        if (a_hi - a_lo < 1e-15 * mid) break;
    }
    throw numerical_error("invert_mass: bisection did not reach the requested tolerance");
}

MassMap sweep_mass_map(double epsilon, const std::vector<double>& a_grid) {
    if (a_grid.empty()) throw std::invalid_argument("sweep_mass_map: empty grid");
    for (std::size_t i = 0; i < a_grid.size(); ++i) {
        if (!(a_grid[i] > 0)) throw std::invalid_argument("sweep_mass_map: a must be > 0");
        if (i > 0 && !(a_grid[i] > a_grid[i - 1]))
            throw std::invalid_argument("sweep_mass_map: grid must be increasing");
    }
    MassMap map;
    map.a = a_grid;
    map.mass.resize(a_grid.size());
    for (std::size_t i = 0; i < a_grid.size(); ++i) map.mass[i] = mass_of(a_grid[i], epsilon);

    double a_uniq = std::max(A_of(epsilon), 1.0);
    for (std::size_t i = 1; i < a_grid.size(); ++i) {
        if (a_grid[i] < a_uniq && !(map.mass[i] > map.mass[i - 1]))
            throw invariant_error("mass map not strictly increasing inside uniqueness range",
                                  a_grid[i]);
    }

    std::size_t imax =
        std::max_element(map.mass.begin(), map.mass.end()) - map.mass.begin();
    map.mstar_estimate = map.mass[imax];
    map.mstar_arg = map.a[imax];
    if (a_grid.size() > 1) {
        double lo = imax > 0 ? a_grid[imax - 1] : a_grid[imax];
        double hi = imax + 1 < a_grid.size() ? a_grid[imax + 1] : a_grid[imax];
        if (hi > lo) {
            const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
            double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
            double f1 = mass_of(x1, epsilon), f2 = mass_of(x2, epsilon);
            for (int it = 0; it < 40; ++it) {
                if (f1 < f2) {
                    lo = x1;
                    x1 = x2, f1 = f2;
                    x2 = lo + gr * (hi - lo), f2 = mass_of(x2, epsilon);
                } else {
                    hi = x2;
                    x2 = x1, f2 = f1;
                    x1 = hi - gr * (hi - lo), f1 = mass_of(x1, epsilon);
                }
                double best = std::max(f1, f2);
                if (best > map.mstar_estimate) {
                    map.mstar_estimate = best;
                    map.mstar_arg = f1 > f2 ? x1 : x2;
                }
            }
        }
    }
    return map;
}

namespace {

struct ProfileSplines {
    CubicSpline dphi, S, Q;
    double y_max, q_end, v_tail, a, eps, mass;
};

ProfileSplines build_splines(const ProfileSolution& sol) {
    if (sol.y.size() < 8)
        throw std::invalid_argument("reconstruct_profile: solution grid too coarse");
    ProfileSplines sp{CubicSpline(sol.y, sol.phi_prime), CubicSpline(sol.y, sol.S),
                      CubicSpline(sol.y, sol.v_quad),    sol.y.back(),
                      sol.v_quad.back(),                 0.0,
                      sol.a,                             sol.epsilon,
                      sol.mass};
    // exponential tail of (1/2) int_{y_max}^inf S/y dy with decay rate min{1,eps}/4
    double m = min1(sol.epsilon);
    sp.v_tail = 2.0 * sol.S.back() / (m * sol.y.back());
    return sp;
}

double eval_V(const ProfileSplines& sp, double y) { return sp.q_end - sp.Q(y) + sp.v_tail; }

} // namespace

RadialProfile reconstruct_profile(const ProfileSolution& sol,
                                  const std::vector<double>& r_grid) {
    auto sp = build_splines(sol);
    double r_max = std::sqrt(sp.y_max);
    if (r_grid.empty()) throw std::invalid_argument("reconstruct_profile: empty r grid");
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
        if (r_grid[i] < 0 || r_grid[i] > r_max * (1.0 + 1e-12))
            throw std::domain_error("reconstruct_profile: r grid outside [0, sqrt(y_max)]");
        if (i > 0 && !(r_grid[i] > r_grid[i - 1]))
            throw std::invalid_argument("reconstruct_profile: r grid must be increasing");
    }

    RadialProfile prof;
    prof.r = r_grid;
    prof.M = sol.mass;
    prof.a = sol.a;
    prof.epsilon = sol.epsilon;
    std::size_t n = r_grid.size();
    prof.U.resize(n);
    prof.V.resize(n);
    prof.V_prime.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double r = std::min(r_grid[i], r_max);
        double y = std::min(r * r, sp.y_max);
        prof.U[i] = 2.0 * sp.dphi(y);
        prof.V[i] = eval_V(sp, y);
        prof.V_prime[i] = r > 0 ? -sp.S(y) / r : 0.0;
    }

    // sigma from the relation U = sigma e^{V} e^{-r^2/4}
    double acc = 0;
    std::size_t cnt = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (prof.U[i] > 0) {
            acc += std::log(prof.U[i]) - prof.V[i] + prof.r[i] * prof.r[i] / 4.0;
            ++cnt;
        }
    }
    prof.sigma = std::exp(acc / static_cast<double>(cnt));

    // --- invariants ---
    auto bail = [&](const char* what, double r) { throw invariant_error(what, r); };
    for (std::size_t i = 0; i < n; ++i) {
        if (!(prof.U[i] > 0)) bail("U must be positive", prof.r[i]);
        if (i > 0 && !(prof.U[i] < prof.U[i - 1])) bail("U must be strictly decreasing", prof.r[i]);
        if (std::fabs(prof.V_prime[i]) > (4.0 + sol.a) * (1.0 + 1e-12))
            bail("|V'| exceeded 4 + a", prof.r[i]);
        double dev = std::log(prof.U[i]) - prof.V[i] + prof.r[i] * prof.r[i] / 4.0 -
                     std::log(prof.sigma);
        if (std::fabs(dev) > 1e-4) bail("log U - V + r^2/4 is not constant", prof.r[i]);
    }
    if (r_grid.front() == 0.0 && std::fabs(prof.U[0] - 2.0 * sol.a) > 1e-10 * sol.a)
        bail("U(0) != 2a", 0.0);

    // quadrature mass check when the grid spans the radial domain
    if (r_grid.front() == 0.0 && r_grid.back() > 0.9 * r_max && n > 16) {
        double integral = 0, h_max = 0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            double h = prof.r[i + 1] - prof.r[i];
            h_max = std::max(h_max, h);
            integral += 0.5 * h * (prof.r[i] * prof.U[i] + prof.r[i + 1] * prof.U[i + 1]);
        }
        // 2 pi int_0^R r U dr equals 2 pi phi(R^2) exactly; the check ties the
        // trapezoid quadrature on the requested grid back to the stored mass.
        double y_top = r_grid.back() * r_grid.back();
        CubicSpline phi_sp(sol.y, sol.phi);
        double phi_top = phi_sp(std::min(y_top, sp.y_max));
        double expected = kTwoPi * phi_top;
        double tol = std::max(1e-8, 0.5 * h_max * h_max) * sol.mass;
        if (std::fabs(kTwoPi * integral - expected) > tol)
            bail("2 pi int r U dr deviates from the cumulated mass", r_grid.back());
    }
    return prof;
}

ContinuityReport profile_continuity_check(const std::vector<double>& masses, double epsilon,
                                          double p, double r) {
    if (masses.size() < 2)
        throw std::invalid_argument("profile_continuity_check: need >= 2 masses");
    double tm = tildeM_of(epsilon);
    for (std::size_t i = 0; i < masses.size(); ++i) {
        if (!(masses[i] > 0 && masses[i] < tm))
            throw std::domain_error("profile_continuity_check: mass outside (0, tildeM)");
        if (i > 0 && !(masses[i] >= masses[i - 1]))
            throw std::invalid_argument("profile_continuity_check: masses must be sorted");
    }

    ShootingConfig cfg;
    cfg.epsilon = epsilon;
    cfg.dy_out = 0.005;
    std::vector<double> rg(2001);
    double r_max = std::sqrt(cfg.y_max);
    for (std::size_t i = 0; i < rg.size(); ++i)
        rg[i] = r_max * static_cast<double>(i) / static_cast<double>(rg.size() - 1);

    std::vector<RadialProfile> profs;
    profs.reserve(masses.size());
    for (double M : masses) {
        cfg.a = invert_mass(M, epsilon);
        profs.push_back(reconstruct_profile(integrate_profile(cfg), rg));
    }

    auto lp_radial = [&](const std::vector<double>& f, double q) {
        if (std::isinf(q)) {
            double mx = 0;
            for (double v : f) mx = std::max(mx, std::fabs(v));
            return mx;
        }
        double acc = 0;
        for (std::size_t i = 0; i + 1 < f.size(); ++i) {
            double h = rg[i + 1] - rg[i];
            acc += 0.5 * h *
                   (rg[i] * std::pow(std::fabs(f[i]), q) +
                    rg[i + 1] * std::pow(std::fabs(f[i + 1]), q));
        }
        return std::pow(kTwoPi * acc, 1.0 / q);
    };

    ContinuityReport rep;
    rep.mass = masses;
    for (std::size_t i = 0; i + 1 < profs.size(); ++i) {
        std::vector<double> dU(rg.size()), dVp(rg.size());
        for (std::size_t k = 0; k < rg.size(); ++k) {
            dU[k] = profs[i + 1].U[k] - profs[i].U[k];
            dVp[k] = profs[i + 1].V_prime[k] - profs[i].V_prime[k];
        }
        rep.dU_p.push_back(lp_radial(dU, p));
        rep.dVp_r.push_back(lp_radial(dVp, r));
    }
    rep.max_dU_p = *std::max_element(rep.dU_p.begin(), rep.dU_p.end());
    rep.max_dVp_r = *std::max_element(rep.dVp_r.begin(), rep.dVp_r.end());
    return rep;
}

struct ProfileSampler::Impl {
    CubicSpline U_sp, V_sp;
    double r_max, sigma, v_end, eps;
};

ProfileSampler::ProfileSampler(const ProfileSolution& sol, double knot_dr) {
    if (!(knot_dr > 0)) throw std::invalid_argument("ProfileSampler: knot_dr must be > 0");
    auto sp = build_splines(sol);
    double r_max = std::sqrt(sp.y_max);

    // Radial knot table at the requested resolution, mirrored through r = 0 so
    // the even symmetry of the profile is built into the spline.
    std::vector<double> rk;
    for (double r = 0.0; r < r_max; r += knot_dr) rk.push_back(r);
    rk.push_back(r_max);
    const int mirror = 8;
    std::vector<double> rs, Us, Vs;
    for (int k = std::min<int>(mirror, rk.size() - 1); k >= 1; --k) rs.push_back(-rk[k]);
    for (double r : rk) rs.push_back(r);
    for (double r : rs) {
        double y = std::min(r * r, sp.y_max);
        Us.push_back(2.0 * sp.dphi(y));
        Vs.push_back(eval_V(sp, y));
    }

    double v_end = eval_V(sp, sp.y_max);

    // sigma fitted on the well-resolved core
    double acc = 0;
    std::size_t cnt = 0;
    for (std::size_t i = 0; i < rs.size(); ++i) {
        if (rs[i] >= 0.5 && rs[i] * rs[i] <= 0.5 * sp.y_max) {
            acc += std::log(Us[i]) - Vs[i] + rs[i] * rs[i] / 4.0;
            ++cnt;
        }
    }
    sigma_ = std::exp(acc / static_cast<double>(cnt));
    mass_ = sol.mass;
    a_ = sol.a;
    impl_ = std::make_shared<Impl>(Impl{CubicSpline(rs, Us), CubicSpline(rs, Vs), r_max,
                                        sigma_, v_end, sol.epsilon});
}

double ProfileSampler::U(double r) const {
    const Impl& im = *impl_;
    if (r <= im.r_max) return im.U_sp(std::max(r, -0.0));
    double v = im.v_end * std::exp(-min1(im.eps) * (r * r - im.r_max * im.r_max) / 4.0);
    return im.sigma * std::exp(v) * std::exp(-r * r / 4.0);
}

double ProfileSampler::V(double r) const {
    const Impl& im = *impl_;
    if (r <= im.r_max) return im.V_sp(std::max(r, -0.0));
    return im.v_end * std::exp(-min1(im.eps) * (r * r - im.r_max * im.r_max) / 4.0);
}

} // namespace ks
