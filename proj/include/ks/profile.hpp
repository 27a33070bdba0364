#ifndef KS_PROFILE_HPP
#define KS_PROFILE_HPP

#include <array>
#include <memory>
#include <vector>

namespace ks {

/// Parameters of the cumulated-density shooting problem
///   phi'' + phi'/4 + phi' S / (2y) = 0,   S' + (eps/4) S = phi',
///   phi(0) = 0, phi'(0) = a > 0, S(0) = 0.
struct ShootingConfig {
    double epsilon = 1.0;  ///< diffusivity ratio, > 0
    double a = 1.0;        ///< shooting parameter phi'(0) = U(0)/2, > 0
    double y_max = 80.0;   ///< truncation point of the half-line
    double rel_tol = 1e-10;
    double abs_tol = 1e-16;
    double h_init = 1e-6;  ///< Taylor-start step that clears the 1/(2y) singularity
    double dy_out = 0.0;   ///< > 0: store the solution on a uniform grid of this spacing

    void validate() const;  ///< throws std::invalid_argument on violation
};

/// Numerical trajectory of the shooting problem. v_quad accumulates
/// int_0^y S(z)/(2z) dz, the radial quadrature that rebuilds V.
struct ProfileSolution {
    std::vector<double> y, phi, phi_prime, S, v_quad;
    double a = 0, epsilon = 0;
    double mass = 0;             ///< 2*pi*(phi(y_max) + tail)
    double tail_correction = 0;  ///< 4*phi'(y_max), the tail of int phi'
};

/// Per-node bound verdicts for a ProfileSolution. eps_s_applicable is set
/// when a < max{A(eps), 1}, the range where eps*S < 2 is guaranteed.
struct ProfileBounds {
    bool increasing_concave = false;
    bool phi_prime_bound = false;  ///< 0 < phi' <= a e^{-y/4}
    bool s_bound = false;          ///< 0 < S <= upper envelope
    bool phi_sandwich = false;     ///< (M/2pi)(1-e^{-y/4}) <= phi <= M/2pi
    bool eps_s_applicable = false;
    bool eps_s_lt_2 = true;
    bool all_ok() const {
        return increasing_concave && phi_prime_bound && s_bound && phi_sandwich &&
               (!eps_s_applicable || eps_s_lt_2);
    }
};

/// Reconstructed radial profile of the self-similar solution:
/// U(r) = 2 phi'(r^2), V'(r) = -S(r^2)/r, V by quadrature of S/y.
struct RadialProfile {
    std::vector<double> r, U, V, V_prime;
    double M = 0, a = 0, epsilon = 0;
    double sigma = 0;  ///< constant in U = sigma e^{V} e^{-r^2/4}
};

struct MassMap {
    std::vector<double> a, mass;
    double mstar_estimate = 0;  ///< sup over the scanned range (a lower bound of M*)
    double mstar_arg = 0;
};

struct ContinuityReport {
    std::vector<double> mass;      ///< the (sorted) input masses
    std::vector<double> dU_p;      ///< L^p distance of U for adjacent mass pairs
    std::vector<double> dVp_r;     ///< L^r distance of V' for adjacent mass pairs
    double max_dU_p = 0, max_dVp_r = 0;
};

/// Right-hand side of the shooting ODE at y > 0: returns (phi', phi'', S').
std::array<double, 3> ode_rhs(double y, const std::array<double, 3>& state, double epsilon);

/// Second-order Taylor start at 0 < h <= h_init: (phi(h), phi'(h), S(h)).
std::array<double, 3> series_start(double a, double epsilon, double h);

/// Integrate the shooting problem and validate every bound; throws
/// integration_error / invariant_error on failure.
ProfileSolution integrate_profile(const ShootingConfig& config);

/// Evaluate the bound verdicts of a stored solution (no throwing).
ProfileBounds check_profile_bounds(const ProfileSolution& sol);

/// M(a, eps) = 2 pi phi(inf).
double mass_of(double a, double epsilon);
double mass_of(double a, double epsilon, const ShootingConfig& base);

/// Invert the mass map by bisection on a. Requires 0 < M < tildeM_of(eps).
double invert_mass(double M, double epsilon, double rel_tol = 1e-8);

/// A(eps): +infinity for eps <= 1/2, else the closed form of the
/// uniqueness-range bound on the shooting parameter.
double A_of(double epsilon);

/// tildeM(eps): uniqueness mass threshold, always in [4 pi, 8 pi].
double tildeM_of(double epsilon);

/// Scan M(a, eps) over a grid, refine the sup by golden section around the
/// grid argmax. Monotonicity is asserted on the sub-grid a < max{A(eps),1}.
MassMap sweep_mass_map(double epsilon, const std::vector<double>& a_grid);

/// Rebuild (U, V, V') on r_grid (subset of [0, sqrt(y_max)]) from a stored
/// dense solution and check the radial-profile invariants.
RadialProfile reconstruct_profile(const ProfileSolution& sol, const std::vector<double>& r_grid);

/// L^p / L^r distances of adjacent-mass profiles on a shared radial grid.
ContinuityReport profile_continuity_check(const std::vector<double>& masses, double epsilon,
                                          double p, double r);

/// Smooth radial evaluator for (U, V) including the Gaussian continuation
/// beyond sqrt(y_max); used to put profiles on 2-D grids.
class ProfileSampler {
public:
    ProfileSampler(const ProfileSolution& sol, double knot_dr);
    double U(double r) const;
    double V(double r) const;
    double mass() const { return mass_; }
    double a() const { return a_; }
    double sigma() const { return sigma_; }

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
    double mass_ = 0, a_ = 0, sigma_ = 0;
};

} // namespace ks

#endif
