#include "ks/simulator.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "ks/errors.hpp"

namespace ks {

namespace {
constexpr double kPi = std::numbers::pi;
}

void Params::validate() const {
    if (!(epsilon > 0)) throw std::invalid_argument("Params: epsilon must be > 0");
    if (!(alpha >= 0)) throw std::invalid_argument("Params: alpha must be >= 0");
}

void SolverConfig::validate() const {
    if (!(dt > 0)) throw std::invalid_argument("SolverConfig: dt must be > 0");
    if (!(pos_tol >= 0)) throw std::invalid_argument("SolverConfig: pos_tol must be >= 0");
}

double etd_phi1(double z) {
    if (std::fabs(z) < 1e-4)
        return 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0;
    return std::expm1(z) / z;
}

double etd_phi2(double z) {
    if (std::fabs(z) < 0.5) {
        // sum z^j / (j+2)!
        double term = 0.5, acc = 0.5;
        for (int j = 1; j <= 16; ++j) {
            term *= z / (j + 2);
            acc += term;
        }
        return acc;
    }
    return (std::expm1(z) - z) / (z * z);
}

struct Stepper::Impl {
    GridSpec g;
    Params params;
    SolverConfig cfg;
    Frame frame;
    double time = 0;

    SpectralField uh, vh;
    SpectralField nu_prev, nv_prev;
    bool have_prev = false;

    // linear propagators and Duhamel weights per mode
    std::vector<double> Eu, P1u, P2u, Ev, P1v, P2v;
    // coordinate samples and scratch fields
    std::vector<double> xcoord;
    Field u_field, v_field, gvx, gvy, wx, wy;
    SpectralField scratch;
    double prev_max_u = 0;

    Impl(const SimState& init, const Params& p, const SolverConfig& c)
        : g(init.u.grid()),
          params(p),
          cfg(c),
          frame(init.frame),
          time(init.time),
          uh(transform(init.u)),
          vh(transform(init.v)),
          nu_prev(g),
          nv_prev(g),
          u_field(g),
          v_field(g),
          gvx(g),
          gvy(g),
          wx(g),
          wy(g),
          scratch(g) {
        p.validate();
        c.validate();
        if (!(init.u.grid() == init.v.grid()))
            throw std::invalid_argument("Stepper: u and v grids differ");
        xcoord.resize(g.n);
        for (int i = 0; i < g.n; ++i) xcoord[i] = g.coord(i);
        build_multipliers();
        prev_max_u = field_max_abs(init.u);
        if (frame == Frame::rescaled) {
            double bu = boundary_max(init.u);
            if (bu > cfg.u_boundary_tol_initial * std::max(prev_max_u, 1e-300))
                throw localization_error("initial u is not localized: boundary/interior = " +
                                         std::to_string(bu / prev_max_u));
        }
    }

    void build_multipliers() {
        const std::size_t sz = g.size();
        Eu.resize(sz), P1u.resize(sz), P2u.resize(sz);
        Ev.resize(sz), P1v.resize(sz), P2v.resize(sz);
        const double dt = cfg.dt, eps = params.epsilon, alpha = params.alpha;
        for (int j = 0; j < g.n; ++j) {
            double ky = wavenumber(g, j);
            for (int i = 0; i < g.n; ++i) {
                double kx = wavenumber(g, i);
                double k2 = kx * kx + ky * ky;
                std::size_t idx = static_cast<std::size_t>(j) * g.n + i;
                if (frame == Frame::physical) {
                    double lu = -k2;
                    double lv = -(k2 + alpha) / eps;
                    Eu[idx] = std::exp(lu * dt);
                    P1u[idx] = dt * etd_phi1(lu * dt);
                    P2u[idx] = dt * etd_phi2(lu * dt);
                    Ev[idx] = std::exp(lv * dt);
                    P1v[idx] = (dt / eps) * etd_phi1(lv * dt);
                    P2v[idx] = (dt / eps) * etd_phi2(lv * dt);
                } else {
                    // u~: diffusion and the zero-order +u~ are exact; drift and
                    // transport stay in the explicit part (divergence form).
                    double lu = 1.0 - k2;
                    double lv = -k2 / eps - 1.0;
                    Eu[idx] = std::exp(lu * dt);
                    P1u[idx] = dt * etd_phi1(lu * dt);
                    P2u[idx] = dt * etd_phi2(lu * dt);
                    Ev[idx] = std::exp(lv * dt);
                    P1v[idx] = dt * etd_phi1(lv * dt);
                    P2v[idx] = dt * etd_phi2(lv * dt);
                }
            }
        }
    }

    /// Rescaled frame with alpha > 0: the degradation coefficient grows like
    /// alpha e^s; the exponential factor is integrated exactly over the step
    /// and the Duhamel weights use the midpoint-frozen operator.
    void update_v_multipliers_rescaled_alpha() {
        const double dt = cfg.dt, eps = params.epsilon, alpha = params.alpha;
        double extra = alpha * (std::exp(time + dt) - std::exp(time)) / eps;
        double lmid_shift = -alpha * std::exp(time + dt / 2.0) / eps;
        for (int j = 0; j < g.n; ++j) {
            double ky = wavenumber(g, j);
            for (int i = 0; i < g.n; ++i) {
                double kx = wavenumber(g, i);
                double k2 = kx * kx + ky * ky;
                std::size_t idx = static_cast<std::size_t>(j) * g.n + i;
                double lv = -k2 / eps - 1.0;
                Ev[idx] = std::exp(lv * dt - extra);
                P1v[idx] = dt * etd_phi1((lv + lmid_shift) * dt);
                P2v[idx] = dt * etd_phi2((lv + lmid_shift) * dt);
            }
        }
    }

    void materialize() {
        fft::backward(g, uh.data().data(), u_field.data().data());
        fft::backward(g, vh.data().data(), v_field.data().data());
    }

    void check_health() {
        double mx = field_max_abs(u_field);
        if (!std::isfinite(mx))
            throw instability_error("non-finite u field", time);
        if (prev_max_u > 0 && mx > 10.0 * prev_max_u)
            throw instability_error("max |u| grew more than tenfold in one step", time);
        prev_max_u = mx;
        double mn = field_min(u_field);
        if (mn < -cfg.pos_tol * std::max(mx, 1e-300))
            throw positivity_error("u dropped below the positivity tolerance at t = " +
                                   std::to_string(time));
        if (frame == Frame::rescaled) {
            double bu = boundary_max(u_field);
            if (bu > cfg.u_boundary_tol * std::max(mx, 1e-300))
                throw localization_error(
                    "u is not localized: boundary/interior = " + std::to_string(bu / mx));
            double bv = boundary_max(v_field), mv = field_max_abs(v_field);
            if (mv > 0 && bv > cfg.v_boundary_tol * mv)
                throw localization_error(
                    "v is not localized: boundary/interior = " + std::to_string(bv / mv));
        }
    }

    /// N_u and N_v in spectral space. Divergences are applied in spectral
    /// space as the last operation, so their zero mode vanishes exactly and
    /// the discrete mass of u never moves.
    void nonlinearities(SpectralField& nu, SpectralField& nv) {
        const int n = g.n, nyq = g.n / 2;
        // grad v
        for (int j = 0; j < n; ++j) {
            double ky = (j == nyq) ? 0.0 : wavenumber(g, j);
            for (int i = 0; i < n; ++i) {
                double kx = (i == nyq) ? 0.0 : wavenumber(g, i);
                std::complex<double> c = vh(i, j);
                scratch(i, j) = std::complex<double>(0, kx) * c;
                nu(i, j) = std::complex<double>(0, ky) * c;  // reuse nu as temp
            }
        }
        fft::backward(g, scratch.data().data(), gvx.data().data());
        fft::backward(g, nu.data().data(), gvy.data().data());

        const bool chemo = params.chemotaxis_on;
        if (frame == Frame::physical) {
            if (!chemo) {
                for (auto& c : nu.data()) c = 0.0;
                nv.data() = uh.data();
                return;
            }
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    double u = u_field(i, j);
                    wx(i, j) = u * gvx(i, j);
                    wy(i, j) = u * gvy(i, j);
                }
            divergence_spectral(wx, wy, nu, -1.0);
            nv.data() = uh.data();
        } else {
            // w = xi u / 2 - u grad v; N_u = div(w) - u
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    double u = u_field(i, j);
                    double cx = xcoord[i], cy = xcoord[j];
                    wx(i, j) = 0.5 * cx * u - (chemo ? u * gvx(i, j) : 0.0);
                    wy(i, j) = 0.5 * cy * u - (chemo ? u * gvy(i, j) : 0.0);
                }
            divergence_spectral(wx, wy, nu, 1.0);
            for (std::size_t k = 0; k < g.size(); ++k) nu.data()[k] -= uh.data()[k];
            // N_v = div(xi v / 2) + u / eps
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    double v = v_field(i, j);
                    wx(i, j) = 0.5 * xcoord[i] * v;
                    wy(i, j) = 0.5 * xcoord[j] * v;
                }
            divergence_spectral(wx, wy, nv, 1.0);
            double inv_eps = 1.0 / params.epsilon;
            for (std::size_t k = 0; k < g.size(); ++k) nv.data()[k] += inv_eps * uh.data()[k];
        }
    }

    /// out = sign * div(fx, fy) in spectral space, dealiased per config.
    void divergence_spectral(const Field& fx, const Field& fy, SpectralField& out, double sign) {
        SpectralField& fxh = scratch;
        fft::forward(g, fx.data().data(), fxh.data().data());
        fft::forward(g, fy.data().data(), out.data().data());
        if (cfg.dealias) {
            dealias_inplace(fxh);
            dealias_inplace(out);
        }
        const int n = g.n, nyq = g.n / 2;
        for (int j = 0; j < n; ++j) {
            double ky = (j == nyq) ? 0.0 : wavenumber(g, j);
            for (int i = 0; i < n; ++i) {
                double kx = (i == nyq) ? 0.0 : wavenumber(g, i);
                out(i, j) = sign * (std::complex<double>(0, kx) * fxh(i, j) +
                                    std::complex<double>(0, ky) * out(i, j));
            }
        }
    }

    void step() {
        materialize();
        check_health();
        if (frame == Frame::rescaled && params.alpha > 0) update_v_multipliers_rescaled_alpha();

        SpectralField nu(g), nv(g);
        nonlinearities(nu, nv);

        const bool second = cfg.scheme != Scheme::etd1 && have_prev;
        auto& ud = uh.data();
        auto& vd = vh.data();
        const auto& nud = nu.data();
        const auto& nvd = nv.data();
        for (std::size_t k = 0; k < g.size(); ++k) {
            std::complex<double> du = P1u[k] * nud[k];
            std::complex<double> dv = P1v[k] * nvd[k];
            if (second) {
                du += P2u[k] * (nud[k] - nu_prev.data()[k]);
                dv += P2v[k] * (nvd[k] - nv_prev.data()[k]);
            }
            ud[k] = Eu[k] * ud[k] + du;
            vd[k] = Ev[k] * vd[k] + dv;
        }
        nu_prev = std::move(nu);
        nv_prev = std::move(nv);
        have_prev = true;
        time += cfg.dt;
    }
};

Stepper::Stepper(const SimState& init, const Params& params, const SolverConfig& config)
    : impl_(std::make_unique<Impl>(init, params, config)) {}
Stepper::~Stepper() = default;
Stepper::Stepper(Stepper&&) noexcept = default;
Stepper& Stepper::operator=(Stepper&&) noexcept = default;

void Stepper::step() { impl_->step(); }
double Stepper::time() const { return impl_->time; }
double Stepper::mass() const {
    return impl_->uh(0, 0).real() * 4.0 * impl_->g.half_width * impl_->g.half_width;
}
const GridSpec& Stepper::grid() const { return impl_->g; }

SimState Stepper::state() const {
    SimState s;
    s.u = Field(impl_->g);
    s.v = Field(impl_->g);
    fft::backward(impl_->g, impl_->uh.data().data(), s.u.data().data());
    fft::backward(impl_->g, impl_->vh.data().data(), s.v.data().data());
    s.time = impl_->time;
    s.frame = impl_->frame;
    return s;
}

SimState step_physical(const SimState& state, const Params& params, const SolverConfig& config) {
    if (state.frame != Frame::physical)
        throw std::invalid_argument("step_physical: state must be in the physical frame");
    Stepper st(state, params, config);
    st.step();
    return st.state();
}

SimState step_rescaled(const SimState& state, const Params& params, const SolverConfig& config) {
    if (state.frame != Frame::rescaled)
        throw std::invalid_argument("step_rescaled: state must be in the rescaled frame");
    Stepper st(state, params, config);
    st.step();
    return st.state();
}

namespace {

void require_localized_for_dilation(const Field& f, double lambda, const char* who) {
    if (lambda <= 1.0) return;
    double mx = field_max_abs(f);
    if (mx == 0) return;
    if (boundary_max(f) > 1e-10 * mx)
        throw std::domain_error(std::string(who) +
                                ": dilation maps outside the box and the field is not "
                                "localized at the boundary");
}

} // namespace

SimState to_rescaled(const SimState& state) {
    if (state.frame != Frame::physical)
        throw std::invalid_argument("to_rescaled: state must be physical");
    double s = std::log(state.time + 1.0);
    double lam = std::exp(s / 2.0);
    require_localized_for_dilation(state.u, lam, "to_rescaled");
    require_localized_for_dilation(state.v, lam, "to_rescaled");
    SimState out;
    out.u = dilate(state.u, lam, std::exp(s));
    out.v = dilate(state.v, lam, 1.0);
    out.time = s;
    out.frame = Frame::rescaled;
    return out;
}

SimState from_rescaled(const SimState& state) {
    if (state.frame != Frame::rescaled)
        throw std::invalid_argument("from_rescaled: state must be rescaled");
    double s = state.time;
    double lam = std::exp(-s / 2.0);
    require_localized_for_dilation(state.u, lam, "from_rescaled");
    SimState out;
    out.u = dilate(state.u, lam, std::exp(-s));
    out.v = dilate(state.v, lam, 1.0);
    out.time = std::exp(s) - 1.0;
    out.frame = Frame::physical;
    return out;
}

Field apply_semigroup_S(const Field& f, double s) {
    if (!(s > 0)) throw std::invalid_argument("apply_semigroup_S: s must be > 0");
    Field hp = heat_propagate(f, std::exp(s) - 1.0);
    require_localized_for_dilation(hp, std::exp(s / 2.0), "apply_semigroup_S");
    return dilate(hp, std::exp(s / 2.0), std::exp(s));
}

Field apply_semigroup_Seps(const Field& f, double s, double epsilon) {
    if (!(s > 0)) throw std::invalid_argument("apply_semigroup_Seps: s must be > 0");
    if (!(epsilon > 0)) throw std::invalid_argument("apply_semigroup_Seps: epsilon must be > 0");
    Field hp = heat_propagate(f, (std::exp(s) - 1.0) / epsilon);
    require_localized_for_dilation(hp, std::exp(s / 2.0), "apply_semigroup_Seps");
    return dilate(hp, std::exp(s / 2.0), 1.0);
}

namespace {

/// int u log u with the 0 log 0 convention; requires u >= -tol relative.
double entropy_term(const Field& u, double pos_tol) {
    double mx = field_max_abs(u);
    if (field_min(u) < -pos_tol * std::max(mx, 1e-300))
        throw positivity_error("entropy term: u has negative values beyond tolerance");
    double acc = 0;
    for (double v : u.data())
        if (v > 0) acc += v * std::log(v);
    return acc * u.grid().dx() * u.grid().dx();
}

} // namespace

double free_energy(const SimState& state, const Params& params) {
    if (state.frame != Frame::physical)
        throw std::invalid_argument("free_energy: state must be physical");
    double e = entropy_term(state.u, 1e-10);
    double da = state.u.grid().dx() * state.u.grid().dx();
    double cross = 0, vsq = 0;
    for (std::size_t k = 0; k < state.u.data().size(); ++k) {
        cross += state.u.data()[k] * state.v.data()[k];
        vsq += state.v.data()[k] * state.v.data()[k];
    }
    auto gv = gradient(state.v);
    double grad2 = 0;
    for (std::size_t k = 0; k < gv.first.data().size(); ++k)
        grad2 += gv.first.data()[k] * gv.first.data()[k] +
                 gv.second.data()[k] * gv.second.data()[k];
    return e - cross * da + 0.5 * grad2 * da + 0.5 * params.alpha * vsq * da;
}

double rescaled_lyapunov(const SimState& state, const Params&) {
    if (state.frame != Frame::rescaled)
        throw std::invalid_argument("rescaled_lyapunov: state must be rescaled");
    double M = integral(state.u);
    double e = entropy_term(state.u, 1e-10);
    double da = state.u.grid().dx() * state.u.grid().dx();
    double cross = 0;
    for (std::size_t k = 0; k < state.u.data().size(); ++k)
        cross += state.u.data()[k] * state.v.data()[k];
    auto gv = gradient(state.v);
    double grad2 = 0;
    for (std::size_t k = 0; k < gv.first.data().size(); ++k)
        grad2 += gv.first.data()[k] * gv.first.data()[k] +
                 gv.second.data()[k] * gv.second.data()[k];
    return -M * state.time + e - cross * da + 0.5 * grad2 * da;
}

SimState self_similar_state(double M, double epsilon, double t, const GridSpec& grid,
                            Frame frame) {
    if (!(M > 0) || M >= tildeM_of(epsilon))
        throw std::domain_error("self_similar_state: M outside the uniqueness range");
    if (frame == Frame::physical && !(t > 0))
        throw std::invalid_argument("self_similar_state: t must be > 0 in the physical frame");

    ShootingConfig cfg;
    cfg.epsilon = epsilon;
    cfg.a = invert_mass(M, epsilon);
    cfg.dy_out = 0.005;
    ProfileSolution sol = integrate_profile(cfg);
    ProfileSampler sampler(sol, grid.dx() / 2.0);

    SimState out;
    out.frame = frame;
    if (frame == Frame::rescaled) {
        out.time = 0.0;
        out.u = Field::sample(grid, [&](double x, double y) {
            return sampler.U(std::sqrt(x * x + y * y));
        });
        out.v = Field::sample(grid, [&](double x, double y) {
            return sampler.V(std::sqrt(x * x + y * y));
        });
    } else {
        out.time = t;
        double rt = std::sqrt(t);
        out.u = Field::sample(grid, [&](double x, double y) {
            return sampler.U(std::sqrt(x * x + y * y) / rt) / t;
        });
        out.v = Field::sample(grid, [&](double x, double y) {
            return sampler.V(std::sqrt(x * x + y * y) / rt);
        });
    }
    return out;
}

} // namespace ks
