#include "ks/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "ks/cubic_spline.hpp"
#include "ks/errors.hpp"
#include "ks/io.hpp"

namespace ks {

namespace {

constexpr double kPi = std::numbers::pi;

Scheme scheme_from(const std::string& s) {
    if (s == "etd1") return Scheme::etd1;
    if (s == "etd2") return Scheme::etd2;
    if (s == "imex-drift") return Scheme::imex_drift;
    throw std::invalid_argument("solver.scheme must be etd1 | etd2 | imex-drift");
}

const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::etd1: return "etd1";
        case Scheme::etd2: return "etd2";
        default: return "imex-drift";
    }
}

} // namespace

RunPlan RunPlan::from_config(const Config& cfg) {
    RunPlan p;
    p.grid = GridSpec(cfg.get_int("grid.n", 256), cfg.get_double("grid.L", 20.0));
    p.params.epsilon = cfg.get_double("params.epsilon", 1.0);
    p.params.alpha = cfg.get_double("params.alpha", 0.0);
    p.params.chemotaxis_on = cfg.get_bool("params.chemotaxis", true);
    p.params.validate();

    std::string frame = cfg.get_string("run.frame", "physical");
    if (frame == "physical")
        p.frame = Frame::physical;
    else if (frame == "rescaled")
        p.frame = Frame::rescaled;
    else
        throw std::invalid_argument("run.frame must be physical | rescaled");

    p.t0 = cfg.get_double("run.t0", 1.0);
    p.t_end = cfg.get_double("run.t_end", 10.0);
    p.s_end = cfg.get_double("run.s_end", 1.0);
    p.output_every = cfg.get_int("output.every", 25);
    p.snap_every = cfg.get_int("output.snap_every", 0);
    p.output_dir = cfg.get_string("output.dir", "");

    p.solver.dt = cfg.get_double("solver.dt", 0.01);
    p.solver.scheme = scheme_from(cfg.get_string(
        "solver.scheme", p.frame == Frame::rescaled ? "imex-drift" : "etd2"));
    p.solver.dealias = cfg.get_bool("solver.dealias", true);
    p.solver.pos_tol = cfg.get_double("solver.pos_tol", 1e-10);
    p.solver.validate();

    std::string init = cfg.get_string("init.kind", "gaussian");
    if (init == "gaussian")
        p.init_kind = Init::gaussian;
    else if (init == "profile")
        p.init_kind = Init::profile;
    else
        throw std::invalid_argument("init.kind must be gaussian | profile");
    p.init_mass = cfg.get_double("init.mass", p.init_mass);
    p.init_sigma = cfg.get_double("init.sigma", p.init_sigma);
    p.noise_amplitude = cfg.get_double("init.noise", 0.0);
    p.seed = cfg.get_u64("seed", 0);

    std::string v0 = cfg.get_string("init.v0", "zero");
    if (v0 == "zero")
        p.v0_kind = V0::zero;
    else if (v0 == "gaussian")
        p.v0_kind = V0::gaussian;
    else
        throw std::invalid_argument("init.v0 must be zero | gaussian");
    p.v0_amplitude = cfg.get_double("init.v0_amplitude", 1.0);
    p.v0_sigma = cfg.get_double("init.v0_sigma", 1.0);

    if (cfg.has("diag.profile_mass")) p.profile_mass = cfg.get_double("diag.profile_mass", 0);
    p.diag_p = cfg.get_double("diag.p", 1.0);
    p.diag_r = cfg.get_double("diag.r", 2.0);
    if (cfg.has("diag.heat_mass")) p.heat_mass = cfg.get_double("diag.heat_mass", 0);

    cfg.reject_unknown();
    return p;
}

std::string RunPlan::describe() const {
    std::ostringstream o;
    o << "grid.n=" << grid.n << "\ngrid.L=" << format_g17(grid.half_width)
      << "\nparams.epsilon=" << format_g17(params.epsilon)
      << "\nparams.alpha=" << format_g17(params.alpha)
      << "\nparams.chemotaxis=" << (params.chemotaxis_on ? 1 : 0)
      << "\nrun.frame=" << (frame == Frame::physical ? "physical" : "rescaled")
      << "\nrun.t0=" << format_g17(t0) << "\nrun.t_end=" << format_g17(t_end)
      << "\nrun.s_end=" << format_g17(s_end) << "\noutput.every=" << output_every
      << "\noutput.snap_every=" << snap_every << "\nsolver.dt=" << format_g17(solver.dt)
      << "\nsolver.scheme=" << scheme_name(solver.scheme)
      << "\nsolver.dealias=" << (solver.dealias ? 1 : 0)
      << "\nsolver.pos_tol=" << format_g17(solver.pos_tol)
      << "\ninit.kind=" << (init_kind == Init::gaussian ? "gaussian" : "profile")
      << "\ninit.mass=" << format_g17(init_mass) << "\ninit.sigma=" << format_g17(init_sigma)
      << "\ninit.noise=" << format_g17(noise_amplitude) << "\nseed=" << seed
      << "\ninit.v0=" << (v0_kind == V0::zero ? "zero" : "gaussian")
      << "\ninit.v0_amplitude=" << format_g17(v0_amplitude)
      << "\ninit.v0_sigma=" << format_g17(v0_sigma) << "\ndiag.p=" << format_g17(diag_p)
      << "\ndiag.r=" << format_g17(diag_r);
    if (profile_mass) o << "\ndiag.profile_mass=" << format_g17(*profile_mass);
    if (heat_mass) o << "\ndiag.heat_mass=" << format_g17(*heat_mass);
    o << "\n";
    return o.str();
}

std::uint64_t RunPlan::hash() const { return fnv1a_hash(describe()); }

namespace {

SimState initial_state(const RunPlan& plan) {
    SimState st;
    st.frame = plan.frame;
    st.time = plan.frame == Frame::physical ? plan.t0 : 0.0;
    if (plan.init_kind == RunPlan::Init::profile) {
        st = self_similar_state(plan.init_mass, plan.params.epsilon,
                                plan.frame == Frame::physical ? plan.t0 : 1.0, plan.grid,
                                plan.frame);
        if (plan.frame == Frame::physical) st.time = plan.t0;
    } else {
        double s2 = plan.init_sigma * plan.init_sigma;
        double c = plan.init_mass / (2.0 * kPi * s2);
        st.u = Field::sample(plan.grid, [&](double x, double y) {
            return c * std::exp(-(x * x + y * y) / (2.0 * s2));
        });
        st.v = Field(plan.grid, 0.0);
    }
    if (plan.v0_kind == RunPlan::V0::gaussian) {
        double s2 = plan.v0_sigma * plan.v0_sigma;
        st.v = Field::sample(plan.grid, [&](double x, double y) {
            return plan.v0_amplitude * std::exp(-(x * x + y * y) / (2.0 * s2));
        });
    }
    if (plan.noise_amplitude > 0) {
        std::mt19937_64 rng(plan.seed);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        for (double& v : st.u.data()) v *= 1.0 + plan.noise_amplitude * unif(rng);
    }
    return st;
}

struct References {
    Field U, Vpx, Vpy;          // profile and its gradient components
    bool have_profile = false;
};

References make_references(const RunPlan& plan) {
    References ref;
    if (plan.profile_mass && plan.frame == Frame::rescaled) {
        ShootingConfig cfg;
        cfg.epsilon = plan.params.epsilon;
        cfg.a = invert_mass(*plan.profile_mass, plan.params.epsilon);
        cfg.dy_out = 0.005;
        ProfileSolution sol = integrate_profile(cfg);
        ProfileSampler smp(sol, plan.grid.dx() / 2.0);
        ref.U = Field::sample(plan.grid, [&](double x, double y) {
            return smp.U(std::sqrt(x * x + y * y));
        });
        CubicSpline s_sp(sol.y, sol.S);
        double r_max = std::sqrt(sol.y.back());
        auto vprime = [&](double r) {
            if (r <= 0) return 0.0;
            if (r <= r_max) return -s_sp(r * r) / r;
            double m = std::min(1.0, sol.epsilon);
            return -s_sp(sol.y.back()) / r *
                   std::exp(-m * (r * r - sol.y.back()) / 4.0);
        };
        ref.Vpx = Field::sample(plan.grid, [&](double x, double y) {
            double r = std::sqrt(x * x + y * y);
            return r > 0 ? vprime(r) * x / r : 0.0;
        });
        ref.Vpy = Field::sample(plan.grid, [&](double x, double y) {
            double r = std::sqrt(x * x + y * y);
            return r > 0 ? vprime(r) * y / r : 0.0;
        });
        ref.have_profile = true;
    }
    return ref;
}

double lp_of_pair(const Field& fx, const Field& fy, double p) {
    // L^p norm of the vector magnitude sqrt(fx^2 + fy^2)
    const GridSpec& g = fx.grid();
    double da = g.dx() * g.dx();
    if (std::isinf(p)) {
        double mx = 0;
        for (std::size_t k = 0; k < fx.data().size(); ++k)
            mx = std::max(mx, fx.data()[k] * fx.data()[k] + fy.data()[k] * fy.data()[k]);
        return std::sqrt(mx);
    }
    double acc = 0;
    for (std::size_t k = 0; k < fx.data().size(); ++k) {
        double m2 = fx.data()[k] * fx.data()[k] + fy.data()[k] * fy.data()[k];
        acc += std::pow(m2, p / 2.0);
    }
    return std::pow(acc * da, 1.0 / p);
}

double lp_diff(const Field& a, const Field& b, double p) {
    Field d = a;
    for (std::size_t k = 0; k < d.data().size(); ++k) d.data()[k] -= b.data()[k];
    return lp_norm(d, p);
}

} // namespace

RunResult run_simulation(const RunPlan& plan) {
    SimState st = initial_state(plan);
    References ref = make_references(plan);

    const bool rescaled = plan.frame == Frame::rescaled;
    const double horizon = rescaled ? plan.s_end : plan.t_end;
    const double start = rescaled ? 0.0 : plan.t0;
    const long n_steps = std::lround((horizon - start) / plan.solver.dt);
    if (n_steps <= 0) throw std::invalid_argument("run horizon is not after the start time");

    RunResult result;
    SeriesTable& tab = result.series;
    tab.columns = {"t",       "mass",    "linf_u",     "l1_u",   "l2_u",
                   "l2_gradv", "linf_gradv", "energy", "l2_gradu", "l2_deltav",
                   "linf_deltav", "min_u", "max_u"};
    if (rescaled) tab.columns.push_back("s");
    if (ref.have_profile) {
        tab.columns.push_back("dist_u");
        tab.columns.push_back("dist_gradv");
    }
    if (plan.heat_mass && !rescaled) {
        tab.columns.push_back("dist_mg_l1");
        tab.columns.push_back("dist_mg_l2");
        tab.columns.push_back("dist_mg_linf");
    }

    std::uint64_t hash = plan.hash();
    namespace fs = std::filesystem;
    const bool persist = !plan.output_dir.empty();
    if (persist) fs::create_directories(plan.output_dir);

    int snap_counter = 0, output_counter = 0;
    auto record = [&](const SimState& s) {
        double clock = rescaled ? std::exp(s.time) - 1.0 : s.time;
        double conv = rescaled ? std::exp(s.time) : 1.0;  // t + 1 in the rescaled frame

        double mass = integral(s.u);
        auto gv = gradient(s.v);
        auto gu = gradient(s.u);
        Field dv = laplacian(s.v);

        std::vector<double> row;
        row.push_back(clock);
        row.push_back(mass);
        row.push_back(field_max_abs(s.u) / conv);
        row.push_back(lp_norm(s.u, 1.0));
        row.push_back(lp_norm(s.u, 2.0) / std::sqrt(conv));
        row.push_back(lp_of_pair(gv.first, gv.second, 2.0));
        row.push_back(lp_of_pair(gv.first, gv.second,
                                 std::numeric_limits<double>::infinity()) /
                      std::sqrt(conv));
        row.push_back(rescaled ? rescaled_lyapunov(s, plan.params)
                               : free_energy(s, plan.params));
        row.push_back(lp_of_pair(gu.first, gu.second, 2.0) / conv);
        row.push_back(lp_norm(dv, 2.0) / std::sqrt(conv));
        row.push_back(field_max_abs(dv) / conv);
        double mn = field_min(s.u), mx = field_max_abs(s.u);
        row.push_back(mn);
        row.push_back(mx);
        if (rescaled) row.push_back(s.time);
        if (ref.have_profile) {
            row.push_back(lp_diff(s.u, ref.U, plan.diag_p));
            Field dx = gv.first, dy = gv.second;
            for (std::size_t k = 0; k < dx.data().size(); ++k) {
                dx.data()[k] -= ref.Vpx.data()[k];
                dy.data()[k] -= ref.Vpy.data()[k];
            }
            row.push_back(lp_of_pair(dx, dy, plan.diag_r));
        }
        if (plan.heat_mass && !rescaled) {
            Field mg = heat_kernel_field(*plan.heat_mass, s.time, plan.grid);
            row.push_back(lp_diff(s.u, mg, 1.0));
            row.push_back(lp_diff(s.u, mg, 2.0));
            row.push_back(lp_diff(s.u, mg, std::numeric_limits<double>::infinity()));
        }
        tab.rows.push_back(std::move(row));

        if (result.mass_initial == 0) result.mass_initial = mass;
        result.max_mass_drift_rel =
            std::max(result.max_mass_drift_rel,
                     std::fabs(mass - result.mass_initial) / std::fabs(result.mass_initial));
        result.min_u = std::min(result.min_u, mn);
        result.max_u = std::max(result.max_u, mx);

        if (persist && plan.snap_every > 0 && output_counter % plan.snap_every == 0) {
            SnapshotMeta meta{"u", s.time, hash};
            char fn[64];
            std::snprintf(fn, sizeof fn, "/u_%06d.field", snap_counter);
            write_snapshot(plan.output_dir + fn, s.u, meta);
            meta.name = "v";
            std::snprintf(fn, sizeof fn, "/v_%06d.field", snap_counter);
            write_snapshot(plan.output_dir + fn, s.v, meta);
            ++snap_counter;
        }
        ++output_counter;
    };

    Stepper stepper(st, plan.params, plan.solver);
    record(st);
    SimState last_stable = st;
    try {
        for (long k = 1; k <= n_steps; ++k) {
            stepper.step();
            if (k % plan.output_every == 0 || k == n_steps) {
                SimState cur = stepper.state();
                record(cur);
                last_stable = std::move(cur);
            }
        }
        result.final_state = stepper.state();
    } catch (const instability_error& e) {
        result.unstable = true;
        result.error = e.what();
        result.final_state = last_stable;
    }

    if (persist) {
        write_series_csv(plan.output_dir + "/series.csv", tab, hash);
        nlohmann::json j;
        j["version"] = kArtifactVersion;
        char stamp[32];
        std::snprintf(stamp, sizeof stamp, "%016llx", static_cast<unsigned long long>(hash));
        j["config_hash"] = stamp;
        j["mass_initial"] = result.mass_initial;
        j["max_mass_drift_rel"] = result.max_mass_drift_rel;
        j["min_u"] = result.min_u;
        j["max_u"] = result.max_u;
        j["unstable"] = result.unstable;
        if (result.unstable) j["error"] = result.error;
        j["plan"] = plan.describe();
        std::ofstream(plan.output_dir + "/summary.json") << j.dump(2) << "\n";
        if (result.unstable) {
            SnapshotMeta meta{"u_last_stable", last_stable.time, hash};
            write_snapshot(plan.output_dir + "/u_last_stable.field", last_stable.u, meta);
            meta.name = "v_last_stable";
            write_snapshot(plan.output_dir + "/v_last_stable.field", last_stable.v, meta);
        }
    }
    return result;
}

double continuous_dependence_D(const RunPlan& base, double delta, double p, double r) {
    RunPlan b = base;
    b.output_dir.clear();

    SimState s1 = initial_state(b);
    SimState s2 = s1;
    for (double& v : s2.u.data()) v *= 1.0 + delta;

    Stepper st1(s1, b.params, b.solver), st2(s2, b.params, b.solver);
    const bool rescaled = b.frame == Frame::rescaled;
    const double horizon = rescaled ? b.s_end : b.t_end;
    const double start = rescaled ? 0.0 : b.t0;
    const long n_steps = std::lround((horizon - start) / b.solver.dt);

    double sup = 0;
    for (long k = 1; k <= n_steps; ++k) {
        st1.step();
        st2.step();
        if (k % b.output_every == 0 || k == n_steps) {
            SimState a = st1.state(), c = st2.state();
            double t = rescaled ? std::exp(a.time) - 1.0 : a.time;
            double conv = rescaled ? std::exp(a.time) : 1.0;
            double fu = std::pow(t / conv, 1.0 - 1.0 / p);
            double fv = std::pow(t / conv, 0.5 - 1.0 / r);
            double du = lp_diff(a.u, c.u, p) * fu;
            auto g1 = gradient(a.v), g2 = gradient(c.v);
            for (std::size_t m = 0; m < g1.first.data().size(); ++m) {
                g1.first.data()[m] -= g2.first.data()[m];
                g1.second.data()[m] -= g2.second.data()[m];
            }
            double dv = lp_of_pair(g1.first, g1.second, r) * fv;
            sup = std::max(sup, du + dv);
        }
    }
    return sup;
}

ContinuousDependence continuous_dependence_experiment(const RunPlan& base,
                                                      const std::vector<double>& deltas,
                                                      double p, double r) {
    ContinuousDependence out;
    for (double d : deltas) {
        out.delta.push_back(d);
        out.D.push_back(d == 0 ? 0.0 : continuous_dependence_D(base, d, p, r));
    }
    for (std::size_t i = 0; i + 1 < out.delta.size(); ++i) {
        if (std::fabs(out.delta[i + 1] - out.delta[i] / 2.0) < 1e-12 * out.delta[i] &&
            out.D[i + 1] > 0)
            out.halving_ratio.push_back(out.D[i] / out.D[i + 1]);
    }
    return out;
}

} // namespace ks
