#include "ks/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ks/config.hpp"
#include "ks/diagnostics.hpp"
#include "ks/errors.hpp"
#include "ks/io.hpp"
#include "ks/profile.hpp"
#include "ks/runner.hpp"

namespace ks::cli {

namespace {

using nlohmann::json;
constexpr double kPi = std::numbers::pi;

std::string hash_stamp(std::uint64_t h) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
}

json bounds_json(const ProfileBounds& b) {
    return json::array({b.increasing_concave, b.phi_prime_bound, b.s_bound, b.phi_sandwich,
                        !b.eps_s_applicable || b.eps_s_lt_2});
}

json a_eps_json(double a_eps) {
    if (std::isinf(a_eps)) return "inf";
    return a_eps;
}

// hash over the scientific arguments only; the output destination must not
// perturb the stamped results
std::uint64_t args_hash(const std::vector<std::string>& args) {
    std::string all;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--out") {
            ++i;
            continue;
        }
        all += args[i] + "\n";
    }
    return fnv1a_hash(all);
}

void write_table_csv(const std::string& path, const std::string& header,
                     const std::vector<std::vector<double>>& rows, std::uint64_t hash) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "# ks2d " << kArtifactVersion << " config=" << hash_stamp(hash) << "\n"
        << header << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_g17(row[i]);
        out << "\n";
    }
}

// ----- profile subcommands -------------------------------------------------

int cmd_profile_shoot(const ShootingConfig& cfg, const std::string& out_dir,
                      std::uint64_t hash) {
    ShootingConfig c = cfg;
    if (c.dy_out == 0) c.dy_out = 0.01;
    ProfileSolution sol = integrate_profile(c);
    ProfileBounds b = check_profile_bounds(sol);

    json j;
    j["version"] = kArtifactVersion;
    j["config_hash"] = hash_stamp(hash);
    j["epsilon"] = sol.epsilon;
    j["a"] = sol.a;
    j["mass"] = sol.mass;
    j["mass_over_8pi"] = sol.mass / (8.0 * kPi);
    j["tail_correction"] = sol.tail_correction;
    j["tilde_M"] = tildeM_of(sol.epsilon);
    j["A_eps"] = a_eps_json(A_of(sol.epsilon));
    j["bounds_ok"] = bounds_json(b);
    std::cout << j.dump(2) << "\n";
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_json_file(out_dir + "/summary.json", j);
        std::vector<std::vector<double>> rows;
        rows.reserve(sol.y.size());
        for (std::size_t i = 0; i < sol.y.size(); ++i)
            rows.push_back({sol.y[i], sol.phi[i], sol.phi_prime[i], sol.S[i]});
        write_table_csv(out_dir + "/solution.csv", "y,phi,phi_prime,S", rows, hash);
    }
    return 0;
}

int cmd_profile_map(double epsilon, double a_min, double a_max, int count, bool log_spaced,
                    const std::string& out_dir, std::uint64_t hash) {
    if (count < 1 || !(a_min > 0) || !(a_max >= a_min))
        throw std::invalid_argument("profile map: need 0 < a-min <= a-max and count >= 1");
    std::vector<double> grid(count);
    for (int i = 0; i < count; ++i) {
        double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        grid[i] = log_spaced ? a_min * std::pow(a_max / a_min, f)
                             : a_min + f * (a_max - a_min);
    }
    MassMap map = sweep_mass_map(epsilon, grid);

    json j;
    j["version"] = kArtifactVersion;
    j["config_hash"] = hash_stamp(hash);
    j["epsilon"] = epsilon;
    j["mstar_estimate"] = map.mstar_estimate;
    j["mstar_arg"] = map.mstar_arg;
    j["mstar_over_8pi"] = map.mstar_estimate / (8.0 * kPi);
    j["exceeds_8pi"] = map.mstar_estimate > 8.0 * kPi;
    j["tilde_M"] = tildeM_of(epsilon);
    j["A_eps"] = a_eps_json(A_of(epsilon));
    std::cout << j.dump(2) << "\n";
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_json_file(out_dir + "/summary.json", j);
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < map.a.size(); ++i)
            rows.push_back({map.a[i], epsilon, map.mass[i], map.mass[i] / (8.0 * kPi)});
        write_table_csv(out_dir + "/mass_map.csv", "a,epsilon,mass,mass_over_8pi", rows, hash);
    }
    return 0;
}

int cmd_profile_invert(double mass, double epsilon, const std::string& out_dir,
                       std::uint64_t hash) {
    double a = invert_mass(mass, epsilon);
    json j;
    j["version"] = kArtifactVersion;
    j["config_hash"] = hash_stamp(hash);
    j["epsilon"] = epsilon;
    j["mass"] = mass;
    j["a"] = a;
    j["mass_check"] = mass_of(a, epsilon);
    j["tilde_M"] = tildeM_of(epsilon);
    std::cout << j.dump(2) << "\n";
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_json_file(out_dir + "/summary.json", j);
    }
    return 0;
}

int cmd_profile_thresholds(double epsilon, const std::string& out_dir, std::uint64_t hash) {
    json j;
    j["version"] = kArtifactVersion;
    j["config_hash"] = hash_stamp(hash);
    j["epsilon"] = epsilon;
    j["tilde_M"] = tildeM_of(epsilon);
    j["tilde_M_over_4pi"] = tildeM_of(epsilon) / (4.0 * kPi);
    j["A_eps"] = a_eps_json(A_of(epsilon));
    std::cout << j.dump(2) << "\n";
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_json_file(out_dir + "/summary.json", j);
    }
    return 0;
}

int cmd_profile_reconstruct(const ShootingConfig& cfg, double r_max, int count,
                            const std::string& out_dir, std::uint64_t hash) {
    ShootingConfig c = cfg;
    if (c.dy_out == 0) c.dy_out = 0.005;
    ProfileSolution sol = integrate_profile(c);
    double top = std::sqrt(sol.y.back());
    if (r_max <= 0 || r_max > top) r_max = top;
    if (count < 2) throw std::invalid_argument("profile reconstruct: count must be >= 2");
    std::vector<double> rg(count);
    for (int i = 0; i < count; ++i) rg[i] = r_max * static_cast<double>(i) / (count - 1);
    RadialProfile prof = reconstruct_profile(sol, rg);

    json j;
    j["version"] = kArtifactVersion;
    j["config_hash"] = hash_stamp(hash);
    j["epsilon"] = prof.epsilon;
    j["a"] = prof.a;
    j["mass"] = prof.M;
    j["sigma"] = prof.sigma;
    j["U0"] = prof.U.front();
    j["tilde_M"] = tildeM_of(prof.epsilon);
    j["A_eps"] = a_eps_json(A_of(prof.epsilon));
    j["bounds_ok"] = bounds_json(check_profile_bounds(sol));
    std::cout << j.dump(2) << "\n";
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_json_file(out_dir + "/summary.json", j);
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < prof.r.size(); ++i)
            rows.push_back({prof.r[i], prof.U[i], prof.V[i], prof.V_prime[i]});
        write_table_csv(out_dir + "/profile.csv", "r,U,V,Vprime", rows, hash);
    }
    return 0;
}

// ----- verify --------------------------------------------------------------

struct Claim {
    std::string id;
    std::map<std::string, std::string> kv;
    double num(const std::string& k, double fallback) const {
        auto it = kv.find(k);
        if (it == kv.end()) return fallback;
        if (it->second == "inf") return std::numeric_limits<double>::infinity();
        return std::stod(it->second);
    }
};

std::vector<Claim> parse_claims(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open claims file: " + path);
    std::vector<Claim> out;
    std::string line;
    while (std::getline(in, line)) {
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ss(line);
        Claim c;
        if (!(ss >> c.id)) continue;
        std::string tok;
        while (ss >> tok) {
            std::size_t eq = tok.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("claim parameter must be key=value: " + tok);
            c.kv[tok.substr(0, eq)] = tok.substr(eq + 1);
        }
        out.push_back(std::move(c));
    }
    return out;
}

json verdict(const Claim& c, double expected, double fitted, double tol, bool pass) {
    json j;
    j["claim"] = c.id;
    json params = json::object();
    for (const auto& [k, v] : c.kv) params[k] = v;
    j["params"] = params;
    j["expected"] = expected;
    j["fitted"] = fitted;
    j["tolerance"] = tol;
    j["pass"] = pass;
    return j;
}

int cmd_verify(const std::string& run_dir, const std::string& claims_path) {
    std::vector<Claim> claims = parse_claims(claims_path);
    json report = json::array();
    bool all_pass = true;

    SeriesTable series;
    bool have_series = false;
    try {
        series = read_series_csv(run_dir + "/series.csv");
        have_series = true;
    } catch (const std::exception&) {
        have_series = false;
    }
    if (!claims.empty() && !have_series) {
        std::cerr << "verify: missing series.csv under " << run_dir << "\n";
        return 2;
    }

    auto t_col = have_series ? series.column("t") : std::vector<double>{};
    double t_max = t_col.empty() ? 0.0 : t_col.back();

    for (const Claim& c : claims) {
        double lo = c.num("from", t_max / 10.0);
        double hi = c.num("to", t_max);
        double tol = c.num("tol", 0.05);
        if (c.id == "decay_u" || c.id == "decay_gradv" || c.id == "decay_gradu" ||
            c.id == "decay_deltav") {
            double p = c.num("p", c.num("r", 2.0));
            std::vector<double> pl, rl;
            std::vector<RateVerdict> vs;
            if (c.id == "decay_u") vs = check_reg_effects(series, {p}, {}, lo, hi, tol);
            if (c.id == "decay_gradv") vs = check_reg_effects(series, {}, {p}, lo, hi, tol);
            if (c.id == "decay_gradu" || c.id == "decay_deltav") {
                vs = check_reg_effects(series, c.id == "decay_gradu" ? std::vector<double>{p}
                                                                      : std::vector<double>{},
                                       c.id == "decay_deltav" ? std::vector<double>{p}
                                                              : std::vector<double>{},
                                       lo, hi, tol);
            }
            // keep only the verdict for the derivative column when asked for it
            for (const auto& v : vs) {
                bool derivative = v.column.find("gradu") != std::string::npos ||
                                  v.column.find("deltav") != std::string::npos;
                if ((c.id == "decay_gradu" || c.id == "decay_deltav") != derivative) continue;
                report.push_back(verdict(c, v.expected, v.fit.exponent, tol, v.pass));
                all_pass = all_pass && v.pass;
            }
        } else if (c.id == "mass_drift") {
            double mtol = c.num("tol", 1e-12);
            auto mass = series.column("mass");
            double drift = 0;
            for (double m : mass) drift = std::max(drift, std::fabs(m - mass[0]) / mass[0]);
            bool pass = drift <= mtol;
            report.push_back(verdict(c, 0.0, drift, mtol, pass));
            all_pass = all_pass && pass;
        } else if (c.id == "positivity") {
            double ptol = c.num("tol", 1e-10);
            auto mn = series.column("min_u");
            auto mx = series.column("max_u");
            double worst = 0;
            for (std::size_t i = 0; i < mn.size(); ++i)
                worst = std::min(worst, mn[i] / std::max(mx[i], 1e-300));
            bool pass = worst >= -ptol;
            report.push_back(verdict(c, 0.0, worst, ptol, pass));
            all_pass = all_pass && pass;
        } else if (c.id == "energy_monotone") {
            double slack = c.num("slack", 1e-10);
            auto e = series.column("energy");
            bool pass = true;
            double worst = 0;
            for (std::size_t i = 1; i < e.size(); ++i) {
                double rise = e[i] - e[i - 1];
                worst = std::max(worst, rise);
                if (rise > slack) pass = false;
            }
            report.push_back(verdict(c, 0.0, worst, slack, pass));
            all_pass = all_pass && pass;
        } else if (c.id == "profile_attractor") {
            double final_below = c.num("final_below", 1e-2);
            auto d = series.column("dist_u");
            bool mono = monotone_decreasing_tail(t_col, d, c.num("monotone_from", t_max / 100.0),
                                                 1e-9);
            bool pass = mono && d.back() < final_below;
            report.push_back(verdict(c, final_below, d.back(), 0.0, pass));
            all_pass = all_pass && pass;
        } else if (c.id == "heat_attractor") {
            double p = c.num("p", 2.0);
            double frac = c.num("frac", 0.1);
            ConvergenceReport rep = convergence_to_heat(series, p);
            double v_at_from = 0;
            for (std::size_t i = 0; i < rep.t.size(); ++i)
                if (rep.t[i] >= lo) {
                    v_at_from = rep.scaled_u[i];
                    break;
                }
            bool mono = monotone_decreasing_tail(rep.t, rep.scaled_u, lo, 1e-9);
            bool pass = mono && v_at_from > 0 && rep.final_value < frac * v_at_from;
            report.push_back(verdict(c, frac, v_at_from > 0 ? rep.final_value / v_at_from : -1,
                                     0.0, pass));
            all_pass = all_pass && pass;
        } else if (c.id == "gradv_improved") {
            double r = c.num("r", std::numeric_limits<double>::infinity());
            double q = c.num("q", 4.0);
            RateVerdict v = check_improved_gradv_decay(series, r, q, lo, hi, tol);
            report.push_back(verdict(c, v.expected, v.fit.exponent, tol, v.pass));
            all_pass = all_pass && v.pass;
        } else {
            throw std::invalid_argument("unknown claim id: " + c.id);
        }
    }

    json out;
    out["version"] = kArtifactVersion;
    out["claims"] = report;
    out["all_pass"] = all_pass;
    write_json_file(run_dir + "/verdicts.json", out);
    std::cout << out.dump(2) << "\n";
    return all_pass ? 0 : 2;
}

} // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"2-D doubly parabolic Keller-Segel toolkit"};
    app.require_subcommand(1);

    // profile ----------------------------------------------------------------
    auto* profile = app.add_subcommand("profile", "self-similar profile computations");
    profile->require_subcommand(1);
    ShootingConfig scfg;
    std::string out_dir;
    double mass = 4.0 * kPi, a_min = 1e-3, a_max = 1e4, r_max = 0;
    int count = 40;
    bool linear = false;

    auto add_shoot_opts = [&](CLI::App* cmd, bool need_a) {
        if (need_a) cmd->add_option("--a", scfg.a, "shooting parameter")->required();
        cmd->add_option("--epsilon", scfg.epsilon, "diffusivity ratio")->required();
        cmd->add_option("--y-max", scfg.y_max, "truncation point");
        cmd->add_option("--rel-tol", scfg.rel_tol, "integrator relative tolerance");
        cmd->add_option("--abs-tol", scfg.abs_tol, "integrator absolute tolerance");
        cmd->add_option("--h-init", scfg.h_init, "Taylor start step");
        cmd->add_option("--dy-out", scfg.dy_out, "stored grid spacing");
        cmd->add_option("--out", out_dir, "output directory");
    };

    auto* shoot = profile->add_subcommand("shoot", "integrate one trajectory");
    add_shoot_opts(shoot, true);

    auto* map = profile->add_subcommand("map", "scan the mass map a -> M(a, eps)");
    map->add_option("--epsilon", scfg.epsilon)->required();
    map->add_option("--a-min", a_min);
    map->add_option("--a-max", a_max);
    map->add_option("--count", count);
    map->add_flag("--linear", linear, "linear instead of log spacing");
    map->add_option("--out", out_dir);

    auto* invert = profile->add_subcommand("invert", "solve M(a, eps) = mass for a");
    invert->add_option("--mass", mass)->required();
    invert->add_option("--epsilon", scfg.epsilon)->required();
    invert->add_option("--out", out_dir);

    auto* thresholds = profile->add_subcommand("thresholds", "tildeM and A for one epsilon");
    thresholds->add_option("--epsilon", scfg.epsilon)->required();
    thresholds->add_option("--out", out_dir);

    auto* reconstruct = profile->add_subcommand("reconstruct", "radial profile (U, V, V')");
    add_shoot_opts(reconstruct, true);
    reconstruct->add_option("--r-max", r_max, "radial extent (default sqrt(y_max))");
    reconstruct->add_option("--count", count, "number of radial samples")->default_val(2001);

    // simulate / verify -------------------------------------------------------
    std::string config_path, run_dir, claims_path;
    auto* simulate = app.add_subcommand("simulate", "run the PDE solver from a config file");
    simulate->add_option("config", config_path, "key = value configuration file")->required();

    auto* verify = app.add_subcommand("verify", "evaluate claims against a run directory");
    verify->add_option("rundir", run_dir)->required();
    verify->add_option("claims", claims_path)->required();

    std::vector<const char*> argv;
    argv.push_back("ks2d");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    std::uint64_t hash = args_hash(args);
    try {
        if (shoot->parsed()) return cmd_profile_shoot(scfg, out_dir, hash);
        if (map->parsed())
            return cmd_profile_map(scfg.epsilon, a_min, a_max, count, !linear, out_dir, hash);
        if (invert->parsed()) return cmd_profile_invert(mass, scfg.epsilon, out_dir, hash);
        if (thresholds->parsed()) return cmd_profile_thresholds(scfg.epsilon, out_dir, hash);
        if (reconstruct->parsed())
            return cmd_profile_reconstruct(scfg, r_max, count, out_dir, hash);
        if (simulate->parsed()) {
            Config cfg = Config::parse_file(config_path);
            RunPlan plan = RunPlan::from_config(cfg);
            RunResult res = run_simulation(plan);
            std::cout << "mass drift (relative): " << format_g17(res.max_mass_drift_rel)
                      << "\nmin u: " << format_g17(res.min_u)
                      << "\nmax u: " << format_g17(res.max_u) << "\n";
            if (res.unstable) {
                std::cerr << "instability: " << res.error << "\n";
                return 3;
            }
            return 0;
        }
        if (verify->parsed()) return cmd_verify(run_dir, claims_path);
    } catch (const instability_error& e) {
        std::cerr << "instability: " << e.what() << "\n";
        return 3;
    } catch (const invariant_error& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return 2;
    } catch (const positivity_error& e) {
        std::cerr << "positivity violation: " << e.what() << "\n";
        return 2;
    } catch (const localization_error& e) {
        std::cerr << "localization failure: " << e.what() << "\n";
        return 2;
    } catch (const weight_overflow_error& e) {
        std::cerr << "weighted-norm overflow: " << e.what() << "\n";
        return 2;
    } catch (const numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage/config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

} // namespace ks::cli
