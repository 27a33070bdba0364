#ifndef KS_RUNNER_HPP
#define KS_RUNNER_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ks/config.hpp"
#include "ks/diagnostics.hpp"
#include "ks/simulator.hpp"

namespace ks {

/// Fully resolved description of one simulation run.
struct RunPlan {
    GridSpec grid{256, 20.0};
    Params params;
    SolverConfig solver;
    Frame frame = Frame::physical;

    double t0 = 1.0;     ///< physical start time (clock label of the data)
    double t_end = 10.0; ///< physical end; rescaled runs use s_end
    double s_end = 1.0;
    int output_every = 25;
    int snap_every = 0;  ///< snapshots every this many outputs (0: none)

    enum class Init { gaussian, profile };
    Init init_kind = Init::gaussian;
    double init_mass = 4.0 * 3.14159265358979323846;
    double init_sigma = 1.4142135623730951;  ///< u0 = M e^{-r^2/(2 sigma^2)}/(2 pi sigma^2)
    double noise_amplitude = 0.0;            ///< relative perturbation drawn from seed
    std::uint64_t seed = 0;

    enum class V0 { zero, gaussian };
    V0 v0_kind = V0::zero;
    double v0_amplitude = 1.0;
    double v0_sigma = 1.0;

    std::optional<double> profile_mass;  ///< record distances to (U_M, V_M)
    double diag_p = 1.0, diag_r = 2.0;
    std::optional<double> heat_mass;     ///< record distances to M G(t)

    std::string output_dir;

    static RunPlan from_config(const Config& cfg);
    std::string describe() const;       ///< canonical key=value text
    std::uint64_t hash() const;
};

struct RunResult {
    SeriesTable series;
    SimState final_state;
    double mass_initial = 0;
    double max_mass_drift_rel = 0;
    double min_u = 0;       ///< most negative u seen at output times
    double max_u = 0;
    bool unstable = false;
    std::string error;
};

/// Execute a plan. When plan.output_dir is non-empty, writes series.csv,
/// summary.json and snapshots there (the directory must exist or be
/// creatable). On instability the partial series and the last stable
/// snapshot are still persisted and the result is flagged.
RunResult run_simulation(const RunPlan& plan);

/// D(delta) = sup over sampled times of
///   t^{1-1/p} ||u1 - u2||_p + t^{1/2-1/r} ||grad v1 - grad v2||_r
/// where run 2 starts from (1 + delta) * u0. The sup is over output times
/// only (a lower bound of the true sup).
double continuous_dependence_D(const RunPlan& base, double delta, double p, double r);

/// Table of (delta, D(delta)) plus the halving ratios D(d)/D(d/2).
struct ContinuousDependence {
    std::vector<double> delta, D;
    std::vector<double> halving_ratio;
};
ContinuousDependence continuous_dependence_experiment(const RunPlan& base,
                                                      const std::vector<double>& deltas,
                                                      double p, double r);

} // namespace ks

#endif
