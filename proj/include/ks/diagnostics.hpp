#ifndef KS_DIAGNOSTICS_HPP
#define KS_DIAGNOSTICS_HPP

#include <string>
#include <vector>

namespace ks {

/// Column-labelled numeric table; the exchange format between runs and
/// diagnostics (and the in-memory image of the time-series CSV).
struct SeriesTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    int column_index(const std::string& name) const;
    bool has_column(const std::string& name) const { return column_index_or(name) >= 0; }
    int column_index_or(const std::string& name) const;
    std::vector<double> column(const std::string& name) const;
};

struct DecayFit {
    double exponent = 0;   ///< slope of log(norm) against log(t)
    double prefactor = 0;  ///< exp(intercept)
    double residual = 0;   ///< max |log norm - fit|
    double window_lo = 0, window_hi = 0;
    std::size_t points = 0;
};

/// OLS fit of log(y) vs log(t) over t in [window_lo, window_hi].
/// Requires >= 5 points in the window, all positive.
DecayFit fit_decay_exponent(const std::vector<double>& t, const std::vector<double>& y,
                            double window_lo, double window_hi);

struct RateVerdict {
    std::string column;
    double expected = 0;
    DecayFit fit;
    double tolerance = 0.05;
    bool pass = false;
};

/// Fit the recorded norms of a run against the heat-type rates:
/// ||u||_p ~ t^{-(1-1/p)}, ||grad v||_r ~ t^{-(1/2-1/r)},
/// ||grad u||_p ~ t^{-(1-1/p)-1/2}, ||Delta v||_r ~ t^{-(1/2-1/r)-1/2}.
/// p/r values must correspond to recorded columns (1, 2 or inf).
std::vector<RateVerdict> check_reg_effects(const SeriesTable& run,
                                           const std::vector<double>& p_list,
                                           const std::vector<double>& r_list,
                                           double window_lo, double window_hi,
                                           double tolerance = 0.05);

struct ConvergenceReport {
    std::vector<double> t;
    std::vector<double> scaled_u;      ///< t^{1-1/p} ||u - ref||_p
    std::vector<double> scaled_gradv;  ///< t^{1/2-1/r} ||grad v - grad ref||_r
    bool monotone_tail = false;        ///< non-increasing over the last decade of t
    double final_value = 0;            ///< last scaled_u entry
};

/// Scaled distance-to-profile series from a rescaled run that recorded
/// dist_u / dist_gradv columns. Requires the run mass to match the profile
/// mass to 1e-8 relative.
ConvergenceReport convergence_to_profile(const SeriesTable& run, double profile_mass,
                                         double p, double r);

/// Scaled distance-to-heat-kernel series (columns dist_mg_l1/l2/linf).
ConvergenceReport convergence_to_heat(const SeriesTable& run, double p);

/// Fit of ||grad v||_r under alpha > 0 against the improved rate
/// t^{-(1/2-1/r)-(1/r-1/q+1/2)}; (r, q) must satisfy the admissibility
/// constraints q > 2r/(r+2) (finite r) or q > 2 (r = inf).
RateVerdict check_improved_gradv_decay(const SeriesTable& run, double r, double q,
                                       double window_lo, double window_hi,
                                       double tolerance = 0.05);

/// Non-increasing over indices with t >= t_lo, within a relative slack.
bool monotone_decreasing_tail(const std::vector<double>& t, const std::vector<double>& y,
                              double t_lo, double rel_slack = 1e-9);

} // namespace ks

#endif
