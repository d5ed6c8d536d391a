#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lvr/block_law.hpp"
#include "lvr/estimators.hpp"
#include "lvr/theory.hpp"

namespace lvr {

struct SweepConfig {
    std::vector<BlockTimeLaw> laws;
    std::vector<double> rho_grid;
    std::uint64_t paths = 10'000'000;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    double tolerance_multiplier = 4.0;
    double ell = 1.0;
    double sigma_b = 1.0;
    ExcursionOptions opts;
    std::string out_path;
};

// One theory-vs-MC comparison row. Deviations are (MC - theory) / theory in
// percent for all three quantities. wall_time_s is informational and not
// part of the canonical CSV.
struct ResultRow {
    double rho_b = 0;
    std::uint64_t n_paths = 0;
    double p_trade_mc = 0, p_trade_se = 0, p_trade_theory = 0, delta_p_trade_pct = 0;
    double lvr_mc = 0, lvr_se = 0, lvr_theory = 0, delta_lvr_pct = 0;
    double arb_mc = 0, arb_se = 0, arb_theory = 0, delta_arb_pct = 0;
    double wall_time_s = 0;
};

// Canonical CSV for ResultRow lists; one header line, >= 9 significant
// digits, '.' decimal point, no separators.
std::string result_rows_csv(const std::vector<ResultRow>& rows);

// Constant-law MC against the constant-block closed forms over the grid.
std::vector<ResultRow> table2_reproduction(const SweepConfig& cfg);

// Constant-law MC against the Poisson closed forms (the benchmark curve);
// delta columns are then the constant-vs-Poisson improvement in percent.
std::vector<ResultRow> figure1_reproduction(const SweepConfig& cfg);

// Minimal line chart of (rho_b, delta_arb_pct); cosmetic companion to the CSV.
std::string figure1_svg(const std::vector<ResultRow>& rows);

struct OvershootRow {
    double rho_b = 0;
    std::uint64_t n_paths = 0;
    double r1 = 0, r1_se = 0, o1 = 0, o1_se = 0;
    double r2 = 0, r2_se = 0, o2 = 0, o2_se = 0;
    double dev_r1 = 0, dev_o1 = 0, dev_r2 = 0, dev_o2 = 0;   // |moment - limit|
    std::uint64_t n_right = 0, n_censored = 0;
    double wall_time_s = 0;
};

struct OvershootStudy {
    std::vector<OvershootRow> rows;
    // least-squares fit of log(max deviation) against rho_b: dev ~ exp(a - c rho)
    double fit_rate = 0;        // c
    double fit_intercept = 0;   // a
    bool shrinking_within_noise = true;
};

// Constant-law overshoot moments against the kappa/omega limits over an
// increasing grid, with an exponential-decay fit of the deviations.
OvershootStudy overshoot_convergence_study(const SweepConfig& cfg);
std::string overshoot_csv(const OvershootStudy& s);

struct SweepRow {
    std::string law;
    double rho_b = 0;
    std::uint64_t n_paths = 0;
    double lvr_mc = 0, lvr_se = 0;
    double arb_mc = 0, arb_se = 0;
    double p_trade_mc = 0, p_trade_se = 0;
    double e_tau_mc = 0, e_tau_se = 0;
    double wall_time_s = 0;
};

struct DistributionSweep {
    std::vector<SweepRow> rows;          // ordered by lvr_mc ascending
    bool constant_present = false;
    bool constant_is_minimal = false;    // strict minimum among tested laws
    double min_separation_sigmas = 0;    // gap to runner-up in combined-SE units
};

// Multiple laws at one rho_b; reports the LVR ordering.
DistributionSweep distribution_sweep(const SweepConfig& cfg);
std::string sweep_csv(const DistributionSweep& s);

// Shared numeric formatting for all emitted files (12 significant digits).
std::string format_sig(double v);

} // namespace lvr
