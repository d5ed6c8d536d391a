#pragma once

#include <cstdint>
#include <vector>

#include "lvr/block_law.hpp"
#include "lvr/params.hpp"
#include "lvr/walk.hpp"

namespace lvr {

// Mergeable raw-sum accumulator for excursion and ladder statistics.
// Sums are kept in extended precision and are order-fixed within a stream;
// merging canonicalizes by stream id, so any grouping of whole-stream parts
// finalizes bit-identically.
struct MomentAccumulator {
    std::uint64_t params_tag = 0;   // 0 while empty
    std::uint64_t stream_id = 0;
    double law_u2 = 0.0;            // second moment of the block law (0 = unset)

    std::uint64_t n = 0;            // excursions
    std::uint64_t n_right = 0;
    std::uint64_t n_companion = 0;            // right exits with a ladder companion value
    std::uint64_t n_companion_censored = 0;   // companions that hit the step cap

    long double sum_tau = 0, sum_tau2 = 0;
    long double sum_s = 0, sum_s2 = 0;
    long double sum_w = 0, sum_w2 = 0;        // w := s_tau^2 - tau (Wald residual variable)
    long double sum_loss = 0, sum_loss2 = 0, sum_loss_tau = 0;

    // left-exit overshoots L
    long double sum_l1 = 0, sum_l2 = 0, sum_l3 = 0, sum_l4 = 0;
    // right-exit overshoots R (all right exits)
    long double sum_r1 = 0, sum_r2 = 0, sum_r3 = 0, sum_r4 = 0;
    // leftover overshoots O and paired R moments (uncensored right exits only)
    long double sum_o1 = 0, sum_o2 = 0, sum_o3 = 0, sum_o4 = 0;
    long double sum_pr1 = 0, sum_pr2 = 0;
    long double sum_ro = 0, sum_r2o = 0, sum_ro2 = 0, sum_r2o2 = 0;

    // dedicated ladder draws (independent of the excursion stream)
    std::uint64_t ladder_n = 0;
    std::uint64_t ladder_censored = 0;
    long double sum_h1 = 0, sum_h2 = 0, sum_h3 = 0, sum_h4 = 0;

    void add(const ExcursionOutcome& e);
    void add_ladder(const LadderSample& s);
    bool empty() const { return n == 0 && ladder_n == 0; }
};

// Merge whole-stream accumulators; parts are folded in increasing stream-id
// order regardless of argument order. Throws on duplicate stream ids or
// mismatched parameter tags.
MomentAccumulator merge_accumulators(std::vector<MomentAccumulator> parts);

struct WaldDiagnostics {
    double residual1 = 0, se1 = 0;   // mean(s_tau)            (zero under Eq. *)
    double residual2 = 0, se2 = 0;   // mean(s_tau^2) - mean(tau)  (zero under Eq. **)
};

WaldDiagnostics wald_diagnostics(const MomentAccumulator& acc);

// Moment estimates of the ladder height from dedicated draws. Censored draws
// are excluded from the sums and accounted for by worst-case brackets from
// the folded-normal domination bound: the unobserved values lie in
// [0, sqrt(2/pi)] (first moment) and [0, u2] (second moment) on average.
struct LadderMoments {
    double h1 = 0, h1_se = 0;
    double h2 = 0, h2_se = 0;
    double cov_h1h2 = 0;
    std::uint64_t n = 0;           // uncensored draws
    std::uint64_t n_censored = 0;
    double bracket1 = 0;           // worst-case |bias| bound on h1 from censoring
    double bracket2 = 0;           // same for h2
};

struct EstimateReport {
    std::uint64_t n_excursions = 0;
    std::uint64_t n_right = 0;
    std::uint64_t n_companion = 0;
    std::uint64_t n_companion_censored = 0;

    double p = 0, p_se = 0;              // P(right exit)
    double e_tau = 0, e_tau_se = 0;
    double p_trade = 0, p_trade_se = 0;  // = 1 / e_tau, delta-method SE
    double lvr_bar = 0, lvr_bar_se = 0;  // USD per arbitrage
    double arb_bar = 0, arb_bar_se = 0;  // USD per block, = p_trade * lvr_bar

    double l1 = 0, l1_se = 0, l2 = 0, l2_se = 0;
    double r1 = 0, r1_se = 0, r2 = 0, r2_se = 0;
    double o1 = 0, o1_se = 0, o2 = 0, o2_se = 0;
    double h1 = 0, h1_se = 0, h2 = 0, h2_se = 0;   // NaN unless ladder draws present

    double wald_residual_1 = 0, wald_se_1 = 0;
    double wald_residual_2 = 0, wald_se_2 = 0;

    // covariances of the estimators (already scaled by sample sizes)
    double cov_l1_l2 = 0;
    double cov_r1_r2 = 0, cov_o1_o2 = 0;
    double cov_r1_o1 = 0, cov_r1_o2 = 0, cov_r2_o1 = 0, cov_r2_o2 = 0;
    double cov_h1_h2 = 0;

    // worst-case |bias| bounds on o1/o2 from companion censoring
    double o_bracket1 = 0, o_bracket2 = 0;
};

// Requires n >= 2. u2 for the censoring brackets is taken from the
// accumulator when set.
EstimateReport finalize(const MomentAccumulator& acc, const ModelParams& params);

// ---------------------------------------------------------------------------
// Parallel drivers. Worker w owns RngStream(seed, stream_base + w); results
// merge canonically, so a run is reproducible for fixed (seed, workers) and
// independent of thread scheduling.

struct SimulationJob {
    ModelParams params;
    const BlockTimeLaw* law = nullptr;
    std::uint64_t n_excursions = 0;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    std::uint64_t stream_base = 0;
    ExcursionOptions opts;
};

MomentAccumulator simulate_excursions(const SimulationJob& job);

LadderMoments estimate_ladder_moments(const BlockTimeLaw& law, std::uint64_t n,
                                      std::uint64_t seed, unsigned workers = 1,
                                      std::uint64_t step_cap = 1ULL << 23,
                                      std::uint64_t stream_base = 1u << 20);

// Ladder moments from an accumulator that holds dedicated ladder sums.
LadderMoments ladder_moments_from(const MomentAccumulator& acc, double u2);

// ---------------------------------------------------------------------------
// Plug-in identity checks (delta-method combined standard errors).

struct IdentityCheck {
    double lhs = 0, rhs = 0, se = 0;
    double gap() const { return lhs - rhs; }
};

// p vs h1 / (rho_b + r1 + o1)
IdentityCheck check_p_identity(const EstimateReport& er, const LadderMoments& lm,
                               double rho_b);
// E[tau] vs h2 + h1 (rho^2 + 2 rho r1 + r2 - o2) / (rho + r1 + o1)
IdentityCheck check_tau_identity(const EstimateReport& er, const LadderMoments& lm,
                                 double rho_b);
// LVR vs ell sigma_b^2 [h2/2 + h1 (r2 - o2) / (2 (rho + r1 + o1))]
IdentityCheck check_lvr_identity(const EstimateReport& er, const LadderMoments& lm,
                                 const ModelParams& params);
// h1 vs l1 (1-p) + o1 p   and   h2 vs l2 (1-p) + o2 p
IdentityCheck check_h1_decomposition(const EstimateReport& er, const LadderMoments& lm);
IdentityCheck check_h2_decomposition(const EstimateReport& er, const LadderMoments& lm);

} // namespace lvr
