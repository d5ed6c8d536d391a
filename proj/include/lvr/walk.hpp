#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "lvr/block_law.hpp"
#include "lvr/params.hpp"
#include "lvr/rng.hpp"

namespace lvr {

// Thrown when a walk exceeds its step cap. Stopping times here are a.s.
// finite; the cap is a guard against pathological parameters.
struct IterationCapExceeded : std::runtime_error {
    explicit IterationCapExceeded(const char* what) : std::runtime_error(what) {}
};

enum class ExitSide { Left, Right };

struct ExcursionOptions {
    std::uint64_t excursion_step_cap = 1'000'000'000ULL;
    // Right exits can optionally be continued past the boundary until the
    // partial sum first drops below zero, realizing the ladder companion of
    // the excursion (the "leftover" overshoot). This one-sided passage has
    // infinite expected duration, so the continuation carries its own cap;
    // cap hits are reported as censored, never silently truncated.
    bool with_ladder_companion = false;
    std::uint64_t companion_step_cap = 1ULL << 23;
};

// One arbitrage cycle of the normalized walk: S_0 = 0, S_n = S_{n-1} + X_n
// until S_n leaves [0, rho_b].
struct ExcursionOutcome {
    std::uint64_t tau = 0;          // blocks until arbitrage, >= 1
    ExitSide side = ExitSide::Left;
    double overshoot = 0.0;         // |S_tau| (left) or S_tau - rho_b (right)
    double s_tau = 0.0;             // signed exit value
    double loss_usd = 0.0;          // (ell/2) * (sigma_b * overshoot)^2
    // Ladder height of this excursion's walk: equals overshoot on left exits;
    // on right exits it is the continued walk's overshoot below zero
    // (meaningful only when companions were requested and not censored).
    double ladder_value = 0.0;
    bool has_companion = false;     // right exits: continuation was requested
    bool ladder_censored = false;   // right exits: continuation hit its cap
    std::uint64_t params_tag = 0;
};

// Normalized per-block log return X = Z * sqrt(U), Z ~ N(0,1), U ~ law.
// Marginal variance is 1 for every mean-one law.
double sample_increment(const BlockTimeLaw& law, RngStream& rng);

ExcursionOutcome run_excursion(const ModelParams& params, const BlockTimeLaw& law,
                               RngStream& rng, const ExcursionOptions& opts = {});

// Block-level aggregate over a fixed horizon; equivalent to concatenating
// excursions and truncating at n_blocks. Batch sums of per-block loss are
// kept for a batch-means standard error of the loss-per-block estimate.
struct ChainResult {
    std::uint64_t n_blocks = 0;
    std::uint64_t n_arbitrages = 0;
    double total_loss_usd = 0.0;
    std::uint64_t batch_size = 0;
    std::vector<double> batch_loss;

    double loss_per_block() const {
        return n_blocks ? total_loss_usd / static_cast<double>(n_blocks) : 0.0;
    }
    double loss_per_block_se() const;
};

ChainResult run_chain(const ModelParams& params, const BlockTimeLaw& law,
                      std::uint64_t n_blocks, RngStream& rng,
                      const ExcursionOptions& opts = {});

// First passage of the free walk below zero; H = -S at that step.
struct LadderSample {
    double h = 0.0;
    bool censored = false;
    std::uint64_t steps = 0;
};

LadderSample ladder_first_passage_censored(const BlockTimeLaw& law, RngStream& rng,
                                           std::uint64_t step_cap);

// Spec-facing variant: throws IterationCapExceeded instead of censoring.
double ladder_first_passage(const BlockTimeLaw& law, RngStream& rng,
                            std::uint64_t step_cap = 1'000'000'000ULL);

} // namespace lvr
