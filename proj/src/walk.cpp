#include "lvr/walk.hpp"

#include <cmath>

namespace lvr {

double sample_increment(const BlockTimeLaw& law, RngStream& rng) {
    const double z = rng.normal();
    if (law.is_constant()) return z;   // U == 1, no entropy consumed for U
    return z * std::sqrt(law.sample(rng));
}

namespace {

// Continue a walk currently at height `start` (> 0) until it first drops
// below zero; returns the overshoot -S at that step, or censored on cap.
LadderSample descend_below_zero(double start, const BlockTimeLaw& law, RngStream& rng,
                                std::uint64_t step_cap) {
    double s = start;
    for (std::uint64_t n = 1; n <= step_cap; ++n) {
        s += sample_increment(law, rng);
        if (s < 0.0) return {-s, false, n};
    }
    return {0.0, true, step_cap};
}

} // namespace

ExcursionOutcome run_excursion(const ModelParams& params, const BlockTimeLaw& law,
                               RngStream& rng, const ExcursionOptions& opts) {
    if (!(params.rho_b > 0.0))
        throw std::invalid_argument("run_excursion needs rho_b > 0");

    const double rho = params.rho_b;
    ExcursionOutcome out;
    out.params_tag = params.tag() ^ law.identity_hash();

    double s = 0.0;
    for (std::uint64_t n = 1; n <= opts.excursion_step_cap; ++n) {
        s += sample_increment(law, rng);
        if (s >= 0.0 && s <= rho) continue;

        out.tau = n;
        out.s_tau = s;
        if (s < 0.0) {
            out.side = ExitSide::Left;
            out.overshoot = -s;
            out.ladder_value = -s;   // tau == tau_0: the excursion is its own ladder epoch
            out.ladder_censored = false;
        } else {
            out.side = ExitSide::Right;
            out.overshoot = s - rho;
            if (opts.with_ladder_companion) {
                const LadderSample ls =
                    descend_below_zero(s, law, rng, opts.companion_step_cap);
                out.has_companion = true;
                out.ladder_value = ls.h;
                out.ladder_censored = ls.censored;
            }
        }
        const double dev = params.sigma_b * out.overshoot;
        out.loss_usd = 0.5 * params.ell * dev * dev;
        return out;
    }
    throw IterationCapExceeded("excursion exceeded step cap");
}

double ChainResult::loss_per_block_se() const {
    const std::size_t b = batch_loss.size();
    if (b < 2 || batch_size == 0) return 0.0;
    long double mean = 0.0L;
    for (double v : batch_loss) mean += v;
    mean /= static_cast<long double>(b);
    long double var = 0.0L;
    for (double v : batch_loss) {
        const long double d = v - mean;
        var += d * d;
    }
    var /= static_cast<long double>(b - 1);
    // batch means of per-block loss: scale back to the per-block estimate
    const long double se_batch_mean =
        std::sqrt(static_cast<double>(var / static_cast<long double>(b)));
    return static_cast<double>(se_batch_mean) / static_cast<double>(batch_size);
}

ChainResult run_chain(const ModelParams& params, const BlockTimeLaw& law,
                      std::uint64_t n_blocks, RngStream& rng,
                      const ExcursionOptions& opts) {
    if (n_blocks < 1)
        throw std::invalid_argument("run_chain needs n_blocks >= 1");
    (void)opts;

    const double rho = params.rho_b;
    ChainResult res;
    res.n_blocks = n_blocks;
    res.batch_size = n_blocks >= 1000 ? n_blocks / 1000 : n_blocks;

    ChainState st;
    long double total = 0.0L;
    long double batch = 0.0L;
    std::uint64_t in_batch = 0;

    for (std::uint64_t n = 0; n < n_blocks; ++n) {
        const double x = sample_increment(law, rng);
        const double next = st.m + x;
        if (next >= 0.0 && next <= rho) {
            st.m = next;
            st.lvr_last = 0.0;
        } else {
            const double b = next < 0.0 ? 0.0 : rho;
            const double dev = params.sigma_b * std::fabs(next - b);
            st.lvr_last = 0.5 * params.ell * dev * dev;
            st.arb_cum += st.lvr_last;
            st.m = 0.0;
            ++res.n_arbitrages;
            total += st.lvr_last;
            batch += st.lvr_last;
        }
        if (++in_batch == res.batch_size) {
            res.batch_loss.push_back(static_cast<double>(batch) /
                                     static_cast<double>(res.batch_size));
            batch = 0.0L;
            in_batch = 0;
        }
    }
    res.total_loss_usd = static_cast<double>(total);
    return res;
}

LadderSample ladder_first_passage_censored(const BlockTimeLaw& law, RngStream& rng,
                                           std::uint64_t step_cap) {
    double s = 0.0;
    for (std::uint64_t n = 1; n <= step_cap; ++n) {
        s += sample_increment(law, rng);
        if (s < 0.0) return {-s, false, n};
    }
    return {0.0, true, step_cap};
}

double ladder_first_passage(const BlockTimeLaw& law, RngStream& rng,
                            std::uint64_t step_cap) {
    const LadderSample ls = ladder_first_passage_censored(law, rng, step_cap);
    if (ls.censored) throw IterationCapExceeded("ladder first passage exceeded step cap");
    return ls.h;
}

} // namespace lvr
