#include "lvr/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <atomic>
#include <thread>

namespace lvr {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double sample_var(long double sum, long double sum2, std::uint64_t n) {
    if (n < 2) return kNan;
    const long double mean = sum / static_cast<long double>(n);
    long double v = (sum2 - static_cast<long double>(n) * mean * mean) /
                    static_cast<long double>(n - 1);
    return v > 0.0L ? static_cast<double>(v) : 0.0;
}

// covariance of the two sample means over the same n draws
double mean_cov(long double sum_a, long double sum_b, long double sum_ab,
                std::uint64_t n) {
    if (n < 2) return kNan;
    const long double nn = static_cast<long double>(n);
    const long double c = (sum_ab - sum_a * sum_b / nn) / (nn - 1.0L);
    return static_cast<double>(c / nn);
}

double mean_se(long double sum, long double sum2, std::uint64_t n) {
    const double v = sample_var(sum, sum2, n);
    return std::isnan(v) ? kNan : std::sqrt(v / static_cast<double>(n));
}

} // namespace

void MomentAccumulator::add(const ExcursionOutcome& e) {
    if (params_tag == 0) {
        params_tag = e.params_tag;
    } else if (params_tag != e.params_tag) {
        throw std::invalid_argument("excursion from a different parameter set");
    }
    ++n;
    const long double tau = static_cast<long double>(e.tau);
    const long double s = e.s_tau;
    const long double w = s * s - tau;
    sum_tau += tau;
    sum_tau2 += tau * tau;
    sum_s += s;
    sum_s2 += s * s;
    sum_w += w;
    sum_w2 += w * w;
    const long double loss = e.loss_usd;
    sum_loss += loss;
    sum_loss2 += loss * loss;
    sum_loss_tau += loss * tau;

    const long double v = e.overshoot;
    const long double v2 = v * v;
    if (e.side == ExitSide::Left) {
        sum_l1 += v;
        sum_l2 += v2;
        sum_l3 += v2 * v;
        sum_l4 += v2 * v2;
    } else {
        ++n_right;
        sum_r1 += v;
        sum_r2 += v2;
        sum_r3 += v2 * v;
        sum_r4 += v2 * v2;
        if (!e.has_companion) {
            // companions not requested for this run
        } else if (e.ladder_censored) {
            ++n_companion_censored;
        } else {
            ++n_companion;
            const long double o = e.ladder_value;
            const long double o2 = o * o;
            sum_o1 += o;
            sum_o2 += o2;
            sum_o3 += o2 * o;
            sum_o4 += o2 * o2;
            sum_pr1 += v;
            sum_pr2 += v2;
            sum_ro += v * o;
            sum_r2o += v2 * o;
            sum_ro2 += v * o2;
            sum_r2o2 += v2 * o2;
        }
    }
}

void MomentAccumulator::add_ladder(const LadderSample& s) {
    if (s.censored) {
        ++ladder_censored;
        return;
    }
    ++ladder_n;
    const long double h = s.h;
    const long double h2 = h * h;
    sum_h1 += h;
    sum_h2 += h2;
    sum_h3 += h2 * h;
    sum_h4 += h2 * h2;
}

MomentAccumulator merge_accumulators(std::vector<MomentAccumulator> parts) {
    std::erase_if(parts, [](const MomentAccumulator& a) { return a.empty(); });
    if (parts.empty()) return {};
    std::sort(parts.begin(), parts.end(),
              [](const MomentAccumulator& a, const MomentAccumulator& b) {
                  return a.stream_id < b.stream_id;
              });
    MomentAccumulator out = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) {
        const MomentAccumulator& a = parts[i];
        if (a.stream_id == parts[i - 1].stream_id)
            throw std::invalid_argument("duplicate stream id in merge");
        if (out.params_tag && a.params_tag && out.params_tag != a.params_tag)
            throw std::invalid_argument("merging accumulators from different parameter sets");
        if (!out.params_tag) out.params_tag = a.params_tag;
        if (out.law_u2 == 0.0) out.law_u2 = a.law_u2;

        out.n += a.n;
        out.n_right += a.n_right;
        out.n_companion += a.n_companion;
        out.n_companion_censored += a.n_companion_censored;
        out.sum_tau += a.sum_tau;
        out.sum_tau2 += a.sum_tau2;
        out.sum_s += a.sum_s;
        out.sum_s2 += a.sum_s2;
        out.sum_w += a.sum_w;
        out.sum_w2 += a.sum_w2;
        out.sum_loss += a.sum_loss;
        out.sum_loss2 += a.sum_loss2;
        out.sum_loss_tau += a.sum_loss_tau;
        out.sum_l1 += a.sum_l1;
        out.sum_l2 += a.sum_l2;
        out.sum_l3 += a.sum_l3;
        out.sum_l4 += a.sum_l4;
        out.sum_r1 += a.sum_r1;
        out.sum_r2 += a.sum_r2;
        out.sum_r3 += a.sum_r3;
        out.sum_r4 += a.sum_r4;
        out.sum_o1 += a.sum_o1;
        out.sum_o2 += a.sum_o2;
        out.sum_o3 += a.sum_o3;
        out.sum_o4 += a.sum_o4;
        out.sum_pr1 += a.sum_pr1;
        out.sum_pr2 += a.sum_pr2;
        out.sum_ro += a.sum_ro;
        out.sum_r2o += a.sum_r2o;
        out.sum_ro2 += a.sum_ro2;
        out.sum_r2o2 += a.sum_r2o2;
        out.ladder_n += a.ladder_n;
        out.ladder_censored += a.ladder_censored;
        out.sum_h1 += a.sum_h1;
        out.sum_h2 += a.sum_h2;
        out.sum_h3 += a.sum_h3;
        out.sum_h4 += a.sum_h4;
    }
    out.stream_id = parts.front().stream_id;
    return out;
}

WaldDiagnostics wald_diagnostics(const MomentAccumulator& acc) {
    if (acc.n < 2) throw std::invalid_argument("wald_diagnostics needs >= 2 excursions");
    WaldDiagnostics d;
    d.residual1 = static_cast<double>(acc.sum_s / static_cast<long double>(acc.n));
    d.se1 = mean_se(acc.sum_s, acc.sum_s2, acc.n);
    d.residual2 = static_cast<double>(acc.sum_w / static_cast<long double>(acc.n));
    d.se2 = mean_se(acc.sum_w, acc.sum_w2, acc.n);
    return d;
}

LadderMoments ladder_moments_from(const MomentAccumulator& acc, double u2) {
    if (acc.ladder_n < 2) throw std::invalid_argument("need >= 2 ladder draws");
    LadderMoments lm;
    lm.n = acc.ladder_n;
    lm.n_censored = acc.ladder_censored;
    const long double nn = static_cast<long double>(acc.ladder_n);
    lm.h1 = static_cast<double>(acc.sum_h1 / nn);
    lm.h2 = static_cast<double>(acc.sum_h2 / nn);
    lm.h1_se = mean_se(acc.sum_h1, acc.sum_h2, acc.ladder_n);
    lm.h2_se = mean_se(acc.sum_h2, acc.sum_h4, acc.ladder_n);
    lm.cov_h1h2 = mean_cov(acc.sum_h1, acc.sum_h2, acc.sum_h3, acc.ladder_n);
    const double total = static_cast<double>(acc.ladder_n + acc.ladder_censored);
    const double frac = total > 0 ? static_cast<double>(acc.ladder_censored) / total : 0.0;
    lm.bracket1 = frac * std::sqrt(2.0 / M_PI);
    lm.bracket2 = frac * (u2 > 0 ? u2 : 1.0);
    return lm;
}

EstimateReport finalize(const MomentAccumulator& acc, const ModelParams& params) {
    if (acc.n < 2) throw std::invalid_argument("finalize needs >= 2 excursions");
    (void)params;   // loss sums are already in USD; params kept for interface symmetry
    EstimateReport er;
    er.n_excursions = acc.n;
    er.n_right = acc.n_right;
    er.n_companion = acc.n_companion;
    er.n_companion_censored = acc.n_companion_censored;

    const long double nn = static_cast<long double>(acc.n);
    er.p = static_cast<double>(acc.n_right) / static_cast<double>(acc.n);
    er.p_se = std::sqrt(er.p * (1.0 - er.p) / static_cast<double>(acc.n));

    er.e_tau = static_cast<double>(acc.sum_tau / nn);
    er.e_tau_se = mean_se(acc.sum_tau, acc.sum_tau2, acc.n);
    er.p_trade = 1.0 / er.e_tau;
    er.p_trade_se = er.e_tau_se / (er.e_tau * er.e_tau);

    er.lvr_bar = static_cast<double>(acc.sum_loss / nn);
    er.lvr_bar_se = mean_se(acc.sum_loss, acc.sum_loss2, acc.n);
    er.arb_bar = er.p_trade * er.lvr_bar;
    {
        // delta method for lvr_bar / e_tau with the loss-tau covariance
        const double vl = sample_var(acc.sum_loss, acc.sum_loss2, acc.n) /
                          static_cast<double>(acc.n);
        const double vt = sample_var(acc.sum_tau, acc.sum_tau2, acc.n) /
                          static_cast<double>(acc.n);
        const double clt = mean_cov(acc.sum_loss, acc.sum_tau, acc.sum_loss_tau, acc.n);
        const double t = er.e_tau, l = er.lvr_bar;
        const double var = vl / (t * t) + vt * l * l / (t * t * t * t) -
                           2.0 * clt * l / (t * t * t);
        er.arb_bar_se = var > 0 ? std::sqrt(var) : 0.0;
    }

    const std::uint64_t n_left = acc.n - acc.n_right;
    if (n_left >= 2) {
        const long double nl = static_cast<long double>(n_left);
        er.l1 = static_cast<double>(acc.sum_l1 / nl);
        er.l2 = static_cast<double>(acc.sum_l2 / nl);
        er.l1_se = mean_se(acc.sum_l1, acc.sum_l2, n_left);
        er.l2_se = mean_se(acc.sum_l2, acc.sum_l4, n_left);
        er.cov_l1_l2 = mean_cov(acc.sum_l1, acc.sum_l2, acc.sum_l3, n_left);
    } else {
        er.l1 = er.l2 = er.l1_se = er.l2_se = er.cov_l1_l2 = kNan;
    }
    if (acc.n_right >= 2) {
        const long double nr = static_cast<long double>(acc.n_right);
        er.r1 = static_cast<double>(acc.sum_r1 / nr);
        er.r2 = static_cast<double>(acc.sum_r2 / nr);
        er.r1_se = mean_se(acc.sum_r1, acc.sum_r2, acc.n_right);
        er.r2_se = mean_se(acc.sum_r2, acc.sum_r4, acc.n_right);
        er.cov_r1_r2 = mean_cov(acc.sum_r1, acc.sum_r2, acc.sum_r3, acc.n_right);
    } else {
        er.r1 = er.r2 = er.r1_se = er.r2_se = er.cov_r1_r2 = kNan;
    }
    if (acc.n_companion >= 2) {
        const long double no = static_cast<long double>(acc.n_companion);
        er.o1 = static_cast<double>(acc.sum_o1 / no);
        er.o2 = static_cast<double>(acc.sum_o2 / no);
        er.o1_se = mean_se(acc.sum_o1, acc.sum_o2, acc.n_companion);
        er.o2_se = mean_se(acc.sum_o2, acc.sum_o4, acc.n_companion);
        er.cov_o1_o2 = mean_cov(acc.sum_o1, acc.sum_o2, acc.sum_o3, acc.n_companion);
        // cross covariances over the paired (R, O) subsample
        er.cov_r1_o1 = mean_cov(acc.sum_pr1, acc.sum_o1, acc.sum_ro, acc.n_companion);
        er.cov_r1_o2 = mean_cov(acc.sum_pr1, acc.sum_o2, acc.sum_ro2, acc.n_companion);
        er.cov_r2_o1 = mean_cov(acc.sum_pr2, acc.sum_o1, acc.sum_r2o, acc.n_companion);
        er.cov_r2_o2 = mean_cov(acc.sum_pr2, acc.sum_o2, acc.sum_r2o2, acc.n_companion);
        const double tot = static_cast<double>(acc.n_companion + acc.n_companion_censored);
        const double frac = static_cast<double>(acc.n_companion_censored) / tot;
        er.o_bracket1 = frac * std::sqrt(2.0 / M_PI);
        er.o_bracket2 = frac * (acc.law_u2 > 0 ? acc.law_u2 : 1.0);
    } else {
        er.o1 = er.o2 = er.o1_se = er.o2_se = kNan;
        er.cov_o1_o2 = er.cov_r1_o1 = er.cov_r1_o2 = er.cov_r2_o1 = er.cov_r2_o2 = kNan;
        er.o_bracket1 = er.o_bracket2 = kNan;
    }

    if (acc.ladder_n >= 2) {
        const LadderMoments lm = ladder_moments_from(acc, acc.law_u2);
        er.h1 = lm.h1;
        er.h1_se = lm.h1_se;
        er.h2 = lm.h2;
        er.h2_se = lm.h2_se;
        er.cov_h1_h2 = lm.cov_h1h2;
    } else {
        er.h1 = er.h1_se = er.h2 = er.h2_se = er.cov_h1_h2 = kNan;
    }

    const WaldDiagnostics wd = wald_diagnostics(acc);
    er.wald_residual_1 = wd.residual1;
    er.wald_se_1 = wd.se1;
    er.wald_residual_2 = wd.residual2;
    er.wald_se_2 = wd.se2;
    return er;
}

// ---------------------------------------------------------------------------

namespace {

// The sample count is split over a fixed number of substreams, which workers
// claim dynamically. Per-substream draw counts and orders are fixed, and the
// merge is canonical, so results are byte-identical for any worker count —
// the dynamic scheduling only balances the heavy-tailed per-draw work.
constexpr std::uint64_t kSubstreams = 512;

template <typename ChunkFn>
std::vector<MomentAccumulator> run_chunked(std::uint64_t n, unsigned workers,
                                           ChunkFn&& chunk_fn) {
    std::vector<MomentAccumulator> parts(kSubstreams);
    std::atomic<std::uint64_t> next{0};
    auto run_worker = [&] {
        for (;;) {
            const std::uint64_t c = next.fetch_add(1);
            if (c >= kSubstreams) break;
            const std::uint64_t mine = n / kSubstreams + (c < n % kSubstreams ? 1 : 0);
            if (mine == 0) continue;
            chunk_fn(c, mine, parts[c]);
        }
    };
    workers = std::max(1u, workers);
    if (workers == 1) {
        run_worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run_worker);
        for (auto& t : pool) t.join();
    }
    return parts;
}

} // namespace

MomentAccumulator simulate_excursions(const SimulationJob& job) {
    if (!job.law) throw std::invalid_argument("simulate_excursions: null law");
    if (job.n_excursions < 1) throw std::invalid_argument("need n_excursions >= 1");

    auto parts = run_chunked(
        job.n_excursions, job.workers,
        [&](std::uint64_t c, std::uint64_t mine, MomentAccumulator& acc) {
            RngStream rng(job.seed, job.stream_base + c);
            acc.stream_id = job.stream_base + c;
            acc.law_u2 = job.law->u2();
            for (std::uint64_t i = 0; i < mine; ++i)
                acc.add(run_excursion(job.params, *job.law, rng, job.opts));
        });
    return merge_accumulators(std::move(parts));
}

LadderMoments estimate_ladder_moments(const BlockTimeLaw& law, std::uint64_t n,
                                      std::uint64_t seed, unsigned workers,
                                      std::uint64_t step_cap, std::uint64_t stream_base) {
    if (n < 2) throw std::invalid_argument("need n >= 2 ladder draws");

    auto parts = run_chunked(
        n, workers, [&](std::uint64_t c, std::uint64_t mine, MomentAccumulator& acc) {
            RngStream rng(seed, stream_base + c);
            acc.stream_id = stream_base + c;
            acc.law_u2 = law.u2();
            for (std::uint64_t i = 0; i < mine; ++i)
                acc.add_ladder(ladder_first_passage_censored(law, rng, step_cap));
        });
    const MomentAccumulator merged = merge_accumulators(std::move(parts));
    return ladder_moments_from(merged, law.u2());
}

// ---------------------------------------------------------------------------

IdentityCheck check_p_identity(const EstimateReport& er, const LadderMoments& lm,
                               double rho_b) {
    IdentityCheck c;
    const double b = rho_b + er.r1 + er.o1;
    c.lhs = er.p;
    c.rhs = lm.h1 / b;
    const double dh1 = 1.0 / b;
    const double dr1 = -lm.h1 / (b * b);
    const double do1 = dr1;
    const double var = er.p_se * er.p_se + dh1 * dh1 * lm.h1_se * lm.h1_se +
                       dr1 * dr1 * er.r1_se * er.r1_se +
                       do1 * do1 * er.o1_se * er.o1_se +
                       2.0 * dr1 * do1 * er.cov_r1_o1;
    c.se = std::sqrt(std::max(var, 0.0));
    return c;
}

IdentityCheck check_tau_identity(const EstimateReport& er, const LadderMoments& lm,
                                 double rho_b) {
    IdentityCheck c;
    const double a = rho_b * rho_b + 2.0 * rho_b * er.r1 + er.r2 - er.o2;
    const double b = rho_b + er.r1 + er.o1;
    c.lhs = er.e_tau;
    c.rhs = lm.h2 + lm.h1 * a / b;

    const double dh2 = 1.0;
    const double dh1 = a / b;
    const double dr1 = lm.h1 * (2.0 * rho_b * b - a) / (b * b);
    const double dr2 = lm.h1 / b;
    const double do2 = -lm.h1 / b;
    const double do1 = -lm.h1 * a / (b * b);

    double var = er.e_tau_se * er.e_tau_se;
    var += dh1 * dh1 * lm.h1_se * lm.h1_se + dh2 * dh2 * lm.h2_se * lm.h2_se +
           2.0 * dh1 * dh2 * lm.cov_h1h2;
    var += dr1 * dr1 * er.r1_se * er.r1_se + dr2 * dr2 * er.r2_se * er.r2_se +
           2.0 * dr1 * dr2 * er.cov_r1_r2;
    var += do1 * do1 * er.o1_se * er.o1_se + do2 * do2 * er.o2_se * er.o2_se +
           2.0 * do1 * do2 * er.cov_o1_o2;
    var += 2.0 * (dr1 * do1 * er.cov_r1_o1 + dr1 * do2 * er.cov_r1_o2 +
                  dr2 * do1 * er.cov_r2_o1 + dr2 * do2 * er.cov_r2_o2);
    c.se = std::sqrt(std::max(var, 0.0));
    return c;
}

IdentityCheck check_lvr_identity(const EstimateReport& er, const LadderMoments& lm,
                                 const ModelParams& params) {
    IdentityCheck c;
    const double rho_b = params.rho_b;
    const double scale = params.ell * params.sigma_b * params.sigma_b;
    const double b = rho_b + er.r1 + er.o1;
    const double d = er.r2 - er.o2;
    c.lhs = er.lvr_bar;
    c.rhs = scale * (0.5 * lm.h2 + lm.h1 * d / (2.0 * b));

    const double dh2 = 0.5 * scale;
    const double dh1 = scale * d / (2.0 * b);
    const double dr2 = scale * lm.h1 / (2.0 * b);
    const double do2 = -dr2;
    const double dr1 = -scale * lm.h1 * d / (2.0 * b * b);
    const double do1 = dr1;

    double var = er.lvr_bar_se * er.lvr_bar_se;
    var += dh1 * dh1 * lm.h1_se * lm.h1_se + dh2 * dh2 * lm.h2_se * lm.h2_se +
           2.0 * dh1 * dh2 * lm.cov_h1h2;
    var += dr1 * dr1 * er.r1_se * er.r1_se + dr2 * dr2 * er.r2_se * er.r2_se +
           2.0 * dr1 * dr2 * er.cov_r1_r2;
    var += do1 * do1 * er.o1_se * er.o1_se + do2 * do2 * er.o2_se * er.o2_se +
           2.0 * do1 * do2 * er.cov_o1_o2;
    var += 2.0 * (dr1 * do1 * er.cov_r1_o1 + dr1 * do2 * er.cov_r1_o2 +
                  dr2 * do1 * er.cov_r2_o1 + dr2 * do2 * er.cov_r2_o2);
    c.se = std::sqrt(std::max(var, 0.0));
    return c;
}

IdentityCheck check_h1_decomposition(const EstimateReport& er, const LadderMoments& lm) {
    IdentityCheck c;
    c.lhs = lm.h1;
    c.rhs = er.l1 * (1.0 - er.p) + er.o1 * er.p;
    const double dl1 = 1.0 - er.p;
    const double do1 = er.p;
    const double dp = er.o1 - er.l1;
    const double var = lm.h1_se * lm.h1_se + dl1 * dl1 * er.l1_se * er.l1_se +
                       do1 * do1 * er.o1_se * er.o1_se + dp * dp * er.p_se * er.p_se;
    c.se = std::sqrt(std::max(var, 0.0));
    return c;
}

IdentityCheck check_h2_decomposition(const EstimateReport& er, const LadderMoments& lm) {
    IdentityCheck c;
    c.lhs = lm.h2;
    c.rhs = er.l2 * (1.0 - er.p) + er.o2 * er.p;
    const double dl2 = 1.0 - er.p;
    const double do2 = er.p;
    const double dp = er.o2 - er.l2;
    const double var = lm.h2_se * lm.h2_se + dl2 * dl2 * er.l2_se * er.l2_se +
                       do2 * do2 * er.o2_se * er.o2_se + dp * dp * er.p_se * er.p_se;
    c.se = std::sqrt(std::max(var, 0.0));
    return c;
}

} // namespace lvr
