// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria run at full scale by default; --criterion N runs one.
//
// Published comparison values used below (deviation tables and the
// constant-vs-Poisson curve) are quoted in percent; statistical gates are
// k-standard-error bounds with k = 4 unless a criterion pins a looser band.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <thread>
#include <string>
#include <vector>

#include <json.hpp>

#include "lvr/block_law.hpp"
#include "lvr/estimators.hpp"
#include "lvr/experiments.hpp"
#include "lvr/manifest.hpp"
#include "lvr/theory.hpp"
#include "lvr/walk.hpp"

using namespace lvr;

namespace {

unsigned g_workers = 0;

unsigned workers() {
    if (g_workers) return g_workers;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

struct Gate {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

MomentAccumulator run_sim(const BlockTimeLaw& law, double rho, std::uint64_t n,
                          std::uint64_t seed, bool companions,
                          std::uint64_t companion_cap = 1ULL << 23) {
    SimulationJob job;
    job.params = params_from_rho(rho);
    job.law = &law;
    job.n_excursions = n;
    job.seed = seed;
    job.workers = workers();
    job.opts.with_ladder_companion = companions;
    job.opts.companion_step_cap = companion_cap;
    return simulate_excursions(job);
}

// memoized full-scale ladder runs shared between criteria 4, 5, 8, 10
const LadderMoments& ladder_10m(const std::string& key, const BlockTimeLaw& law,
                                std::uint64_t seed) {
    static std::map<std::string, LadderMoments> cache;
    auto it = cache.find(key);
    if (it == cache.end()) {
        it = cache
                 .emplace(key, estimate_ladder_moments(law, 10'000'000, seed, workers(),
                                                       1ULL << 23))
                 .first;
    }
    return it->second;
}

struct SharedRun {
    EstimateReport er;
    double rho;
    double u2;
};

// criterion-7 grid shared with criteria 8 and 9
const std::vector<SharedRun>& wald_grid_runs() {
    static std::vector<SharedRun> runs;
    if (!runs.empty()) return runs;
    const std::vector<std::pair<std::string, BlockTimeLaw>> laws = {
        {"constant", BlockTimeLaw::constant(1.0)},
        {"exponential", BlockTimeLaw::exponential(1.0)},
        {"uniform", BlockTimeLaw::uniform_interval(0.0, 2.0)},
        {"empirical", BlockTimeLaw::empirical({0.2, 0.7, 1.1, 1.6, 2.4})},
    };
    std::uint64_t seed = 42'000;
    for (const auto& [name, law] : laws) {
        for (double rho : {0.5, 1.0, 2.0, 5.0}) {
            const auto params = params_from_rho(rho);
            const auto acc = run_sim(law, rho, 1'000'000, seed++, /*companions=*/true);
            runs.push_back({finalize(acc, params), rho, law.u2()});
        }
    }
    return runs;
}

const LadderMoments& law_ladder_2m(std::size_t law_index) {
    static std::map<std::size_t, LadderMoments> cache;
    auto it = cache.find(law_index);
    if (it == cache.end()) {
        const std::vector<BlockTimeLaw> laws = {
            BlockTimeLaw::constant(1.0), BlockTimeLaw::exponential(1.0),
            BlockTimeLaw::uniform_interval(0.0, 2.0),
            BlockTimeLaw::empirical({0.2, 0.7, 1.1, 1.6, 2.4})};
        it = cache
                 .emplace(law_index,
                          estimate_ladder_moments(laws[law_index], 2'000'000,
                                                  52'000 + law_index, workers(),
                                                  1ULL << 23))
                 .first;
    }
    return it->second;
}

// ---------------------------------------------------------------- criteria --

// 1. Poisson exactness: exponential law, E[tau] and LVR match the exact
//    closed forms within 4 SE at 1e7 excursions.
Gate criterion1() {
    Gate g;
    const auto law = BlockTimeLaw::exponential(1.0);
    for (double rho : {0.5, 1.0, 2.0, 5.0}) {
        const auto params = params_from_rho(rho);
        const auto er = finalize(run_sim(law, rho, 10'000'000, 101, false), params);
        const double etau_exact = 1.0 + rho / std::sqrt(2.0);
        g.require(std::fabs(er.e_tau - etau_exact) <= 4.0 * er.e_tau_se,
                  "E[tau] off at rho=" + fmt(rho) + " (" + fmt(er.e_tau) + " vs " +
                      fmt(etau_exact) + ", se " + fmt(er.e_tau_se) + ")");
        g.require(std::fabs(er.lvr_bar - 0.5) <= 4.0 * er.lvr_bar_se,
                  "LVR off at rho=" + fmt(rho) + " (" + fmt(er.lvr_bar) + ", se " +
                      fmt(er.lvr_bar_se) + ")");
    }
    return g;
}

// 2. Table-2 reproduction at 1e8 paths per row: ARB deviation within 0.1
//    percentage points of the published column, and the published positive
//    deviations at rho_b <= 0.9 reproduce in sign and size (the published
//    P_trade column tracks the deviation of 1/P_trade; it is reconstructed
//    here from the LVR and ARB columns).
Gate criterion2() {
    Gate g;
    SweepConfig cfg;
    cfg.rho_grid = {0.5, 0.7, 0.8, 0.9, 1.0, 2.0, 3.0, 4.0, 5.0};
    cfg.paths = 100'000'000;
    cfg.seed = 202;
    cfg.workers = workers();
    const auto rows = table2_reproduction(cfg);

    const double paper_arb[] = {0.493, 0.248, 0.158, 0.070, 0.014, -0.017, 0.009, 0.000,
                                0.005};
    const double paper_p[] = {5.138, 2.568, 1.722, 1.108, 0.654, -0.076, 0.003, 0.005,
                              0.003};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        g.require(std::fabs(r.delta_arb_pct - paper_arb[i]) <= 0.1,
                  "ARB deviation at rho=" + fmt(r.rho_b) + ": " + fmt(r.delta_arb_pct) +
                      " vs published " + fmt(paper_arb[i]));
        if (r.rho_b <= 0.9) {
            const double recon_p =
                100.0 * ((1.0 + r.delta_lvr_pct / 100.0) / (1.0 + r.delta_arb_pct / 100.0) -
                         1.0);
            g.require(recon_p > 0.0, "1/P_trade deviation sign at rho=" + fmt(r.rho_b));
            g.require(std::fabs(recon_p - paper_p[i]) <= 0.3,
                      "1/P_trade deviation at rho=" + fmt(r.rho_b) + ": " + fmt(recon_p) +
                          " vs published " + fmt(paper_p[i]));
        }
    }
    return g;
}

// 3. Constant-vs-Poisson ARB improvement within +-0.3pp of the published
//    curve at 1e7 paths.
Gate criterion3() {
    Gate g;
    SweepConfig cfg;
    cfg.rho_grid = {0.5, 1.0, 2.0, 5.0, 10.0};
    cfg.paths = 10'000'000;
    cfg.seed = 303;
    cfg.workers = workers();
    const auto rows = figure1_reproduction(cfg);
    const double paper[] = {-4.820, -8.120, -11.141, -14.276, -15.766};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        g.require(std::fabs(rows[i].delta_arb_pct - paper[i]) <= 0.3,
                  "diff% at rho=" + fmt(rows[i].rho_b) + ": " +
                      fmt(rows[i].delta_arb_pct) + " vs published " + fmt(paper[i]));
    }
    return g;
}

// 4. Ladder universality: h1 = 1/sqrt(2) for all three laws at 1e7 draws.
Gate criterion4() {
    Gate g;
    const double target = 1.0 / std::sqrt(2.0);
    const struct {
        const char* name;
        BlockTimeLaw law;
        std::uint64_t seed;
    } cases[] = {
        {"constant", BlockTimeLaw::constant(1.0), 404},
        {"exponential", BlockTimeLaw::exponential(1.0), 405},
        {"uniform", BlockTimeLaw::uniform_interval(0.0, 2.0), 406},
    };
    for (const auto& c : cases) {
        const auto& lm = ladder_10m(c.name, c.law, c.seed);
        g.require(std::fabs(lm.h1 - target) <= 4.0 * lm.h1_se,
                  std::string(c.name) + ": h1 = " + fmt(lm.h1) + " (se " + fmt(lm.h1_se) +
                      ")");
        g.require(lm.bracket1 <= 4.0 * lm.h1_se,
                  std::string(c.name) + ": censoring bracket " + fmt(lm.bracket1) +
                      " too wide");
    }
    return g;
}

// 5. Ladder second moments: constant law |zeta(1/2)|/sqrt(pi), exponential 1.
Gate criterion5() {
    Gate g;
    const auto& con = ladder_10m("constant", BlockTimeLaw::constant(1.0), 404);
    g.require(std::fabs(con.h2 - ladder_h2_constant()) <= 4.0 * con.h2_se,
              "constant h2 = " + fmt(con.h2) + " vs " + fmt(ladder_h2_constant()) +
                  " (se " + fmt(con.h2_se) + ")");
    const auto& ex = ladder_10m("exponential", BlockTimeLaw::exponential(1.0), 405);
    g.require(std::fabs(ex.h2 - 1.0) <= 4.0 * ex.h2_se,
              "exponential h2 = " + fmt(ex.h2) + " (se " + fmt(ex.h2_se) + ")");
    return g;
}

// 6. Overshoot limits (constant law): r1, o1 -> kappa and r2, o2 -> omega at
//    rho_b = 8 within 4 SE; absolute deviations strictly smaller than at
//    rho_b = 1 for all four moments.
Gate criterion6() {
    Gate g;
    const auto law = BlockTimeLaw::constant(1.0);
    const double kap = lotov_kappa(), ome = lotov_omega();
    const auto params8 = params_from_rho(8.0);
    const auto er8 = finalize(run_sim(law, 8.0, 10'000'000, 606, true), params8);
    const auto params1 = params_from_rho(1.0);
    const auto er1 = finalize(run_sim(law, 1.0, 10'000'000, 607, true), params1);

    g.require(std::fabs(er8.r1 - kap) <= 4.0 * er8.r1_se,
              "r1(8) = " + fmt(er8.r1) + " vs kappa " + fmt(kap));
    g.require(std::fabs(er8.o1 - kap) <= 4.0 * er8.o1_se,
              "o1(8) = " + fmt(er8.o1) + " vs kappa " + fmt(kap));
    g.require(std::fabs(er8.r2 - ome) <= 4.0 * er8.r2_se,
              "r2(8) = " + fmt(er8.r2) + " vs omega " + fmt(ome));
    g.require(std::fabs(er8.o2 - ome) <= 4.0 * er8.o2_se,
              "o2(8) = " + fmt(er8.o2) + " vs omega " + fmt(ome));
    g.require(er8.o_bracket1 <= 4.0 * er8.o1_se, "o censoring bracket too wide at rho=8");

    g.require(std::fabs(er8.r1 - kap) < std::fabs(er1.r1 - kap), "r1 deviation not shrinking");
    g.require(std::fabs(er8.o1 - kap) < std::fabs(er1.o1 - kap), "o1 deviation not shrinking");
    g.require(std::fabs(er8.r2 - ome) < std::fabs(er1.r2 - ome), "r2 deviation not shrinking");
    g.require(std::fabs(er8.o2 - ome) < std::fabs(er1.o2 - ome), "o2 deviation not shrinking");
    return g;
}

// 7. Wald identities for every built-in law and rho_b grid at 1e6 excursions.
Gate criterion7() {
    Gate g;
    for (const auto& run : wald_grid_runs()) {
        g.require(std::fabs(run.er.wald_residual_1) <= 4.0 * run.er.wald_se_1,
                  "Wald I at rho=" + fmt(run.rho) + " (res " +
                      fmt(run.er.wald_residual_1) + ", se " + fmt(run.er.wald_se_1) + ")");
        g.require(std::fabs(run.er.wald_residual_2) <= 4.0 * run.er.wald_se_2,
                  "Wald II at rho=" + fmt(run.rho) + " (res " +
                      fmt(run.er.wald_residual_2) + ", se " + fmt(run.er.wald_se_2) + ")");
    }
    return g;
}

// 8. Internal consistency: the p, E[tau], and LVR plug-in identities close
//    within combined 4 SE on every criterion-7 run, and the block-level ARB
//    matches P_trade x LVR from an independent excursion stream.
Gate criterion8() {
    Gate g;
    const auto& runs = wald_grid_runs();
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& run = runs[i];
        const auto& lm = law_ladder_2m(i / 4);
        const auto c9 = check_p_identity(run.er, lm, run.rho);
        g.require(std::fabs(c9.gap()) <= 4.0 * c9.se,
                  "Eq(9) at run " + std::to_string(i) + " gap " + fmt(c9.gap()) + " se " +
                      fmt(c9.se));
        const auto c11 = check_tau_identity(run.er, lm, run.rho);
        g.require(std::fabs(c11.gap()) <= 4.0 * c11.se,
                  "Eq(11) at run " + std::to_string(i) + " gap " + fmt(c11.gap()) +
                      " se " + fmt(c11.se));
        const auto c12 = check_lvr_identity(run.er, lm, params_from_rho(run.rho));
        g.require(std::fabs(c12.gap()) <= 4.0 * c12.se,
                  "Eq(12) at run " + std::to_string(i) + " gap " + fmt(c12.gap()) +
                      " se " + fmt(c12.se));
    }

    // Eq. (1): block-level ARB vs excursion-level decomposition
    const auto law = BlockTimeLaw::constant(1.0);
    const auto params = params_from_rho(1.0);
    RngStream rng(808, 12'000);
    const auto chain = run_chain(params, law, 10'000'000, rng);
    const auto er = finalize(run_sim(law, 1.0, 5'000'000, 809, false), params);
    const double se = std::sqrt(chain.loss_per_block_se() * chain.loss_per_block_se() +
                                er.arb_bar_se * er.arb_bar_se);
    g.require(std::fabs(chain.loss_per_block() - er.arb_bar) <= 4.0 * se,
              "Eq(1) decomposition: chain " + fmt(chain.loss_per_block()) +
                  " vs excursions " + fmt(er.arb_bar) + " (se " + fmt(se) + ")");
    return g;
}

// 9. Moment bounds: r1, o1 <= sqrt(2/pi) and r2, o2 <= u2 within 4 SE on all
//    criterion-7 runs.
Gate criterion9() {
    Gate g;
    const double bound1 = std::sqrt(2.0 / M_PI);
    for (std::size_t i = 0; i < wald_grid_runs().size(); ++i) {
        const auto& run = wald_grid_runs()[i];
        g.require(run.er.r1 <= bound1 + 4.0 * run.er.r1_se,
                  "r1 bound at run " + std::to_string(i));
        g.require(run.er.o1 <= bound1 + 4.0 * run.er.o1_se,
                  "o1 bound at run " + std::to_string(i));
        g.require(run.er.r2 <= run.u2 + 4.0 * run.er.r2_se,
                  "r2 bound at run " + std::to_string(i));
        g.require(run.er.o2 <= run.u2 + 4.0 * run.er.o2_se,
                  "o2 bound at run " + std::to_string(i));
    }
    return g;
}

// 10. C_mu contract: exactly zero for the constant law; termwise nonnegative
//     for the exponential law; the ladder-oracle value is reported next to
//     the series value and their (real) disagreement is flagged, not hidden.
Gate criterion10() {
    Gate g;
    const auto con = c_mu(BlockTimeLaw::constant(1.0), 10'000);
    g.require(con.value == 0.0 && con.tail_bound == 0.0, "constant C_mu not exactly 0");

    const auto ex = c_mu(BlockTimeLaw::exponential(1.0), 10'000);
    g.require(ex.value >= 0.0, "exponential C_mu negative");
    {
        long double ratio = std::sqrt(M_PI) / 2.0L;
        bool all_nonneg = true;
        for (int n = 1; n <= 10'000; ++n) {
            if (1.0L - ratio / std::sqrt(static_cast<long double>(n)) < 0.0L)
                all_nonneg = false;
            ratio *= (n + 0.5L) / n;
        }
        g.require(all_nonneg, "a series term is negative");
    }

    const auto& lm = ladder_10m("exponential", BlockTimeLaw::exponential(1.0), 405);
    const double oracle = lm.h2 - ladder_h2_constant();
    const double oracle_expect = 1.0 - ladder_h2_constant();   // 0.1760832
    g.require(std::fabs(oracle - oracle_expect) <= 4.0 * lm.h2_se + lm.bracket2,
              "ladder oracle " + fmt(oracle) + " vs " + fmt(oracle_expect));
    // the series evaluates to about half the oracle; the disagreement must
    // surface as a flag under any sane combined-error radius
    const double combined = 4.0 * lm.h2_se + lm.bracket2 + ex.tail_bound;
    const bool disagreement_flagged = std::fabs(oracle - ex.value) > combined;
    g.require(disagreement_flagged,
              "series/oracle disagreement (" + fmt(ex.value) + " vs " + fmt(oracle) +
                  ") not flagged");
    std::printf("    [criterion 10] series C_mu = %s, ladder-oracle C_mu = %s "
                "(disagreement flagged: %s)\n",
                fmt(ex.value).c_str(), fmt(oracle).c_str(),
                disagreement_flagged ? "yes" : "no");
    return g;
}

// 11. Dirac optimality: constant law attains strictly minimal MC LVR at
//     rho_b = 10 with > 4 combined-SE separation against the exponential law.
Gate criterion11() {
    Gate g;
    SweepConfig cfg;
    cfg.rho_grid = {10.0};
    cfg.paths = 10'000'000;
    cfg.seed = 1111;
    cfg.workers = workers();
    cfg.laws = {BlockTimeLaw::constant(1.0), BlockTimeLaw::exponential(1.0),
                BlockTimeLaw::uniform_interval(0.0, 2.0)};
    const auto sw = distribution_sweep(cfg);
    g.require(sw.constant_is_minimal, "constant law is not the LVR minimum");

    const SweepRow* con = nullptr;
    const SweepRow* ex = nullptr;
    for (const auto& r : sw.rows) {
        if (r.law == "constant") con = &r;
        if (r.law == "exponential") ex = &r;
    }
    g.require(con && ex, "sweep rows missing");
    if (con && ex) {
        const double gap = ex->lvr_mc - con->lvr_mc;
        const double se =
            std::sqrt(con->lvr_se * con->lvr_se + ex->lvr_se * ex->lvr_se);
        g.require(gap > 4.0 * se, "constant/exponential separation " + fmt(gap) +
                                      " <= 4 x " + fmt(se));
    }
    return g;
}

// 12. CLI determinism: a repeated invocation with the same seed in
//     deterministic mode produces byte-identical CSV and equal manifest
//     digests.
Gate criterion12() {
    Gate g;
#ifndef LVRLAB_BIN
    g.require(false, "CLI binary path missing");
#else
    auto slurp = [](const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream os;
        os << in.rdbuf();
        return os.str();
    };
    auto run = [&](const std::string& args) {
        return std::system((std::string(LVRLAB_BIN) + " " + args + " > /dev/null 2>&1")
                               .c_str());
    };
    const std::string base = "/tmp/lvr_acceptance_det";
    for (const char* cmd :
         {"simulate --dist constant --rho 1 --paths 5e4 --seed 12 --deterministic",
          "figure1 --grid 1 2 --paths 2e4 --seed 12 --deterministic"}) {
        const std::string o1 = base + "_a.csv", o2 = base + "_b.csv";
        g.require(run(std::string(cmd) + " --out " + o1) == 0, "run 1 failed");
        g.require(run(std::string(cmd) + " --out " + o2) == 0, "run 2 failed");
        g.require(!slurp(o1).empty() && slurp(o1) == slurp(o2),
                  std::string("CSV bytes differ for: ") + cmd);
        const auto m1 = nlohmann::json::parse(slurp(o1 + ".manifest.json"));
        const auto m2 = nlohmann::json::parse(slurp(o2 + ".manifest.json"));
        g.require(m1["outputs"][0]["digest"] == m2["outputs"][0]["digest"],
                  std::string("manifest digests differ for: ") + cmd);
        for (const auto& p : {o1, o2, o1 + ".manifest.json", o2 + ".manifest.json"})
            std::remove(p.c_str());
    }
#endif
    return g;
}

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (!std::strcmp(argv[i], "--criterion") && i + 1 < argc) only = std::atoi(argv[++i]);
        if (!std::strcmp(argv[i], "--workers") && i + 1 < argc)
            g_workers = static_cast<unsigned>(std::atoi(argv[++i]));
    }

    const struct {
        int id;
        const char* name;
        std::function<Gate()> run;
    } criteria[] = {
        {1, "Poisson exactness (exponential law closed forms)", criterion1},
        {2, "deviation-table reproduction, constant law, 1e8 paths", criterion2},
        {3, "constant-vs-Poisson ARB curve reproduction", criterion3},
        {4, "ladder universality h1 = 1/sqrt(2)", criterion4},
        {5, "ladder second moments (constant, exponential)", criterion5},
        {6, "overshoot limits kappa/omega at rho_b = 8", criterion6},
        {7, "Wald identity suite over laws x rho grid", criterion7},
        {8, "internal consistency: plug-in identities and Eq.(1)", criterion8},
        {9, "moment bounds r,o <= folded-normal moments", criterion9},
        {10, "C_mu contract and ladder-oracle side-by-side", criterion10},
        {11, "Dirac optimality sweep at rho_b = 10", criterion11},
        {12, "CLI determinism (bytes and digests)", criterion12},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        if (only && c.id != only) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Gate g;
        try {
            g = c.run();
        } catch (const std::exception& e) {
            g.ok = false;
            g.detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] criterion %2d: %s (%.1fs)\n", g.ok ? "PASS" : "FAIL", c.id,
                    c.name, secs);
        if (!g.ok) {
            std::printf("       %s\n", g.detail.c_str());
            ++failures;
        }
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
