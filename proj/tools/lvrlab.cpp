// lvrlab: Monte-Carlo laboratory and closed-form calculator for AMM
// loss-versus-rebalancing under configurable block-time distributions.
//
// Exit codes: 0 success, 2 usage error, 3 runtime/simulation error.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lvr/block_law.hpp"
#include "lvr/estimators.hpp"
#include "lvr/experiments.hpp"
#include "lvr/manifest.hpp"
#include "lvr/theory.hpp"
#include "lvr/version.hpp"
#include "lvr/walk.hpp"

namespace {

using nlohmann::json;

struct CommonOpts {
    std::string dist = "constant";
    std::vector<double> uniform_range{0.0, 2.0};
    std::string empirical_file;
    double rho = 0.0;
    double gamma = 0.0, sigma = 0.0, blocktime = 0.0;
    double ell = 1.0;
    double sigma_b = 1.0;
    double paths = 1e6;
    std::uint64_t seed = 1;
    unsigned workers = 0;   // 0 = machine parallelism
    bool deterministic = false;
    std::string out;
    std::string format = "table";
    double tolerance_multiplier = 4.0;
    std::uint64_t ladder_cap = 1ULL << 23;
    std::uint64_t companion_cap = 1ULL << 23;
};

void add_law_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--dist", o.dist,
                    "block-time law: constant|exponential|uniform|empirical")
        ->default_val(o.dist);
    cmd->add_option("--uniform-range", o.uniform_range,
                    "raw [lo hi] for --dist uniform (rescaled to mean 1)")
        ->expected(2);
    cmd->add_option("--empirical-file", o.empirical_file,
                    "sample file for --dist empirical, one value per line");
}

void add_model_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--rho", o.rho, "normalized spread rho_b = gamma / sigma_b");
    cmd->add_option("--gamma", o.gamma, "AMM spread (log-price units)");
    cmd->add_option("--sigma", o.sigma, "volatility per sqrt(time unit)");
    cmd->add_option("--blocktime", o.blocktime, "mean block time (time units)");
    cmd->add_option("--ell", o.ell, "liquidity, USD per percentage point")->default_val(1.0);
    cmd->add_option("--sigma-b", o.sigma_b, "per-block volatility when --rho is used")
        ->default_val(1.0);
}

void add_run_flags(CLI::App* cmd, CommonOpts& o, bool with_paths = true) {
    if (with_paths)
        cmd->add_option("--paths", o.paths, "number of excursions/samples (accepts 1e7)");
    cmd->add_option("--seed", o.seed, "RNG seed")->envname("LVRLAB_SEED");
    cmd->add_option("--workers", o.workers, "worker threads (default: machine parallelism)")
        ->envname("LVRLAB_WORKERS");
    cmd->add_flag("--deterministic", o.deterministic,
                  "single-threaded canonical order (bit-exact golden runs)");
    cmd->add_option("--out", o.out, "output file (CSV); manifest written alongside")
        ->envname("LVRLAB_OUT");
    cmd->add_option("--format", o.format, "stdout format: table|csv|json")
        ->default_val("table");
    cmd->add_option("--tolerance-multiplier", o.tolerance_multiplier,
                    "statistical tolerance in SE units")
        ->default_val(4.0)
        ->envname("LVRLAB_TOLERANCE_MULTIPLIER");
    cmd->add_option("--ladder-cap", o.ladder_cap, "step cap per ladder draw");
    cmd->add_option("--companion-cap", o.companion_cap,
                    "step cap per right-exit ladder companion");
}

unsigned resolve_workers(const CommonOpts& o) {
    if (o.deterministic) return 1;
    if (o.workers > 0) return o.workers;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

lvr::BlockTimeLaw build_law(const CommonOpts& o) {
    if (o.dist == "constant") return lvr::BlockTimeLaw::constant(1.0);
    if (o.dist == "exponential") return lvr::BlockTimeLaw::exponential(1.0);
    if (o.dist == "uniform")
        return lvr::BlockTimeLaw::uniform_interval(o.uniform_range[0], o.uniform_range[1]);
    if (o.dist == "empirical") {
        if (o.empirical_file.empty())
            throw CLI::ValidationError("--dist empirical requires --empirical-file");
        return lvr::BlockTimeLaw::empirical_from_file(o.empirical_file);
    }
    throw CLI::ValidationError("unknown --dist: " + o.dist);
}

lvr::ModelParams build_params(const CommonOpts& o) {
    if (o.rho > 0.0) return lvr::params_from_rho(o.rho, o.ell, o.sigma_b);
    if (o.gamma > 0.0 && o.sigma > 0.0 && o.blocktime > 0.0)
        return lvr::derive_params(o.sigma, o.blocktime, o.gamma, o.ell);
    throw CLI::ValidationError("need --rho or all of --gamma/--sigma/--blocktime");
}

std::uint64_t paths_count(const CommonOpts& o, std::uint64_t min_paths) {
    if (!(o.paths >= static_cast<double>(min_paths)) || o.paths > 1e15)
        throw CLI::ValidationError("--paths must be in [" + std::to_string(min_paths) +
                                   ", 1e15]");
    return static_cast<std::uint64_t>(o.paths);
}

std::map<std::string, std::string> config_snapshot(const CLI::App* cmd) {
    std::map<std::string, std::string> cfg;
    for (const CLI::Option* opt : cmd->get_options()) {
        const std::string name = opt->get_lnames().empty() ? opt->get_name()
                                                           : opt->get_lnames().front();
        if (name == "help" || name == "config") continue;
        if (opt->count() > 0) {
            std::string joined;
            for (const auto& r : opt->results()) {
                if (!joined.empty()) joined += " ";
                joined += r;
            }
            cfg[name] = joined;
        } else if (!opt->get_default_str().empty()) {
            cfg[name] = opt->get_default_str();
        }
    }
    return cfg;
}

lvr::RunManifest start_manifest(const std::string& command, const CLI::App* cmd,
                                const CommonOpts& o) {
    lvr::RunManifest m;
    m.command = command;
    m.config = config_snapshot(cmd);
    m.config["resolved_workers"] = std::to_string(resolve_workers(o));
    m.seed = o.seed;
    m.workers = resolve_workers(o);
    m.engine_version = lvr::kEngineVersion;
    m.started_at = lvr::iso8601_utc_now();
    return m;
}

void finish_outputs(lvr::RunManifest& m, const std::string& out_path,
                    const std::string& bytes) {
    const std::string digest = lvr::write_file_atomic(out_path, bytes);
    m.outputs.push_back({out_path, digest});
}

void close_manifest(lvr::RunManifest& m, const std::string& out_path) {
    m.finished_at = lvr::iso8601_utc_now();
    lvr::write_manifest(out_path + ".manifest.json", m);
}

// ---------------------------------------------------------------- reports --

json theory_to_json(const lvr::TheoryReport& r) {
    json j;
    j["regime"] = lvr::regime_name(r.regime);
    j["p_trade"] = r.p_trade;
    j["lvr_bar"] = r.lvr_bar;
    j["arb_bar"] = r.arb_bar;
    j["error_order"] = r.error_order;
    j["p_trade_capped"] = r.p_trade_capped;
    j["constants"] = {{"h1", r.constants_used.h1},
                      {"h2", r.constants_used.h2},
                      {"kappa", r.constants_used.kappa},
                      {"omega", r.constants_used.omega},
                      {"c_mu", r.constants_used.c_mu}};
    j["warnings"] = r.warnings;
    return j;
}

void print_theory(const lvr::TheoryReport& r, const std::string& format) {
    if (format == "json") {
        std::cout << theory_to_json(r).dump(2) << "\n";
        return;
    }
    std::printf("regime        %s (error order: %s)\n", lvr::regime_name(r.regime),
                r.error_order.c_str());
    std::printf("p_trade       %.9g%s\n", r.p_trade, r.p_trade_capped ? "  [capped]" : "");
    std::printf("lvr_bar       %.9g USD/arbitrage\n", r.lvr_bar);
    std::printf("arb_bar       %.9g USD/block\n", r.arb_bar);
    std::printf("constants     h1=%.9g h2=%.9g kappa=%.9g omega=%.9g c_mu=%.9g\n",
                r.constants_used.h1, r.constants_used.h2, r.constants_used.kappa,
                r.constants_used.omega, r.constants_used.c_mu);
    for (const auto& w : r.warnings) std::printf("warning       %s\n", w.c_str());
}

json estimate_to_json(const lvr::EstimateReport& er) {
    json j;
    j["n_excursions"] = er.n_excursions;
    j["n_right"] = er.n_right;
    j["p"] = {{"value", er.p}, {"se", er.p_se}};
    j["e_tau"] = {{"value", er.e_tau}, {"se", er.e_tau_se}};
    j["p_trade"] = {{"value", er.p_trade}, {"se", er.p_trade_se}};
    j["lvr_bar"] = {{"value", er.lvr_bar}, {"se", er.lvr_bar_se}};
    j["arb_bar"] = {{"value", er.arb_bar}, {"se", er.arb_bar_se}};
    j["l1"] = {{"value", er.l1}, {"se", er.l1_se}};
    j["l2"] = {{"value", er.l2}, {"se", er.l2_se}};
    j["r1"] = {{"value", er.r1}, {"se", er.r1_se}};
    j["r2"] = {{"value", er.r2}, {"se", er.r2_se}};
    j["o1"] = {{"value", er.o1}, {"se", er.o1_se}};
    j["o2"] = {{"value", er.o2}, {"se", er.o2_se}};
    j["wald_residual_1"] = {{"value", er.wald_residual_1}, {"se", er.wald_se_1}};
    j["wald_residual_2"] = {{"value", er.wald_residual_2}, {"se", er.wald_se_2}};
    j["companions"] = {{"n", er.n_companion},
                       {"censored", er.n_companion_censored},
                       {"o1_bias_bracket", er.o_bracket1},
                       {"o2_bias_bracket", er.o_bracket2}};
    return j;
}

void print_estimate(const lvr::EstimateReport& er, const std::string& format) {
    if (format == "json") {
        std::cout << estimate_to_json(er).dump(2) << "\n";
        return;
    }
    std::printf("n             %llu excursions (%llu right exits)\n",
                static_cast<unsigned long long>(er.n_excursions),
                static_cast<unsigned long long>(er.n_right));
    auto line = [](const char* k, double v, double se) {
        std::printf("%-13s %.9g  (se %.3g)\n", k, v, se);
    };
    line("p_trade", er.p_trade, er.p_trade_se);
    line("lvr_bar", er.lvr_bar, er.lvr_bar_se);
    line("arb_bar", er.arb_bar, er.arb_bar_se);
    line("e_tau", er.e_tau, er.e_tau_se);
    line("p_right", er.p, er.p_se);
    line("l1", er.l1, er.l1_se);
    line("l2", er.l2, er.l2_se);
    line("r1", er.r1, er.r1_se);
    line("r2", er.r2, er.r2_se);
    if (er.n_companion >= 2) {
        line("o1", er.o1, er.o1_se);
        line("o2", er.o2, er.o2_se);
        std::printf("companions    %llu ok, %llu censored (o1 bias bracket %.3g, o2 %.3g)\n",
                    static_cast<unsigned long long>(er.n_companion),
                    static_cast<unsigned long long>(er.n_companion_censored), er.o_bracket1,
                    er.o_bracket2);
    }
    line("wald_res_1", er.wald_residual_1, er.wald_se_1);
    line("wald_res_2", er.wald_residual_2, er.wald_se_2);
}

// ------------------------------------------------------------ subcommands --

int run_theory(const CommonOpts& o, const std::string& regime, double cmu_value) {
    lvr::ModelParams params;
    if (o.rho > 0.0 || (o.gamma > 0 && o.sigma > 0 && o.blocktime > 0)) {
        params = build_params(o);
    } else {
        // rho_b = 0 boundary is allowed for closed forms
        params.sigma_b = o.sigma_b;
        params.ell = o.ell;
        params.rho_b = 0.0;
        params.gamma = 0.0;
    }
    lvr::TheoryReport r;
    if (regime == "poisson") {
        r = lvr::poisson_closed_form(params);
    } else if (regime == "constant") {
        r = lvr::constant_closed_form(params);
    } else if (regime == "general") {
        r = lvr::general_asymptotic(params, cmu_value);
    } else {
        throw CLI::ValidationError("--dist must be poisson|constant|general");
    }
    print_theory(r, o.format);
    return 0;
}

int run_simulate(CLI::App* cmd, CommonOpts& o, bool with_companions) {
    const auto law = build_law(o);
    const auto params = build_params(o);
    const std::uint64_t n = paths_count(o, 2);

    lvr::RunManifest manifest = start_manifest("simulate", cmd, o);

    lvr::SimulationJob job;
    job.params = params;
    job.law = &law;
    job.n_excursions = n;
    job.seed = o.seed;
    job.workers = resolve_workers(o);
    job.opts.with_ladder_companion = with_companions;
    job.opts.companion_step_cap = o.companion_cap;
    const lvr::EstimateReport er = lvr::finalize(lvr::simulate_excursions(job), params);

    // theory companion for the CSV row
    lvr::TheoryReport th;
    if (law.kind() == lvr::LawKind::Constant) {
        th = lvr::constant_closed_form(params);
    } else if (law.kind() == lvr::LawKind::Exponential) {
        th = lvr::poisson_closed_form(params);
    } else {
        const lvr::CmuResult cm = [&] {
            lvr::RngStream rng(o.seed, 1u << 19);
            return lvr::c_mu(law, 2000, 20000, &rng);
        }();
        th = lvr::general_asymptotic(params, cm.value);
    }

    lvr::ResultRow row;
    row.rho_b = params.rho_b;
    row.n_paths = n;
    row.p_trade_mc = er.p_trade;
    row.p_trade_se = er.p_trade_se;
    row.p_trade_theory = th.p_trade;
    row.delta_p_trade_pct = 100.0 * (er.p_trade - th.p_trade) / th.p_trade;
    row.lvr_mc = er.lvr_bar;
    row.lvr_se = er.lvr_bar_se;
    row.lvr_theory = th.lvr_bar;
    row.delta_lvr_pct = 100.0 * (er.lvr_bar - th.lvr_bar) / th.lvr_bar;
    row.arb_mc = er.arb_bar;
    row.arb_se = er.arb_bar_se;
    row.arb_theory = th.arb_bar;
    row.delta_arb_pct = 100.0 * (er.arb_bar - th.arb_bar) / th.arb_bar;

    print_estimate(er, o.format);
    if (!o.out.empty()) {
        finish_outputs(manifest, o.out, lvr::result_rows_csv({row}));
        close_manifest(manifest, o.out);
        std::printf("wrote %s (+ manifest)\n", o.out.c_str());
    }
    return 0;
}

std::vector<double> default_table2_grid() {
    return {0.5, 0.7, 0.8, 0.9, 1.0, 2.0, 3.0, 4.0, 5.0};
}

std::vector<double> default_figure1_grid() {
    return {0.5, 0.7, 0.8, 0.9, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0};
}

lvr::SweepConfig sweep_config(const CommonOpts& o, std::vector<double> grid,
                              std::uint64_t min_paths = 1000) {
    lvr::SweepConfig cfg;
    cfg.rho_grid = std::move(grid);
    cfg.paths = paths_count(o, min_paths);
    cfg.seed = o.seed;
    cfg.workers = resolve_workers(o);
    cfg.tolerance_multiplier = o.tolerance_multiplier;
    cfg.ell = o.ell;
    cfg.sigma_b = o.sigma_b;
    cfg.opts.companion_step_cap = o.companion_cap;
    cfg.out_path = o.out;
    return cfg;
}

void print_rows(const std::vector<lvr::ResultRow>& rows, const std::string& format) {
    if (format == "json") {
        json arr = json::array();
        for (const auto& r : rows)
            arr.push_back({{"rho_b", r.rho_b},
                           {"p_trade_mc", r.p_trade_mc},
                           {"p_trade_theory", r.p_trade_theory},
                           {"delta_p_trade_pct", r.delta_p_trade_pct},
                           {"lvr_mc", r.lvr_mc},
                           {"lvr_theory", r.lvr_theory},
                           {"delta_lvr_pct", r.delta_lvr_pct},
                           {"arb_mc", r.arb_mc},
                           {"arb_theory", r.arb_theory},
                           {"delta_arb_pct", r.delta_arb_pct},
                           {"wall_time_s", r.wall_time_s}});
        std::cout << arr.dump(2) << "\n";
        return;
    }
    if (format == "csv") {
        std::cout << lvr::result_rows_csv(rows);
        return;
    }
    std::printf("%7s %12s %12s %9s %12s %12s %9s %9s\n", "rho_b", "arb_mc", "arb_theory",
                "d_arb%", "lvr_mc", "p_trade_mc", "d_lvr%", "sec");
    for (const auto& r : rows)
        std::printf("%7.3g %12.6g %12.6g %+9.4f %12.6g %12.6g %+9.4f %9.2f\n", r.rho_b,
                    r.arb_mc, r.arb_theory, r.delta_arb_pct, r.lvr_mc, r.p_trade_mc,
                    r.delta_lvr_pct, r.wall_time_s);
}

int run_grid_pipeline(CLI::App* cmd, CommonOpts& o, std::vector<double> grid,
                      bool figure1, bool chart) {
    auto cfg = sweep_config(o, std::move(grid));
    lvr::RunManifest manifest = start_manifest(figure1 ? "figure1" : "table2", cmd, o);
    const auto rows =
        figure1 ? lvr::figure1_reproduction(cfg) : lvr::table2_reproduction(cfg);
    print_rows(rows, o.format);
    if (!o.out.empty()) {
        finish_outputs(manifest, o.out, lvr::result_rows_csv(rows));
        if (figure1 && chart) {
            const std::string svg_path = o.out + ".svg";
            manifest.outputs.push_back(
                {svg_path, lvr::write_file_atomic(svg_path, lvr::figure1_svg(rows))});
        }
        close_manifest(manifest, o.out);
        std::printf("wrote %s (+ manifest)\n", o.out.c_str());
    }
    return 0;
}

int run_ladder(CLI::App* cmd, CommonOpts& o) {
    const auto law = build_law(o);
    const std::uint64_t n = paths_count(o, 2);
    lvr::RunManifest manifest = start_manifest("ladder", cmd, o);
    const lvr::LadderMoments lm =
        lvr::estimate_ladder_moments(law, n, o.seed, resolve_workers(o), o.ladder_cap);

    if (o.format == "json") {
        json j;
        j["law"] = law.describe();
        j["n"] = lm.n;
        j["censored"] = lm.n_censored;
        j["h1"] = {{"value", lm.h1}, {"se", lm.h1_se}, {"bias_bracket", lm.bracket1}};
        j["h2"] = {{"value", lm.h2}, {"se", lm.h2_se}, {"bias_bracket", lm.bracket2}};
        std::cout << j.dump(2) << "\n";
    } else {
        std::printf("law           %s\n", law.describe().c_str());
        std::printf("draws         %llu ok, %llu censored at cap %llu\n",
                    static_cast<unsigned long long>(lm.n),
                    static_cast<unsigned long long>(lm.n_censored),
                    static_cast<unsigned long long>(o.ladder_cap));
        std::printf("h1            %.9g  (se %.3g, censoring bias bracket %.3g)\n", lm.h1,
                    lm.h1_se, lm.bracket1);
        std::printf("h2            %.9g  (se %.3g, censoring bias bracket %.3g)\n", lm.h2,
                    lm.h2_se, lm.bracket2);
    }
    if (!o.out.empty()) {
        std::ostringstream csv;
        csv << "law,n,censored,h1,h1_se,h1_bracket,h2,h2_se,h2_bracket\n"
            << law.describe() << ',' << lm.n << ',' << lm.n_censored << ','
            << lvr::format_sig(lm.h1) << ',' << lvr::format_sig(lm.h1_se) << ','
            << lvr::format_sig(lm.bracket1) << ',' << lvr::format_sig(lm.h2) << ','
            << lvr::format_sig(lm.h2_se) << ',' << lvr::format_sig(lm.bracket2) << '\n';
        finish_outputs(manifest, o.out, csv.str());
        close_manifest(manifest, o.out);
        std::printf("wrote %s (+ manifest)\n", o.out.c_str());
    }
    return 0;
}

int run_cmu(CLI::App* cmd, CommonOpts& o, double terms, double inner, double oracle_paths) {
    const auto law = build_law(o);
    lvr::RunManifest manifest = start_manifest("cmu", cmd, o);
    lvr::RngStream rng(o.seed, 1u << 18);
    const lvr::CmuResult cm =
        lvr::c_mu(law, static_cast<std::uint64_t>(terms), static_cast<std::uint64_t>(inner),
                  &rng);

    // Independent ladder-height oracle: C_mu implied by h2 - |zeta(1/2)|/sqrt(pi).
    std::optional<lvr::LadderMoments> lm;
    if (oracle_paths >= 2) {
        lm = lvr::estimate_ladder_moments(law, static_cast<std::uint64_t>(oracle_paths),
                                          o.seed + 1, resolve_workers(o), o.ladder_cap);
    }

    const double series_err = cm.tail_bound + 2.0 * cm.mc_se;
    double oracle = 0.0, oracle_se = 0.0, gap = 0.0;
    bool disagrees = false;
    if (lm) {
        oracle = lm->h2 - lvr::ladder_h2_constant();
        oracle_se = lm->h2_se;
        gap = oracle - cm.value;
        disagrees = std::fabs(gap) > 4.0 * std::sqrt(oracle_se * oracle_se) + series_err +
                                         lm->bracket2;
    }

    if (o.format == "json") {
        json j;
        j["law"] = law.describe();
        j["series"] = {{"value", cm.value},
                       {"tail_bound", cm.tail_bound},
                       {"mc_se", cm.mc_se},
                       {"terms", cm.terms},
                       {"analytic_inner", cm.analytic_inner}};
        if (lm) {
            j["oracle_h2_minus_const"] = {{"value", oracle}, {"se", oracle_se}};
            j["series_vs_oracle_gap"] = gap;
            j["disagreement_flag"] = disagrees;
        }
        std::cout << j.dump(2) << "\n";
    } else {
        std::printf("law           %s\n", law.describe().c_str());
        std::printf("c_mu series   %.9g  (truncation tail <= %.3g, mc se %.3g, %llu terms)\n",
                    cm.value, cm.tail_bound, cm.mc_se,
                    static_cast<unsigned long long>(cm.terms));
        if (lm) {
            std::printf("c_mu oracle   %.9g  (ladder h2 - %.9g, se %.3g)\n", oracle,
                        lvr::ladder_h2_constant(), oracle_se);
            std::printf("gap           %.9g%s\n", gap,
                        disagrees ? "  [DISAGREEMENT beyond combined error]" : "");
        }
    }
    if (!o.out.empty()) {
        std::ostringstream csv;
        csv << "law,c_mu_series,tail_bound,mc_se,terms,c_mu_oracle,oracle_se,gap,"
               "disagreement\n"
            << law.describe() << ',' << lvr::format_sig(cm.value) << ','
            << lvr::format_sig(cm.tail_bound) << ',' << lvr::format_sig(cm.mc_se) << ','
            << cm.terms << ',' << lvr::format_sig(oracle) << ','
            << lvr::format_sig(oracle_se) << ',' << lvr::format_sig(gap) << ','
            << (disagrees ? 1 : 0) << '\n';
        finish_outputs(manifest, o.out, csv.str());
        close_manifest(manifest, o.out);
        std::printf("wrote %s (+ manifest)\n", o.out.c_str());
    }
    return 0;
}

int run_sweep(CLI::App* cmd, CommonOpts& o, const std::vector<std::string>& dists) {
    if (dists.empty()) throw CLI::ValidationError("--dists requires at least one law");
    lvr::SweepConfig cfg = sweep_config(o, {o.rho > 0 ? o.rho : 10.0});
    for (const auto& d : dists) {
        CommonOpts tmp = o;
        tmp.dist = d;
        cfg.laws.push_back(build_law(tmp));
    }
    lvr::RunManifest manifest = start_manifest("sweep", cmd, o);
    const lvr::DistributionSweep sw = lvr::distribution_sweep(cfg);

    if (o.format == "json") {
        json arr = json::array();
        for (const auto& r : sw.rows)
            arr.push_back({{"law", r.law},
                           {"lvr_mc", r.lvr_mc},
                           {"lvr_se", r.lvr_se},
                           {"arb_mc", r.arb_mc},
                           {"p_trade_mc", r.p_trade_mc}});
        json j;
        j["rows"] = arr;
        j["constant_is_minimal"] = sw.constant_is_minimal;
        j["min_separation_sigmas"] = sw.min_separation_sigmas;
        std::cout << j.dump(2) << "\n";
    } else {
        std::printf("%-22s %12s %10s %12s %12s\n", "law", "lvr_mc", "lvr_se", "arb_mc",
                    "p_trade_mc");
        for (const auto& r : sw.rows)
            std::printf("%-22s %12.6g %10.3g %12.6g %12.6g\n", r.law.c_str(), r.lvr_mc,
                        r.lvr_se, r.arb_mc, r.p_trade_mc);
        if (sw.constant_present)
            std::printf("constant minimal: %s (separation %.2f combined-SE units)\n",
                        sw.constant_is_minimal ? "yes" : "no", sw.min_separation_sigmas);
    }
    if (!o.out.empty()) {
        finish_outputs(manifest, o.out, lvr::sweep_csv(sw));
        close_manifest(manifest, o.out);
        std::printf("wrote %s (+ manifest)\n", o.out.c_str());
    }
    return 0;
}

int run_overshoot(CLI::App* cmd, CommonOpts& o, std::vector<double> grid) {
    auto cfg = sweep_config(o, std::move(grid));
    lvr::RunManifest manifest = start_manifest("overshoot", cmd, o);
    const lvr::OvershootStudy st = lvr::overshoot_convergence_study(cfg);
    if (o.format == "json") {
        json arr = json::array();
        for (const auto& r : st.rows)
            arr.push_back({{"rho_b", r.rho_b},
                           {"r1", r.r1},
                           {"o1", r.o1},
                           {"r2", r.r2},
                           {"o2", r.o2},
                           {"dev_r1", r.dev_r1},
                           {"dev_o1", r.dev_o1},
                           {"dev_r2", r.dev_r2},
                           {"dev_o2", r.dev_o2}});
        json j;
        j["rows"] = arr;
        j["fit_rate"] = st.fit_rate;
        j["shrinking_within_noise"] = st.shrinking_within_noise;
        std::cout << j.dump(2) << "\n";
    } else {
        std::printf("%7s %10s %10s %10s %10s %11s %11s\n", "rho_b", "r1", "o1", "r2", "o2",
                    "dev_r1", "dev_r2");
        for (const auto& r : st.rows)
            std::printf("%7.3g %10.6f %10.6f %10.6f %10.6f %11.2e %11.2e\n", r.rho_b, r.r1,
                        r.o1, r.r2, r.o2, r.dev_r1, r.dev_r2);
        std::printf("fitted decay exp(%.3f - %.3f * rho_b); shrinking within noise: %s\n",
                    st.fit_intercept, st.fit_rate, st.shrinking_within_noise ? "yes" : "no");
    }
    if (!o.out.empty()) {
        finish_outputs(manifest, o.out, lvr::overshoot_csv(st));
        close_manifest(manifest, o.out);
        std::printf("wrote %s (+ manifest)\n", o.out.c_str());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"loss-versus-rebalancing laboratory"};
    app.set_version_flag("--version", lvr::kEngineVersion);
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key = value config file; flags override");

    CommonOpts o;

    // theory
    auto* theory = app.add_subcommand("theory", "closed-form P_trade / LVR / ARB");
    std::string theory_regime = "constant";
    double cmu_value = 0.0;
    theory->add_option("--dist", theory_regime, "poisson|constant|general")
        ->default_val("constant");
    add_model_flags(theory, o);
    theory->add_option("--cmu", cmu_value, "C_mu for the general regime")->default_val(0.0);
    theory->add_option("--format", o.format, "table|json")->default_val("table");
    // theory allows rho_b = 0 boundary reports
    theory->get_option("--rho")->check(CLI::NonNegativeNumber);

    // simulate
    auto* sim = app.add_subcommand("simulate", "excursion Monte-Carlo estimates");
    bool with_companions = false;
    add_law_flags(sim, o);
    add_model_flags(sim, o);
    add_run_flags(sim, o);
    sim->add_flag("--companions", with_companions,
                  "continue right exits to sample leftover overshoots");

    // table2
    auto* t2 = app.add_subcommand("table2", "theory-vs-MC deviation grid, constant law");
    std::vector<double> grid;
    t2->add_option("--grid", grid, "rho_b grid (default: canonical 9 rows)");
    add_model_flags(t2, o);
    add_run_flags(t2, o);

    // figure1
    auto* f1 = app.add_subcommand("figure1", "constant-vs-Poisson ARB improvement");
    std::vector<double> f1_grid;
    bool chart = false;
    f1->add_option("--grid", f1_grid, "rho_b grid (default: 0.5..10)");
    f1->add_flag("--chart", chart, "also emit an SVG chart next to the CSV");
    add_model_flags(f1, o);
    add_run_flags(f1, o);

    // ladder
    auto* lad = app.add_subcommand("ladder", "ladder-height moment estimation");
    add_law_flags(lad, o);
    lad->add_option("--n", o.paths, "number of ladder draws (accepts 1e7)");
    add_run_flags(lad, o, /*with_paths=*/false);

    // cmu
    auto* cm = app.add_subcommand("cmu", "series constant C_mu with ladder oracle");
    double terms = 10'000, inner = 100'000, oracle_paths = 1'000'000;
    add_law_flags(cm, o);
    cm->add_option("--terms", terms, "series truncation")->default_val(10'000.0);
    cm->add_option("--inner", inner, "inner MC paths for non-analytic laws")
        ->default_val(100'000.0);
    cm->add_option("--oracle-paths", oracle_paths,
                   "ladder draws for the independent oracle (0 = skip)")
        ->default_val(1'000'000.0);
    add_run_flags(cm, o, /*with_paths=*/false);

    // sweep
    auto* sw = app.add_subcommand("sweep", "LVR comparison across block-time laws");
    std::vector<std::string> dists{"constant", "exponential", "uniform"};
    sw->add_option("--dists", dists, "laws to compare")->delimiter(',');
    sw->add_option("--uniform-range", o.uniform_range, "raw [lo hi] for uniform laws")
        ->expected(2);
    sw->add_option("--empirical-file", o.empirical_file, "sample file for empirical laws");
    add_model_flags(sw, o);
    add_run_flags(sw, o);

    // overshoot
    auto* ov = app.add_subcommand("overshoot", "overshoot-moment convergence study");
    std::vector<double> ov_grid;
    ov->add_option("--grid", ov_grid, "rho_b grid (default: 1 2 4 8)");
    add_model_flags(ov, o);
    add_run_flags(ov, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (theory->parsed()) return run_theory(o, theory_regime, cmu_value);
        if (sim->parsed()) return run_simulate(sim, o, with_companions);
        if (t2->parsed())
            return run_grid_pipeline(t2, o, grid.empty() ? default_table2_grid() : grid,
                                     /*figure1=*/false, false);
        if (f1->parsed())
            return run_grid_pipeline(
                f1, o, f1_grid.empty() ? default_figure1_grid() : f1_grid,
                /*figure1=*/true, chart);
        if (lad->parsed()) return run_ladder(lad, o);
        if (cm->parsed()) return run_cmu(cm, o, terms, inner, oracle_paths);
        if (sw->parsed()) return run_sweep(sw, o, dists);
        if (ov->parsed())
            return run_overshoot(ov, o,
                                 ov_grid.empty() ? std::vector<double>{1, 2, 4, 8} : ov_grid);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const lvr::IterationCapExceeded& e) {
        std::cerr << "simulation error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
