#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lvr/block_law.hpp"
#include "lvr/params.hpp"
#include "lvr/rng.hpp"

namespace lvr {

// |zeta(1/2)|, hard-coded reviewed constant; the unit tests re-derive it by
// Euler-Maclaurin summation and by the K = lim sum 1/sqrt(k) - 2 sqrt(n)
// characterization.
double zeta_half_abs();

double lotov_kappa();          // |zeta(1/2)| / sqrt(2 pi)
double lotov_omega();          // 1/4 + kappa^2
double ladder_h2_constant();   // |zeta(1/2)| / sqrt(pi), Gaussian-increment h2

enum class Regime { PoissonExact, ConstantAsymptotic, GeneralAsymptotic };

const char* regime_name(Regime r);

struct TheoryConstants {
    double h1 = 0, h2 = 0, kappa = 0, omega = 0, c_mu = 0;
};

struct TheoryReport {
    double p_trade = 0;     // capped at 1 (warned) where the formula exceeds it
    double lvr_bar = 0;     // USD per arbitrage
    double arb_bar = 0;     // USD per block; always p_trade * lvr_bar as stored
    Regime regime = Regime::PoissonExact;
    TheoryConstants constants_used;
    std::string error_order;          // "zero", "exp(-c*rho_b)", "O(sigma_b/gamma)"
    std::vector<std::string> warnings;
    bool p_trade_capped = false;
};

TheoryReport poisson_closed_form(const ModelParams& params);
TheoryReport constant_closed_form(const ModelParams& params);
// Uses the summary-table constant |zeta(1/2)|/sqrt(pi); c_mu_value must be >= 0.
TheoryReport general_asymptotic(const ModelParams& params, double c_mu_value);

// E[tau] and LVR from ladder/overshoot moments (the plug-in identities).
double expected_tau_from_moments(double h1, double h2, double rho_b, double r1,
                                 double r2, double o1, double o2);
double lvr_from_moments(double h1, double h2, double rho_b, double r1, double r2,
                        double o1, double o2, double ell, double sigma_b);

// Termwise evaluation of the law-dependent series constant
//   C = 1/(2 sqrt(pi)) * sum_{n>=1} n^{-1/2} (1 - E[sqrt(T_n / n)]),
// T_n the n-block time sum. Every term is nonnegative (Jensen) and vanishes
// iff the law is constant. The inner expectation is analytic for the
// constant and exponential laws; otherwise Monte-Carlo over inner_budget
// paths whose partial sums are reused across all n.
//
// Note: the independent ladder-height oracle (h2 difference) for the
// exponential law gives 1 - |zeta(1/2)|/sqrt(pi) ~ 0.17608, while this series
// evaluates to ~0.08804 (half). Callers comparing the two must surface the
// discrepancy, not average it away; see CmuResult::oracle_gap helpers in the
// CLI/experiments layer.
struct CmuResult {
    double value = 0;
    double tail_bound = 0;    // first-order bound on the truncated remainder
    double mc_se = 0;         // 0 for analytic inner expectations
    std::uint64_t terms = 0;
    std::uint64_t inner_paths = 0;
    bool analytic_inner = true;
};

CmuResult c_mu(const BlockTimeLaw& law, std::uint64_t truncation_n = 10'000,
               std::uint64_t inner_budget = 100'000, RngStream* rng = nullptr);

} // namespace lvr
