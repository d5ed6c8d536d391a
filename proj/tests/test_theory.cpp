#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lvr/params.hpp"
#include "lvr/rng.hpp"
#include "lvr/theory.hpp"

using namespace lvr;

namespace {

// Euler-Maclaurin evaluation of zeta(s), independent of the hard constant.
double zeta_euler_maclaurin(double s, int n) {
    long double acc = 0.0L;
    for (int k = 1; k <= n; ++k) acc += std::pow(static_cast<long double>(k), -s);
    const long double nn = n;
    acc += std::pow(nn, 1.0L - s) / (s - 1.0L);
    acc -= 0.5L * std::pow(nn, -s);
    acc += s * std::pow(nn, -s - 1.0L) / 12.0L;
    acc -= s * (s + 1) * (s + 2) * std::pow(nn, -s - 3.0L) / 720.0L;
    acc += s * (s + 1) * (s + 2) * (s + 3) * (s + 4) * std::pow(nn, -s - 5.0L) / 30240.0L;
    return static_cast<double>(acc);
}

} // namespace

TEST_CASE("zeta(1/2) constant agrees with Euler-Maclaurin evaluation") {
    const double z = zeta_euler_maclaurin(0.5, 10'000);
    CHECK(std::fabs(-z - zeta_half_abs()) < 5e-13);
}

TEST_CASE("zeta(1/2) equals the K = lim sum 1/sqrt(k) - 2 sqrt(n) constant") {
    const long long n = 1'000'000;
    long double k_n = 0.0L;
    for (long long k = 1; k <= n; ++k)
        k_n += 1.0L / std::sqrt(static_cast<long double>(k));
    k_n -= 2.0L * std::sqrt(static_cast<long double>(n));
    // K_n = zeta(1/2) + 1/(2 sqrt(n)) + O(n^{-3/2})
    const double est = static_cast<double>(k_n) - 0.5 / std::sqrt(static_cast<double>(n));
    CHECK(std::fabs(est + zeta_half_abs()) < 1e-8);
}

TEST_CASE("derived overshoot constants") {
    CHECK(zeta_half_abs() == doctest::Approx(1.460354508809).epsilon(1e-12));
    CHECK(lotov_kappa() == doctest::Approx(0.582597).epsilon(2e-6));
    CHECK(lotov_omega() == doctest::Approx(0.589419).epsilon(2e-6));
    // omega = 1/4 + kappa^2 exactly as computed
    CHECK(lotov_omega() == 0.25 + lotov_kappa() * lotov_kappa());
    CHECK(ladder_h2_constant() == doctest::Approx(0.8239168).epsilon(1e-6));
}

TEST_CASE("poisson closed form") {
    auto p0 = poisson_closed_form(params_from_rho(1e-12));
    CHECK(p0.p_trade == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(p0.arb_bar == doctest::Approx(0.5).epsilon(1e-9));

    auto p1 = poisson_closed_form(params_from_rho(1.0));
    CHECK(p1.p_trade == doctest::Approx(0.585786437627).epsilon(1e-11));
    CHECK(p1.lvr_bar == doctest::Approx(0.5));
    CHECK(p1.arb_bar == doctest::Approx(0.292893218813).epsilon(1e-11));
    CHECK(p1.error_order == "zero");
    CHECK(p1.arb_bar == p1.p_trade * p1.lvr_bar);   // exact as stored

    auto p10 = poisson_closed_form(params_from_rho(10.0));
    CHECK(p10.arb_bar == doctest::Approx(1.0 / (2.0 + 10.0 * std::sqrt(2.0))).epsilon(1e-12));
}

TEST_CASE("constant-block closed form") {
    auto r = constant_closed_form(params_from_rho(1.0));
    CHECK(r.arb_bar == doctest::Approx(0.269073844).epsilon(1e-8));
    CHECK(r.lvr_bar == doctest::Approx(0.411958401).epsilon(1e-8));
    CHECK(r.arb_bar == r.p_trade * r.lvr_bar);
    CHECK(r.warnings.empty());
    CHECK(r.error_order == "exp(-c*rho_b)");

    auto low = constant_closed_form(params_from_rho(0.3));
    CHECK(!low.warnings.empty());

    // scale carries through lvr = ell sigma_b^2 |zeta|/2 sqrt(pi)
    auto scaled = constant_closed_form(derive_params(0.05, 4.0, 0.2, 3.0));
    CHECK(scaled.lvr_bar ==
          doctest::Approx(3.0 * 0.01 * zeta_half_abs() / (2.0 * std::sqrt(M_PI))));
}

TEST_CASE("p_trade capping at degenerate spread") {
    ModelParams p;
    p.rho_b = 0.0;
    p.gamma = 0.0;
    auto r = constant_closed_form(p);
    CHECK(r.p_trade == 1.0);
    CHECK(r.p_trade_capped);
    CHECK(!r.warnings.empty());
    CHECK(r.arb_bar == r.lvr_bar);   // p capped to 1
}

TEST_CASE("general asymptotic formulas") {
    // Dirac: C_mu = 0, lvr = ell sigma_b^2 * |zeta|/(2 sqrt(pi))
    auto dirac = general_asymptotic(params_from_rho(100.0), 0.0);
    CHECK(dirac.lvr_bar == doctest::Approx(0.5 * ladder_h2_constant()).epsilon(1e-12));
    CHECK(dirac.p_trade == doctest::Approx(std::sqrt(2.0) / 100.0).epsilon(1e-12));

    // exponential law: the h2 oracle value 1 - |zeta|/sqrt(pi) recovers the
    // exact Poisson lvr
    const double c_exp_oracle = 1.0 - ladder_h2_constant();
    auto exp_general = general_asymptotic(params_from_rho(100.0), c_exp_oracle);
    CHECK(exp_general.lvr_bar == doctest::Approx(0.5).epsilon(1e-12));

    // at large rho the general and constant forms agree to leading order
    auto con = constant_closed_form(params_from_rho(100.0));
    CHECK(dirac.arb_bar == doctest::Approx(con.arb_bar).epsilon(0.02));

    CHECK_THROWS_AS(general_asymptotic(params_from_rho(10.0), -0.1), std::invalid_argument);
}

TEST_CASE("monotonicity in rho_b") {
    double prev_pp = 2, prev_pc = 2, prev_ap = 2, prev_ac = 2;
    for (double rho : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
        auto pois = poisson_closed_form(params_from_rho(rho));
        auto con = constant_closed_form(params_from_rho(rho));
        CHECK(pois.p_trade < prev_pp);
        CHECK(pois.arb_bar < prev_ap);
        CHECK(con.p_trade < prev_pc);
        CHECK(con.arb_bar < prev_ac);
        prev_pp = pois.p_trade;
        prev_ap = pois.arb_bar;
        prev_pc = con.p_trade;
        prev_ac = con.arb_bar;
    }
}

TEST_CASE("constant/poisson ARB ratio approaches |zeta(1/2)|/sqrt(pi)") {
    const auto con = constant_closed_form(params_from_rho(1e5));
    const auto pois = poisson_closed_form(params_from_rho(1e5));
    CHECK(con.arb_bar / pois.arb_bar == doctest::Approx(ladder_h2_constant()).epsilon(1e-4));
    // the limiting LP improvement is ~17.6%
    CHECK(1.0 - ladder_h2_constant() == doctest::Approx(0.176083).epsilon(1e-5));
}

TEST_CASE("dirac optimality of the general lvr") {
    const auto base = general_asymptotic(params_from_rho(50.0), 0.0);
    for (double c : {0.01, 0.088, 0.176, 0.5}) {
        CHECK(general_asymptotic(params_from_rho(50.0), c).lvr_bar > base.lvr_bar);
    }
}

TEST_CASE("plug-in moment formulas") {
    const double h1 = 1.0 / std::sqrt(2.0);
    // memoryless constants: all overshoot moments equal -> E[tau] = 1 + rho/sqrt(2)
    for (double rho : {0.5, 1.0, 5.0}) {
        CHECK(expected_tau_from_moments(h1, 1.0, rho, h1, 1.0, h1, 1.0) ==
              doctest::Approx(1.0 + rho / std::sqrt(2.0)).epsilon(1e-12));
        CHECK(lvr_from_moments(h1, 1.0, rho, h1, 1.0, h1, 1.0, 1.0, 1.0) ==
              doctest::Approx(0.5).epsilon(1e-12));
    }
    // constant-law limits at rho = 5
    const double k = lotov_kappa(), w = lotov_omega(), h2c = ladder_h2_constant();
    CHECK(expected_tau_from_moments(h1, h2c, 5.0, k, w, k, w) ==
          doctest::Approx(h2c + 5.0 * h1).epsilon(1e-12));
    CHECK(expected_tau_from_moments(h1, h2c, 5.0, k, w, k, w) ==
          doctest::Approx(4.3594).epsilon(1e-4));
    CHECK(lvr_from_moments(h1, h2c, 5.0, k, w, k, w, 1.0, 1.0) ==
          doctest::Approx(0.5 * h2c).epsilon(1e-12));
    // r2 = o2, r1 = o1 = 0 reduces to h2 + h1 rho
    CHECK(expected_tau_from_moments(h1, 0.9, 2.0, 0.0, 0.7, 0.0, 0.7) ==
          doctest::Approx(0.9 + 2.0 * h1).epsilon(1e-12));
    CHECK_THROWS_AS(expected_tau_from_moments(h1, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0),
                    std::invalid_argument);
}

TEST_CASE("c_mu: constant law vanishes termwise") {
    const auto law = BlockTimeLaw::constant(12.0);
    const auto r = c_mu(law, 100);
    CHECK(r.value == 0.0);
    CHECK(r.tail_bound == 0.0);
    CHECK(r.mc_se == 0.0);
}

TEST_CASE("c_mu: exponential law, analytic inner expectation") {
    const auto law = BlockTimeLaw::exponential(1.0);

    // every term nonnegative (Jensen)
    long double ratio = std::sqrt(M_PI) / 2.0L;
    for (int n = 1; n <= 2000; ++n) {
        const long double term = 1.0L - ratio / std::sqrt(static_cast<long double>(n));
        CHECK(term >= 0.0L);
        ratio *= (n + 0.5L) / n;
    }

    const auto r1k = c_mu(law, 1000);
    const auto r100k = c_mu(law, 100'000);
    // frozen from an independent evaluation of the same series (gamma-ratio
    // recursion in extended precision, Richardson tail)
    CHECK(r100k.value == doctest::Approx(0.0878186).epsilon(1e-4));
    CHECK(r100k.value + r100k.tail_bound == doctest::Approx(0.0880416).epsilon(1e-4));
    // tail bound honest: adding it must overshoot the truncated value's gap
    CHECK(r100k.value - r1k.value <= r1k.tail_bound * 1.05);
    CHECK(r1k.value < r100k.value);

    // the series is about half the ladder-oracle value; both are reported
    const double oracle = 1.0 - ladder_h2_constant();
    CHECK(r100k.value + r100k.tail_bound < 0.6 * oracle);
}

TEST_CASE("c_mu: uniform law via shared-path Monte Carlo") {
    const auto law = BlockTimeLaw::uniform_interval(0.0, 5.0);
    RngStream rng(11, 0);
    const auto r = c_mu(law, 400, 20'000, &rng);
    CHECK(!r.analytic_inner);
    CHECK(r.value > 0.0);
    CHECK(r.mc_se > 0.0);
    CHECK(r.mc_se < 0.01);
    // u2 = 4/3 < 2: the uniform law sits strictly between Dirac and exponential
    const auto r_exp = c_mu(BlockTimeLaw::exponential(1.0), 400);
    CHECK(r.value + 4.0 * r.mc_se + r.tail_bound > 0.0);
    CHECK(r.value - 4.0 * r.mc_se < r_exp.value);
    CHECK_THROWS_AS(c_mu(law, 400, 20'000, nullptr), std::invalid_argument);
}
