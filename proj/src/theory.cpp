#include "lvr/theory.hpp"

#include <cmath>
#include <stdexcept>

namespace lvr {

namespace {
constexpr double kZetaHalfAbs = 1.4603545088095868;   // -zeta(1/2)
constexpr double kSqrt2 = 1.4142135623730951;
} // namespace

double zeta_half_abs() { return kZetaHalfAbs; }

double lotov_kappa() { return kZetaHalfAbs / std::sqrt(2.0 * M_PI); }

double lotov_omega() {
    const double k = lotov_kappa();
    return 0.25 + k * k;
}

double ladder_h2_constant() { return kZetaHalfAbs / std::sqrt(M_PI); }

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::PoissonExact: return "poisson-exact";
        case Regime::ConstantAsymptotic: return "constant-asymptotic";
        case Regime::GeneralAsymptotic: return "general-asymptotic";
    }
    return "?";
}

namespace {

void validate(const ModelParams& p) {
    if (!(p.rho_b >= 0.0) || !(p.ell > 0.0) || !(p.sigma_b > 0.0))
        throw std::invalid_argument("invalid model parameters");
}

// Keep arb_bar == p_trade * lvr_bar exact as stored, capping p_trade at 1
// for degenerate spreads (warned).
void fill_arb(TheoryReport& r, double p_trade_raw, double lvr) {
    r.lvr_bar = lvr;
    if (p_trade_raw > 1.0) {
        r.p_trade = 1.0;
        r.p_trade_capped = true;
        r.warnings.push_back("p_trade formula exceeds 1; capped (spread too small for this regime)");
    } else {
        r.p_trade = p_trade_raw;
    }
    r.arb_bar = r.p_trade * r.lvr_bar;
}

} // namespace

TheoryReport poisson_closed_form(const ModelParams& params) {
    validate(params);
    TheoryReport r;
    r.regime = Regime::PoissonExact;
    r.error_order = "zero";
    r.constants_used.h1 = 1.0 / kSqrt2;
    r.constants_used.h2 = 1.0;
    const double rho = params.rho_b;
    const double scale = params.ell * params.sigma_b * params.sigma_b;
    fill_arb(r, 1.0 / (1.0 + rho / kSqrt2), 0.5 * scale);
    return r;
}

TheoryReport constant_closed_form(const ModelParams& params) {
    validate(params);
    TheoryReport r;
    r.regime = Regime::ConstantAsymptotic;
    r.error_order = "exp(-c*rho_b)";
    const double z = kZetaHalfAbs;
    r.constants_used.h1 = 1.0 / kSqrt2;
    r.constants_used.h2 = ladder_h2_constant();
    r.constants_used.kappa = lotov_kappa();
    r.constants_used.omega = lotov_omega();
    const double rho = params.rho_b;
    const double scale = params.ell * params.sigma_b * params.sigma_b;
    const double p_raw = 1.0 / (rho / kSqrt2 + z / std::sqrt(M_PI));
    fill_arb(r, p_raw, 0.5 * scale * z / std::sqrt(M_PI));
    if (rho < 0.5)
        r.warnings.push_back("rho_b < 0.5: approximation degrades in this regime");
    return r;
}

TheoryReport general_asymptotic(const ModelParams& params, double c_mu_value) {
    validate(params);
    if (!(c_mu_value >= 0.0))
        throw std::invalid_argument("C_mu must be nonnegative");
    TheoryReport r;
    r.regime = Regime::GeneralAsymptotic;
    r.error_order = "O(sigma_b/gamma)";
    r.constants_used.h1 = 1.0 / kSqrt2;
    r.constants_used.h2 = ladder_h2_constant() + c_mu_value;
    r.constants_used.c_mu = c_mu_value;
    const double rho = params.rho_b;
    const double scale = params.ell * params.sigma_b * params.sigma_b;
    const double bracket = ladder_h2_constant() + c_mu_value;
    const double p_raw = rho > 0 ? kSqrt2 / rho : 2.0;   // degenerate, capped below
    fill_arb(r, p_raw, 0.5 * scale * bracket);
    if (rho < 10.0)
        r.warnings.push_back("rho_b < 10: general-asymptotic formulas are leading-order only");
    return r;
}

double expected_tau_from_moments(double h1, double h2, double rho_b, double r1,
                                 double r2, double o1, double o2) {
    const double denom = rho_b + r1 + o1;
    if (!(denom > 0.0)) throw std::invalid_argument("rho_b + r1 + o1 must be positive");
    return h2 + h1 * (rho_b * rho_b + 2.0 * rho_b * r1 + r2 - o2) / denom;
}

double lvr_from_moments(double h1, double h2, double rho_b, double r1, double r2,
                        double o1, double o2, double ell, double sigma_b) {
    const double denom = rho_b + r1 + o1;
    if (!(denom > 0.0)) throw std::invalid_argument("rho_b + r1 + o1 must be positive");
    return ell * sigma_b * sigma_b * (0.5 * h2 + h1 * (r2 - o2) / (2.0 * denom));
}

CmuResult c_mu(const BlockTimeLaw& law, std::uint64_t truncation_n,
               std::uint64_t inner_budget, RngStream* rng) {
    if (truncation_n < 1) throw std::invalid_argument("truncation_n >= 1 required");
    CmuResult res;
    res.terms = truncation_n;
    const double pref = 1.0 / (2.0 * std::sqrt(M_PI));

    switch (law.kind()) {
        case LawKind::Constant:
            // every term vanishes: E[sqrt(T_n/n)] = 1 exactly
            res.value = 0.0;
            res.tail_bound = 0.0;
            return res;

        case LawKind::Exponential: {
            // T_n ~ Gamma(n, 1): E[sqrt(T_n)] = Gamma(n + 1/2) / Gamma(n)
            long double total = 0.0L;
            long double ratio = std::sqrt(M_PI) / 2.0L;   // Gamma(3/2)/Gamma(1)
            for (std::uint64_t n = 1; n <= truncation_n; ++n) {
                const long double nf = static_cast<long double>(n);
                total += (1.0L - ratio / std::sqrt(nf)) / std::sqrt(nf);
                ratio *= (nf + 0.5L) / nf;
            }
            res.value = static_cast<double>(pref * total);
            // 1 - E[sqrt(T_n/n)] = 1/(8n) + O(n^-2); remainder of sum n^{-3/2}/8
            res.tail_bound = pref * 2.0 / (8.0 * std::sqrt(static_cast<double>(truncation_n)));
            return res;
        }

        default: {
            if (!rng)
                throw std::invalid_argument("c_mu: Monte-Carlo inner expectation needs an RngStream");
            if (inner_budget < 2) throw std::invalid_argument("inner_budget >= 2 required");
            res.analytic_inner = false;
            res.inner_paths = inner_budget;
            // One path of partial sums T_1..T_N serves every n (shared
            // stratification); per-path series values give an exact SE.
            long double acc = 0.0L, acc2 = 0.0L;
            std::vector<long double> inv_sqrt(truncation_n + 1);
            for (std::uint64_t n = 1; n <= truncation_n; ++n)
                inv_sqrt[n] = 1.0L / std::sqrt(static_cast<long double>(n));
            for (std::uint64_t p = 0; p < inner_budget; ++p) {
                long double t = 0.0L;
                long double v = 0.0L;
                for (std::uint64_t n = 1; n <= truncation_n; ++n) {
                    t += law.sample(*rng);
                    v += inv_sqrt[n] * (1.0L - std::sqrt(t * inv_sqrt[n] * inv_sqrt[n]));
                }
                v *= pref;
                acc += v;
                acc2 += v * v;
            }
            const long double bn = static_cast<long double>(inner_budget);
            const long double mean = acc / bn;
            const long double var = (acc2 - bn * mean * mean) / (bn - 1.0L);
            res.value = static_cast<double>(mean);
            res.mc_se = std::sqrt(std::max(0.0, static_cast<double>(var / bn)));
            const double var_u = law.u2() - 1.0;
            res.tail_bound =
                pref * 2.0 * var_u / (8.0 * std::sqrt(static_cast<double>(truncation_n)));
            return res;
        }
    }
}

} // namespace lvr
