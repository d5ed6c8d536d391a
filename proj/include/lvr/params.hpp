#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "lvr/hash.hpp"

namespace lvr {

// Market/AMM parameterization. sigma_b and rho_b are derived once at
// construction and stored, so every consumer sees a single rounding of each.
//   sigma_b = sigma * sqrt(t)     per-block log-price volatility
//   rho_b   = gamma / sigma_b     spread in units of sigma_b
struct ModelParams {
    double sigma = 1.0;    // volatility per sqrt(time unit)
    double t = 1.0;        // mean block time
    double gamma = 1.0;    // AMM internal spread, log-price units
    double ell = 1.0;      // liquidity, USD per percentage point
    double sigma_b = 1.0;
    double rho_b = 1.0;

    std::uint64_t tag() const {
        std::uint64_t h = fnv1a64("params");
        h = fnv1a64_mix(rho_b, h);
        h = fnv1a64_mix(sigma_b, h);
        h = fnv1a64_mix(ell, h);
        return h;
    }
};

inline ModelParams derive_params(double sigma, double t, double gamma, double ell) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw std::invalid_argument("sigma must be positive");
    if (!(t > 0.0) || !std::isfinite(t))
        throw std::invalid_argument("mean block time must be positive");
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw std::invalid_argument("gamma must be positive");
    if (!(ell > 0.0) || !std::isfinite(ell))
        throw std::invalid_argument("ell must be positive");
    ModelParams p;
    p.sigma = sigma;
    p.t = t;
    p.gamma = gamma;
    p.ell = ell;
    p.sigma_b = sigma * std::sqrt(t);
    p.rho_b = gamma / p.sigma_b;
    return p;
}

// Convenience for the normalized setting: choose gamma so that
// gamma / sigma_b equals the requested rho_b (t = 1).
inline ModelParams params_from_rho(double rho_b, double ell = 1.0, double sigma_b = 1.0) {
    if (!(rho_b > 0.0) || !std::isfinite(rho_b))
        throw std::invalid_argument("rho_b must be positive");
    return derive_params(sigma_b, 1.0, rho_b * sigma_b, ell);
}

// Block-boundary state of the chain: relative log-price position within
// [0, rho_b], loss in the last block, cumulative loss.
struct ChainState {
    double m = 0.0;
    double lvr_last = 0.0;
    double arb_cum = 0.0;
};

} // namespace lvr
