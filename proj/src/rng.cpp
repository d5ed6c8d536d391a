#include "lvr/rng.hpp"

namespace lvr {
namespace detail {

namespace {

constexpr int kLayers = 256;

ZigTables build_normal_tables(double r) {
    ZigTables t{};
    const double f_r = std::exp(-0.5 * r * r);
    const double v = r * f_r + std::sqrt(M_PI / 2.0) * std::erfc(r / std::sqrt(2.0));
    t.x[0] = v / f_r;   // base layer: rectangle plus tail
    t.x[1] = r;
    t.x[kLayers] = 0.0;
    double f = f_r;
    for (int i = 2; i < kLayers; ++i) {
        t.x[i] = std::sqrt(-2.0 * std::log(v / t.x[i - 1] + f));
        f = std::exp(-0.5 * t.x[i] * t.x[i]);
    }
    for (int i = 0; i < kLayers; ++i) t.ratio[i] = t.x[i + 1] / t.x[i];
    return t;
}

ZigTables build_exp_tables(double r) {
    ZigTables t{};
    const double f_r = std::exp(-r);
    const double v = (r + 1.0) * f_r;   // r * f(r) + tail mass e^{-r}
    t.x[0] = v / f_r;
    t.x[1] = r;
    t.x[kLayers] = 0.0;
    double f = f_r;
    for (int i = 2; i < kLayers; ++i) {
        t.x[i] = -std::log(v / t.x[i - 1] + f);
        f = std::exp(-t.x[i]);
    }
    for (int i = 0; i < kLayers; ++i) t.ratio[i] = t.x[i + 1] / t.x[i];
    return t;
}

} // namespace

const double kNormalZigR = 3.6541528853610088;
const double kExpZigR = 7.6971174701310497;
const ZigTables kNormalZig = build_normal_tables(kNormalZigR);
const ZigTables kExpZig = build_exp_tables(kExpZigR);

} // namespace detail

double RngStream::normal_slow(double u, int i) {
    const auto& t = detail::kNormalZig;
    for (;;) {
        if (i == 0) {
            // Tail beyond R, Marsaglia's exact method.
            const bool neg = u < 0.0;
            double a, b;
            do {
                a = std::log(uniform01_pos()) / detail::kNormalZigR;
                b = std::log(uniform01_pos());
            } while (-2.0 * b < a * a);
            return neg ? a - detail::kNormalZigR : detail::kNormalZigR - a;
        }
        const double xx = u * t.x[i];
        const double f0 = std::exp(-0.5 * (t.x[i] * t.x[i] - xx * xx));
        const double f1 = std::exp(-0.5 * (t.x[i + 1] * t.x[i + 1] - xx * xx));
        if (f1 + uniform01() * (f0 - f1) < 1.0) return xx;

        const std::uint64_t w = next_u64();
        i = static_cast<int>(w & 0xFF);
        u = 2.0 * (static_cast<double>(w >> 11) * 0x1.0p-53) - 1.0;
        if (std::fabs(u) < t.ratio[i]) return u * t.x[i];
    }
}

double RngStream::exponential_slow(double u, int i) {
    const auto& t = detail::kExpZig;
    for (;;) {
        if (i == 0) {
            // Memoryless tail: R plus a fresh exponential via inversion.
            return detail::kExpZigR - std::log(uniform01_pos());
        }
        const double xx = u * t.x[i];
        const double f0 = std::exp(xx - t.x[i]);
        const double f1 = std::exp(xx - t.x[i + 1]);
        if (f1 + uniform01() * (f0 - f1) < 1.0) return xx;

        const std::uint64_t w = next_u64();
        i = static_cast<int>(w & 0xFF);
        u = static_cast<double>(w >> 11) * 0x1.0p-53;
        if (u < t.ratio[i]) return u * t.x[i];
    }
}

} // namespace lvr
