#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "lvr/rng.hpp"

using namespace lvr;

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// one-sample Kolmogorov distance against a reference CDF
template <typename Cdf>
double ks_distance(std::vector<double>& xs, Cdf cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max(d, std::fabs((i + 1) / n - f));
        d = std::max(d, std::fabs(f - i / n));
    }
    return d;
}

} // namespace

TEST_CASE("identical (seed, stream) reproduces identical draws") {
    RngStream a(123, 7), b(123, 7);
    for (int i = 0; i < 1000; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
    for (int i = 0; i < 1000; ++i) {
        CHECK(a.normal() == b.normal());
        CHECK(a.exponential() == b.exponential());
    }
    CHECK(a.position() == b.position());
}

TEST_CASE("distinct stream ids decorrelate") {
    RngStream a(123, 0), b(123, 1);
    int equal = 0;
    long double dot = 0;
    for (int i = 0; i < 100'000; ++i) {
        const double x = a.normal(), y = b.normal();
        if (x == y) ++equal;
        dot += x * y;
    }
    CHECK(equal == 0);
    CHECK(std::fabs(static_cast<double>(dot) / 100'000) < 0.02);   // ~4/sqrt(n)
}

TEST_CASE("uniform01 range and mean") {
    RngStream r(5, 0);
    long double s = 0;
    for (int i = 0; i < 200'000; ++i) {
        const double u = r.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        s += u;
    }
    CHECK(std::fabs(static_cast<double>(s) / 200'000 - 0.5) < 4.0 * 0.2887 / std::sqrt(200'000.0));
    CHECK(r.uniform01_pos() > 0.0);
}

TEST_CASE("ziggurat normal: moments") {
    const std::uint64_t n = 4'000'000;
    RngStream r(42, 0);
    long double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
        const long double z = r.normal();
        s1 += z;
        s2 += z * z;
        s3 += z * z * z;
        s4 += z * z * z * z;
    }
    const double nn = static_cast<double>(n);
    const double mean = static_cast<double>(s1) / nn;
    const double var = static_cast<double>(s2) / nn;
    const double skew = static_cast<double>(s3) / nn;
    const double kurt = static_cast<double>(s4) / nn;
    CHECK(std::fabs(mean) < 4.0 / std::sqrt(nn));
    CHECK(std::fabs(var - 1.0) < 4.0 * std::sqrt(2.0 / nn));
    CHECK(std::fabs(skew) < 4.0 * std::sqrt(15.0 / nn));
    CHECK(std::fabs(kurt - 3.0) < 4.0 * std::sqrt(96.0 / nn));
}

TEST_CASE("ziggurat normal: distribution and tail") {
    const std::uint64_t n = 1'000'000;
    RngStream r(43, 1);
    std::vector<double> xs(n);
    std::uint64_t beyond = 0;
    for (auto& x : xs) {
        x = r.normal();
        if (std::fabs(x) > 3.6541528853610088) ++beyond;
    }
    // DKW with alpha = 1e-6
    const double eps = std::sqrt(std::log(2.0 / 1e-6) / (2.0 * static_cast<double>(n)));
    CHECK(ks_distance(xs, normal_cdf) < eps);
    // mass beyond the rightmost layer edge: 2 (1 - Phi(R)) ~ 2.577e-4
    const double expect = 2.0 * (1.0 - normal_cdf(3.6541528853610088));
    const double sd = std::sqrt(expect * static_cast<double>(n));
    CHECK(std::fabs(static_cast<double>(beyond) - expect * static_cast<double>(n)) <
          6.0 * sd);
}

TEST_CASE("ziggurat exponential: moments and distribution") {
    const std::uint64_t n = 1'000'000;
    RngStream r(44, 2);
    std::vector<double> xs(n);
    long double s1 = 0, s2 = 0;
    for (auto& x : xs) {
        x = r.exponential();
        REQUIRE(x >= 0.0);
        s1 += x;
        s2 += x * x;
    }
    const double nn = static_cast<double>(n);
    CHECK(std::fabs(static_cast<double>(s1) / nn - 1.0) < 4.0 / std::sqrt(nn));
    CHECK(std::fabs(static_cast<double>(s2) / nn - 2.0) < 4.0 * std::sqrt(20.0 / nn));
    const double eps = std::sqrt(std::log(2.0 / 1e-6) / (2.0 * nn));
    CHECK(ks_distance(xs, [](double x) { return -std::expm1(-x); }) < eps);
}
