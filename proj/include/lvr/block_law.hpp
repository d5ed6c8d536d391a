#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lvr/rng.hpp"

namespace lvr {

enum class LawKind { Constant, Exponential, UniformInterval, EmpiricalTable };

const char* law_kind_name(LawKind k);

// Mean-one block-time distribution. Raw parameters are rescaled by their
// mean at construction, so every downstream consumer may assume E[U] = 1;
// the second moment u2 is stored alongside (analytic for built-in kinds,
// empirical second moment for tables).
//
// Immutable after construction; safe to share across worker threads.
class BlockTimeLaw {
public:
    static BlockTimeLaw constant(double raw_value);
    static BlockTimeLaw exponential(double raw_rate);
    static BlockTimeLaw uniform_interval(double raw_lo, double raw_hi);
    static BlockTimeLaw empirical(std::vector<double> raw_samples);
    // Parses one nonnegative decimal per line; '#' starts a comment.
    static BlockTimeLaw empirical_from_stream(std::istream& in);
    static BlockTimeLaw empirical_from_file(const std::string& path);

    LawKind kind() const { return kind_; }
    double u2() const { return u2_; }
    bool is_constant() const { return kind_ == LawKind::Constant; }

    // One block time, E[U] = 1.
    double sample(RngStream& rng) const;

    // Normalized support bounds after rescaling (lo == hi == 1 for constant;
    // hi is +inf for exponential).
    double support_lo() const { return lo_; }
    double support_hi() const { return hi_; }
    const std::vector<double>& table() const { return table_; }

    // Stable identity of the law (kind + normalized parameters), used to tag
    // simulation outputs against accumulator mismatch.
    std::uint64_t identity_hash() const { return identity_; }

    std::string describe() const;

private:
    BlockTimeLaw() = default;

    LawKind kind_ = LawKind::Constant;
    double u2_ = 1.0;
    double lo_ = 1.0;
    double hi_ = 1.0;
    std::vector<double> table_;   // empirical only, already mean-rescaled
    std::uint64_t identity_ = 0;

    void finish_identity();
};

} // namespace lvr
