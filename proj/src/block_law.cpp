#include "lvr/block_law.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "lvr/hash.hpp"

namespace lvr {

const char* law_kind_name(LawKind k) {
    switch (k) {
        case LawKind::Constant: return "constant";
        case LawKind::Exponential: return "exponential";
        case LawKind::UniformInterval: return "uniform-interval";
        case LawKind::EmpiricalTable: return "empirical-table";
    }
    return "?";
}

void BlockTimeLaw::finish_identity() {
    std::uint64_t h = fnv1a64(law_kind_name(kind_));
    h = fnv1a64_mix(u2_, h);
    h = fnv1a64_mix(lo_, h);
    h = fnv1a64_mix(hi_, h);
    for (double v : table_) h = fnv1a64_mix(v, h);
    identity_ = h;
}

BlockTimeLaw BlockTimeLaw::constant(double raw_value) {
    if (!(raw_value > 0.0) || !std::isfinite(raw_value))
        throw std::invalid_argument("constant block time must be positive and finite");
    BlockTimeLaw law;
    law.kind_ = LawKind::Constant;
    law.u2_ = 1.0;
    law.lo_ = law.hi_ = 1.0;
    law.finish_identity();
    return law;
}

BlockTimeLaw BlockTimeLaw::exponential(double raw_rate) {
    if (!(raw_rate > 0.0) || !std::isfinite(raw_rate))
        throw std::invalid_argument("exponential rate must be positive and finite");
    BlockTimeLaw law;
    law.kind_ = LawKind::Exponential;
    law.u2_ = 2.0;   // E[U^2] of a mean-1 exponential
    law.lo_ = 0.0;
    law.hi_ = std::numeric_limits<double>::infinity();
    law.finish_identity();
    return law;
}

BlockTimeLaw BlockTimeLaw::uniform_interval(double raw_lo, double raw_hi) {
    if (!std::isfinite(raw_lo) || !std::isfinite(raw_hi))
        throw std::invalid_argument("uniform interval bounds must be finite");
    if (raw_lo < 0.0)
        throw std::invalid_argument("uniform interval must lie in [0, inf)");
    if (!(raw_hi > raw_lo))
        throw std::invalid_argument("uniform interval needs hi > lo");
    const double mean = 0.5 * (raw_lo + raw_hi);
    if (!(mean > 0.0))
        throw std::invalid_argument("uniform interval has nonpositive mean");
    BlockTimeLaw law;
    law.kind_ = LawKind::UniformInterval;
    law.lo_ = raw_lo / mean;
    law.hi_ = raw_hi / mean;
    const double a = law.lo_, b = law.hi_;
    law.u2_ = (a * a + a * b + b * b) / 3.0;
    law.finish_identity();
    return law;
}

BlockTimeLaw BlockTimeLaw::empirical(std::vector<double> raw_samples) {
    if (raw_samples.empty())
        throw std::invalid_argument("empirical table is empty");
    long double sum = 0.0L;
    for (double v : raw_samples) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("empirical table entries must be finite and >= 0");
        sum += v;
    }
    const double mean = static_cast<double>(sum / raw_samples.size());
    if (!(mean > 0.0))
        throw std::invalid_argument("empirical table mean must be positive");
    long double sum2 = 0.0L;
    for (double& v : raw_samples) {
        v /= mean;
        sum2 += static_cast<long double>(v) * v;
    }
    BlockTimeLaw law;
    law.kind_ = LawKind::EmpiricalTable;
    law.table_ = std::move(raw_samples);
    law.u2_ = static_cast<double>(sum2 / law.table_.size());
    law.lo_ = *std::min_element(law.table_.begin(), law.table_.end());
    law.hi_ = *std::max_element(law.table_.begin(), law.table_.end());
    law.finish_identity();
    return law;
}

BlockTimeLaw BlockTimeLaw::empirical_from_stream(std::istream& in) {
    std::vector<double> samples;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        double v;
        if (ls >> v) {
            std::string rest;
            if (ls >> rest)
                throw std::invalid_argument("empirical table line " + std::to_string(lineno) +
                                            ": expected one value per line");
            samples.push_back(v);
        } else if (!line.empty() && line.find_first_not_of(" \t\r") != std::string::npos) {
            throw std::invalid_argument("empirical table line " + std::to_string(lineno) +
                                        ": not a number");
        }
    }
    return empirical(std::move(samples));
}

BlockTimeLaw BlockTimeLaw::empirical_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open empirical table: " + path);
    return empirical_from_stream(in);
}

double BlockTimeLaw::sample(RngStream& rng) const {
    switch (kind_) {
        case LawKind::Constant:
            return 1.0;
        case LawKind::Exponential:
            return rng.exponential();
        case LawKind::UniformInterval:
            return lo_ + (hi_ - lo_) * rng.uniform01();
        case LawKind::EmpiricalTable: {
            const std::size_t i =
                static_cast<std::size_t>(rng.uniform01() * static_cast<double>(table_.size()));
            return table_[i < table_.size() ? i : table_.size() - 1];
        }
    }
    return 1.0;
}

std::string BlockTimeLaw::describe() const {
    std::ostringstream os;
    os << law_kind_name(kind_);
    if (kind_ == LawKind::UniformInterval)
        os << "[" << lo_ << "," << hi_ << "]";
    if (kind_ == LawKind::EmpiricalTable)
        os << "(" << table_.size() << " entries)";
    return os.str();
}

} // namespace lvr
