// Order-stable summation and basic sample statistics. Pairwise reduction
// keeps aggregation independent of trial execution order so parallel
// sweeps stay byte-reproducible.
#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "picosync/errors.hpp"

namespace picosync::detail {

inline double pairwise_sum(std::span<const double> v) {
    if (v.empty()) return 0.0;
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

inline double mean(std::span<const double> v) {
    if (v.empty()) throw parameter_error("mean: empty sample");
    return pairwise_sum(v) / static_cast<double>(v.size());
}

// Sample standard deviation (n-1 divisor), two-pass.
inline double sample_std(std::span<const double> v) {
    if (v.size() < 2) throw parameter_error("sample_std: need at least 2 samples");
    const double m = mean(v);
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double d = v[i] - m;
        sq[i] = d * d;
    }
    return std::sqrt(pairwise_sum(sq) / static_cast<double>(v.size() - 1));
}

} // namespace picosync::detail
