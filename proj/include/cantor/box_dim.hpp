#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "cantor/space.hpp"

namespace cantor {

struct KRange {
    int first = 0;
    int last = 0;  // inclusive

    int size() const { return last - first + 1; }
};

// Default regression window: the top half of the available levels.
KRange default_k_range(int depth);

// Least-squares slope of log |U_k| against -k log r.
struct DimensionEstimate {
    bool empty = false;  // some count in the window was zero; slope is meaningless
    double slope = 0.0;
    double stderr_ = 0.0;
    KRange k_range;
    std::vector<std::uint64_t> counts;  // the counts inside k_range
};

// counts[k] is |U_k| for k = 0..counts.size()-1.
DimensionEstimate box_dim_estimate(std::span<const std::uint64_t> counts, const SpaceParams& p,
                                   KRange k_range);

// Same, from explicit (k, count) pairs.
DimensionEstimate box_dim_estimate(std::span<const std::pair<int, std::uint64_t>> samples,
                                   const SpaceParams& p);

}  // namespace cantor
