#include "cantor/box_dim.hpp"

#include <cmath>
#include <stdexcept>

namespace cantor {

KRange default_k_range(int depth) {
    if (depth < 1) throw std::invalid_argument("default_k_range: depth must be >= 1");
    return {depth / 2, depth};
}

DimensionEstimate box_dim_estimate(std::span<const std::pair<int, std::uint64_t>> samples,
                                   const SpaceParams& p) {
    DimensionEstimate est;
    if (samples.size() < 2) throw std::invalid_argument("box_dim_estimate: need at least two levels");
    est.k_range = {samples.front().first, samples.back().first};
    for (const auto& [k, c] : samples) {
        est.counts.push_back(c);
        if (c == 0) est.empty = true;
    }
    if (est.empty) return est;

    const double scale = -std::log(p.r());
    const auto n = static_cast<double>(samples.size());
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (const auto& [k, c] : samples) {
        mean_x += k * scale;
        mean_y += std::log(static_cast<double>(c));
    }
    mean_x /= n;
    mean_y /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& [k, c] : samples) {
        const double dx = k * scale - mean_x;
        sxx += dx * dx;
        sxy += dx * (std::log(static_cast<double>(c)) - mean_y);
    }
    if (sxx <= 0.0) throw std::invalid_argument("box_dim_estimate: levels must be distinct");
    est.slope = sxy / sxx;
    if (samples.size() > 2) {
        double ssr = 0.0;
        for (const auto& [k, c] : samples) {
            const double resid = std::log(static_cast<double>(c)) - mean_y - est.slope * (k * scale - mean_x);
            ssr += resid * resid;
        }
        est.stderr_ = std::sqrt(ssr / (n - 2.0) / sxx);
    }
    return est;
}

DimensionEstimate box_dim_estimate(std::span<const std::uint64_t> counts, const SpaceParams& p,
                                   KRange k_range) {
    if (k_range.first < 0 || k_range.last >= static_cast<int>(counts.size()) ||
        k_range.first >= k_range.last) {
        throw std::invalid_argument("box_dim_estimate: k_range outside available levels");
    }
    std::vector<std::pair<int, std::uint64_t>> samples;
    for (int k = k_range.first; k <= k_range.last; ++k) {
        samples.emplace_back(k, counts[static_cast<std::size_t>(k)]);
    }
    return box_dim_estimate(samples, p);
}

}  // namespace cantor
