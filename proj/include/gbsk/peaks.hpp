#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <ostream>
#include <vector>

#include "gbsk/error.hpp"
#include "gbsk/granular_ball.hpp"

namespace gbsk {

/// Strict "denser than" order over the balls of one set: higher density wins, and
/// on equal density the lower index wins. Every pair of distinct balls is comparable.
inline bool denser(const BallSet& set, std::size_t q, std::size_t j) noexcept {
    const double rq = set[q].density;
    const double rj = set[j].density;
    return rq > rj || (rq == rj && q < j);
}

struct PeakStats {
    std::vector<double> delta;
    std::vector<double> gamma;
    std::vector<std::size_t> order; // ball indices by gamma descending, ties by index
};

/// For each ball, the center distance to its nearest denser ball. The densest ball
/// takes the largest pairwise center distance in the set (0 for a single ball).
inline std::vector<double> compute_delta(const BallSet& set) {
    const std::size_t t = set.size();
    if (t == 0) throw InvalidArgument("cannot compute delta over an empty ball set");
    std::vector<double> nearest(t, std::numeric_limits<double>::infinity());
    double max_pair = 0.0;
    for (std::size_t a = 0; a < t; ++a) {
        for (std::size_t b = a + 1; b < t; ++b) {
            const double dist = distance(set[a].center, set[b].center);
            max_pair = std::max(max_pair, dist);
            if (denser(set, a, b))
                nearest[b] = std::min(nearest[b], dist);
            else
                nearest[a] = std::min(nearest[a], dist);
        }
    }
    for (auto& v : nearest)
        if (v == std::numeric_limits<double>::infinity()) v = max_pair;
    return nearest;
}

/// Indices sorted by gamma descending; equal gamma keeps the lower index first.
inline std::vector<std::size_t> gamma_order(const std::vector<double>& gamma) {
    std::vector<std::size_t> order(gamma.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return gamma[a] > gamma[b]; });
    return order;
}

inline PeakStats compute_peak_stats(const BallSet& set) {
    PeakStats stats;
    stats.delta = compute_delta(set);
    stats.gamma.resize(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) stats.gamma[i] = set[i].density * stats.delta[i];
    stats.order = gamma_order(stats.gamma);
    return stats;
}

/// Indices of the k balls with the largest gamma = density * delta, in gamma order.
inline std::vector<std::size_t> identify_peak_indices(const BallSet& set, std::size_t k, const PeakStats& stats) {
    if (k == 0) throw InvalidArgument("k must be >= 1");
    if (k > set.size()) throw InsufficientBalls("balls", set.size(), k);
    return {stats.order.begin(), stats.order.begin() + static_cast<std::ptrdiff_t>(k)};
}

inline std::vector<std::size_t> identify_peak_indices(const BallSet& set, std::size_t k) {
    if (k > set.size()) throw InsufficientBalls("balls", set.size(), k);
    return identify_peak_indices(set, k, compute_peak_stats(set));
}

/// The k representative balls of a set.
inline std::vector<GranularBall> identify_peak_balls(const BallSet& set, std::size_t k) {
    std::vector<GranularBall> peaks;
    for (const auto i : identify_peak_indices(set, k)) peaks.push_back(set[i]);
    return peaks;
}

inline void write_peaks_csv(std::ostream& out, const BallSet& set, const PeakStats& stats) {
    out << "ball_id,density,delta,gamma\n";
    out.precision(17);
    for (std::size_t i = 0; i < set.size(); ++i)
        out << i << ',' << set[i].density << ',' << stats.delta[i] << ',' << stats.gamma[i] << '\n';
}

} // namespace gbsk
