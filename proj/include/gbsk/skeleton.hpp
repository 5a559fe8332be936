#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <ostream>
#include <vector>

#include "gbsk/dataset.hpp"
#include "gbsk/error.hpp"
#include "gbsk/granular_ball.hpp"
#include "gbsk/peaks.hpp"

namespace gbsk {

/// Balls regenerated over the pooled representative centers; the nodes of the skeleton.
struct KeyBallSet {
    BallSet balls;
    std::size_t size() const noexcept { return balls.size(); }
};

/// A forest over balls: one tree per cluster.
struct SkeletonForest {
    static constexpr std::ptrdiff_t no_parent = -1;

    std::vector<std::ptrdiff_t> parent; // per ball, -1 for roots
    std::vector<std::size_t> roots;     // root ball indices, in gamma-descending order
    std::vector<Label> labels;          // per ball, 1..k; roots[i] carries label i + 1

    std::size_t size() const noexcept { return parent.size(); }
    std::size_t tree_count() const noexcept { return roots.size(); }
};

/// Key balls over the pooled centers, with no budget. If the default split guard leaves
/// fewer than `min_balls` balls, generation is repeated with singleton children allowed.
inline KeyBallSet build_key_balls(MatrixView pooled_centers, Rng& rng, GenerationTrace* trace = nullptr,
                                  std::size_t min_balls = 0) {
    if (pooled_centers.empty()) throw InvalidArgument("no representative centers to build key balls from");
    return KeyBallSet{generate_balls_at_least(pooled_centers, unlimited_balls, min_balls, rng, trace)};
}

/// Roots are the k balls of largest gamma. Every other ball points at its nearest
/// denser ball (see `denser`), and inherits the label of the root it leads to.
inline SkeletonForest construct_forest(const BallSet& balls, std::size_t k) {
    const std::size_t w = balls.size();
    if (k == 0) throw InvalidArgument("k must be >= 1");
    if (k > w) throw InsufficientBalls("key balls", w, k);

    const PeakStats stats = compute_peak_stats(balls);
    SkeletonForest forest;
    forest.parent.assign(w, SkeletonForest::no_parent);
    forest.labels.assign(w, 0);
    forest.roots = identify_peak_indices(balls, k, stats);

    std::vector<bool> is_root(w, false);
    for (std::size_t r = 0; r < forest.roots.size(); ++r) {
        is_root[forest.roots[r]] = true;
        forest.labels[forest.roots[r]] = static_cast<Label>(r + 1);
    }

    for (std::size_t i = 0; i < w; ++i) {
        if (is_root[i]) continue;
        double best = std::numeric_limits<double>::infinity();
        std::ptrdiff_t arg = SkeletonForest::no_parent;
        for (std::size_t j = 0; j < w; ++j) {
            if (j == i || !denser(balls, j, i)) continue;
            const double dist = distance(balls[i].center, balls[j].center);
            if (dist < best) {
                best = dist;
                arg = static_cast<std::ptrdiff_t>(j);
            }
        }
        // Only the densest ball lacks a denser neighbour, and it always has the top gamma.
        if (arg == SkeletonForest::no_parent) throw Error("forest construction: densest ball is not a root");
        forest.parent[i] = arg;
    }

    // Parents are denser than their children, so visiting in density order labels parents first.
    std::vector<std::size_t> by_density(w);
    std::iota(by_density.begin(), by_density.end(), std::size_t{0});
    std::sort(by_density.begin(), by_density.end(),
              [&](std::size_t a, std::size_t b) { return denser(balls, a, b); });
    for (const auto i : by_density)
        if (!is_root[i]) forest.labels[i] = forest.labels[static_cast<std::size_t>(forest.parent[i])];
    return forest;
}

inline SkeletonForest construct_forest(const KeyBallSet& key_balls, std::size_t k) {
    return construct_forest(key_balls.balls, k);
}

/// Packs ball centers into one contiguous matrix.
inline Matrix ball_centers(const BallSet& balls) {
    Matrix centers;
    for (const auto& b : balls.balls) centers.append_row(b.center);
    return centers;
}

/// Each point takes the label of the ball with the nearest center (ties: lower index).
inline Labels label_points(MatrixView points, const SkeletonForest& forest, const BallSet& balls) {
    if (balls.empty()) throw InvalidArgument("no balls to label against");
    if (forest.size() != balls.size()) throw InvalidArgument("forest and ball set sizes differ");
    if (points.cols() != balls[0].center.size()) throw InvalidArgument("point and ball dimensions differ");

    const Matrix centers = ball_centers(balls);
    const std::size_t w = centers.rows();
    const auto n = static_cast<std::ptrdiff_t>(points.rows());
    Labels out(points.rows());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto p = points.row(static_cast<std::size_t>(i));
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t b = 0; b < w; ++b) {
            const double dist = squared_distance(p, centers.row(b));
            if (dist < best) {
                best = dist;
                arg = b;
            }
        }
        out[static_cast<std::size_t>(i)] = forest.labels[arg];
    }
    return out;
}

inline Labels label_points(const Dataset& ds, const SkeletonForest& forest, const KeyBallSet& key_balls) {
    return label_points(ds.view(), forest, key_balls.balls);
}

// ---------------------------------------------------------------------------
// Dumps

/// child_id,parent_id,label,c0..c{d-1}; one row per ball, roots have parent -1.
inline void write_skeleton_csv(std::ostream& out, const SkeletonForest& forest, const BallSet& balls) {
    const std::size_t d = balls.empty() ? 0 : balls[0].center.size();
    out << "child_id,parent_id,label";
    for (std::size_t j = 0; j < d; ++j) out << ",c" << j;
    out << '\n';
    out.precision(17);
    for (std::size_t i = 0; i < forest.size(); ++i) {
        out << i << ',' << forest.parent[i] << ',' << forest.labels[i];
        for (const double c : balls[i].center) out << ',' << c;
        out << '\n';
    }
}

/// Scatter of the points (optional), ball circles and skeleton edges. 3-D input is
/// projected onto its first two axes.
inline void write_skeleton_svg(std::ostream& out, MatrixView points, const Labels* point_labels,
                               const SkeletonForest& forest, const BallSet& balls, double size = 800.0) {
    const std::size_t d = balls.empty() ? points.cols() : balls[0].center.size();
    if (d < 2 || d > 3) throw InvalidArgument("SVG output needs 2-D or 3-D data, got d=" + std::to_string(d));

    double lo[2] = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    double hi[2] = {-lo[0], -lo[1]};
    auto extend = [&](std::span<const double> p, double pad) {
        for (int a = 0; a < 2; ++a) {
            lo[a] = std::min(lo[a], p[a] - pad);
            hi[a] = std::max(hi[a], p[a] + pad);
        }
    };
    for (std::size_t i = 0; i < points.rows(); ++i) extend(points.row(i), 0.0);
    for (const auto& b : balls.balls) extend(b.center, b.radius);
    const double span = std::max({hi[0] - lo[0], hi[1] - lo[1], 1e-12});
    const double margin = 10.0;
    const double scale = (size - 2 * margin) / span;
    auto sx = [&](double x) { return margin + (x - lo[0]) * scale; };
    auto sy = [&](double y) { return size - margin - (y - lo[1]) * scale; };

    static constexpr const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                              "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    auto color = [&](Label l) { return palette[static_cast<std::size_t>(l < 0 ? -l : l) % 10]; };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<g id=\"points\">\n";
    for (std::size_t i = 0; i < points.rows(); ++i) {
        const auto p = points.row(i);
        out << "<circle cx=\"" << sx(p[0]) << "\" cy=\"" << sy(p[1]) << "\" r=\"1.2\" fill=\""
            << (point_labels ? color((*point_labels)[i]) : "#999999") << "\" fill-opacity=\"0.5\"/>\n";
    }
    out << "</g>\n<g id=\"balls\">\n";
    for (std::size_t b = 0; b < balls.size(); ++b) {
        const auto& c = balls[b].center;
        out << "<circle cx=\"" << sx(c[0]) << "\" cy=\"" << sy(c[1]) << "\" r=\"" << balls[b].radius * scale
            << "\" fill=\"none\" stroke=\"" << color(forest.labels[b]) << "\"/>\n";
    }
    out << "</g>\n<g id=\"edges\">\n";
    for (std::size_t i = 0; i < forest.size(); ++i) {
        if (forest.parent[i] < 0) continue;
        const auto& a = balls[i].center;
        const auto& p = balls[static_cast<std::size_t>(forest.parent[i])].center;
        out << "<line x1=\"" << sx(a[0]) << "\" y1=\"" << sy(a[1]) << "\" x2=\"" << sx(p[0]) << "\" y2=\"" << sy(p[1])
            << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    }
    out << "</g>\n<g id=\"roots\">\n";
    for (const auto r : forest.roots) {
        const auto& c = balls[r].center;
        out << "<circle cx=\"" << sx(c[0]) << "\" cy=\"" << sy(c[1]) << "\" r=\"4\" fill=\"" << color(forest.labels[r])
            << "\" stroke=\"black\"/>\n";
    }
    out << "</g>\n</svg>\n";
}

} // namespace gbsk
