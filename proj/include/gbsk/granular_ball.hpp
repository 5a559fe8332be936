#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <utility>
#include <vector>

#include "gbsk/error.hpp"
#include "gbsk/matrix.hpp"
#include "gbsk/random.hpp"

namespace gbsk {

/// Smoothing term of the distribution measure, in data units.
inline constexpr double dm_smoothing = 0.01;

/// Upper bound on the number of balls produced by stage 1 of generation.
/// An empty budget means no restriction.
using BallBudget = std::optional<std::size_t>;
inline constexpr BallBudget unlimited_balls = std::nullopt;

/// A granular ball: member set, center, radius, density and distribution measure.
struct GranularBall {
    std::vector<std::size_t> members; // indices into the point view the ball was built on
    std::vector<double> center;
    double radius = 0.0;
    double density = 0.0; // filled set-wide by compute_set_density
    double dm = 0.0;

    std::size_t member_count() const noexcept { return members.size(); }
};

struct BallSet {
    std::vector<GranularBall> balls;
    double mean_radius = 0.0;
    double median_radius = 0.0;
    std::size_t source_point_count = 0;

    std::size_t size() const noexcept { return balls.size(); }
    bool empty() const noexcept { return balls.empty(); }
    const GranularBall& operator[](std::size_t i) const noexcept { return balls[i]; }
    GranularBall& operator[](std::size_t i) noexcept { return balls[i]; }
};

inline double distribution_measure(double radius) noexcept { return 1.0 / (radius + dm_smoothing); }

/// N / (r + medianR) for N > 1, 0 for singletons. A zero denominator (a ball of
/// coincident points in a set whose median radius is 0) falls back to the DM smoothing term.
inline double ball_density(std::size_t member_count, double radius, double median_radius) noexcept {
    if (member_count <= 1) return 0.0;
    double denom = radius + median_radius;
    if (denom <= 0.0) denom = dm_smoothing;
    return static_cast<double>(member_count) / denom;
}

/// Center (mean), radius (max member distance to center) and DM. Density is left at 0.
inline GranularBall build_ball(MatrixView points, std::vector<std::size_t> members) {
    if (members.empty()) throw InvalidArgument("cannot build a ball without members");
    GranularBall ball;
    ball.center.assign(points.cols(), 0.0);
    for (const auto i : members) {
        const auto p = points.row(i);
        for (std::size_t j = 0; j < p.size(); ++j) ball.center[j] += p[j];
    }
    const double inv = 1.0 / static_cast<double>(members.size());
    for (auto& c : ball.center) c *= inv;

    double max_sq = 0.0;
    for (const auto i : members) max_sq = std::max(max_sq, squared_distance(points.row(i), ball.center));
    ball.radius = std::sqrt(max_sq);
    ball.dm = distribution_measure(ball.radius);
    ball.members = std::move(members);
    return ball;
}

/// Member-weighted DM of the two children.
inline double wdm(const GranularBall& parent, const GranularBall& left, const GranularBall& right) {
    const auto n = parent.member_count();
    if (n == 0 || left.member_count() + right.member_count() != n)
        throw InvalidArgument("child member counts do not sum to the parent's");
    const double nd = static_cast<double>(n);
    return static_cast<double>(left.member_count()) / nd * left.dm +
           static_cast<double>(right.member_count()) / nd * right.dm;
}

struct SplitOptions {
    int restarts = 3;
    int max_iterations = 100;
    double tolerance = 1e-6; // center movement, relative to the parent radius
    std::size_t min_child = 2; // stage-1 splits leaving a smaller child are rejected
};

namespace detail {

struct TwoMeans {
    std::vector<unsigned char> assignment; // 0 or 1 per member
    double sse = std::numeric_limits<double>::infinity();
    bool valid = false;
};

inline TwoMeans two_means_run(MatrixView points, const GranularBall& ball, Rng& rng, const SplitOptions& opt) {
    const auto& members = ball.members;
    const std::size_t n = members.size();
    const std::size_t d = points.cols();
    TwoMeans out;

    // k-means++ seeding
    std::vector<double> c0(d), c1(d);
    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    const auto p0 = points.row(members[first(rng)]);
    std::copy(p0.begin(), p0.end(), c0.begin());
    std::vector<double> weight(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        weight[i] = squared_distance(points.row(members[i]), c0);
        total += weight[i];
    }
    if (total <= 0.0) return out;
    std::uniform_real_distribution<double> u(0.0, total);
    double target = u(rng);
    std::size_t second = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (weight[i] > 0.0 && target < weight[i]) {
            second = i;
            break;
        }
        target -= weight[i];
    }
    while (weight[second] <= 0.0) --second; // rounding at the tail
    const auto p1 = points.row(members[second]);
    std::copy(p1.begin(), p1.end(), c1.begin());

    // Lloyd
    const double tol = opt.tolerance * std::max(ball.radius, std::numeric_limits<double>::min());
    const double tol_sq = tol * tol;
    std::vector<unsigned char> assign(n, 2);
    std::vector<double> s0(d), s1(d);
    for (int iter = 0; iter < opt.max_iterations; ++iter) {
        bool changed = false;
        std::size_t n0 = 0, n1 = 0;
        std::fill(s0.begin(), s0.end(), 0.0);
        std::fill(s1.begin(), s1.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto p = points.row(members[i]);
            const unsigned char a = squared_distance(p, c1) < squared_distance(p, c0) ? 1 : 0;
            if (a != assign[i]) changed = true;
            assign[i] = a;
            auto& s = a ? s1 : s0;
            for (std::size_t j = 0; j < d; ++j) s[j] += p[j];
            (a ? n1 : n0)++;
        }
        if (n0 == 0 || n1 == 0) return out;
        double move = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double m0 = s0[j] / static_cast<double>(n0);
            const double m1 = s1[j] / static_cast<double>(n1);
            move = std::max(move, std::max((m0 - c0[j]) * (m0 - c0[j]), (m1 - c1[j]) * (m1 - c1[j])));
            c0[j] = m0;
            c1[j] = m1;
        }
        if (!changed || move < tol_sq) break;
    }

    // final assignment against the converged centers
    std::size_t n0 = 0;
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto p = points.row(members[i]);
        const double d0 = squared_distance(p, c0);
        const double d1 = squared_distance(p, c1);
        assign[i] = d1 < d0 ? 1 : 0;
        sse += std::min(d0, d1);
        n0 += assign[i] == 0;
    }
    if (n0 == 0 || n0 == n) return out;
    out.assignment = std::move(assign);
    out.sse = sse;
    out.valid = true;
    return out;
}

/// Halves the members at the median of the highest-variance axis.
inline std::vector<unsigned char> median_split(MatrixView points, const GranularBall& ball) {
    const auto& members = ball.members;
    const std::size_t n = members.size();
    std::size_t axis = 0;
    double best_var = -1.0;
    for (std::size_t j = 0; j < points.cols(); ++j) {
        double var = 0.0;
        for (const auto i : members) {
            const double diff = points.row(i)[j] - ball.center[j];
            var += diff * diff;
        }
        if (var > best_var) {
            best_var = var;
            axis = j;
        }
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return points.row(members[a])[axis] < points.row(members[b])[axis];
    });
    std::vector<unsigned char> assign(n, 0);
    for (std::size_t r = n / 2; r < n; ++r) assign[order[r]] = 1;
    return assign;
}

inline bool all_coincident(MatrixView points, const std::vector<std::size_t>& members) {
    const auto first = points.row(members.front());
    for (std::size_t i = 1; i < members.size(); ++i) {
        const auto p = points.row(members[i]);
        if (!std::equal(p.begin(), p.end(), first.begin())) return false;
    }
    return true;
}

} // namespace detail

/// Splits a ball in two with 2-means (k-means++ seeding, best of `restarts` runs by SSE).
/// Returns nullopt for a terminal ball: fewer than two members or all members coincident.
inline std::optional<std::pair<GranularBall, GranularBall>> bisect(MatrixView points, const GranularBall& ball,
                                                                   Rng& rng, const SplitOptions& opt = {}) {
    if (ball.member_count() < 2 || detail::all_coincident(points, ball.members)) return std::nullopt;

    detail::TwoMeans best;
    for (int r = 0; r < opt.restarts; ++r) {
        auto run = detail::two_means_run(points, ball, rng, opt);
        if (run.valid && run.sse < best.sse) best = std::move(run);
    }
    const auto assign = best.valid ? std::move(best.assignment) : detail::median_split(points, ball);

    std::vector<std::size_t> left, right;
    for (std::size_t i = 0; i < ball.members.size(); ++i)
        (assign[i] == 0 ? left : right).push_back(ball.members[i]);
    return std::make_pair(build_ball(points, std::move(left)), build_ball(points, std::move(right)));
}

inline double median_of(std::vector<double> values) {
    if (values.empty()) return 0.0;
    const auto mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) return upper;
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

/// Recomputes meanR and medianR from the current ball list.
inline void update_radius_stats(BallSet& set) {
    std::vector<double> radii;
    radii.reserve(set.size());
    double sum = 0.0;
    for (const auto& b : set.balls) {
        radii.push_back(b.radius);
        sum += b.radius;
    }
    set.mean_radius = set.empty() ? 0.0 : sum / static_cast<double>(set.size());
    set.median_radius = median_of(std::move(radii));
}

/// Fills every ball's density from the set's median radius.
inline void compute_set_density(BallSet& set) {
    for (auto& b : set.balls) b.density = ball_density(b.member_count(), b.radius, set.median_radius);
}

/// Optional record of what generate_balls decided, for diagnostics and tests.
struct GenerationTrace {
    struct Decision {
        double wdm;
        double dm;
        bool accepted;
        bool forced; // accepted only because the ball held more than n/M points
    };
    std::vector<Decision> stage1_decisions;
    std::size_t stage1_ball_count = 0;
    double stage1_mean_radius = 0.0;
    double stage1_median_radius = 0.0;
    bool stopped_at_budget = false;
};

/// Two-stage granular-ball generation over every row of `points`.
///
/// Stage 1 splits breadth-first from the whole-set ball, keeping a split when the
/// children's weighted DM is at least the parent's DM. With a bounded budget the loop
/// stops once `max_balls` balls are final, and anything still queued is kept as is.
/// Stage 2 splits every ball whose radius reaches 2 * max(meanR, medianR) of the
/// stage-1 output; the threshold is not updated while refining.
inline BallSet generate_balls(MatrixView points, BallBudget max_balls, Rng& rng,
                              GenerationTrace* trace = nullptr, const SplitOptions& opt = {}) {
    if (points.empty()) throw InvalidArgument("cannot generate balls over an empty point set");
    if (max_balls && *max_balls == 0) throw InvalidArgument("ball budget must be >= 1");

    std::vector<std::size_t> all(points.rows());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

    // With a budget, balls holding more than n/M points are always refined.
    const std::size_t oversize = max_balls ? (points.rows() + *max_balls - 1) / *max_balls
                                           : std::numeric_limits<std::size_t>::max();
    BallSet stage1;
    std::deque<GranularBall> queue;
    queue.push_back(build_ball(points, std::move(all)));
    while (!queue.empty()) {
        // final plus queued balls count against the budget; stop before a split would exceed it
        if (max_balls && stage1.size() + queue.size() >= *max_balls) {
            if (trace) trace->stopped_at_budget = true;
            for (auto& rest : queue) stage1.balls.push_back(std::move(rest));
            queue.clear();
            break;
        }
        GranularBall gb = std::move(queue.front());
        queue.pop_front();
        auto children = bisect(points, gb, rng, opt);
        bool accepted = false;
        if (children) {
            const double w = wdm(gb, children->first, children->second);
            const bool big_enough = children->first.member_count() >= opt.min_child &&
                                    children->second.member_count() >= opt.min_child;
            const bool forced = w < gb.dm && gb.member_count() > oversize;
            accepted = (w >= gb.dm || forced) && big_enough;
            if (trace) trace->stage1_decisions.push_back({w, gb.dm, accepted, forced && accepted});
        }
        if (accepted) {
            queue.push_back(std::move(children->first));
            queue.push_back(std::move(children->second));
        } else {
            stage1.balls.push_back(std::move(gb));
        }
    }
    update_radius_stats(stage1);
    if (trace) {
        trace->stage1_ball_count = stage1.size();
        trace->stage1_mean_radius = stage1.mean_radius;
        trace->stage1_median_radius = stage1.median_radius;
    }

    const double threshold = 2.0 * std::max(stage1.mean_radius, stage1.median_radius);
    BallSet result;
    result.source_point_count = points.rows();
    std::deque<GranularBall> refine(std::make_move_iterator(stage1.balls.begin()),
                                    std::make_move_iterator(stage1.balls.end()));
    while (!refine.empty()) {
        GranularBall gb = std::move(refine.front());
        refine.pop_front();
        if (gb.radius >= threshold) {
            if (auto children = bisect(points, gb, rng, opt)) {
                refine.push_back(std::move(children->first));
                refine.push_back(std::move(children->second));
                continue;
            }
        }
        result.balls.push_back(std::move(gb));
    }
    update_radius_stats(result);
    compute_set_density(result);
    return result;
}

/// generate_balls, repeated with min_child = 1 when the guarded run yields fewer than `wanted` balls.
inline BallSet generate_balls_at_least(MatrixView points, BallBudget max_balls, std::size_t wanted, Rng& rng,
                                       GenerationTrace* trace = nullptr, SplitOptions opt = {}) {
    BallSet set = generate_balls(points, max_balls, rng, trace, opt);
    if (set.size() >= wanted || opt.min_child <= 1) return set;
    opt.min_child = 1;
    if (trace) *trace = {};
    return generate_balls(points, max_balls, rng, trace, opt);
}

inline void write_balls_csv(std::ostream& out, const BallSet& set) {
    const std::size_t d = set.empty() ? 0 : set[0].center.size();
    out << "ball_id";
    for (std::size_t j = 0; j < d; ++j) out << ",c" << j;
    out << ",radius,density,member_count\n";
    out.precision(17);
    for (std::size_t b = 0; b < set.size(); ++b) {
        out << b;
        for (const double c : set[b].center) out << ',' << c;
        out << ',' << set[b].radius << ',' << set[b].density << ',' << set[b].member_count() << '\n';
    }
}

} // namespace gbsk
