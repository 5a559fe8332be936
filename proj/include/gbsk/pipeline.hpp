#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "gbsk/dataset.hpp"
#include "gbsk/error.hpp"
#include "gbsk/granular_ball.hpp"
#include "gbsk/metrics.hpp"
#include "gbsk/peaks.hpp"
#include "gbsk/random.hpp"
#include "gbsk/skeleton.hpp"

namespace gbsk {

enum class Variant { standard, no_sampling, no_representative_balls };

inline std::string_view to_string(Variant v) {
    switch (v) {
    case Variant::standard: return "standard";
    case Variant::no_sampling: return "no-sampling";
    case Variant::no_representative_balls: return "no-representative-balls";
    }
    return "standard";
}

inline Variant parse_variant(std::string_view s) {
    if (s == "standard") return Variant::standard;
    if (s == "no-sampling") return Variant::no_sampling;
    if (s == "no-representative-balls" || s == "no-rep-balls") return Variant::no_representative_balls;
    throw InvalidArgument("unknown variant '" + std::string(s) + "'");
}

struct GbskParams {
    std::size_t s = 30;          // number of sample sets
    double alpha = 0.1;          // sampling proportion
    BallBudget max_balls = 20;   // M, per sample
    std::size_t k = 2;           // cluster count
    std::uint64_t seed = 0;
    Variant variant = Variant::standard;

    void validate() const {
        if (s < 1) throw InvalidArgument("s must be >= 1");
        if (k < 1) throw InvalidArgument("k must be >= 1");
        if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in (0, 1]");
        if (max_balls && *max_balls < k)
            throw InvalidArgument("M (" + std::to_string(*max_balls) + ") must be >= k (" + std::to_string(k) + ")");
    }
};

/// Recommended defaults: s = 30, alpha = 1/sqrt(n), M = 10k.
inline GbskParams agbsk_params(std::size_t n, std::size_t k, std::uint64_t seed = 0) {
    if (n < 1) throw InvalidArgument("n must be >= 1");
    if (k < 1) throw InvalidArgument("k must be >= 1");
    GbskParams p;
    p.s = 30;
    p.alpha = 1.0 / std::sqrt(static_cast<double>(n));
    p.max_balls = 10 * k;
    p.k = k;
    p.seed = seed;
    return p;
}

/// Wall-clock milliseconds for steps 1..5.
struct StepTimings {
    std::array<double, 5> ms{};
    double total() const noexcept { return ms[0] + ms[1] + ms[2] + ms[3] + ms[4]; }
};

struct Diagnostics {
    std::size_t sample_size = 0;
    std::vector<std::size_t> balls_per_sample;
    std::size_t rep_ball_count = 0; // centers pooled into the forest stage input
    std::size_t key_ball_count = 0; // W
    std::size_t root_count = 0;
};

struct ClusteringResult {
    Labels labels;
    StepTimings timings;
    Diagnostics diagnostics;
    BallSet skeleton_balls; // the balls the forest is built over
    SkeletonForest forest;
};

namespace detail {

class StepClock {
  public:
    explicit StepClock(StepTimings& timings) : timings_(timings), last_(std::chrono::steady_clock::now()) {}
    void lap(std::size_t step) {
        const auto now = std::chrono::steady_clock::now();
        timings_.ms[step - 1] += std::chrono::duration<double, std::milli>(now - last_).count();
        last_ = now;
    }

  private:
    StepTimings& timings_;
    std::chrono::steady_clock::time_point last_;
};

struct SampleOutcome {
    BallSet balls;
    std::vector<std::size_t> peaks;
};

/// Step 2 body: balls per sample, optionally their k peaks. Parallel over samples.
inline std::vector<SampleOutcome> process_samples(const std::vector<SampleSet>& sets, const GbskParams& p,
                                                  bool find_peaks) {
    std::vector<SampleOutcome> out(sets.size());
    std::vector<std::exception_ptr> errors(sets.size());
    const auto count = static_cast<std::ptrdiff_t>(sets.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        try {
            const Matrix points = sets[idx].gather();
            Rng rng(derive_seed(p.seed, {stream::sample_balls, sets[idx].sample_index}));
            out[idx].balls = generate_balls_at_least(points, p.max_balls, find_peaks ? p.k : 0, rng);
            if (find_peaks) {
                if (out[idx].balls.size() < p.k)
                    throw InsufficientBalls("balls in sample " + std::to_string(sets[idx].sample_index),
                                            out[idx].balls.size(), p.k);
                out[idx].peaks = identify_peak_indices(out[idx].balls, p.k);
            }
        } catch (...) {
            errors[idx] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

inline void finish(ClusteringResult& result, const Dataset& ds, detail::StepClock& clock) {
    result.diagnostics.key_ball_count = result.skeleton_balls.size();
    result.diagnostics.root_count = result.forest.tree_count();
    result.labels = label_points(ds.view(), result.forest, result.skeleton_balls);
    clock.lap(5);
}

} // namespace detail

inline ClusteringResult run_ablation(const Dataset& ds, const GbskParams& params);

/// The five-step skeleton clustering: sample, pick k representative balls per
/// sample, regenerate key balls over the pooled centers, build the forest, label.
inline ClusteringResult run_gbsk(const Dataset& ds, const GbskParams& params) {
    if (params.variant != Variant::standard) return run_ablation(ds, params);
    params.validate();
    if (ds.n() == 0) throw InvalidArgument("empty dataset");

    ClusteringResult result;
    detail::StepClock clock(result.timings);

    const auto sets = sample(ds, params.s, params.alpha, params.seed, 2 * params.k);
    result.diagnostics.sample_size = sets.front().indices.size();
    clock.lap(1);

    const auto outcomes = detail::process_samples(sets, params, true);
    Matrix pooled;
    for (const auto& o : outcomes) {
        result.diagnostics.balls_per_sample.push_back(o.balls.size());
        for (const auto b : o.peaks) pooled.append_row(o.balls[b].center);
    }
    result.diagnostics.rep_ball_count = pooled.rows();
    clock.lap(2);

    Rng key_rng(derive_seed(params.seed, {stream::key_balls}));
    result.skeleton_balls = build_key_balls(pooled, key_rng, nullptr, params.k).balls;
    clock.lap(3);

    result.forest = construct_forest(result.skeleton_balls, params.k);
    clock.lap(4);

    detail::finish(result, ds, clock);
    return result;
}

/// Ablations that share the standard code path except for the step they remove.
///  - no-sampling: balls over the full dataset (M unlimited), forest over all of them.
///  - no-representative-balls: samples as usual, but every per-sample ball enters the
///    forest directly, keeping its per-sample density.
inline ClusteringResult run_ablation(const Dataset& ds, const GbskParams& params) {
    params.validate();
    if (params.variant == Variant::standard) return run_gbsk(ds, params);

    ClusteringResult result;
    detail::StepClock clock(result.timings);

    if (params.variant == Variant::no_sampling) {
        result.diagnostics.sample_size = ds.n();
        clock.lap(1);
        Rng rng(derive_seed(params.seed, {stream::full_balls}));
        result.skeleton_balls = generate_balls_at_least(ds.view(), unlimited_balls, params.k, rng);
        result.diagnostics.balls_per_sample = {result.skeleton_balls.size()};
        result.diagnostics.rep_ball_count = result.skeleton_balls.size();
        clock.lap(2);
    } else {
        const auto sets = sample(ds, params.s, params.alpha, params.seed, 2 * params.k);
        result.diagnostics.sample_size = sets.front().indices.size();
        clock.lap(1);
        auto outcomes = detail::process_samples(sets, params, false);
        for (auto& o : outcomes) {
            result.diagnostics.balls_per_sample.push_back(o.balls.size());
            for (auto& b : o.balls.balls) result.skeleton_balls.balls.push_back(std::move(b));
        }
        result.skeleton_balls.source_point_count = ds.n();
        update_radius_stats(result.skeleton_balls);
        result.diagnostics.rep_ball_count = result.skeleton_balls.size();
        clock.lap(2);
    }
    clock.lap(3);

    result.forest = construct_forest(result.skeleton_balls, params.k);
    clock.lap(4);

    detail::finish(result, ds, clock);
    return result;
}

// ---------------------------------------------------------------------------
// Report

inline nlohmann::json params_json(const GbskParams& p) {
    return {{"s", p.s},
            {"alpha", p.alpha},
            {"M", p.max_balls ? static_cast<std::int64_t>(*p.max_balls) : std::int64_t{-1}},
            {"k", p.k},
            {"seed", p.seed},
            {"variant", std::string(to_string(p.variant))}};
}

/// {params, n, d, stepTimingsMs, diagnostics, metrics?}
inline nlohmann::json make_report(const Dataset& ds, const GbskParams& p, const ClusteringResult& r,
                                  const Labels* truth = nullptr) {
    nlohmann::json report;
    report["params"] = params_json(p);
    report["n"] = ds.n();
    report["d"] = ds.d();
    report["stepTimingsMs"] = {{"step1", r.timings.ms[0]}, {"step2", r.timings.ms[1]}, {"step3", r.timings.ms[2]},
                               {"step4", r.timings.ms[3]}, {"step5", r.timings.ms[4]}, {"total", r.timings.total()}};
    report["diagnostics"] = {{"sampleSize", r.diagnostics.sample_size},
                             {"ballsPerSample", r.diagnostics.balls_per_sample},
                             {"repBallCount", r.diagnostics.rep_ball_count},
                             {"W", r.diagnostics.key_ball_count},
                             {"rootCount", r.diagnostics.root_count}};
    if (truth) {
        const auto q = evaluate(r.labels, *truth);
        report["metrics"] = {{"acc", q.acc}, {"ari", q.ari}, {"ami", q.ami}};
    }
    return report;
}

} // namespace gbsk
