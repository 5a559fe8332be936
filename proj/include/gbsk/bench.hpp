#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gbsk/dataset.hpp"
#include "gbsk/error.hpp"
#include "gbsk/metrics.hpp"
#include "gbsk/pipeline.hpp"

namespace gbsk {

/// A benchmark input: either generated or read from disk.
struct BenchDataset {
    std::string name;
    std::optional<SyntheticSpec> synthetic;
    std::filesystem::path path;
    FileFormat format = FileFormat::csv;
    bool has_labels = false;
    std::size_t k = 0; // 0: take clusterCount from the synthetic spec

    std::size_t cluster_count() const { return k != 0 ? k : (synthetic ? synthetic->cluster_count : 0); }
    Dataset materialize() const { return synthetic ? generate_synthetic(*synthetic) : load_dataset(path, format, has_labels); }
};

/// Grid over s, alpha and M. An empty axis uses the AGBSK default for that parameter.
struct BenchPlan {
    std::vector<BenchDataset> datasets;
    std::vector<std::size_t> s_values;
    std::vector<double> alpha_values;
    std::vector<BallBudget> m_values;
    std::size_t repetitions = 1;
    std::vector<std::uint64_t> seeds; // seeds[r] for repetition r; missing entries use base_seed + r
    std::uint64_t base_seed = 0;
    Variant variant = Variant::standard;
    bool parallel_cells = false; // only for label sweeps: timings are not comparable

    void validate() const {
        if (datasets.empty()) throw InvalidArgument("bench plan has no datasets");
        if (repetitions < 1) throw InvalidArgument("repetitions must be >= 1");
        for (const auto& d : datasets)
            if (d.cluster_count() == 0) throw InvalidArgument("dataset '" + d.name + "' needs k");
    }

    std::uint64_t seed_for(std::size_t rep) const { return rep < seeds.size() ? seeds[rep] : base_seed + rep; }
};

/// One (dataset, parameter combination, repetition) measurement.
struct BenchRow {
    std::string dataset;
    std::size_t n = 0, d = 0, k = 0;
    GbskParams params;
    std::size_t repetition = 0;
    bool ok = false;
    std::string error;
    StepTimings timings;
    std::size_t key_balls = 0;
    std::optional<QualityScores> quality;
};

/// Mean and 95% confidence half-width over the successful repetitions of one cell.
struct Estimate {
    double mean = 0.0;
    std::optional<double> ci95; // empty for fewer than two samples
};

struct BenchSummaryRow {
    std::string dataset;
    std::size_t n = 0, d = 0, k = 0;
    GbskParams params;
    std::size_t runs = 0;
    std::size_t failures = 0;
    Estimate total_ms;
    std::array<Estimate, 5> step_ms;
    std::optional<Estimate> acc, ari, ami;
};

/// Two-sided 95% Student-t critical value.
inline double t_critical_95(std::size_t dof) {
    static constexpr double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
                                       2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
                                       2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
    if (dof == 0) return 0.0;
    if (dof <= 30) return table[dof - 1];
    if (dof <= 60) return 2.000;
    if (dof <= 120) return 1.980;
    return 1.960;
}

inline Estimate estimate(const std::vector<double>& xs) {
    Estimate e;
    if (xs.empty()) return e;
    double sum = 0.0;
    for (const double x : xs) sum += x;
    e.mean = sum / static_cast<double>(xs.size());
    if (xs.size() >= 2) {
        double ss = 0.0;
        for (const double x : xs) ss += (x - e.mean) * (x - e.mean);
        const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
        e.ci95 = t_critical_95(xs.size() - 1) * sd / std::sqrt(static_cast<double>(xs.size()));
    }
    return e;
}

namespace detail {

inline std::vector<GbskParams> expand_grid(const BenchPlan& plan, std::size_t n, std::size_t k) {
    const GbskParams defaults = agbsk_params(n, k);
    const std::vector<std::size_t> s_axis = plan.s_values.empty() ? std::vector<std::size_t>{defaults.s} : plan.s_values;
    const std::vector<double> a_axis = plan.alpha_values.empty() ? std::vector<double>{defaults.alpha} : plan.alpha_values;
    const std::vector<BallBudget> m_axis =
        plan.m_values.empty() ? std::vector<BallBudget>{defaults.max_balls} : plan.m_values;
    std::vector<GbskParams> grid;
    for (const auto s : s_axis)
        for (const auto a : a_axis)
            for (const auto m : m_axis) {
                GbskParams p = defaults;
                p.s = s;
                p.alpha = a;
                p.max_balls = m;
                p.variant = plan.variant;
                grid.push_back(p);
            }
    return grid;
}

} // namespace detail

/// Runs every (dataset, grid cell, repetition). Dataset generation and loading are
/// outside the timed region. A failing cell is recorded and the sweep continues.
inline std::vector<BenchRow> run_bench(const BenchPlan& plan) {
    plan.validate();
    std::vector<BenchRow> rows;
    for (const auto& source : plan.datasets) {
        const Dataset ds = source.materialize();
        const std::size_t k = source.cluster_count();
        const auto grid = detail::expand_grid(plan, ds.n(), k);

        std::vector<BenchRow> cells(grid.size() * plan.repetitions);
        for (std::size_t g = 0; g < grid.size(); ++g)
            for (std::size_t r = 0; r < plan.repetitions; ++r) {
                auto& row = cells[g * plan.repetitions + r];
                row.dataset = source.name;
                row.n = ds.n();
                row.d = ds.d();
                row.k = k;
                row.params = grid[g];
                row.params.seed = plan.seed_for(r);
                row.repetition = r;
            }

        auto run_cell = [&](BenchRow& row) {
            try {
                const auto result = run_gbsk(ds, row.params);
                row.timings = result.timings;
                row.key_balls = result.diagnostics.key_ball_count;
                if (ds.labels) row.quality = evaluate(result.labels, *ds.labels);
                row.ok = true;
            } catch (const std::exception& e) {
                row.error = e.what();
            }
        };
        if (plan.parallel_cells) {
            const auto count = static_cast<std::ptrdiff_t>(cells.size());
#pragma omp parallel for schedule(dynamic, 1)
            for (std::ptrdiff_t i = 0; i < count; ++i) run_cell(cells[static_cast<std::size_t>(i)]);
        } else {
            for (auto& row : cells) run_cell(row);
        }
        rows.insert(rows.end(), std::make_move_iterator(cells.begin()), std::make_move_iterator(cells.end()));
    }
    return rows;
}

/// Collapses repetitions of the same (dataset, s, alpha, M) cell.
inline std::vector<BenchSummaryRow> summarize(const std::vector<BenchRow>& rows) {
    std::vector<BenchSummaryRow> out;
    std::vector<std::vector<const BenchRow*>> groups;
    auto same_cell = [](const BenchRow& a, const BenchRow& b) {
        return a.dataset == b.dataset && a.n == b.n && a.params.s == b.params.s && a.params.alpha == b.params.alpha &&
               a.params.max_balls == b.params.max_balls && a.params.k == b.params.k;
    };
    for (const auto& row : rows) {
        auto it = std::find_if(groups.begin(), groups.end(),
                               [&](const auto& g) { return same_cell(*g.front(), row); });
        if (it == groups.end())
            groups.push_back({&row});
        else
            it->push_back(&row);
    }
    for (const auto& g : groups) {
        BenchSummaryRow s;
        const auto& first = *g.front();
        s.dataset = first.dataset;
        s.n = first.n;
        s.d = first.d;
        s.k = first.k;
        s.params = first.params;
        std::vector<double> total;
        std::array<std::vector<double>, 5> steps;
        std::vector<double> acc, ari_v, ami_v;
        for (const auto* r : g) {
            if (!r->ok) {
                ++s.failures;
                continue;
            }
            ++s.runs;
            total.push_back(r->timings.total());
            for (std::size_t i = 0; i < 5; ++i) steps[i].push_back(r->timings.ms[i]);
            if (r->quality) {
                acc.push_back(r->quality->acc);
                ari_v.push_back(r->quality->ari);
                ami_v.push_back(r->quality->ami);
            }
        }
        s.total_ms = estimate(total);
        for (std::size_t i = 0; i < 5; ++i) s.step_ms[i] = estimate(steps[i]);
        if (!acc.empty()) {
            s.acc = estimate(acc);
            s.ari = estimate(ari_v);
            s.ami = estimate(ami_v);
        }
        out.push_back(std::move(s));
    }
    return out;
}

// CSV schemas. Column sets are fixed; empty cells mean "not available".
inline constexpr const char* bench_rows_header =
    "dataset,n,d,k,s,alpha,M,variant,repetition,seed,ok,total_ms,step1_ms,step2_ms,step3_ms,step4_ms,step5_ms,W,"
    "acc,ari,ami,error";
inline constexpr const char* bench_summary_header =
    "dataset,n,d,k,s,alpha,M,runs,failures,total_ms_mean,total_ms_ci95,step1_ms_mean,step1_ms_ci95,step2_ms_mean,"
    "step2_ms_ci95,step3_ms_mean,step3_ms_ci95,step4_ms_mean,step4_ms_ci95,step5_ms_mean,step5_ms_ci95,acc_mean,"
    "acc_ci95,ari_mean,ari_ci95,ami_mean,ami_ci95";

namespace detail {

inline std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline long long budget_value(const BallBudget& m) { return m ? static_cast<long long>(*m) : -1LL; }

inline void put_estimate(std::ostream& out, const Estimate& e) {
    out << ',' << e.mean << ',';
    if (e.ci95) out << *e.ci95;
}

} // namespace detail

inline void write_bench_rows_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
    out << bench_rows_header << '\n';
    out.precision(10);
    for (const auto& r : rows) {
        out << detail::csv_quote(r.dataset) << ',' << r.n << ',' << r.d << ',' << r.k << ',' << r.params.s << ','
            << r.params.alpha << ',' << detail::budget_value(r.params.max_balls) << ',' << to_string(r.params.variant)
            << ',' << r.repetition << ',' << r.params.seed << ',' << (r.ok ? 1 : 0) << ',';
        if (r.ok) {
            out << r.timings.total();
            for (const double t : r.timings.ms) out << ',' << t;
            out << ',' << r.key_balls << ',';
        } else {
            out << ",,,,,,,";
        }
        if (r.quality)
            out << r.quality->acc << ',' << r.quality->ari << ',' << r.quality->ami;
        else
            out << ",,";
        out << ',' << detail::csv_quote(r.error) << '\n';
    }
}

inline void write_bench_summary_csv(std::ostream& out, const std::vector<BenchSummaryRow>& rows) {
    out << bench_summary_header << '\n';
    out.precision(10);
    for (const auto& r : rows) {
        out << detail::csv_quote(r.dataset) << ',' << r.n << ',' << r.d << ',' << r.k << ',' << r.params.s << ','
            << r.params.alpha << ',' << detail::budget_value(r.params.max_balls) << ',' << r.runs << ',' << r.failures;
        detail::put_estimate(out, r.total_ms);
        for (const auto& e : r.step_ms) detail::put_estimate(out, e);
        for (const auto* q : {&r.acc, &r.ari, &r.ami}) {
            if (*q)
                detail::put_estimate(out, **q);
            else
                out << ",,";
        }
        out << '\n';
    }
}

/// Log-log fit of runtime against n.
struct ScalingSummary {
    std::vector<std::size_t> sizes;
    std::vector<double> mean_ms;
    std::vector<double> per_doubling_ratio; // between consecutive sizes, normalized to a 2x step
    double slope = 0.0;
    bool regression = false; // slope above the threshold
    double threshold = 1.3;
};

inline ScalingSummary scaling_report(const std::vector<BenchSummaryRow>& rows, double threshold = 1.3) {
    std::map<std::size_t, std::vector<double>> by_n;
    for (const auto& r : rows)
        if (r.runs > 0) by_n[r.n].push_back(r.total_ms.mean);
    if (by_n.size() < 2) throw InvalidArgument("scaling report needs at least two dataset sizes");

    ScalingSummary s;
    s.threshold = threshold;
    for (const auto& [n, ms] : by_n) {
        s.sizes.push_back(n);
        double sum = 0.0;
        for (const double m : ms) sum += m;
        s.mean_ms.push_back(sum / static_cast<double>(ms.size()));
    }
    double mx = 0.0, my = 0.0;
    const double count = static_cast<double>(s.sizes.size());
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < s.sizes.size(); ++i) {
        lx.push_back(std::log(static_cast<double>(s.sizes[i])));
        ly.push_back(std::log(std::max(s.mean_ms[i], 1e-12)));
        mx += lx.back();
        my += ly.back();
    }
    mx /= count;
    my /= count;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    s.slope = sxy / sxx;
    for (std::size_t i = 1; i < s.sizes.size(); ++i) {
        const double steps = std::log2(static_cast<double>(s.sizes[i]) / static_cast<double>(s.sizes[i - 1]));
        s.per_doubling_ratio.push_back(std::pow(s.mean_ms[i] / s.mean_ms[i - 1], 1.0 / steps));
    }
    s.regression = s.slope > threshold;
    return s;
}

inline ScalingSummary scaling_report(const std::vector<BenchRow>& rows, double threshold = 1.3) {
    return scaling_report(summarize(rows), threshold);
}

inline nlohmann::json scaling_json(const ScalingSummary& s) {
    return {{"sizes", s.sizes},   {"meanTotalMs", s.mean_ms}, {"perDoublingRatio", s.per_doubling_ratio},
            {"slope", s.slope},   {"threshold", s.threshold}, {"regression", s.regression}};
}

// ---------------------------------------------------------------------------
// Plan file (JSON)
//
// {
//   "datasets": [
//     {"name": "blobs", "synthetic": {"clusterCount": 10, "pointsPerCluster": 1000, "dimension": 16,
//                                     "centerSpread": 10, "clusterStd": 1, "seed": 1}},
//     {"name": "pendigits", "path": "pendigits.csv", "format": "csv", "labels": true, "k": 10}
//   ],
//   "grid": {"s": [10, 20], "alpha": [0.01], "M": [100, -1]},
//   "repetitions": 3, "seeds": [1, 2, 3], "variant": "standard", "parallelCells": false
// }

inline SyntheticSpec synthetic_from_json(const nlohmann::json& j) {
    SyntheticSpec s;
    s.cluster_count = j.value("clusterCount", s.cluster_count);
    s.points_per_cluster = j.value("pointsPerCluster", s.points_per_cluster);
    s.dimension = j.value("dimension", s.dimension);
    s.center_spread = j.value("centerSpread", s.center_spread);
    s.cluster_std = j.value("clusterStd", s.cluster_std);
    s.seed = j.value("seed", s.seed);
    s.jitter = j.value("jitter", s.jitter);
    s.validate();
    return s;
}

inline BenchPlan plan_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
    BenchPlan plan;
    for (const auto& dj : j.at("datasets")) {
        BenchDataset d;
        d.name = dj.value("name", std::string("dataset") + std::to_string(plan.datasets.size()));
        if (dj.contains("synthetic")) {
            d.synthetic = synthetic_from_json(dj.at("synthetic"));
        } else {
            d.path = dj.at("path").get<std::string>();
            if (d.path.is_relative() && !base_dir.empty()) d.path = base_dir / d.path;
            d.format = dj.value("format", std::string("csv")) == "binary" ? FileFormat::binary : FileFormat::csv;
            d.has_labels = dj.value("labels", false);
        }
        d.k = dj.value("k", std::size_t{0});
        plan.datasets.push_back(std::move(d));
    }
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        if (g.contains("s")) plan.s_values = g.at("s").get<std::vector<std::size_t>>();
        if (g.contains("alpha")) plan.alpha_values = g.at("alpha").get<std::vector<double>>();
        if (g.contains("M"))
            for (const auto m : g.at("M").get<std::vector<long long>>())
                plan.m_values.push_back(m < 0 ? unlimited_balls : BallBudget(static_cast<std::size_t>(m)));
    }
    plan.repetitions = j.value("repetitions", std::size_t{1});
    if (j.contains("seeds")) plan.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    plan.base_seed = j.value("baseSeed", std::uint64_t{0});
    plan.variant = parse_variant(j.value("variant", std::string("standard")));
    plan.parallel_cells = j.value("parallelCells", false);
    plan.validate();
    return plan;
}

inline BenchPlan load_plan(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
        return plan_from_json(j, path.parent_path());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bench plan: ") + e.what(), 0);
    }
}

} // namespace gbsk
