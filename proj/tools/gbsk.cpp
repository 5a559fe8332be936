#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "gbsk/gbsk.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int exit_runtime = 1;
constexpr int exit_usage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InputOptions {
    std::string in;
    std::string format = "auto";
    bool has_labels = false;
    std::string truth;
    std::string normalize = "none";
};

struct RunOptions {
    InputOptions input;
    std::size_t k = 0;
    std::optional<std::size_t> s;
    std::optional<double> alpha;
    std::optional<long long> m;
    std::uint64_t seed = 0;
    std::string variant = "standard";
    int threads = 0;
    std::string labels_out;
    std::string report;
};

void add_input(CLI::App* cmd, InputOptions& o) {
    cmd->add_option("--in", o.in, "input dataset (CSV or raw binary)")->required();
    cmd->add_option("--format", o.format, "csv, binary or auto (by extension)")
        ->check(CLI::IsMember({"auto", "csv", "binary"}));
    cmd->add_flag("--has-labels", o.has_labels, "last CSV column (or .labels sidecar) is ground truth");
    cmd->add_option("--truth", o.truth, "ground-truth labels file, one integer per line");
    cmd->add_option("--normalize", o.normalize, "none or minmax (off by default)")
        ->check(CLI::IsMember({"none", "minmax"}));
}

void add_run(CLI::App* cmd, RunOptions& o, bool tunable) {
    add_input(cmd, o.input);
    cmd->add_option("--k", o.k, "number of clusters")->required()->check(CLI::PositiveNumber);
    if (tunable) {
        cmd->add_option("--s", o.s, "number of sample sets (default 30)");
        cmd->add_option("--alpha", o.alpha, "sampling proportion (default 1/sqrt(n))");
        cmd->add_option("--M", o.m, "ball budget per sample, -1 for unlimited (default 10k)");
        cmd->add_option("--variant", o.variant, "standard, no-sampling or no-representative-balls");
    }
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--threads", o.threads, "worker threads (default GBSK_THREADS or all cores)");
    cmd->add_option("--labels-out", o.labels_out, "labels file (default stdout)");
    cmd->add_option("--report", o.report, "JSON report file");
}

gbsk::Dataset load_input(const InputOptions& o) {
    const auto format = o.format == "auto"     ? gbsk::format_from_path(o.in)
                        : o.format == "binary" ? gbsk::FileFormat::binary
                                               : gbsk::FileFormat::csv;
    auto ds = gbsk::load_dataset(o.in, format, o.has_labels);
    if (!o.truth.empty()) {
        ds.labels = gbsk::read_labels(o.truth);
        ds.validate();
    }
    if (o.normalize == "minmax") gbsk::normalize_minmax(ds);
    std::cerr << "loaded " << o.in << ": n=" << ds.n() << " d=" << ds.d() << '\n';
    return ds;
}

void apply_threads(int threads) {
    if (threads == 0) threads = gbsk::thread_count_from_env();
    gbsk::set_thread_count(threads);
}

gbsk::GbskParams resolve_params(const RunOptions& o, std::size_t n) {
    auto p = gbsk::agbsk_params(n, o.k, o.seed);
    if (o.s) p.s = *o.s;
    if (o.alpha) p.alpha = *o.alpha;
    if (o.m) p.max_balls = *o.m < 0 ? gbsk::unlimited_balls : gbsk::BallBudget(static_cast<std::size_t>(*o.m));
    p.variant = gbsk::parse_variant(o.variant);
    p.validate();
    return p;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw gbsk::Error("cannot write " + path);
    out << text;
}

int cmd_run(const RunOptions& o) {
    apply_threads(o.threads);
    const auto ds = load_input(o.input);
    gbsk::GbskParams p;
    try {
        p = resolve_params(o, ds.n());
    } catch (const gbsk::InvalidArgument& e) {
        throw UsageError(e.what());
    }
    std::cerr << "params: " << gbsk::params_json(p).dump() << '\n';
    const auto result = gbsk::run_gbsk(ds, p);
    const auto report = gbsk::make_report(ds, p, result, ds.labels ? &*ds.labels : nullptr).dump(2) + "\n";

    if (o.labels_out.empty()) {
        gbsk::write_labels(std::cout, result.labels);
    } else {
        gbsk::write_labels(fs::path(o.labels_out), result.labels);
    }
    if (!o.report.empty()) {
        write_text(o.report, report);
    } else if (!o.labels_out.empty()) {
        std::cout << report;
    } else {
        std::cerr << report;
    }
    if (ds.labels) {
        const auto q = gbsk::evaluate(result.labels, *ds.labels);
        std::cerr << "ACC=" << q.acc << " ARI=" << q.ari << " AMI=" << q.ami << '\n';
    }
    return 0;
}

struct GenOptions {
    gbsk::SyntheticSpec spec;
    std::string out;
    std::string format = "auto";
    int width = 8;
};

int cmd_gen(const GenOptions& o) {
    const auto ds = gbsk::generate_synthetic(o.spec);
    const auto format = o.format == "auto"     ? gbsk::format_from_path(o.out)
                        : o.format == "binary" ? gbsk::FileFormat::binary
                                               : gbsk::FileFormat::csv;
    if (format == gbsk::FileFormat::binary)
        gbsk::save_binary(o.out, ds, o.width);
    else
        gbsk::save_csv(o.out, ds, true);
    std::cerr << "wrote " << o.out << ": n=" << ds.n() << " d=" << ds.d() << '\n';
    return 0;
}

int cmd_eval(const std::string& pred, const std::string& truth) {
    const auto q = gbsk::evaluate(gbsk::read_labels(pred), gbsk::read_labels(truth));
    std::cout << json{{"acc", q.acc}, {"ari", q.ari}, {"ami", q.ami}}.dump() << '\n';
    return 0;
}

struct BenchOptions {
    std::string plan;
    std::string out_dir = ".";
    double threshold = 1.3;
    int threads = 0;
};

int cmd_bench(const BenchOptions& o) {
    apply_threads(o.threads);
    const auto plan = gbsk::load_plan(o.plan);
    const auto rows = gbsk::run_bench(plan);
    const auto summary = gbsk::summarize(rows);
    fs::create_directories(o.out_dir);
    {
        std::ofstream out(fs::path(o.out_dir) / "bench_rows.csv");
        gbsk::write_bench_rows_csv(out, rows);
    }
    {
        std::ofstream out(fs::path(o.out_dir) / "bench_summary.csv");
        gbsk::write_bench_summary_csv(out, summary);
    }
    json j;
    std::size_t failed = 0;
    for (const auto& r : rows) failed += r.ok ? 0 : 1;
    j["cells"] = rows.size();
    j["failedCells"] = failed;
    std::set<std::size_t> sizes;
    for (const auto& s : summary)
        if (s.runs > 0) sizes.insert(s.n);
    if (sizes.size() >= 2) j["scaling"] = gbsk::scaling_json(gbsk::scaling_report(summary, o.threshold));
    write_text((fs::path(o.out_dir) / "bench_summary.json").string(), j.dump(2) + "\n");
    std::cout << j.dump(2) << '\n';
    for (const auto& r : rows)
        if (!r.ok) std::cerr << "cell failed (" << r.dataset << ", s=" << r.params.s << "): " << r.error << '\n';
    return 0;
}

struct DumpOptions {
    RunOptions run;
    std::string csv;
    std::string svg;
};

int cmd_dump(const DumpOptions& o) {
    apply_threads(o.run.threads);
    const auto ds = load_input(o.run.input);
    if (!o.svg.empty() && (ds.d() < 2 || ds.d() > 3))
        throw gbsk::InvalidArgument("SVG output needs 2-D or 3-D data, got d=" + std::to_string(ds.d()));
    gbsk::GbskParams p;
    try {
        p = resolve_params(o.run, ds.n());
    } catch (const gbsk::InvalidArgument& e) {
        throw UsageError(e.what());
    }
    const auto result = gbsk::run_gbsk(ds, p);
    if (o.csv.empty()) {
        gbsk::write_skeleton_csv(std::cout, result.forest, result.skeleton_balls);
    } else {
        std::ofstream out(o.csv);
        if (!out) throw gbsk::Error("cannot write " + o.csv);
        gbsk::write_skeleton_csv(out, result.forest, result.skeleton_balls);
    }
    if (!o.svg.empty()) {
        std::ofstream out(o.svg);
        if (!out) throw gbsk::Error("cannot write " + o.svg);
        gbsk::write_skeleton_svg(out, ds.view(), &result.labels, result.forest, result.skeleton_balls);
    }
    std::cerr << "W=" << result.skeleton_balls.size() << " trees=" << result.forest.tree_count() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"granular-ball skeleton clustering"};
    app.require_subcommand(1);

    RunOptions cluster_opt;
    auto* cluster = app.add_subcommand("cluster", "cluster with explicit s, alpha, M (omitted ones use the defaults)");
    add_run(cluster, cluster_opt, true);

    RunOptions agbsk_opt;
    auto* agbsk = app.add_subcommand("agbsk", "cluster with s=30, alpha=1/sqrt(n), M=10k");
    add_run(agbsk, agbsk_opt, false);

    GenOptions gen_opt;
    auto* gen = app.add_subcommand("gen", "write a synthetic Gaussian blob dataset");
    gen->add_option("--clusters", gen_opt.spec.cluster_count)->required();
    gen->add_option("--per-cluster", gen_opt.spec.points_per_cluster)->required();
    gen->add_option("--dim", gen_opt.spec.dimension);
    gen->add_option("--spread", gen_opt.spec.center_spread, "grid pitch between centers");
    gen->add_option("--std", gen_opt.spec.cluster_std);
    gen->add_option("--jitter", gen_opt.spec.jitter, "center jitter as a fraction of the pitch");
    gen->add_option("--seed", gen_opt.spec.seed);
    gen->add_option("--out", gen_opt.out)->required();
    gen->add_option("--format", gen_opt.format)->check(CLI::IsMember({"auto", "csv", "binary"}));
    gen->add_option("--width", gen_opt.width, "binary float width in bytes")->check(CLI::IsMember({4, 8}));

    std::string pred_path, truth_path;
    auto* eval = app.add_subcommand("eval", "compare two label files");
    eval->add_option("--pred", pred_path)->required();
    eval->add_option("--truth", truth_path)->required();

    BenchOptions bench_opt;
    auto* bench = app.add_subcommand("bench", "run a benchmark plan");
    bench->add_option("--plan", bench_opt.plan, "JSON plan file")->required();
    bench->add_option("--out-dir", bench_opt.out_dir);
    bench->add_option("--threshold", bench_opt.threshold, "slope above which scaling is flagged");
    bench->add_option("--threads", bench_opt.threads);

    DumpOptions dump_opt;
    auto* dump = app.add_subcommand("dump-skeleton", "run and write the skeleton edge list (and SVG)");
    add_run(dump, dump_opt.run, true);
    dump->add_option("--csv", dump_opt.csv, "edge list file (default stdout)");
    dump->add_option("--svg", dump_opt.svg, "SVG file (2-D or 3-D data only)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_usage;
    }

    try {
        if (*cluster) return cmd_run(cluster_opt);
        if (*agbsk) return cmd_run(agbsk_opt);
        if (*gen) return cmd_gen(gen_opt);
        if (*eval) return cmd_eval(pred_path, truth_path);
        if (*bench) return cmd_bench(bench_opt);
        if (*dump) return cmd_dump(dump_opt);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_runtime;
    }
    return exit_usage;
}
