#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "gbsk/error.hpp"
#include "gbsk/matrix.hpp"
#include "gbsk/random.hpp"

namespace gbsk {

using Label = std::int64_t;
using Labels = std::vector<Label>;

/// An n x d matrix of finite doubles with optional per-point ground truth.
struct Dataset {
    Matrix points;
    std::optional<Labels> labels;

    std::size_t n() const noexcept { return points.rows(); }
    std::size_t d() const noexcept { return points.cols(); }
    MatrixView view() const noexcept { return points.view(); }

    void validate() const {
        if (n() == 0 || d() == 0) throw InvalidArgument("dataset must have n >= 1 and d >= 1");
        for (std::size_t i = 0; i < n(); ++i)
            for (const double v : points.row(i))
                if (!std::isfinite(v)) throw ParseError("non-finite coordinate", i + 1);
        if (labels && labels->size() != n())
            throw InvalidArgument("label count " + std::to_string(labels->size()) +
                                  " does not match point count " + std::to_string(n()));
    }
};

enum class FileFormat { csv, binary };

inline FileFormat format_from_path(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    return (ext == ".bin" || ext == ".gbsk") ? FileFormat::binary : FileFormat::csv;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline bool parse_double(std::string_view field, double& out) {
    field = trim(field);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    if (field.empty()) return false;
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, out);
    return ec == std::errc() && ptr == end;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

inline Label to_label(double value, std::size_t row) {
    if (!std::isfinite(value) || value != std::floor(value)) throw ParseError("label is not an integer", row);
    return static_cast<Label>(value);
}

template <typename T>
void put_le(std::ostream& out, T value) {
    std::array<unsigned char, sizeof(T)> bytes{};
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get_le(const unsigned char* src) {
    std::array<unsigned char, sizeof(T)> bytes{};
    std::memcpy(bytes.data(), src, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

} // namespace detail

/// Parses comma-separated rows. A first line that is not fully numeric is taken as a
/// header. With `has_labels` the last column holds integer ground truth.
inline Dataset parse_csv(std::istream& in, bool has_labels) {
    Dataset ds;
    Labels labels;
    std::vector<double> values;
    std::vector<double> row;
    std::size_t cols = 0;
    std::size_t line_no = 0;
    std::size_t data_rows = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        const auto trimmed = detail::trim(line);
        if (trimmed.empty()) continue;
        const auto fields = detail::split_commas(trimmed);
        row.clear();
        bool numeric = true;
        for (const auto f : fields) {
            double v = 0.0;
            if (!detail::parse_double(f, v)) {
                numeric = false;
                break;
            }
            row.push_back(v);
        }
        if (!numeric) {
            if (data_rows == 0 && cols == 0 && line_no == 1) continue; // header
            throw ParseError("cannot parse numeric field", line_no);
        }
        if (cols == 0) {
            cols = row.size();
            if (has_labels && cols < 2) throw ParseError("labelled rows need at least 2 columns", line_no);
        } else if (row.size() != cols) {
            throw ParseError("expected " + std::to_string(cols) + " columns, found " + std::to_string(row.size()),
                             line_no);
        }
        const std::size_t feature_cols = has_labels ? cols - 1 : cols;
        for (std::size_t j = 0; j < feature_cols; ++j) {
            if (!std::isfinite(row[j])) throw ParseError("non-finite coordinate", line_no);
            values.push_back(row[j]);
        }
        if (has_labels) labels.push_back(detail::to_label(row.back(), line_no));
        ++data_rows;
    }
    if (data_rows == 0) throw ParseError("no data rows", 0);
    ds.points = Matrix(std::move(values), has_labels ? cols - 1 : cols);
    if (has_labels) ds.labels = std::move(labels);
    return ds;
}

inline Dataset load_csv(const std::filesystem::path& path, bool has_labels) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    return parse_csv(in, has_labels);
}

inline void write_csv(std::ostream& out, const Dataset& ds, bool with_labels) {
    out.precision(17);
    for (std::size_t i = 0; i < ds.n(); ++i) {
        const auto r = ds.points.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) {
            if (j) out << ',';
            out << r[j];
        }
        if (with_labels && ds.labels) out << ',' << (*ds.labels)[i];
        out << '\n';
    }
}

inline void save_csv(const std::filesystem::path& path, const Dataset& ds, bool with_labels) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    write_csv(out, ds, with_labels);
}

// Raw-binary matrix: "GBSKMATX", u64 n, u64 d, u8 width, then n*d little-endian
// IEEE values of `width` bytes, row-major.
inline constexpr std::string_view binary_magic = "GBSKMATX";
inline constexpr std::size_t binary_header_size = 8 + 8 + 8 + 1;

inline void write_binary(std::ostream& out, const Dataset& ds, int width = 8) {
    if (width != 4 && width != 8) throw InvalidArgument("element width must be 4 or 8");
    out.write(binary_magic.data(), static_cast<std::streamsize>(binary_magic.size()));
    detail::put_le<std::uint64_t>(out, ds.n());
    detail::put_le<std::uint64_t>(out, ds.d());
    detail::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(width));
    for (const double v : ds.points.values()) {
        if (width == 8)
            detail::put_le<double>(out, v);
        else
            detail::put_le<float>(out, static_cast<float>(v));
    }
}

inline Dataset read_binary(std::istream& in) {
    std::array<unsigned char, binary_header_size> header{};
    in.read(reinterpret_cast<char*>(header.data()), header.size());
    if (in.gcount() != static_cast<std::streamsize>(header.size())) throw ParseError("truncated header", 0);
    if (std::memcmp(header.data(), binary_magic.data(), binary_magic.size()) != 0)
        throw ParseError("bad magic, expected GBSKMATX", 0);
    const auto n = detail::get_le<std::uint64_t>(header.data() + 8);
    const auto d = detail::get_le<std::uint64_t>(header.data() + 16);
    const auto width = detail::get_le<std::uint8_t>(header.data() + 24);
    if (width != 4 && width != 8) throw ParseError("element width must be 4 or 8", 0);
    if (n == 0 || d == 0) throw ParseError("empty matrix", 0);

    std::vector<unsigned char> raw(n * d * width);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size()))
        throw ParseError("payload shorter than n*d*width", 0);

    std::vector<double> values(n * d);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto* src = raw.data() + i * width;
        values[i] = width == 8 ? detail::get_le<double>(src) : detail::get_le<float>(src);
        if (!std::isfinite(values[i])) throw ParseError("non-finite coordinate", i / d + 1);
    }
    Dataset ds;
    ds.points = Matrix(std::move(values), d);
    return ds;
}

inline Labels read_labels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    Labels labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = detail::trim(line);
        if (t.empty()) continue;
        double v = 0.0;
        if (!detail::parse_double(t, v)) throw ParseError("cannot parse label", line_no);
        labels.push_back(detail::to_label(v, line_no));
    }
    return labels;
}

inline void write_labels(std::ostream& out, const Labels& labels) {
    for (const auto l : labels) out << l << '\n';
}

inline void write_labels(const std::filesystem::path& path, const Labels& labels) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    write_labels(out, labels);
}

inline void save_binary(const std::filesystem::path& path, const Dataset& ds, int width = 8) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    write_binary(out, ds, width);
    if (ds.labels) write_labels(std::filesystem::path(path.string() + ".labels"), *ds.labels);
}

/// Loads a dataset. Raw-binary files keep ground truth in a `<path>.labels` sidecar.
inline Dataset load_dataset(const std::filesystem::path& path, FileFormat format, bool has_labels) {
    Dataset ds;
    if (format == FileFormat::csv) {
        ds = load_csv(path, has_labels);
    } else {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error("cannot open " + path.string());
        ds = read_binary(in);
        if (has_labels) ds.labels = read_labels(path.string() + ".labels");
    }
    ds.validate();
    return ds;
}

/// Rescales every column to [0, 1]; constant columns become 0.
inline void normalize_minmax(Dataset& ds) {
    const std::size_t d = ds.d();
    std::vector<double> lo(d, std::numeric_limits<double>::infinity());
    std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < ds.n(); ++i) {
        const auto r = ds.points.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            lo[j] = std::min(lo[j], r[j]);
            hi[j] = std::max(hi[j], r[j]);
        }
    }
    for (std::size_t i = 0; i < ds.n(); ++i) {
        auto r = ds.points.row(i);
        for (std::size_t j = 0; j < d; ++j) r[j] = hi[j] > lo[j] ? (r[j] - lo[j]) / (hi[j] - lo[j]) : 0.0;
    }
}

// ---------------------------------------------------------------------------
// Sampling

/// One of the s random subsets drawn from a dataset.
struct SampleSet {
    const Dataset* source = nullptr;
    std::vector<std::size_t> indices; // sorted, unique
    std::size_t sample_index = 1;     // 1..s

    /// Copies the sampled rows into a contiguous matrix.
    Matrix gather() const {
        Matrix m(indices.size(), source->d());
        for (std::size_t i = 0; i < indices.size(); ++i) {
            const auto src = source->points.row(indices[i]);
            std::copy(src.begin(), src.end(), m.row(i).begin());
        }
        return m;
    }
};

/// round(n * alpha) clamped to [min(n, min_size), n] and to at least 1.
inline std::size_t sample_size(std::size_t n, double alpha, std::size_t min_size = 0) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in (0, 1]");
    auto size = static_cast<std::size_t>(std::llround(static_cast<double>(n) * alpha));
    size = std::max(size, std::min(n, min_size));
    return std::clamp<std::size_t>(size, std::min<std::size_t>(1, n), n);
}

/// Draws `m` distinct indices from [0, n), returned sorted.
inline std::vector<std::size_t> draw_without_replacement(std::size_t n, std::size_t m, Rng& rng) {
    std::vector<std::size_t> out;
    out.reserve(m);
    if (m * 4 < n) {
        // Floyd's algorithm
        std::unordered_set<std::size_t> chosen;
        chosen.reserve(m * 2);
        for (std::size_t j = n - m; j < n; ++j) {
            std::uniform_int_distribution<std::size_t> pick(0, j);
            const auto t = pick(rng);
            if (!chosen.insert(t).second) chosen.insert(j);
        }
        out.assign(chosen.begin(), chosen.end());
    } else {
        std::vector<std::size_t> all(n);
        for (std::size_t i = 0; i < n; ++i) all[i] = i;
        for (std::size_t i = 0; i < m; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, n - 1);
            std::swap(all[i], all[pick(rng)]);
        }
        all.resize(m);
        out = std::move(all);
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Draws s independent sample sets, each without replacement. `min_size` is the
/// lower clamp on the set size (the pipeline passes 2k). Set i uses the stream
/// derive_seed(master_seed, {sampling, i}), so results do not depend on order.
inline std::vector<SampleSet> sample(const Dataset& ds, std::size_t s, double alpha, std::uint64_t master_seed,
                                     std::size_t min_size = 0) {
    if (s < 1) throw InvalidArgument("s must be >= 1");
    const std::size_t size = sample_size(ds.n(), alpha, min_size);
    std::vector<SampleSet> sets(s);
    for (std::size_t i = 0; i < s; ++i) {
        Rng rng(derive_seed(master_seed, {stream::sampling, i + 1}));
        sets[i].source = &ds;
        sets[i].sample_index = i + 1;
        sets[i].indices = draw_without_replacement(ds.n(), size, rng);
    }
    return sets;
}

// ---------------------------------------------------------------------------
// Synthetic data

/// Isotropic Gaussian blobs on a jittered grid.
struct SyntheticSpec {
    std::size_t cluster_count = 2;
    std::size_t points_per_cluster = 100;
    std::size_t dimension = 2;
    double center_spread = 10.0; // grid pitch
    double cluster_std = 1.0;
    std::uint64_t seed = 0;
    double jitter = 0.25; // max center offset per axis, as a fraction of center_spread

    void validate() const {
        if (cluster_count < 1) throw InvalidArgument("clusterCount must be >= 1");
        if (points_per_cluster < 1) throw InvalidArgument("pointsPerCluster must be >= 1");
        if (dimension < 1) throw InvalidArgument("dimension must be >= 1");
        if (!(cluster_std > 0.0)) throw InvalidArgument("clusterStd must be > 0");
        if (!(jitter >= 0.0 && jitter < 0.5)) throw InvalidArgument("jitter must lie in [0, 0.5)");
    }
};

/// Centers occupy the first clusterCount cells (lexicographic) of the smallest
/// g^d grid that holds them; each is shifted by up to jitter*spread per axis.
inline Matrix synthetic_centers(const SyntheticSpec& spec, Rng& rng) {
    std::size_t side = 1;
    auto cells = [&](std::size_t g) {
        std::size_t total = 1;
        for (std::size_t j = 0; j < spec.dimension && total < spec.cluster_count; ++j) total *= g;
        return total;
    };
    while (cells(side) < spec.cluster_count) ++side;

    std::uniform_real_distribution<double> offset(-spec.jitter, spec.jitter);
    Matrix centers(spec.cluster_count, spec.dimension);
    for (std::size_t c = 0; c < spec.cluster_count; ++c) {
        auto row = centers.row(c);
        std::size_t code = c;
        for (std::size_t j = spec.dimension; j-- > 0;) {
            row[j] = static_cast<double>(code % side);
            code /= side;
        }
        for (std::size_t j = 0; j < spec.dimension; ++j) {
            const double shift = spec.jitter > 0.0 ? offset(rng) : 0.0;
            row[j] = (row[j] + shift) * spec.center_spread;
        }
    }
    return centers;
}

inline Dataset generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const Matrix centers = synthetic_centers(spec, rng);
    std::normal_distribution<double> noise(0.0, spec.cluster_std);

    const std::size_t n = spec.cluster_count * spec.points_per_cluster;
    Dataset ds;
    ds.points = Matrix(n, spec.dimension);
    Labels labels(n);
    std::size_t i = 0;
    for (std::size_t c = 0; c < spec.cluster_count; ++c) {
        const auto center = centers.row(c);
        for (std::size_t p = 0; p < spec.points_per_cluster; ++p, ++i) {
            auto row = ds.points.row(i);
            for (std::size_t j = 0; j < spec.dimension; ++j) row[j] = center[j] + noise(rng);
            labels[i] = static_cast<Label>(c);
        }
    }
    ds.labels = std::move(labels);
    return ds;
}

} // namespace gbsk
