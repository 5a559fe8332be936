#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "gbsk/dataset.hpp"
#include "gbsk/error.hpp"

namespace gbsk {

/// Predicted clusters (rows) against true classes (columns).
struct ContingencyTable {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> counts; // rows x cols, row-major
    std::vector<std::size_t> row_sums;
    std::vector<std::size_t> col_sums;
    std::size_t total = 0;

    std::size_t at(std::size_t r, std::size_t c) const noexcept { return counts[r * cols + c]; }
};

namespace detail {

inline std::vector<std::size_t> dense_ids(const Labels& labels, std::size_t& distinct) {
    std::map<Label, std::size_t> ids;
    for (const auto l : labels) ids.emplace(l, 0);
    std::size_t next = 0;
    for (auto& [label, id] : ids) id = next++;
    distinct = next;
    std::vector<std::size_t> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) out[i] = ids[labels[i]];
    return out;
}

inline void check_lengths(const Labels& predicted, const Labels& truth) {
    if (predicted.size() != truth.size())
        throw InvalidArgument("label lists differ in length (" + std::to_string(predicted.size()) + " vs " +
                              std::to_string(truth.size()) + ")");
    if (predicted.empty()) throw InvalidArgument("label lists are empty");
}

inline double comb2(double x) noexcept { return x * (x - 1.0) / 2.0; }

/// Minimum-cost assignment of every row to a distinct column (rows <= cols).
/// Potentials-based Hungarian method, O(rows^2 * cols).
inline std::vector<std::size_t> min_cost_assignment(const std::vector<double>& cost, std::size_t rows,
                                                    std::size_t cols) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0);
    std::vector<std::size_t> match(cols + 1, 0), way(cols + 1, 0);
    for (std::size_t i = 1; i <= rows; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(cols + 1, inf);
        std::vector<bool> used(cols + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = match[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= cols; ++j) {
                if (used[j]) continue;
                const double cur = cost[(i0 - 1) * cols + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= cols; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> row_to_col(rows, 0);
    for (std::size_t j = 1; j <= cols; ++j)
        if (match[j] != 0) row_to_col[match[j] - 1] = j - 1;
    return row_to_col;
}

} // namespace detail

inline ContingencyTable contingency(const Labels& predicted, const Labels& truth) {
    detail::check_lengths(predicted, truth);
    ContingencyTable t;
    const auto rows = detail::dense_ids(predicted, t.rows);
    const auto cols = detail::dense_ids(truth, t.cols);
    t.counts.assign(t.rows * t.cols, 0);
    t.row_sums.assign(t.rows, 0);
    t.col_sums.assign(t.cols, 0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        ++t.counts[rows[i] * t.cols + cols[i]];
        ++t.row_sums[rows[i]];
        ++t.col_sums[cols[i]];
    }
    t.total = predicted.size();
    return t;
}

/// Fraction of points on the diagonal under the best one-to-one matching of
/// predicted clusters to classes.
inline double accuracy(const ContingencyTable& t) {
    const std::size_t size = std::max(t.rows, t.cols);
    std::vector<double> cost(size * size, 0.0);
    for (std::size_t r = 0; r < t.rows; ++r)
        for (std::size_t c = 0; c < t.cols; ++c) cost[r * size + c] = -static_cast<double>(t.at(r, c));
    const auto match = detail::min_cost_assignment(cost, size, size);
    std::size_t agree = 0;
    for (std::size_t r = 0; r < t.rows; ++r)
        if (match[r] < t.cols) agree += t.at(r, match[r]);
    return static_cast<double>(agree) / static_cast<double>(t.total);
}

inline double accuracy(const Labels& predicted, const Labels& truth) {
    return accuracy(contingency(predicted, truth));
}

/// Adjusted Rand index under the permutation model.
inline double ari(const ContingencyTable& t) {
    double sum_cells = 0.0, sum_rows = 0.0, sum_cols = 0.0;
    for (const auto c : t.counts) sum_cells += detail::comb2(static_cast<double>(c));
    for (const auto r : t.row_sums) sum_rows += detail::comb2(static_cast<double>(r));
    for (const auto c : t.col_sums) sum_cols += detail::comb2(static_cast<double>(c));
    const double pairs = detail::comb2(static_cast<double>(t.total));
    const double expected = pairs > 0.0 ? sum_rows * sum_cols / pairs : 0.0;
    const double max_index = 0.5 * (sum_rows + sum_cols);
    const double denom = max_index - expected;
    if (denom == 0.0) return 1.0; // both partitions trivial in the same way
    return (sum_cells - expected) / denom;
}

inline double ari(const Labels& predicted, const Labels& truth) { return ari(contingency(predicted, truth)); }

inline double mutual_information(const ContingencyTable& t) {
    const double n = static_cast<double>(t.total);
    double mi = 0.0;
    for (std::size_t r = 0; r < t.rows; ++r)
        for (std::size_t c = 0; c < t.cols; ++c) {
            const double nij = static_cast<double>(t.at(r, c));
            if (nij == 0.0) continue;
            mi += nij / n *
                  (std::log(nij) + std::log(n) - std::log(static_cast<double>(t.row_sums[r])) -
                   std::log(static_cast<double>(t.col_sums[c])));
        }
    return std::max(mi, 0.0);
}

inline double entropy(const std::vector<std::size_t>& sums, std::size_t total) {
    const double n = static_cast<double>(total);
    double h = 0.0;
    for (const auto s : sums) {
        if (s == 0) continue;
        const double p = static_cast<double>(s) / n;
        h -= p * std::log(p);
    }
    return h;
}

/// E[MI] under the hypergeometric model with fixed marginals.
inline double expected_mutual_information(const ContingencyTable& t) {
    const std::size_t n = t.total;
    const double nd = static_cast<double>(n);
    // lfact[i] = log(i!)
    std::vector<double> lfact(n + 1, 0.0);
    for (std::size_t i = 2; i <= n; ++i) lfact[i] = lfact[i - 1] + std::log(static_cast<double>(i));

    double emi = 0.0;
    for (const auto a : t.row_sums) {
        for (const auto b : t.col_sums) {
            const std::size_t lo = std::max<std::size_t>(1, a + b > n ? a + b - n : 0);
            const std::size_t hi = std::min(a, b);
            const double fixed = lfact[a] + lfact[b] + lfact[n - a] + lfact[n - b] - lfact[n];
            const double log_ab = std::log(static_cast<double>(a)) + std::log(static_cast<double>(b));
            for (std::size_t nij = lo; nij <= hi; ++nij) {
                const double log_p =
                    fixed - lfact[nij] - lfact[a - nij] - lfact[b - nij] - lfact[n - a - b + nij];
                const double x = static_cast<double>(nij);
                emi += x / nd * (std::log(nd) + std::log(x) - log_ab) * std::exp(log_p);
            }
        }
    }
    return emi;
}

/// Adjusted mutual information, arithmetic-mean normalization, natural log.
inline double ami(const ContingencyTable& t) {
    if ((t.rows == 1 && t.cols == 1) || t.total <= 1) return 1.0;
    const double mi = mutual_information(t);
    const double emi = expected_mutual_information(t);
    const double h_pred = entropy(t.row_sums, t.total);
    const double h_true = entropy(t.col_sums, t.total);
    const double mean_h = 0.5 * (h_pred + h_true);
    // mean_h == E[MI] only when every relabeling agrees perfectly (e.g. both all-singleton)
    if (mean_h - emi <= 1e-12 * std::max(1.0, mean_h)) return 1.0;
    return (mi - emi) / (mean_h - emi);
}

inline double ami(const Labels& predicted, const Labels& truth) { return ami(contingency(predicted, truth)); }

struct QualityScores {
    double acc = 0.0;
    double ari = 0.0;
    double ami = 0.0;
};

inline QualityScores evaluate(const Labels& predicted, const Labels& truth) {
    const auto t = contingency(predicted, truth);
    return {accuracy(t), ari(t), ami(t)};
}

} // namespace gbsk
