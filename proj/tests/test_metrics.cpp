#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>

#include "gbsk/metrics.hpp"
#include "oracles.hpp"

using namespace gbsk;

namespace {

void expect_all_match(const Labels& pred, const Labels& truth) {
    const auto q = evaluate(pred, truth);
    ASSERT_NEAR(q.acc, oracle::acc(pred, truth), 1e-9);
    ASSERT_NEAR(q.ari, oracle::ari(pred, truth), 1e-9);
    ASSERT_NEAR(q.ami, oracle::ami(pred, truth), 1e-9);
}

} // namespace

TEST(Accuracy, Examples) {
    const Labels truth{0, 0, 1, 1, 2};
    EXPECT_EQ(accuracy(truth, truth), 1.0);
    EXPECT_EQ(accuracy(Labels{7, 7, 3, 3, 9}, truth), 1.0);

    // contingency [[5,0],[2,3]]
    Labels pred, t;
    for (int i = 0; i < 5; ++i) pred.push_back(0), t.push_back(0);
    for (int i = 0; i < 2; ++i) pred.push_back(1), t.push_back(0);
    for (int i = 0; i < 3; ++i) pred.push_back(1), t.push_back(1);
    EXPECT_NEAR(accuracy(pred, t), 0.8, 1e-12);
}

TEST(Ari, Examples) {
    const Labels truth{1, 1, 2, 2};
    EXPECT_EQ(ari(truth, truth), 1.0);
    EXPECT_NEAR(ari(Labels{1, 1, 1, 1, 1, 1}, Labels{0, 0, 0, 1, 1, 1}), 0.0, 1e-12);
    const Labels pred{1, 2, 1, 2};
    EXPECT_NEAR(ari(pred, truth), oracle::ari(pred, truth), 1e-12);
    EXPECT_NEAR(ari(pred, truth), -0.5, 1e-12);
}

TEST(Ami, Examples) {
    const Labels truth{0, 0, 1, 1, 1, 2};
    EXPECT_NEAR(ami(truth, truth), 1.0, 1e-12);
    EXPECT_EQ(ami(Labels{3, 3, 3}, Labels{1, 1, 1}), 1.0);
    EXPECT_NEAR(ami(Labels{0, 1, 2, 3}, Labels{5, 6, 7, 8}), 1.0, 1e-12);

    const Labels a{0, 0, 1, 1}, b{0, 1, 1, 1};
    EXPECT_NEAR(ami(a, b), oracle::ami(a, b), 1e-12);
    EXPECT_NEAR(expected_mutual_information(contingency(a, b)),
                // hand summation: only n_ij = 1 or 2 terms are possible
                [] {
                    const double n = 4;
                    double e = 0;
                    // rows {2,2}, cols {1,3}
                    for (const double ai : {2.0, 2.0}) {
                        // bj = 1: x = 1, p = C(ai,1) C(4-ai,0) / C(4,1)
                        e += (ai / 4.0) * (1.0 / n) * std::log(n * 1.0 / (ai * 1.0));
                        // bj = 3: x = 1 or 2
                        const double p1 = ai * 1.0 / 4.0; // C(2,1) C(2,2) / C(4,3)
                        const double p2 = 1.0 * 2.0 / 4.0; // C(2,2) C(2,1) / C(4,3)
                        e += p1 * (1.0 / n) * std::log(n * 1.0 / (ai * 3.0));
                        e += p2 * (2.0 / n) * std::log(n * 2.0 / (ai * 3.0));
                    }
                    return e;
                }(),
                1e-12);
}

TEST(Ami, IndependentPartitionsNearZero) {
    std::mt19937_64 gen(12);
    std::uniform_int_distribution<int> pick(0, 4);
    for (int trial = 0; trial < 5; ++trial) {
        Labels a(5000), b(5000);
        for (auto& x : a) x = pick(gen);
        for (auto& x : b) x = pick(gen);
        EXPECT_NEAR(ami(a, b), 0.0, 0.05);
        EXPECT_NEAR(ari(a, b), 0.0, 0.05);
    }
}

TEST(Metrics, ExhaustiveSmallPartitions) {
    for (std::size_t n = 1; n <= 5; ++n) {
        const auto parts = oracle::all_partitions(n);
        for (const auto& p : parts)
            for (const auto& t : parts) expect_all_match(p, t);
    }
}

TEST(Metrics, ExhaustiveAgainstFixedTruths) {
    for (std::size_t n = 6; n <= 8; ++n)
        for (const auto& p : oracle::all_partitions(n))
            for (const auto& t : oracle::reference_truths(n)) expect_all_match(p, t);
}

TEST(Metrics, SymmetryRelabelingAndBounds) {
    std::mt19937_64 gen(99);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + gen() % 60;
        const int ka = 1 + static_cast<int>(gen() % 6), kb = 1 + static_cast<int>(gen() % 6);
        Labels a(n), b(n);
        for (auto& x : a) x = static_cast<Label>(gen() % ka);
        for (auto& x : b) x = static_cast<Label>(gen() % kb);
        const auto q = evaluate(a, b);
        EXPECT_NEAR(ari(a, b), ari(b, a), 1e-12);
        EXPECT_NEAR(ami(a, b), ami(b, a), 1e-12);

        Labels relabeled(n);
        for (std::size_t i = 0; i < n; ++i) relabeled[i] = 100 - 3 * a[i];
        const auto r = evaluate(relabeled, b);
        EXPECT_NEAR(q.acc, r.acc, 1e-12);
        EXPECT_NEAR(q.ari, r.ari, 1e-12);
        EXPECT_NEAR(q.ami, r.ami, 1e-12);

        EXPECT_GE(q.acc, 0.0);
        EXPECT_LE(q.acc, 1.0);
        EXPECT_LE(q.ari, 1.0 + 1e-9);
        EXPECT_LE(q.ami, 1.0 + 1e-9);
    }
}

TEST(Metrics, RejectsBadInput) {
    EXPECT_THROW(evaluate(Labels{1, 2}, Labels{1}), InvalidArgument);
    EXPECT_THROW(evaluate(Labels{}, Labels{}), InvalidArgument);
}

TEST(Assignment, RectangularCosts) {
    // 2 rows, 3 cols: best is row0->col2 (1) and row1->col0 (2)
    const std::vector<double> cost{5, 4, 1, 2, 7, 3};
    EXPECT_EQ(detail::min_cost_assignment(cost, 2, 3), (std::vector<std::size_t>{2, 0}));
}
