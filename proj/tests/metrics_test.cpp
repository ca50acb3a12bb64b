// SPDX-License-Identifier: MIT
// SPDX-FileCopyrightText: Copyright 2026 siamese-nas contributors

#include <gtest/gtest.h>

#include <set>

#include <snas/metrics.hpp>

namespace snas {
namespace {

TEST(Confusion, FormulaArithmetic)
{
    Confusion c{2, 1, 6, 1};
    EXPECT_DOUBLE_EQ(c.accuracy(), 80.0);
    EXPECT_NEAR(c.f1(), 0.667, 5e-4);
}

TEST(Confusion, AddRoutesCounts)
{
    Confusion c;
    c.add(true, true);
    c.add(true, false);
    c.add(false, false);
    c.add(false, true);
    EXPECT_EQ(c, (Confusion{1, 1, 1, 1}));
    EXPECT_EQ(Confusion{}.f1(), 0.0);
    EXPECT_EQ(Confusion{}.accuracy(), 0.0);
}

TEST(Confusion, ConstantZeroOnBalancedSet)
{
    Confusion c;
    for (int i = 0; i < 50; ++i) {
        c.add(false, true);
        c.add(false, false);
    }
    EXPECT_DOUBLE_EQ(c.accuracy(), 50.0);
    EXPECT_EQ(c.f1(), 0.0);
}

TEST(EvaluatePairs, TrueOracleIsPerfect)
{
    auto t = synthetic_table(1);
    Rng rng(1);
    auto truth = [&](Genotype const& a, Genotype const& b) {
        return dominates(objectives(t, a, AccuracyField::Test), objectives(t, b, AccuracyField::Test));
    };
    auto q = evaluate_pairs(truth, t, {}, 5000, AccuracyField::Test, rng);
    EXPECT_DOUBLE_EQ(q.accuracy, 100.0);
    EXPECT_DOUBLE_EQ(q.f1, 1.0);
    EXPECT_EQ(q.confusion.total(), 5000u);
}

TEST(EvaluatePairs, ConstantZeroHasNoPositives)
{
    auto t = synthetic_table(1);
    Rng rng(2);
    auto q = evaluate_pairs([](auto const&, auto const&) { return false; }, t, {}, 2000, AccuracyField::Test, rng);
    EXPECT_EQ(q.f1, 0.0);
    EXPECT_EQ(q.confusion.tp + q.confusion.fp, 0u);
}

TEST(EvaluatePairs, ExcludedArchitecturesNeverDrawn)
{
    auto t = synthetic_table(1, 2); // 25 architectures
    auto all = t.genotypes();
    std::vector<Genotype> excluded(all.begin(), all.begin() + 20);
    std::set<Genotype> ex(excluded.begin(), excluded.end());
    Rng rng(3);
    auto probe = [&](Genotype const& a, Genotype const& b) {
        EXPECT_FALSE(ex.contains(a));
        EXPECT_FALSE(ex.contains(b));
        EXPECT_NE(a, b);
        return false;
    };
    evaluate_pairs(probe, t, excluded, 500, AccuracyField::Test, rng);
}

TEST(EvaluatePairs, Errors)
{
    auto t = synthetic_table(1, 1);
    auto all = t.genotypes();
    Rng rng(4);
    auto never = [](auto const&, auto const&) { return false; };
    std::vector<Genotype> four(all.begin(), all.begin() + 4);
    EXPECT_THROW(evaluate_pairs(never, t, four, 10, AccuracyField::Test, rng), data_error);
    EXPECT_THROW(evaluate_pairs(never, t, {}, 0, AccuracyField::Test, rng), config_error);
}

TEST(EvaluateSurrogate, ZeroEnsembleVotesOne)
{
    // Zero weights give p = 0.5 which rounds to 1: the degenerate "always dominates" classifier.
    auto t = synthetic_table(1);
    Ensemble m(std::vector<SiameseBlock>(3));
    Rng rng(5);
    auto q = evaluate_surrogate(m, t, {}, 1000, AccuracyField::Test, rng);
    EXPECT_EQ(q.confusion.tn + q.confusion.fn, 0u);
}

TEST(RunStatsTest, Examples)
{
    std::vector<double> same(10, 5.63);
    auto s = run_stats(same);
    EXPECT_DOUBLE_EQ(s.mean, 5.63);
    EXPECT_DOUBLE_EQ(s.std, 0.0);
    EXPECT_EQ(s.repeats, 10u);

    std::vector<double> two{1, 3};
    s = run_stats(two);
    EXPECT_DOUBLE_EQ(s.mean, 2.0);
    EXPECT_DOUBLE_EQ(s.std, 1.0);

    std::vector<double> one{7.5};
    EXPECT_DOUBLE_EQ(run_stats(one).std, 0.0);
    EXPECT_THROW(run_stats({}), config_error);
}

TEST(FrontRecall, Examples)
{
    std::vector<Genotype> g{Genotype::from_index(1), Genotype::from_index(2), Genotype::from_index(3),
                            Genotype::from_index(4)};
    EXPECT_DOUBLE_EQ(front_recall(g, g), 1.0);
    std::vector<Genotype> other{Genotype::from_index(10), Genotype::from_index(11)};
    EXPECT_DOUBLE_EQ(front_recall(other, g), 0.0);
    std::vector<Genotype> half{Genotype::from_index(1), Genotype::from_index(3), Genotype::from_index(10)};
    EXPECT_DOUBLE_EQ(front_recall(half, g), 0.5);
    EXPECT_THROW(front_recall(g, {}), config_error);
}

TEST(FrontGenotypes, KeepsOrder)
{
    std::vector<FrontEntry> f{{Genotype::from_index(9), {1, 2, 3}}, {Genotype::from_index(4), {3, 2, 1}}};
    EXPECT_EQ(front_genotypes(f), (std::vector<Genotype>{Genotype::from_index(9), Genotype::from_index(4)}));
}

} // namespace
} // namespace snas
