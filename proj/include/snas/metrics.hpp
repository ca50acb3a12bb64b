// SPDX-License-Identifier: MIT
// SPDX-FileCopyrightText: Copyright 2026 siamese-nas contributors

#ifndef SNAS_METRICS_HPP
#define SNAS_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <span>
#include <vector>

#include "benchmark.hpp"
#include "moea.hpp"
#include "search_space.hpp"
#include "surrogate.hpp"

namespace snas {

// Positive class: "first dominates second".
struct Confusion {
    std::uint64_t tp{}, fp{}, tn{}, fn{};

    void add(bool predicted, bool actual)
    {
        if (predicted) {
            ++(actual ? tp : fp);
        } else {
            ++(actual ? fn : tn);
        }
    }

    [[nodiscard]] auto total() const noexcept -> std::uint64_t { return tp + fp + tn + fn; }

    // Percent.
    [[nodiscard]] auto accuracy() const noexcept -> double
    {
        return total() == 0 ? 0.0 : 100.0 * static_cast<double>(tp + tn) / static_cast<double>(total());
    }

    [[nodiscard]] auto f1() const noexcept -> double
    {
        if (tp == 0) { return 0.0; }
        return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
    }

    friend auto operator==(Confusion const&, Confusion const&) -> bool = default;
};

struct SurrogateQuality {
    double accuracy{}; // percent
    double f1{};
    Confusion confusion;
};

// Scores a pairwise predictor on n_pairs ordered pairs of distinct
// architectures drawn uniformly from the table minus `excluded`. The
// predictor answers "does the first dominate the second"; ground truth is
// Pareto dominance on `field`. Lookups here are diagnostics and not counted.
template <typename Predictor>
auto evaluate_pairs(Predictor&& predict, BenchmarkTable const& table, std::span<Genotype const> excluded,
                    std::size_t n_pairs, AccuracyField field, Rng& rng) -> SurrogateQuality
{
    if (n_pairs < 1) { throw config_error("number of evaluation pairs must be at least 1"); }
    std::set<Genotype> skip(excluded.begin(), excluded.end());
    std::vector<Genotype> pool;
    std::vector<ObjectiveVector> objs;
    for (auto const& [g, r] : table.records()) {
        if (!skip.contains(g)) {
            pool.push_back(g);
            objs.push_back(objectives(table, g, field));
        }
    }
    if (pool.size() < 2) { throw data_error("not enough architectures outside the excluded set to draw evaluation pairs"); }

    std::uniform_int_distribution<std::size_t> first(0, pool.size() - 1);
    std::uniform_int_distribution<std::size_t> second(0, pool.size() - 2);
    SurrogateQuality q;
    for (std::size_t k = 0; k < n_pairs; ++k) {
        std::size_t i = first(rng);
        std::size_t j = second(rng);
        if (j >= i) { ++j; }
        q.confusion.add(predict(pool[i], pool[j]), dominates(objs[i], objs[j]));
    }
    q.accuracy = q.confusion.accuracy();
    q.f1 = q.confusion.f1();
    return q;
}

// Stage-one majority vote of the ensemble on each ordered pair.
inline auto evaluate_surrogate(Ensemble const& m, BenchmarkTable const& table, std::span<Genotype const> excluded,
                               std::size_t n_pairs, AccuracyField field, Rng& rng) -> SurrogateQuality
{
    SurrogateComparator cmp(m);
    return evaluate_pairs([&](Genotype const& a, Genotype const& b) { return cmp.stage_one(a, b); }, table, excluded,
                          n_pairs, field, rng);
}

struct RunStats {
    std::vector<double> values; // per-repeat best test error
    double mean{};
    double std{}; // population standard deviation
    std::size_t repeats{};
};

inline auto run_stats(std::span<double const> values) -> RunStats
{
    if (values.empty()) { throw config_error("run_stats needs at least one value"); }
    RunStats s;
    s.values.assign(values.begin(), values.end());
    s.repeats = values.size();
    double sum = 0.0;
    for (double v : values) { sum += v; }
    s.mean = sum / static_cast<double>(values.size());
    // Keep the mean inside [min, max] despite rounding, so identical values
    // give an exact mean and a zero spread.
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    s.mean = std::clamp(s.mean, *lo, *hi);
    double ss = 0.0;
    for (double v : values) { ss += (v - s.mean) * (v - s.mean); }
    s.std = std::sqrt(ss / static_cast<double>(values.size()));
    return s;
}

// |found ∩ global| / |global|, by genotype.
inline auto front_recall(std::span<Genotype const> found, std::span<Genotype const> global) -> double
{
    if (global.empty()) { throw config_error("global Pareto set is empty"); }
    std::set<Genotype> f(found.begin(), found.end());
    std::set<Genotype> g(global.begin(), global.end());
    std::size_t hit = 0;
    for (auto const& x : g) { hit += f.contains(x) ? 1 : 0; }
    return static_cast<double>(hit) / static_cast<double>(g.size());
}

inline auto front_genotypes(std::span<FrontEntry const> front) -> std::vector<Genotype>
{
    std::vector<Genotype> out;
    out.reserve(front.size());
    for (auto const& e : front) { out.push_back(e.genotype); }
    return out;
}

} // namespace snas

#endif
