// SPDX-License-Identifier: MIT
// SPDX-FileCopyrightText: Copyright 2026 siamese-nas contributors

#ifndef SNAS_PAIRS_HPP
#define SNAS_PAIRS_HPP

#include <algorithm>
#include <numeric>
#include <ostream>
#include <random>
#include <vector>

#include "benchmark.hpp"
#include "common.hpp"
#include "search_space.hpp"
#include "surrogate.hpp"

namespace snas {

struct Sample {
    Genotype genotype;
    BitVector30 bits;
    ObjectiveVector objectives;
};

// Ordered pair of positions in the sample set D_s.
struct SamplePair {
    std::size_t first{};
    std::size_t second{};

    friend auto operator==(SamplePair const&, SamplePair const&) -> bool = default;
};

struct TrainingPair {
    std::size_t first{};
    std::size_t second{};
    int label{}; // 1 iff samples[first] dominates samples[second]

    friend auto operator==(TrainingPair const&, TrainingPair const&) -> bool = default;
};

// Draws Ns distinct architectures without replacement; every draw is one
// counted objective query.
inline auto sample_ds(ObjectiveOracle& oracle, std::size_t ns, Rng& rng) -> std::vector<Sample>
{
    auto const& table = oracle.table();
    if (ns > table.size()) {
        throw config_error("cannot sample " + std::to_string(ns) + " architectures from a table of " +
                           std::to_string(table.size()));
    }
    auto all = table.genotypes();
    // Partial Fisher-Yates: the first ns slots become a uniform sample.
    for (std::size_t i = 0; i < ns; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, all.size() - 1);
        std::swap(all[i], all[pick(rng)]);
    }
    std::vector<Sample> out;
    out.reserve(ns);
    for (std::size_t i = 0; i < ns; ++i) { out.push_back({all[i], encode(all[i]), oracle.evaluate(all[i])}); }
    return out;
}

inline auto sample_ds(BenchmarkTable const& table, std::size_t ns, AccuracyField field, Rng& rng) -> std::vector<Sample>
{
    ObjectiveOracle oracle(table, field);
    return sample_ds(oracle, ns, rng);
}

// Pair i is (ds[i], shuffled[i]).
inline auto build_round(std::span<Sample const> ds, Rng& rng) -> std::vector<SamplePair>
{
    if (ds.empty()) { throw config_error("sample set is empty"); }
    std::vector<std::size_t> perm(ds.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<SamplePair> pairs(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) { pairs[i] = {i, perm[i]}; }
    return pairs;
}

// dominated[i] lists every j with ds[i] dominating ds[j].
inline auto dominated_lists(std::span<Sample const> ds) -> std::vector<std::vector<std::size_t>>
{
    std::vector<std::vector<std::size_t>> out(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t j = 0; j < ds.size(); ++j) {
            if (dominates(ds[i].objectives, ds[j].objectives)) { out[i].push_back(j); }
        }
    }
    return out;
}

inline auto dominating_fraction(std::span<SamplePair const> pairs, std::span<Sample const> ds) -> double
{
    if (pairs.empty()) { return 0.0; }
    std::size_t n = 0;
    for (auto const& p : pairs) { n += dominates(ds[p.first].objectives, ds[p.second].objectives) ? 1 : 0; }
    return static_cast<double>(n) / static_cast<double>(pairs.size());
}

// θ = min(1, 0.5 / (1 - σ)); σ == 1 means nothing to rebalance.
inline auto resampling_rate(double sigma) -> double
{
    if (sigma >= 1.0) { return 0.0; }
    return std::min(1.0, 0.5 / (1.0 - sigma));
}

inline auto rebalance_round(std::vector<SamplePair> pairs, std::span<Sample const> ds,
                            std::vector<std::vector<std::size_t>> const& dominated, Rng& rng) -> std::vector<SamplePair>
{
    double sigma = dominating_fraction(pairs, ds);
    if (sigma >= 1.0) { return pairs; }
    double theta = resampling_rate(sigma);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (auto& p : pairs) {
        double r = coin(rng);
        if (dominates(ds[p.first].objectives, ds[p.second].objectives) || !(r < theta)) { continue; }
        auto const& targets = dominated[p.first];
        if (targets.empty()) { continue; }
        p.second = targets[std::uniform_int_distribution<std::size_t>(0, targets.size() - 1)(rng)];
    }
    return pairs;
}

inline auto rebalance_round(std::vector<SamplePair> pairs, std::span<Sample const> ds, Rng& rng) -> std::vector<SamplePair>
{
    return rebalance_round(std::move(pairs), ds, dominated_lists(ds), rng);
}

inline auto label_pairs(std::span<SamplePair const> pairs, std::span<Sample const> ds) -> std::vector<TrainingPair>
{
    std::vector<TrainingPair> out;
    out.reserve(pairs.size());
    for (auto const& p : pairs) {
        out.push_back({p.first, p.second, dominates(ds[p.first].objectives, ds[p.second].objectives) ? 1 : 0});
    }
    return out;
}

// Concatenation of `rounds` rebalanced rounds; duplicates are kept.
inline auto assemble_training_set(std::span<Sample const> ds, std::size_t rounds, Rng& rng) -> std::vector<TrainingPair>
{
    if (rounds < 1) { throw config_error("rounds must be at least 1"); }
    if (ds.empty()) { throw config_error("sample set is empty"); }
    auto dominated = dominated_lists(ds);
    std::vector<TrainingPair> out;
    out.reserve(rounds * ds.size());
    for (std::size_t round = 0; round < rounds; ++round) {
        auto pairs = rebalance_round(build_round(ds, rng), ds, dominated, rng);
        auto labeled = label_pairs(pairs, ds);
        out.insert(out.end(), labeled.begin(), labeled.end());
    }
    return out;
}

inline auto positive_fraction(std::span<TrainingPair const> pairs) -> double
{
    if (pairs.empty()) { return 0.0; }
    std::size_t n = 0;
    for (auto const& p : pairs) { n += static_cast<std::size_t>(p.label); }
    return static_cast<double>(n) / static_cast<double>(pairs.size());
}

inline auto to_examples(std::span<TrainingPair const> pairs, std::span<Sample const> ds) -> std::vector<PairExample>
{
    std::vector<PairExample> out;
    out.reserve(pairs.size());
    for (auto const& p : pairs) { out.push_back({ds[p.first].bits, ds[p.second].bits, static_cast<double>(p.label)}); }
    return out;
}

// Debug dump: first_arch,second_arch,label
inline void write_training_set(std::ostream& out, std::span<TrainingPair const> pairs, std::span<Sample const> ds)
{
    out << "first_arch,second_arch,label\n";
    for (auto const& p : pairs) {
        out << ds[p.first].genotype.str() << ',' << ds[p.second].genotype.str() << ',' << p.label << '\n';
    }
}

} // namespace snas

#endif
