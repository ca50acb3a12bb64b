// SPDX-License-Identifier: MIT
// SPDX-FileCopyrightText: Copyright 2026 siamese-nas contributors

#ifndef SNAS_MOEA_HPP
#define SNAS_MOEA_HPP

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "benchmark.hpp"
#include "common.hpp"
#include "pairs.hpp"
#include "search_space.hpp"
#include "surrogate.hpp"
#include "train_ensemble.hpp"

namespace snas {

struct Individual {
    Genotype genotype;
    BitVector30 bits;
    double params_hint{}; // MB, training-free lookup

    friend auto operator==(Individual const& a, Individual const& b) -> bool { return a.genotype == b.genotype; }
};

inline auto make_individual(BenchmarkTable const& table, Genotype const& g) -> Individual
{
    return {g, encode(g), param_count(table, g)};
}

// Fronts as positions into the sorted population, best front first.
using FrontPartition = std::vector<std::vector<std::size_t>>;

// Efficient non-dominated sort, sequential search. Solutions are inserted in
// index order into the first front that holds no solution dominating them.
// `dominates(i, j)` answers whether solution i dominates solution j.
//
// With an exact dominance relation the result equals the full
// non-dominated sorting only when no solution precedes one of its
// dominators, e.g. after a lexicographic presort (see ens_sort_objectives).
template <typename Dominates>
auto ens_sort_by(std::size_t n, Dominates&& dominates) -> FrontPartition
{
    FrontPartition fronts;
    for (std::size_t i = 0; i < n; ++i) {
        auto it = std::find_if(fronts.begin(), fronts.end(), [&](auto const& front) {
            return std::none_of(front.rbegin(), front.rend(), [&](std::size_t j) { return dominates(j, i); });
        });
        if (it == fronts.end()) {
            fronts.push_back({i});
        } else {
            it->push_back(i);
        }
    }
    return fronts;
}

// Same, with a three-way comparator: j blocks i iff cmp(j, i) says the
// first argument dominates.
template <typename Compare>
auto ens_sort(std::size_t n, Compare&& cmp) -> FrontPartition
{
    return ens_sort_by(n, [&](std::size_t j, std::size_t i) { return cmp(j, i) == DominanceRelation::FirstDominates; });
}

inline auto true_relation(ObjectiveVector const& a, ObjectiveVector const& b) -> DominanceRelation
{
    if (dominates(a, b)) { return DominanceRelation::FirstDominates; }
    if (dominates(b, a)) { return DominanceRelation::SecondDominates; }
    return DominanceRelation::Incomparable;
}

// ENS over exact objective vectors: lexicographic presort, then insertion.
// Returned indices refer to the input order; each front is ascending.
inline auto ens_sort_objectives(std::span<ObjectiveVector const> objs) -> FrontPartition
{
    std::vector<std::size_t> order(objs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        auto const& x = objs[a];
        auto const& y = objs[b];
        return std::tie(x.error, x.params, x.flops) < std::tie(y.error, y.params, y.flops);
    });
    auto fronts = ens_sort(order.size(), [&](std::size_t j, std::size_t i) { return true_relation(objs[order[j]], objs[order[i]]); });
    for (auto& f : fronts) {
        for (auto& k : f) { k = order[k]; }
        std::sort(f.begin(), f.end());
    }
    return fronts;
}

// Ensemble comparator over genotypes with memoized first-stage votes. The
// answers are identical to Ensemble::predict.
class SurrogateComparator {
public:
    explicit SurrogateComparator(Ensemble const& m, std::size_t cache_limit = std::size_t{1} << 21)
        : ensemble_(&m), cache_limit_(cache_limit), embeddings_(kSpaceSize * m.size()), embedded_(kSpaceSize, false)
    {
    }

    // Majority of blocks voting "a dominates b".
    auto stage_one(Genotype const& a, Genotype const& b) -> bool
    {
        auto key = static_cast<std::uint32_t>(a.index() * kSpaceSize + b.index());
        if (auto it = cache_.find(key); it != cache_.end()) { return it->second; }

        auto const* ea = embedding(a);
        auto const* eb = embedding(b);
        std::size_t n = ensemble_->size();
        std::size_t ones = 0;
        std::size_t zeros = 0;
        bool result = false;
        for (std::size_t r = 0; r < n; ++r) {
            double s = ensemble_->block(r).logit_from_difference(ea[r] - eb[r]);
            if (sigmoid(s) >= 0.5) { ++ones; } else { ++zeros; }
            if (2 * ones > n) { result = true; break; }
            if (2 * zeros >= n) { break; }
        }
        if (cache_.size() >= cache_limit_) { cache_.clear(); }
        cache_.emplace(key, result);
        return result;
    }

    auto operator()(Genotype const& a, Genotype const& b) -> DominanceRelation
    {
        if (a == b) { return DominanceRelation::Incomparable; }
        if (stage_one(a, b)) { return DominanceRelation::FirstDominates; }
        if (stage_one(b, a)) { return DominanceRelation::SecondDominates; }
        return DominanceRelation::Incomparable;
    }

    auto dominates(Genotype const& a, Genotype const& b) -> bool { return a != b && stage_one(a, b); }

private:
    // Per-block embeddings of g, computed once.
    auto embedding(Genotype const& g) -> SiameseBlock::Vec const*
    {
        auto idx = g.index();
        auto* row = embeddings_.data() + static_cast<std::size_t>(idx) * ensemble_->size();
        if (!embedded_[idx]) {
            auto bits = encode(g);
            for (std::size_t r = 0; r < ensemble_->size(); ++r) { row[r] = ensemble_->block(r).embed(bits); }
            embedded_[idx] = true;
        }
        return row;
    }

    Ensemble const* ensemble_;
    std::size_t cache_limit_;
    std::vector<SiameseBlock::Vec> embeddings_; // [genotype][block]
    std::vector<bool> embedded_;
    std::unordered_map<std::uint32_t, bool> cache_;
};

// Binary tournaments: two distinct contestants per tournament, contestants
// redrawn for every tournament. `cmp(i, j)` compares pop[i] with pop[j].
template <typename Compare>
auto tournament_select(std::size_t n, std::size_t pool_size, Compare&& cmp, Rng& rng) -> std::vector<std::size_t>
{
    if (n < 2) { throw config_error("tournament needs at least two individuals"); }
    std::vector<std::size_t> pool;
    pool.reserve(pool_size);
    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    std::uniform_int_distribution<std::size_t> second(0, n - 2);
    std::bernoulli_distribution coin(0.5);
    for (std::size_t t = 0; t < pool_size; ++t) {
        std::size_t i = first(rng);
        std::size_t j = second(rng);
        if (j >= i) { ++j; }
        switch (cmp(i, j)) {
        case DominanceRelation::FirstDominates: pool.push_back(i); break;
        case DominanceRelation::SecondDominates: pool.push_back(j); break;
        case DominanceRelation::Incomparable: pool.push_back(coin(rng) ? i : j); break;
        }
    }
    return pool;
}

inline auto tournament_select(std::span<Individual const> pop, SurrogateComparator& cmp, Rng& rng) -> std::vector<std::size_t>
{
    return tournament_select(pop.size(), pop.size(),
                             [&](std::size_t i, std::size_t j) { return cmp(pop[i].genotype, pop[j].genotype); }, rng);
}

// With probability rc every position is swapped with probability 1/2.
inline auto uniform_crossover(RawBits a, RawBits b, double rc, Rng& rng) -> std::pair<RawBits, RawBits>
{
    if (std::bernoulli_distribution(rc)(rng)) {
        std::bernoulli_distribution swap(0.5);
        for (std::size_t i = 0; i < kNumBits; ++i) {
            if (swap(rng)) {
                bool t = a[i];
                a[i] = b[i];
                b[i] = t;
            }
        }
    }
    return {a, b};
}

inline auto flip_mutation(RawBits v, double rm, Rng& rng) -> RawBits
{
    std::bernoulli_distribution flip(rm);
    for (std::size_t i = 0; i < kNumBits; ++i) {
        if (flip(rng)) { v.flip(i); }
    }
    return v;
}

struct SelectionOutcome {
    std::vector<Individual> population;
    std::vector<std::size_t> front_sizes;
};

// Survivor selection on P ∪ P': whole fronts while they fit, then the
// splitting front by descending parameter count. `dominates(a, b)` is the
// dominance predicate on individuals.
template <typename Dominates>
auto biased_selection(std::size_t n, std::span<Individual const> parents, std::span<Individual const> offspring,
                      Dominates&& dominates, bool unique = false) -> SelectionOutcome
{
    std::vector<Individual> merged;
    merged.reserve(parents.size() + offspring.size());
    merged.insert(merged.end(), parents.begin(), parents.end());
    merged.insert(merged.end(), offspring.begin(), offspring.end());
    if (merged.size() < n) { throw config_error("merged population smaller than N"); }
    if (unique) {
        std::vector<Individual> distinct, repeats;
        std::vector<bool> seen(kSpaceSize, false);
        for (auto const& ind : merged) {
            auto idx = ind.genotype.index();
            (seen[idx] ? repeats : distinct).push_back(ind);
            seen[idx] = true;
        }
        for (std::size_t i = 0; distinct.size() < n; ++i) { distinct.push_back(repeats[i]); }
        merged = std::move(distinct);
    }

    auto fronts = ens_sort_by(merged.size(), [&](std::size_t j, std::size_t i) { return dominates(merged[j], merged[i]); });

    SelectionOutcome out;
    out.population.reserve(n);
    for (auto const& f : fronts) { out.front_sizes.push_back(f.size()); }

    std::size_t k = 0;
    while (k < fronts.size() && out.population.size() + fronts[k].size() <= n) {
        for (auto i : fronts[k]) { out.population.push_back(merged[i]); }
        ++k;
    }
    if (out.population.size() < n) {
        auto split = fronts[k];
        std::stable_sort(split.begin(), split.end(),
                         [&](std::size_t a, std::size_t b) { return merged[a].params_hint > merged[b].params_hint; });
        std::size_t remaining = n - out.population.size();
        for (std::size_t r = 0; r < remaining; ++r) { out.population.push_back(merged[split[r]]); }
    }
    return out;
}

inline auto biased_selection(std::size_t n, SurrogateComparator& cmp, std::span<Individual const> parents,
                             std::span<Individual const> offspring, bool unique = false) -> SelectionOutcome
{
    return biased_selection(
        n, parents, offspring, [&](Individual const& a, Individual const& b) { return cmp.dominates(a.genotype, b.genotype); },
        unique);
}

struct FrontEntry {
    Genotype genotype;
    ObjectiveVector objectives;

    friend auto operator==(FrontEntry const&, FrontEntry const&) -> bool = default;
};

// Distinct genotypes of the population (first occurrence order) that no other
// member truly dominates. One counted query per distinct genotype.
inline auto extract_final_front(std::span<Individual const> pop, ObjectiveOracle& oracle) -> std::vector<FrontEntry>
{
    std::vector<FrontEntry> distinct;
    for (auto const& ind : pop) {
        bool seen = std::any_of(distinct.begin(), distinct.end(), [&](auto const& e) { return e.genotype == ind.genotype; });
        if (!seen) { distinct.push_back({ind.genotype, oracle.evaluate(ind.genotype)}); }
    }
    std::vector<FrontEntry> front;
    for (auto const& e : distinct) {
        bool dominated = std::any_of(distinct.begin(), distinct.end(),
                                     [&](auto const& o) { return dominates(o.objectives, e.objectives); });
        if (!dominated) { front.push_back(e); }
    }
    return front;
}

inline auto extract_final_front(std::span<Individual const> pop, BenchmarkTable const& table, AccuracyField field)
    -> std::vector<FrontEntry>
{
    ObjectiveOracle oracle(table, field);
    return extract_final_front(pop, oracle);
}

struct RunConfig {
    std::size_t pop{50};
    std::size_t gens{2000};
    double rc{0.7};
    double rm{0.1};
    std::size_t ns{600};
    std::size_t nm{7};
    std::size_t rounds{100};
    std::uint64_t seed{0};
    std::string dataset;
    AccuracyField train_field{AccuracyField::Train};
    AccuracyField report_field{AccuracyField::Test};
    TrainHyper hyper{};
    unsigned threads{0};
    bool unique_survivors{true};

    void validate() const
    {
        if (pop < 2 || pop % 2 != 0) { throw config_error("population size must be even and at least 2 (got " + std::to_string(pop) + ")"); }
        if (gens < 1) { throw config_error("number of generations must be at least 1"); }
        if (!(rc >= 0.0 && rc <= 1.0)) { throw config_error("crossover rate must lie in [0,1]"); }
        if (!(rm >= 0.0 && rm <= 1.0)) { throw config_error("mutation rate must lie in [0,1]"); }
        if (ns < 1) { throw config_error("sample count must be at least 1"); }
        if (rounds < 1) { throw config_error("rounds must be at least 1"); }
        Ensemble::validate_size(nm);
        hyper.validate();
    }
};

struct GenerationLog {
    std::size_t fronts{};
    std::size_t first_front{};
};

struct SearchResult {
    std::vector<Individual> population;
    std::vector<FrontEntry> front;
    std::size_t true_evaluations{};
    std::size_t surrogate_evaluations{}; // Phase 1 share of true_evaluations
    std::vector<GenerationLog> generations;
    bool transfer{false};

    [[nodiscard]] auto best_error() const -> double
    {
        double best = 100.0;
        for (auto const& e : front) { best = std::min(best, e.objectives.error); }
        return best;
    }
};

// One generation of Phase 2: tournament, crossover, mutation, repair, survivor selection.
inline auto evolve_generation(std::vector<Individual> const& pop, BenchmarkTable const& table, SurrogateComparator& cmp,
                              RunConfig const& cfg, Rng& rng) -> SelectionOutcome
{
    auto pool = tournament_select(pop, cmp, rng);
    std::vector<Individual> offspring;
    offspring.reserve(cfg.pop);
    for (std::size_t k = 0; k + 1 < pool.size(); k += 2) {
        auto [c1, c2] = uniform_crossover(pop[pool[k]].bits.raw(), pop[pool[k + 1]].bits.raw(), cfg.rc, rng);
        for (auto* child : {&c1, &c2}) {
            auto bits = repair(flip_mutation(*child, cfg.rm, rng), rng);
            offspring.push_back(make_individual(table, decode(bits)));
        }
    }
    return biased_selection(cfg.pop, cmp, pop, offspring, cfg.unique_survivors);
}

// Phase 1: sample Ns architectures through the counting oracle and train
// Nm blocks on them.
inline auto train_surrogate_phase(RunConfig const& cfg, ObjectiveOracle& oracle, EnsembleTrainingLog* log = nullptr) -> Ensemble
{
    Rng rng = make_rng(cfg.seed, 1);
    auto ds = sample_ds(oracle, cfg.ns, rng);
    EnsembleTrainingOptions opt;
    opt.blocks = cfg.nm;
    opt.rounds = cfg.rounds;
    opt.hyper = cfg.hyper;
    opt.seed = derive_seed(cfg.seed, 2);
    opt.threads = cfg.threads;
    return train_ensemble(ds, opt, log);
}

// Three phases: surrogate training on Ns true evaluations (skipped when a
// pretrained ensemble is given), T surrogate-driven generations, then true
// evaluation of the final population.
//
// `trained_out`, when given, receives the Phase 1 ensemble of a fresh run.
inline auto run_search(RunConfig const& cfg, BenchmarkTable const& table, Ensemble const* pretrained = nullptr,
                       std::function<void(std::size_t, GenerationLog const&)> const& on_generation = {},
                       Ensemble* trained_out = nullptr) -> SearchResult
{
    cfg.validate();
    if (pretrained != nullptr && pretrained->size() == 0) { throw config_error("pretrained ensemble is empty"); }
    SearchResult result;
    result.transfer = pretrained != nullptr;

    Ensemble trained;
    Ensemble const* model = pretrained;
    if (model == nullptr) {
        ObjectiveOracle oracle(table, cfg.train_field);
        trained = train_surrogate_phase(cfg, oracle);
        model = &trained;
        result.surrogate_evaluations = oracle.count();
    }

    SurrogateComparator cmp(*model);
    Rng rng = make_rng(cfg.seed, 3);
    std::vector<Individual> pop;
    pop.reserve(cfg.pop);
    for (std::size_t i = 0; i < cfg.pop; ++i) { pop.push_back(make_individual(table, random_genotype(rng))); }

    result.generations.reserve(cfg.gens);
    for (std::size_t t = 0; t < cfg.gens; ++t) {
        auto sel = evolve_generation(pop, table, cmp, cfg, rng);
        pop = std::move(sel.population);
        GenerationLog log{sel.front_sizes.size(), sel.front_sizes.empty() ? 0 : sel.front_sizes.front()};
        result.generations.push_back(log);
        if (on_generation) { on_generation(t, log); }
    }

    ObjectiveOracle final_oracle(table, cfg.report_field);
    result.front = extract_final_front(pop, final_oracle);
    result.population = std::move(pop);
    result.true_evaluations = result.surrogate_evaluations + final_oracle.count();
    if (trained_out != nullptr && pretrained == nullptr) { *trained_out = std::move(trained); }
    return result;
}

} // namespace snas

#endif
