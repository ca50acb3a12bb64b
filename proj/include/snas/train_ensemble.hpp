// SPDX-License-Identifier: MIT
// SPDX-FileCopyrightText: Copyright 2026 siamese-nas contributors

#ifndef SNAS_TRAIN_ENSEMBLE_HPP
#define SNAS_TRAIN_ENSEMBLE_HPP

#include <algorithm>
#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

#include "pairs.hpp"
#include "surrogate.hpp"

namespace snas {

struct EnsembleTrainingOptions {
    std::size_t blocks{7};
    std::size_t rounds{100};
    TrainHyper hyper{};
    std::uint64_t seed{0};
    unsigned threads{0}; // 0: hardware concurrency
};

struct EnsembleTrainingLog {
    std::vector<std::vector<double>> epoch_losses; // per block
    std::vector<double> positive_fraction;         // per block training set
};

// Block r draws its own pair set and initial weights from stream r of the
// seed, so results do not depend on the thread count.
inline auto train_block_stream(std::span<Sample const> ds, std::size_t r, EnsembleTrainingOptions const& opt,
                               double* positive = nullptr) -> TrainedBlock
{
    Rng rng = make_rng(opt.seed, 1000 + r);
    auto pairs = assemble_training_set(ds, opt.rounds, rng);
    if (positive != nullptr) { *positive = positive_fraction(pairs); }
    auto examples = to_examples(pairs, ds);
    auto init = SiameseBlock::initialized(rng);
    return train_block(std::move(init), examples, opt.hyper, rng);
}

inline auto train_ensemble(std::span<Sample const> ds, EnsembleTrainingOptions const& opt, EnsembleTrainingLog* log = nullptr)
    -> Ensemble
{
    Ensemble::validate_size(opt.blocks);
    opt.hyper.validate();
    if (opt.rounds < 1) { throw config_error("rounds must be at least 1"); }
    if (ds.empty()) { throw config_error("sample set is empty"); }

    std::vector<TrainedBlock> trained(opt.blocks);
    std::vector<double> positive(opt.blocks, 0.0);
    std::vector<std::exception_ptr> errors(opt.blocks);

    unsigned threads = opt.threads != 0 ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(opt.blocks));

    auto work = [&](std::size_t worker) {
        for (std::size_t r = worker; r < opt.blocks; r += threads) {
            try {
                trained[r] = train_block_stream(ds, r, opt, &positive[r]);
            } catch (...) {
                errors[r] = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < threads; ++w) { pool.emplace_back(work, w); }
    }
    for (auto const& e : errors) {
        if (e) { std::rethrow_exception(e); }
    }

    std::vector<SiameseBlock> blocks;
    std::vector<Genotype> archs;
    for (auto& t : trained) { blocks.push_back(std::move(t.block)); }
    for (auto const& s : ds) { archs.push_back(s.genotype); }
    if (log != nullptr) {
        log->epoch_losses.clear();
        for (auto const& t : trained) { log->epoch_losses.push_back(t.epoch_losses); }
        log->positive_fraction = positive;
    }
    return Ensemble(std::move(blocks), std::move(archs));
}

// Freshly initialized, untrained blocks (the "no training" baseline).
inline auto untrained_ensemble(std::size_t n, std::uint64_t seed) -> Ensemble
{
    Ensemble::validate_size(n);
    std::vector<SiameseBlock> blocks;
    for (std::size_t r = 0; r < n; ++r) {
        Rng rng = make_rng(seed, 1000 + r);
        blocks.push_back(SiameseBlock::initialized(rng));
    }
    return Ensemble(std::move(blocks));
}

} // namespace snas

#endif
