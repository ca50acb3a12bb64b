// SPDX-License-Identifier: MIT
// SPDX-FileCopyrightText: Copyright 2026 siamese-nas contributors

#ifndef SNAS_SURROGATE_HPP
#define SNAS_SURROGATE_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "common.hpp"
#include "search_space.hpp"

namespace snas {

inline constexpr int kEmbedWidth = 32;
inline constexpr int kHiddenWidth = 32;
inline constexpr int kInputWidth = static_cast<int>(kNumBits);

// Flat parameter layout of one block. The embedder is stored input-major
// (30 x 32, row i holds the weights leaving input bit i); the hidden layer is
// stored output-major (32 x 32, row j feeds hidden unit j).
struct BlockLayout {
    static constexpr std::size_t embed_w = 0;
    static constexpr std::size_t embed_b = embed_w + kInputWidth * kEmbedWidth;
    static constexpr std::size_t hidden_w = embed_b + kEmbedWidth;
    static constexpr std::size_t hidden_b = hidden_w + kHiddenWidth * kEmbedWidth;
    static constexpr std::size_t out_w = hidden_b + kHiddenWidth;
    static constexpr std::size_t out_b = out_w + kHiddenWidth;
    static constexpr std::size_t size = out_b + 1;
};

enum class DominanceRelation { FirstDominates, SecondDominates, Incomparable };

inline auto to_string(DominanceRelation r) -> std::string_view
{
    switch (r) {
    case DominanceRelation::FirstDominates: return "first";
    case DominanceRelation::SecondDominates: return "second";
    case DominanceRelation::Incomparable: return "incomparable";
    }
    return "?";
}

struct PairExample {
    BitVector30 first;
    BitVector30 second;
    double label{}; // 1 iff first dominates second
};

// One pairwise classifier: a single embedder applied to both inputs, the
// embedding difference fed through a 32-unit ReLU layer and a sigmoid unit.
class SiameseBlock {
public:
    using Params = Eigen::VectorXd;
    using Vec = Eigen::Matrix<double, kEmbedWidth, 1>;
    using HVec = Eigen::Matrix<double, kHiddenWidth, 1>;
    using EmbedW = Eigen::Matrix<double, kInputWidth, kEmbedWidth, Eigen::RowMajor>;
    using HiddenW = Eigen::Matrix<double, kHiddenWidth, kEmbedWidth, Eigen::RowMajor>;

    // Zero weights: forward() is 0.5 everywhere.
    SiameseBlock() : params_(Params::Zero(BlockLayout::size)) {}

    explicit SiameseBlock(Params params) : params_(std::move(params))
    {
        if (params_.size() != static_cast<Eigen::Index>(BlockLayout::size)) {
            throw format_error("block parameter vector has wrong length");
        }
    }

    // Glorot-uniform weights, zero biases.
    static auto initialized(Rng& rng) -> SiameseBlock
    {
        SiameseBlock b;
        auto fill = [&](std::size_t offset, std::size_t count, int fan_in, int fan_out) {
            double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
            std::uniform_real_distribution<double> u(-limit, limit);
            for (std::size_t i = 0; i < count; ++i) { b.params_[static_cast<Eigen::Index>(offset + i)] = u(rng); }
        };
        fill(BlockLayout::embed_w, BlockLayout::embed_b - BlockLayout::embed_w, kInputWidth, kEmbedWidth);
        fill(BlockLayout::hidden_w, BlockLayout::hidden_b - BlockLayout::hidden_w, kEmbedWidth, kHiddenWidth);
        fill(BlockLayout::out_w, BlockLayout::out_b - BlockLayout::out_w, kHiddenWidth, 1);
        return b;
    }

    [[nodiscard]] auto params() const noexcept -> Params const& { return params_; }
    [[nodiscard]] auto params() noexcept -> Params& { return params_; }

    [[nodiscard]] auto embedder_weights() const { return Eigen::Map<EmbedW const>(params_.data() + BlockLayout::embed_w); }
    [[nodiscard]] auto embedder_bias() const { return Eigen::Map<Vec const>(params_.data() + BlockLayout::embed_b); }
    [[nodiscard]] auto hidden_weights() const { return Eigen::Map<HiddenW const>(params_.data() + BlockLayout::hidden_w); }
    [[nodiscard]] auto hidden_bias() const { return Eigen::Map<HVec const>(params_.data() + BlockLayout::hidden_b); }
    [[nodiscard]] auto out_weights() const { return Eigen::Map<HVec const>(params_.data() + BlockLayout::out_w); }
    [[nodiscard]] auto out_bias() const -> double { return params_[BlockLayout::out_b]; }

    // Pre-activation of the shared embedder; one-hot input makes it a sum of
    // six rows.
    [[nodiscard]] auto embed_pre(BitVector30 const& x) const -> Vec
    {
        Vec z = embedder_bias();
        auto w = embedder_weights();
        for (auto i : x.active()) { z += w.row(i).transpose(); }
        return z;
    }

    [[nodiscard]] auto embed(BitVector30 const& x) const -> Vec { return embed_pre(x).cwiseMax(0.0); }

    [[nodiscard]] auto logit_from_difference(Vec const& d) const -> double
    {
        HVec a = (hidden_weights() * d + hidden_bias()).cwiseMax(0.0);
        return out_weights().dot(a) + out_bias();
    }

    [[nodiscard]] auto logit(BitVector30 const& x1, BitVector30 const& x2) const -> double
    {
        return logit_from_difference(embed(x1) - embed(x2));
    }

    [[nodiscard]] auto all_finite() const -> bool { return params_.allFinite(); }

    friend auto operator==(SiameseBlock const& a, SiameseBlock const& b) -> bool { return a.params_ == b.params_; }

private:
    Params params_;
};

// Saturated logits would round to exactly 0 or 1; the result is kept
// strictly inside the open interval.
inline auto sigmoid(double s) noexcept -> double
{
    constexpr double lo = std::numeric_limits<double>::denorm_min();
    constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
    double p;
    if (s >= 0.0) {
        p = 1.0 / (1.0 + std::exp(-s));
    } else {
        double e = std::exp(s);
        p = e / (1.0 + e);
    }
    return std::clamp(p, lo, hi);
}

inline auto forward(SiameseBlock const& blk, BitVector30 const& x1, BitVector30 const& x2) -> double
{
    return sigmoid(blk.logit(x1, x2));
}

// Ties at exactly 0.5 round up.
inline auto predict_bit(SiameseBlock const& blk, BitVector30 const& x1, BitVector30 const& x2) -> bool
{
    return forward(blk, x1, x2) >= 0.5;
}

inline constexpr double kProbClamp = 1e-7;

inline auto bce(double p, double label) -> double
{
    double pc = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
    return -(label * std::log(pc) + (1.0 - label) * std::log(1.0 - pc));
}

struct LossAndGrads {
    double loss{};
    SiameseBlock::Params grads;
};

namespace detail {
    // Adds the gradient of the BCE loss on one example into `g` (unscaled)
    // and returns the example loss.
    inline auto backprop_one(SiameseBlock const& blk, PairExample const& ex, SiameseBlock::Params& g) -> double
    {
        using Vec = SiameseBlock::Vec;
        using HVec = SiameseBlock::HVec;

        Vec z1 = blk.embed_pre(ex.first);
        Vec z2 = blk.embed_pre(ex.second);
        Vec d = z1.cwiseMax(0.0) - z2.cwiseMax(0.0);
        HVec u = blk.hidden_weights() * d + blk.hidden_bias();
        HVec a = u.cwiseMax(0.0);
        double s = blk.out_weights().dot(a) + blk.out_bias();
        double p = sigmoid(s);
        double loss = bce(p, ex.label);

        // The clamp has zero derivative outside its range.
        double ds = (p > kProbClamp && p < 1.0 - kProbClamp) ? p - ex.label : 0.0;
        if (ds == 0.0) { return loss; }

        Eigen::Map<HVec> g_out_w(g.data() + BlockLayout::out_w);
        g_out_w += ds * a;
        g[BlockLayout::out_b] += ds;

        HVec du = (ds * blk.out_weights()).cwiseProduct((u.array() > 0.0).matrix().cast<double>());
        Eigen::Map<SiameseBlock::HiddenW> g_hidden_w(g.data() + BlockLayout::hidden_w);
        g_hidden_w.noalias() += du * d.transpose();
        Eigen::Map<HVec>(g.data() + BlockLayout::hidden_b) += du;

        Vec dd = blk.hidden_weights().transpose() * du;
        Vec dz1 = dd.cwiseProduct((z1.array() > 0.0).matrix().cast<double>());
        Vec dz2 = -dd.cwiseProduct((z2.array() > 0.0).matrix().cast<double>());

        // Both branches accumulate into the single embedder.
        Eigen::Map<SiameseBlock::EmbedW> g_embed_w(g.data() + BlockLayout::embed_w);
        for (auto i : ex.first.active()) { g_embed_w.row(i) += dz1.transpose(); }
        for (auto i : ex.second.active()) { g_embed_w.row(i) += dz2.transpose(); }
        Eigen::Map<Vec>(g.data() + BlockLayout::embed_b) += dz1 + dz2;
        return loss;
    }
} // namespace detail

// Mean binary cross-entropy over the batch and its exact gradient.
inline auto loss_and_grads(SiameseBlock const& blk, std::span<PairExample const> batch) -> LossAndGrads
{
    if (batch.empty()) { throw config_error("loss_and_grads needs a non-empty batch"); }
    LossAndGrads out{0.0, SiameseBlock::Params::Zero(BlockLayout::size)};
    for (auto const& ex : batch) { out.loss += detail::backprop_one(blk, ex, out.grads); }
    auto n = static_cast<double>(batch.size());
    out.loss /= n;
    out.grads /= n;
    return out;
}

inline auto mean_loss(SiameseBlock const& blk, std::span<PairExample const> data) -> double
{
    double sum = 0.0;
    for (auto const& ex : data) { sum += bce(forward(blk, ex.first, ex.second), ex.label); }
    return data.empty() ? 0.0 : sum / static_cast<double>(data.size());
}

struct TrainHyper {
    double learning_rate{0.001};
    std::size_t batch_size{100};
    std::size_t epochs{20};
    double adam_beta1{0.9};
    double adam_beta2{0.999};
    double adam_epsilon{1e-8};

    void validate() const
    {
        if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) { throw config_error("learning rate must be positive"); }
        if (batch_size < 1) { throw config_error("batch size must be at least 1"); }
        if (epochs < 1) { throw config_error("epochs must be at least 1"); }
        if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
            throw config_error("Adam betas must lie in [0,1)");
        }
        if (!(adam_epsilon > 0.0)) { throw config_error("Adam epsilon must be positive"); }
    }
};

struct TrainedBlock {
    SiameseBlock block;
    std::vector<double> epoch_losses; // mean loss over all examples seen in the epoch
};

// Adam on shuffled mini-batches.
inline auto train_block(SiameseBlock blk, std::span<PairExample const> data, TrainHyper const& hyper, Rng& rng) -> TrainedBlock
{
    hyper.validate();
    if (data.empty()) { throw config_error("training set is empty"); }

    SiameseBlock::Params m = SiameseBlock::Params::Zero(BlockLayout::size);
    SiameseBlock::Params v = SiameseBlock::Params::Zero(BlockLayout::size);
    SiameseBlock::Params g = SiameseBlock::Params::Zero(BlockLayout::size);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainedBlock out;
    out.epoch_losses.reserve(hyper.epochs);
    double beta1_t = 1.0;
    double beta2_t = 1.0;

    for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += hyper.batch_size) {
            std::size_t stop = std::min(order.size(), start + hyper.batch_size);
            g.setZero();
            double batch_loss = 0.0;
            for (std::size_t k = start; k < stop; ++k) { batch_loss += detail::backprop_one(blk, data[order[k]], g); }
            if (!std::isfinite(batch_loss)) {
                std::ostringstream msg;
                msg << "non-finite loss at epoch " << epoch + 1 << ", batch starting at " << start
                    << " (learning rate " << hyper.learning_rate << ")";
                throw training_error(msg.str());
            }
            epoch_loss += batch_loss;
            g /= static_cast<double>(stop - start);

            beta1_t *= hyper.adam_beta1;
            beta2_t *= hyper.adam_beta2;
            m = hyper.adam_beta1 * m + (1.0 - hyper.adam_beta1) * g;
            v = hyper.adam_beta2 * v + (1.0 - hyper.adam_beta2) * g.cwiseAbs2();
            double step = hyper.learning_rate / (1.0 - beta1_t);
            double vcorr = 1.0 / (1.0 - beta2_t);
            blk.params().array() -= step * m.array() / ((v.array() * vcorr).sqrt() + hyper.adam_epsilon);
        }
        out.epoch_losses.push_back(epoch_loss / static_cast<double>(data.size()));
    }
    if (!blk.all_finite()) { throw training_error("training produced non-finite weights"); }
    out.block = std::move(blk);
    return out;
}

// Two-stage majority vote. `voter(r, a, b)` is block r's rounded output on
// the ordered pair (a, b). Identical inputs never reach the voter.
template <typename Voter>
auto ensemble_predict(std::size_t n_blocks, Voter&& voter, BitVector30 const& x1, BitVector30 const& x2) -> DominanceRelation
{
    if (x1 == x2) { return DominanceRelation::Incomparable; }
    auto majority = [&](BitVector30 const& a, BitVector30 const& b) {
        std::size_t ones = 0;
        for (std::size_t r = 0; r < n_blocks; ++r) { ones += voter(r, a, b) ? 1 : 0; }
        return 2 * ones > n_blocks;
    };
    if (majority(x1, x2)) { return DominanceRelation::FirstDominates; }
    if (majority(x2, x1)) { return DominanceRelation::SecondDominates; }
    return DominanceRelation::Incomparable;
}

class Ensemble {
public:
    Ensemble() = default;

    explicit Ensemble(std::vector<SiameseBlock> blocks, std::vector<Genotype> training_archs = {})
        : blocks_(std::move(blocks)), training_archs_(std::move(training_archs))
    {
        validate_size(blocks_.size());
    }

    static void validate_size(std::size_t n)
    {
        if (n < 1 || n % 2 == 0) {
            throw config_error("ensemble size must be odd and at least 1 (got " + std::to_string(n) + ")");
        }
    }

    [[nodiscard]] auto size() const noexcept -> std::size_t { return blocks_.size(); }
    [[nodiscard]] auto blocks() const noexcept -> std::vector<SiameseBlock> const& { return blocks_; }
    [[nodiscard]] auto block(std::size_t r) const -> SiameseBlock const& { return blocks_.at(r); }

    // Architectures whose true objectives trained this ensemble (may be empty).
    [[nodiscard]] auto training_archs() const noexcept -> std::vector<Genotype> const& { return training_archs_; }

    // Number of blocks voting 1 on the ordered pair.
    [[nodiscard]] auto votes(BitVector30 const& x1, BitVector30 const& x2) const -> std::size_t
    {
        std::size_t ones = 0;
        for (auto const& b : blocks_) { ones += predict_bit(b, x1, x2) ? 1 : 0; }
        return ones;
    }

    [[nodiscard]] auto stage_one(BitVector30 const& x1, BitVector30 const& x2) const -> bool
    {
        return 2 * votes(x1, x2) > blocks_.size();
    }

    [[nodiscard]] auto predict(BitVector30 const& x1, BitVector30 const& x2) const -> DominanceRelation
    {
        return ensemble_predict(
            blocks_.size(), [this](std::size_t r, BitVector30 const& a, BitVector30 const& b) { return predict_bit(blocks_[r], a, b); },
            x1, x2);
    }

    // Ensemble made of the first n blocks.
    [[nodiscard]] auto prefix(std::size_t n) const -> Ensemble
    {
        if (n > blocks_.size()) { throw config_error("ensemble prefix larger than ensemble"); }
        return Ensemble({blocks_.begin(), blocks_.begin() + static_cast<std::ptrdiff_t>(n)}, training_archs_);
    }

    friend auto operator==(Ensemble const&, Ensemble const&) -> bool = default;

private:
    std::vector<SiameseBlock> blocks_;
    std::vector<Genotype> training_archs_;
};

inline auto ensemble_predict(Ensemble const& m, BitVector30 const& x1, BitVector30 const& x2) -> DominanceRelation
{
    return m.predict(x1, x2);
}

// Ensemble file layout (all integers little-endian):
//   char[8]  magic "SNASENSM"
//   u32      format version (1)
//   u32      number of blocks
//   u32 x 4  input width, embedding width, hidden width, output width (30, 32, 32, 1)
//   per block, f64 row-major:
//            embedder weights [30][32], embedder bias [32],
//            hidden weights [32][32] (row = hidden unit), hidden bias [32],
//            output weights [32], output bias [1]
//   u32      number of training architectures
//   u16 x n  base-5 genotype index of each training architecture
inline constexpr char kEnsembleMagic[8] = {'S', 'N', 'A', 'S', 'E', 'N', 'S', 'M'};
inline constexpr std::uint32_t kEnsembleVersion = 1;

namespace detail {
    static_assert(std::endian::native == std::endian::little, "ensemble I/O assumes a little-endian host");

    template <typename T>
    void put(std::ostream& out, T v)
    {
        char buf[sizeof(T)];
        std::memcpy(buf, &v, sizeof(T));
        out.write(buf, sizeof(T));
    }

    template <typename T>
    auto get(std::istream& in, char const* what) -> T
    {
        char buf[sizeof(T)];
        if (!in.read(buf, sizeof(T))) { throw format_error(std::string("truncated ensemble file while reading ") + what); }
        T v;
        std::memcpy(&v, buf, sizeof(T));
        return v;
    }
} // namespace detail

inline void write_ensemble(std::ostream& out, Ensemble const& m)
{
    out.write(kEnsembleMagic, sizeof(kEnsembleMagic));
    detail::put<std::uint32_t>(out, kEnsembleVersion);
    detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(m.size()));
    detail::put<std::uint32_t>(out, kInputWidth);
    detail::put<std::uint32_t>(out, kEmbedWidth);
    detail::put<std::uint32_t>(out, kHiddenWidth);
    detail::put<std::uint32_t>(out, 1);
    for (auto const& b : m.blocks()) {
        for (Eigen::Index i = 0; i < b.params().size(); ++i) { detail::put<double>(out, b.params()[i]); }
    }
    detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(m.training_archs().size()));
    for (auto const& g : m.training_archs()) { detail::put<std::uint16_t>(out, static_cast<std::uint16_t>(g.index())); }
}

inline auto read_ensemble(std::istream& in) -> Ensemble
{
    char magic[8];
    if (!in.read(magic, sizeof(magic))) { throw format_error("truncated ensemble file while reading magic"); }
    if (std::memcmp(magic, kEnsembleMagic, sizeof(magic)) != 0) { throw format_error("not an ensemble file (bad magic)"); }
    auto version = detail::get<std::uint32_t>(in, "version");
    if (version != kEnsembleVersion) {
        throw version_error("unsupported ensemble format version " + std::to_string(version) + " (expected " +
                            std::to_string(kEnsembleVersion) + ")");
    }
    auto n = detail::get<std::uint32_t>(in, "block count");
    auto in_w = detail::get<std::uint32_t>(in, "shape");
    auto emb_w = detail::get<std::uint32_t>(in, "shape");
    auto hid_w = detail::get<std::uint32_t>(in, "shape");
    auto out_w = detail::get<std::uint32_t>(in, "shape");
    if (in_w != kInputWidth || emb_w != kEmbedWidth || hid_w != kHiddenWidth || out_w != 1) {
        throw format_error("unsupported layer shapes in ensemble file");
    }
    if (n < 1 || n % 2 == 0 || n > 100000) { throw format_error("invalid block count " + std::to_string(n)); }
    std::vector<SiameseBlock> blocks;
    blocks.reserve(n);
    for (std::uint32_t r = 0; r < n; ++r) {
        SiameseBlock::Params p(BlockLayout::size);
        for (Eigen::Index i = 0; i < p.size(); ++i) { p[i] = detail::get<double>(in, "weights"); }
        if (!p.allFinite()) { throw format_error("non-finite weight in block " + std::to_string(r)); }
        blocks.emplace_back(std::move(p));
    }
    auto n_archs = detail::get<std::uint32_t>(in, "training architecture count");
    if (n_archs > kSpaceSize) { throw format_error("invalid training architecture count"); }
    std::vector<Genotype> archs;
    archs.reserve(n_archs);
    for (std::uint32_t i = 0; i < n_archs; ++i) {
        auto idx = detail::get<std::uint16_t>(in, "training architectures");
        if (idx >= kSpaceSize) { throw format_error("invalid genotype index in ensemble file"); }
        archs.push_back(Genotype::from_index(idx));
    }
    if (in.peek() != std::char_traits<char>::eof()) { throw format_error("trailing bytes after ensemble data"); }
    return Ensemble(std::move(blocks), std::move(archs));
}

inline void save_ensemble(Ensemble const& m, std::filesystem::path const& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) { throw data_error("cannot write ensemble file '" + path.string() + "'"); }
    write_ensemble(out, m);
    out.flush();
    if (!out) { throw data_error("write failed for '" + path.string() + "'"); }
}

inline auto load_ensemble(std::filesystem::path const& path) -> Ensemble
{
    std::ifstream in(path, std::ios::binary);
    if (!in) { throw data_error("cannot open ensemble file '" + path.string() + "'"); }
    return read_ensemble(in);
}

} // namespace snas

#endif
