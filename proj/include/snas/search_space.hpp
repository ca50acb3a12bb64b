// SPDX-License-Identifier: MIT
// SPDX-FileCopyrightText: Copyright 2026 siamese-nas contributors

#ifndef SNAS_SEARCH_SPACE_HPP
#define SNAS_SEARCH_SPACE_HPP

#include <algorithm>
#include <array>
#include <bitset>
#include <compare>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "common.hpp"

namespace snas {

// Cell layout of the NAS-Bench-201 space: six connections, five candidate
// operators per connection.
inline constexpr std::size_t kNumEdges = 6;
inline constexpr std::size_t kNumOps = 5;
inline constexpr std::size_t kNumBits = kNumEdges * kNumOps;
inline constexpr std::size_t kSpaceSize = 15625; // 5^6

// Operator column order of the one-hot encoding. Must match the op indices
// used in the `arch` column of benchmark files.
enum class Op : std::uint8_t {
    None = 0,
    SkipConnect = 1,
    Conv1x1 = 2,
    Conv3x3 = 3,
    AvgPool3x3 = 4,
};

inline constexpr std::array<std::string_view, kNumOps> kOpNames = {
    "none", "skip_connect", "nor_conv_1x1", "nor_conv_3x3", "avg_pool_3x3"
};

// Edge i connects kEdgeFrom[i] -> kEdgeTo[i] inside the cell (nodes 0..3),
// in the order the benchmark's architecture strings list them.
inline constexpr std::array<int, kNumEdges> kEdgeFrom = {0, 0, 1, 0, 1, 2};
inline constexpr std::array<int, kNumEdges> kEdgeTo = {1, 2, 2, 3, 3, 3};

class Genotype {
public:
    using ops_type = std::array<std::uint8_t, kNumEdges>;

    constexpr Genotype() = default;

    explicit Genotype(ops_type ops) : ops_(ops)
    {
        for (auto op : ops_) {
            if (op >= kNumOps) {
                throw invalid_encoding("operator index " + std::to_string(op) + " out of range [0,4]");
            }
        }
    }

    // Base-5 rank in [0, 5^6), most significant digit first.
    static auto from_index(std::uint32_t index) -> Genotype
    {
        if (index >= kSpaceSize) {
            throw invalid_encoding("genotype index out of range");
        }
        ops_type ops{};
        for (std::size_t i = kNumEdges; i-- > 0;) {
            ops[i] = static_cast<std::uint8_t>(index % kNumOps);
            index /= kNumOps;
        }
        return Genotype{ops};
    }

    // Parses "1-0-3-2-4-0".
    static auto parse(std::string_view text) -> Genotype
    {
        auto malformed = [&] {
            return invalid_encoding("malformed architecture string '" + std::string(text) + "'");
        };
        if (text.size() != 2 * kNumEdges - 1) { throw malformed(); }
        ops_type ops{};
        for (std::size_t i = 0; i < kNumEdges; ++i) {
            char c = text[2 * i];
            if (c < '0' || c > '9' || (i + 1 < kNumEdges && text[2 * i + 1] != '-')) { throw malformed(); }
            auto op = static_cast<unsigned>(c - '0');
            if (op >= kNumOps) {
                throw invalid_encoding("operator index " + std::to_string(op) + " out of range in '" + std::string(text) + "'");
            }
            ops[i] = static_cast<std::uint8_t>(op);
        }
        return Genotype{ops};
    }

    [[nodiscard]] constexpr auto ops() const noexcept -> ops_type const& { return ops_; }
    [[nodiscard]] constexpr auto operator[](std::size_t i) const noexcept -> std::uint8_t { return ops_[i]; }

    [[nodiscard]] constexpr auto index() const noexcept -> std::uint32_t
    {
        std::uint32_t v = 0;
        for (auto op : ops_) { v = v * kNumOps + op; }
        return v;
    }

    [[nodiscard]] auto str() const -> std::string
    {
        std::string s;
        s.reserve(2 * kNumEdges - 1);
        for (std::size_t i = 0; i < kNumEdges; ++i) {
            if (i != 0) { s.push_back('-'); }
            s.push_back(static_cast<char>('0' + ops_[i]));
        }
        return s;
    }

    friend constexpr auto operator<=>(Genotype const&, Genotype const&) = default;

private:
    ops_type ops_{};
};

using RawBits = std::bitset<kNumBits>;

// A 30-bit vector in which every 5-bit group is one-hot.
class BitVector30 {
public:
    BitVector30() = default;

    explicit BitVector30(RawBits bits) : bits_(bits)
    {
        for (std::size_t g = 0; g < kNumEdges; ++g) {
            auto n = group_count(bits_, g);
            if (n != 1) {
                throw invalid_encoding("bit group " + std::to_string(g) + " has " + std::to_string(n) + " bits set");
            }
        }
    }

    [[nodiscard]] auto raw() const noexcept -> RawBits const& { return bits_; }
    [[nodiscard]] auto test(std::size_t i) const -> bool { return bits_.test(i); }

    // Positions of the six set bits, in increasing order.
    [[nodiscard]] auto active() const noexcept -> std::array<std::uint8_t, kNumEdges>
    {
        std::array<std::uint8_t, kNumEdges> idx{};
        std::size_t n = 0;
        for (std::size_t i = 0; i < kNumBits; ++i) {
            if (bits_.test(i)) { idx[n++] = static_cast<std::uint8_t>(i); }
        }
        return idx;
    }

    static auto group_count(RawBits const& bits, std::size_t group) noexcept -> std::size_t
    {
        std::size_t n = 0;
        for (std::size_t k = 0; k < kNumOps; ++k) { n += bits.test(group * kNumOps + k) ? 1 : 0; }
        return n;
    }

    friend auto operator==(BitVector30 const& a, BitVector30 const& b) noexcept -> bool { return a.bits_ == b.bits_; }

private:
    // Default value is the encoding of 0-0-0-0-0-0.
    RawBits bits_{0b00001'00001'00001'00001'00001'00001ULL};
};

inline auto encode(Genotype const& g) -> BitVector30
{
    RawBits bits;
    for (std::size_t i = 0; i < kNumEdges; ++i) { bits.set(kNumOps * i + g[i]); }
    return BitVector30{bits};
}

inline auto decode(BitVector30 const& b) -> Genotype
{
    Genotype::ops_type ops{};
    for (std::size_t i = 0; i < kNumEdges; ++i) {
        for (std::size_t k = 0; k < kNumOps; ++k) {
            if (b.test(kNumOps * i + k)) { ops[i] = static_cast<std::uint8_t>(k); }
        }
    }
    return Genotype{ops};
}

// Checks the one-hot invariant on raw bits; throws invalid_encoding.
inline auto decode(RawBits const& bits) -> Genotype { return decode(BitVector30{bits}); }

// Restores the one-hot invariant: groups with several set bits keep one of
// them, empty groups get one bit. Valid groups are left untouched.
inline auto repair(RawBits raw, Rng& rng) -> BitVector30
{
    for (std::size_t g = 0; g < kNumEdges; ++g) {
        std::array<std::size_t, kNumOps> set{};
        std::size_t n = 0;
        for (std::size_t k = 0; k < kNumOps; ++k) {
            if (raw.test(g * kNumOps + k)) { set[n++] = k; }
        }
        if (n == 1) { continue; }
        std::size_t keep = 0;
        if (n == 0) {
            keep = std::uniform_int_distribution<std::size_t>{0, kNumOps - 1}(rng);
        } else {
            keep = set[std::uniform_int_distribution<std::size_t>{0, n - 1}(rng)];
        }
        for (std::size_t k = 0; k < kNumOps; ++k) { raw.set(g * kNumOps + k, k == keep); }
    }
    return BitVector30{raw};
}

inline auto random_genotype(Rng& rng) -> Genotype
{
    std::uniform_int_distribution<int> op(0, kNumOps - 1);
    Genotype::ops_type ops{};
    for (auto& o : ops) { o = static_cast<std::uint8_t>(op(rng)); }
    return Genotype{ops};
}

// All three objectives are minimized.
struct ObjectiveVector {
    double error{};  // percent, 100 - accuracy
    double params{}; // MB
    double flops{};  // millions

    friend constexpr auto operator==(ObjectiveVector const&, ObjectiveVector const&) -> bool = default;
};

// Pareto dominance: no worse everywhere, strictly better somewhere.
constexpr auto dominates(ObjectiveVector const& a, ObjectiveVector const& b) noexcept -> bool
{
    if (a.error > b.error || a.params > b.params || a.flops > b.flops) { return false; }
    return a.error < b.error || a.params < b.params || a.flops < b.flops;
}

inline auto all_genotypes() -> std::vector<Genotype>
{
    std::vector<Genotype> out;
    out.reserve(kSpaceSize);
    for (std::uint32_t i = 0; i < kSpaceSize; ++i) { out.push_back(Genotype::from_index(i)); }
    return out;
}

} // namespace snas

#endif
