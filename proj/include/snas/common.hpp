// SPDX-License-Identifier: MIT
// SPDX-FileCopyrightText: Copyright 2026 siamese-nas contributors

#ifndef SNAS_COMMON_HPP
#define SNAS_COMMON_HPP

#include <charconv>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

namespace snas {

// Error hierarchy. The CLI maps config_error to exit code 1, data_error
// (and subclasses) to 2 and everything else to 3.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct config_error : error {
    using error::error;
};

struct data_error : error {
    using error::error;
};

struct invalid_encoding : data_error {
    using data_error::data_error;
};

struct parse_error : data_error {
    parse_error(std::string const& what, std::size_t line)
        : data_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    [[nodiscard]] auto line() const noexcept -> std::size_t { return line_; }

private:
    std::size_t line_;
};

struct unknown_genotype : data_error {
    using data_error::data_error;
};

struct format_error : data_error {
    using data_error::data_error;
};

struct version_error : format_error {
    using format_error::format_error;
};

struct training_error : error {
    using error::error;
};

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent streams (per block,
// per repeat, per round) from one user seed.
constexpr auto derive_seed(std::uint64_t base, std::uint64_t stream) noexcept -> std::uint64_t
{
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline auto make_rng(std::uint64_t base, std::uint64_t stream) -> Rng
{
    return Rng{derive_seed(base, stream)};
}

// Shortest decimal rendering that round-trips to the same double.
inline auto format_double(double v) -> std::string
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) {
        throw error("cannot format value");
    }
    return {buf, ptr};
}

inline auto parse_double(std::string_view s, double& out) -> bool
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) { s.remove_prefix(1); }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) { s.remove_suffix(1); }
    if (s.empty()) { return false; }
    if (s.front() == '+') { s.remove_prefix(1); }
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

} // namespace snas

#endif
