// SPDX-License-Identifier: MIT
// SPDX-FileCopyrightText: Copyright 2026 siamese-nas contributors

#ifndef SNAS_BENCHMARK_HPP
#define SNAS_BENCHMARK_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "common.hpp"
#include "search_space.hpp"

namespace snas {

struct duplicate_genotype : parse_error {
    using parse_error::parse_error;
};

struct value_out_of_range : parse_error {
    using parse_error::parse_error;
};

enum class AccuracyField { Train, Valid, Test };

inline auto to_string(AccuracyField f) -> std::string_view
{
    switch (f) {
    case AccuracyField::Train: return "train";
    case AccuracyField::Valid: return "valid";
    case AccuracyField::Test: return "test";
    }
    return "?";
}

inline auto parse_accuracy_field(std::string_view s) -> AccuracyField
{
    if (s == "train") { return AccuracyField::Train; }
    if (s == "valid") { return AccuracyField::Valid; }
    if (s == "test") { return AccuracyField::Test; }
    throw config_error("unknown accuracy field '" + std::string(s) + "' (expected train, valid or test)");
}

struct ArchRecord {
    Genotype genotype;
    double train_acc{}; // percent
    double valid_acc{};
    double test_acc{};
    double params{}; // MB
    double flops{};  // millions

    [[nodiscard]] auto accuracy(AccuracyField f) const noexcept -> double
    {
        switch (f) {
        case AccuracyField::Train: return train_acc;
        case AccuracyField::Valid: return valid_acc;
        case AccuracyField::Test: return test_acc;
        }
        return test_acc;
    }

    friend auto operator==(ArchRecord const&, ArchRecord const&) -> bool = default;
};

// Returns an empty string when the record is valid, a reason otherwise.
inline auto check_record(ArchRecord const& r) -> std::string
{
    auto acc_ok = [](double a) { return std::isfinite(a) && a >= 0.0 && a <= 100.0; };
    if (!acc_ok(r.train_acc) || !acc_ok(r.valid_acc) || !acc_ok(r.test_acc)) {
        return "accuracy outside [0,100]";
    }
    if (!std::isfinite(r.params) || r.params <= 0.0) { return "params_mb must be positive"; }
    if (!std::isfinite(r.flops) || r.flops <= 0.0) { return "flops_m must be positive"; }
    return {};
}

inline constexpr std::string_view kTableHeader = "arch,train_acc,valid_acc,test_acc,params_mb,flops_m";

class BenchmarkTable {
public:
    using map_type = std::map<Genotype, ArchRecord>;

    BenchmarkTable() = default;
    explicit BenchmarkTable(std::string dataset) : dataset_(std::move(dataset)) {}

    // Returns false (and leaves the table unchanged) if the genotype exists.
    auto insert(ArchRecord const& r) -> bool
    {
        if (auto why = check_record(r); !why.empty()) {
            throw data_error(r.genotype.str() + ": " + why);
        }
        return records_.emplace(r.genotype, r).second;
    }

    [[nodiscard]] auto dataset() const noexcept -> std::string const& { return dataset_; }
    void set_dataset(std::string name) { dataset_ = std::move(name); }
    [[nodiscard]] auto size() const noexcept -> std::size_t { return records_.size(); }
    [[nodiscard]] auto records() const noexcept -> map_type const& { return records_; }
    [[nodiscard]] auto contains(Genotype const& g) const -> bool { return records_.contains(g); }

    [[nodiscard]] auto at(Genotype const& g) const -> ArchRecord const&
    {
        auto it = records_.find(g);
        if (it == records_.end()) {
            throw unknown_genotype("architecture " + g.str() + " not in table '" + dataset_ + "'");
        }
        return it->second;
    }

    [[nodiscard]] auto genotypes() const -> std::vector<Genotype>
    {
        std::vector<Genotype> out;
        out.reserve(records_.size());
        for (auto const& [g, r] : records_) { out.push_back(g); }
        return out;
    }

    friend auto operator==(BenchmarkTable const&, BenchmarkTable const&) -> bool = default;

private:
    std::string dataset_;
    map_type records_;
};

inline auto objectives(BenchmarkTable const& t, Genotype const& g, AccuracyField field) -> ObjectiveVector
{
    auto const& r = t.at(g);
    return {100.0 - r.accuracy(field), r.params, r.flops};
}

// Training-free size lookup; never counted as an objective evaluation.
inline auto param_count(BenchmarkTable const& t, Genotype const& g) -> double { return t.at(g).params; }

inline auto read_table(std::istream& in, std::string dataset) -> BenchmarkTable
{
    BenchmarkTable table(std::move(dataset));
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') { line.pop_back(); }
        if (!have_header) {
            if (lineno == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) { line.erase(0, 3); }
            if (line != kTableHeader) {
                throw parse_error("expected header '" + std::string(kTableHeader) + "'", lineno);
            }
            have_header = true;
            continue;
        }
        if (line.empty()) { continue; }

        std::array<std::string_view, 6> cols;
        std::string_view rest = line;
        std::size_t n = 0;
        while (n < cols.size()) {
            auto comma = rest.find(',');
            cols[n++] = rest.substr(0, comma);
            if (comma == std::string_view::npos) { rest = {}; break; }
            rest.remove_prefix(comma + 1);
        }
        if (n != cols.size() || !rest.empty()) {
            throw parse_error("expected 6 comma-separated fields", lineno);
        }

        ArchRecord r;
        try {
            r.genotype = Genotype::parse(cols[0]);
        } catch (invalid_encoding const& e) {
            throw parse_error(e.what(), lineno);
        }
        std::array<double*, 5> fields = {&r.train_acc, &r.valid_acc, &r.test_acc, &r.params, &r.flops};
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (!parse_double(cols[i + 1], *fields[i])) {
                throw parse_error("bad numeric field '" + std::string(cols[i + 1]) + "'", lineno);
            }
        }
        if (auto why = check_record(r); !why.empty()) {
            throw value_out_of_range(r.genotype.str() + ": " + why, lineno);
        }
        if (!table.insert(r)) {
            throw duplicate_genotype("duplicate architecture " + r.genotype.str(), lineno);
        }
    }
    if (!have_header) { throw parse_error("missing header", lineno + 1); }
    return table;
}

inline auto load_table(std::filesystem::path const& path, std::string dataset) -> BenchmarkTable
{
    std::ifstream in(path);
    if (!in) { throw data_error("cannot open benchmark file '" + path.string() + "'"); }
    return read_table(in, std::move(dataset));
}

// Dataset name defaults to the file stem ("cifar10.csv" -> "cifar10").
inline auto load_table(std::filesystem::path const& path) -> BenchmarkTable
{
    return load_table(path, path.stem().string());
}

inline void write_table(std::ostream& out, BenchmarkTable const& t)
{
    out << kTableHeader << '\n';
    for (auto const& [g, r] : t.records()) {
        out << g.str() << ',' << format_double(r.train_acc) << ',' << format_double(r.valid_acc) << ','
            << format_double(r.test_acc) << ',' << format_double(r.params) << ',' << format_double(r.flops) << '\n';
    }
}

inline void write_table(std::filesystem::path const& path, BenchmarkTable const& t)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) { throw data_error("cannot write '" + path.string() + "'"); }
    write_table(out, t);
    if (!out) { throw data_error("write failed for '" + path.string() + "'"); }
}

// Indices of the records that no other record dominates, by exhaustive scan.
inline auto pareto_set(BenchmarkTable const& t, AccuracyField field) -> std::vector<Genotype>
{
    std::vector<Genotype> gs = t.genotypes();
    std::vector<ObjectiveVector> objs;
    objs.reserve(gs.size());
    for (auto const& g : gs) { objs.push_back(objectives(t, g, field)); }
    std::vector<Genotype> front;
    for (std::size_t i = 0; i < gs.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < gs.size() && !dominated; ++j) {
            dominated = j != i && dominates(objs[j], objs[i]);
        }
        if (!dominated) { front.push_back(gs[i]); }
    }
    return front;
}

namespace detail {
    inline auto round_to(double v, double step) -> double { return std::round(v / step) * step; }

    inline auto connects_input_to_output(Genotype const& g) -> bool
    {
        std::array<bool, 4> reach = {true, false, false, false};
        for (std::size_t e = 0; e < kNumEdges; ++e) {
            if (g[e] != static_cast<std::uint8_t>(Op::None) && reach[kEdgeFrom[e]]) { reach[kEdgeTo[e]] = true; }
        }
        return reach[3];
    }
} // namespace detail

// Deterministic stand-in for the real table. Edge-weighted operator capacity
// drives accuracy through a saturating curve; params and FLOPs are additive in
// the operator counts, so cost conflicts with error. Cells whose output is
// unreachable from the input score chance accuracy. The seed only affects a
// small per-architecture jitter that breaks ties.
//
// size_exponent k in [1,6]: the table enumerates the 5^k genotypes whose
// first k edges are free; the remaining edges are fixed to skip_connect.
inline auto synthetic_table(std::uint64_t seed, int size_exponent = 6) -> BenchmarkTable
{
    if (size_exponent < 1 || size_exponent > static_cast<int>(kNumEdges)) {
        throw config_error("size_exponent must be in [1,6]");
    }
    constexpr std::array<double, kNumEdges> edge_weight = {0.85, 0.75, 0.95, 0.65, 1.05, 1.25};
    constexpr std::array<double, kNumOps> op_value = {0.0, 0.35, 0.6, 1.0, 0.25};

    BenchmarkTable table("synthetic-" + std::to_string(seed));
    std::uint32_t count = 1;
    for (int i = 0; i < size_exponent; ++i) { count *= kNumOps; }

    for (std::uint32_t i = 0; i < count; ++i) {
        Genotype::ops_type ops{};
        std::uint32_t rem = i;
        for (std::size_t e = static_cast<std::size_t>(size_exponent); e-- > 0;) {
            ops[e] = static_cast<std::uint8_t>(rem % kNumOps);
            rem /= kNumOps;
        }
        for (std::size_t e = static_cast<std::size_t>(size_exponent); e < kNumEdges; ++e) {
            ops[e] = static_cast<std::uint8_t>(Op::SkipConnect);
        }
        Genotype g{ops};

        double capacity = 0.0;
        int n1x1 = 0, n3x3 = 0, npool = 0;
        for (std::size_t e = 0; e < kNumEdges; ++e) {
            capacity += edge_weight[e] * op_value[g[e]];
            n1x1 += g[e] == static_cast<std::uint8_t>(Op::Conv1x1);
            n3x3 += g[e] == static_cast<std::uint8_t>(Op::Conv3x3);
            npool += g[e] == static_cast<std::uint8_t>(Op::AvgPool3x3);
        }

        Rng rng = make_rng(seed, g.index());
        std::uniform_real_distribution<double> jitter(-1.0, 1.0);
        double j1 = jitter(rng), j2 = jitter(rng), j3 = jitter(rng);

        double test = detail::connects_input_to_output(g) ? 10.0 + 84.4 * (1.0 - std::exp(-capacity / 1.6)) : 10.0;
        test = std::clamp(test + 0.05 * j1, 0.0, 100.0);
        double valid = std::clamp(test + 0.1 * j2, 0.0, 100.0);
        double train = std::clamp(100.0 - 0.85 * (100.0 - test) + 0.05 * j3, 0.0, 100.0);

        ArchRecord r;
        r.genotype = g;
        r.test_acc = detail::round_to(test, 1e-4);
        r.valid_acc = detail::round_to(valid, 1e-4);
        r.train_acc = detail::round_to(train, 1e-4);
        r.params = detail::round_to(0.0733 + 0.0278 * n1x1 + 0.25 * n3x3, 1e-6);
        r.flops = detail::round_to(7.78 + 3.1 * n1x1 + 28.9 * n3x3 + 0.4 * npool, 1e-6);
        table.insert(r);
    }
    return table;
}

// Table access that counts every full objective query. Parameter-count
// lookups go straight to the table and are not counted.
class ObjectiveOracle {
public:
    ObjectiveOracle(BenchmarkTable const& table, AccuracyField field) : table_(&table), field_(field) {}

    auto evaluate(Genotype const& g) -> ObjectiveVector
    {
        auto obj = objectives(*table_, g, field_);
        ++count_;
        return obj;
    }

    [[nodiscard]] auto count() const noexcept -> std::size_t { return count_; }
    [[nodiscard]] auto field() const noexcept -> AccuracyField { return field_; }
    [[nodiscard]] auto table() const noexcept -> BenchmarkTable const& { return *table_; }

private:
    BenchmarkTable const* table_;
    AccuracyField field_;
    std::size_t count_{0};
};

} // namespace snas

#endif
