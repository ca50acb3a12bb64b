// SPDX-License-Identifier: MIT
// SPDX-FileCopyrightText: Copyright 2026 siamese-nas contributors

#ifndef SNAS_CLI_HPP
#define SNAS_CLI_HPP

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "benchmark.hpp"
#include "metrics.hpp"
#include "moea.hpp"
#include "pairs.hpp"
#include "surrogate.hpp"
#include "train_ensemble.hpp"

namespace snas::cli {

enum ExitCode : int { kSuccess = 0, kUsage = 1, kData = 2, kRuntime = 3 };

inline constexpr char const* kBenchDirEnv = "SNAS_BENCH_DIR";

// Relative bench paths that do not exist are looked up under $SNAS_BENCH_DIR.
inline auto resolve_bench_path(std::filesystem::path const& p) -> std::filesystem::path
{
    if (std::filesystem::exists(p)) { return p; }
    if (p.is_relative()) {
        if (char const* dir = std::getenv(kBenchDirEnv); dir != nullptr && *dir != '\0') {
            auto candidate = std::filesystem::path(dir) / p;
            if (std::filesystem::exists(candidate)) { return candidate; }
        }
    }
    throw data_error("benchmark file not found: '" + p.string() + "'");
}

// Writes through a temporary sibling and renames, so a failed run leaves no
// partial file behind.
inline void write_file_atomic(std::filesystem::path const& path, std::string const& content)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) { throw data_error("cannot write '" + path.string() + "'"); }
        out << content;
        out.flush();
        if (!out) { throw data_error("write failed for '" + path.string() + "'"); }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw data_error("cannot write '" + path.string() + "'");
    }
}

struct CommonRunFlags {
    RunConfig cfg;
    std::string acc_field{"train"};
    std::string report_field{"test"};
    bool keep_duplicates{false};

    void finalize()
    {
        cfg.train_field = parse_accuracy_field(acc_field);
        cfg.report_field = parse_accuracy_field(report_field);
        cfg.unique_survivors = !keep_duplicates;
    }
};

inline void add_training_flags(CLI::App& app, CommonRunFlags& f)
{
    app.add_option("--ns", f.cfg.ns, "Architectures evaluated to train the surrogate")->capture_default_str();
    app.add_option("--nm", f.cfg.nm, "Siamese blocks in the ensemble (odd)")->capture_default_str();
    app.add_option("--rounds", f.cfg.rounds, "Pair-construction rounds per block")->capture_default_str();
    app.add_option("--acc-field", f.acc_field, "Accuracy used for surrogate labels: train, valid or test")->capture_default_str();
    app.add_option("--epochs", f.cfg.hyper.epochs, "Training epochs")->capture_default_str();
    app.add_option("--lr", f.cfg.hyper.learning_rate, "Adam learning rate")->capture_default_str();
    app.add_option("--batch", f.cfg.hyper.batch_size, "Mini-batch size")->capture_default_str();
    app.add_option("--threads", f.cfg.threads, "Worker threads for block training (0 = all cores)")->capture_default_str();
    app.add_option("--seed", f.cfg.seed, "Random seed")->capture_default_str();
}

inline auto quality_json(SurrogateQuality const& q) -> nlohmann::ordered_json
{
    return {{"accuracy", q.accuracy}, {"f1", q.f1}, {"tp", q.confusion.tp}, {"fp", q.confusion.fp},
            {"tn", q.confusion.tn}, {"fn", q.confusion.fn}};
}

inline auto config_json(RunConfig const& c) -> nlohmann::ordered_json
{
    return {{"pop", c.pop},
            {"gens", c.gens},
            {"rc", c.rc},
            {"rm", c.rm},
            {"ns", c.ns},
            {"nm", c.nm},
            {"rounds", c.rounds},
            {"seed", c.seed},
            {"acc_field", to_string(c.train_field)},
            {"report_field", to_string(c.report_field)},
            {"learning_rate", c.hyper.learning_rate},
            {"batch_size", c.hyper.batch_size},
            {"epochs", c.hyper.epochs},
            {"unique_survivors", c.unique_survivors}};
}

// ---------------------------------------------------------------- search

struct SearchArgs {
    CommonRunFlags run;
    std::string bench_file;
    std::string surrogate_from;
    std::string out{"report.json"};
    std::string metrics_csv;
    std::size_t repeats{1};
    std::size_t eval_pairs{0};
    bool timing{false};
    bool verbose{false};
};

inline auto cmd_search(SearchArgs args) -> int
{
    args.run.finalize();
    auto const& base = args.run.cfg;
    base.validate();
    if (args.repeats < 1) { throw config_error("--repeats must be at least 1"); }

    auto started = std::chrono::steady_clock::now();
    auto table = load_table(resolve_bench_path(args.bench_file));

    std::optional<Ensemble> pretrained;
    if (!args.surrogate_from.empty()) { pretrained = load_ensemble(args.surrogate_from); }

    nlohmann::ordered_json report;
    report["tool"] = "snas";
    report["report_version"] = 1;
    report["dataset"] = table.dataset();
    report["seed"] = base.seed;
    report["transfer"] = pretrained.has_value();
    auto cfg_json = config_json(base);
    cfg_json["repeats"] = args.repeats;
    cfg_json["surrogate_from"] = args.surrogate_from;
    report["config"] = cfg_json;

    std::vector<double> best_errors;
    std::size_t max_evals = 0;
    nlohmann::ordered_json repeats = nlohmann::ordered_json::array();
    std::vector<SurrogateQuality> qualities;

    for (std::size_t r = 0; r < args.repeats; ++r) {
        RunConfig cfg = base;
        cfg.seed = base.seed + r;
        cfg.dataset = table.dataset();
        Ensemble trained;
        auto progress = [&](std::size_t t, GenerationLog const& log) {
            if (args.verbose && (t + 1) % 100 == 0) {
                std::cerr << "repeat " << r << " generation " << t + 1 << ": " << log.fronts << " fronts, first front "
                          << log.first_front << '\n';
            }
        };
        auto result = run_search(cfg, table, pretrained ? &*pretrained : nullptr, progress, &trained);

        nlohmann::ordered_json rep;
        rep["repeat"] = r;
        rep["seed"] = cfg.seed;
        rep["true_evaluations"] = result.true_evaluations;
        rep["phase1_evaluations"] = result.surrogate_evaluations;
        rep["best_error"] = result.best_error();
        nlohmann::ordered_json front = nlohmann::ordered_json::array();
        for (auto const& e : result.front) {
            front.push_back({{"arch", e.genotype.str()},
                             {"error", e.objectives.error},
                             {"params_mb", e.objectives.params},
                             {"flops_m", e.objectives.flops}});
        }
        rep["front"] = front;
        if (args.eval_pairs > 0) {
            Ensemble const& model = pretrained ? *pretrained : trained;
            Rng eval_rng = make_rng(cfg.seed, 7);
            auto q = evaluate_surrogate(model, table, model.training_archs(), args.eval_pairs, cfg.train_field, eval_rng);
            rep["surrogate"] = quality_json(q);
            qualities.push_back(q);
        }
        nlohmann::ordered_json fronts = nlohmann::ordered_json::array();
        nlohmann::ordered_json first = nlohmann::ordered_json::array();
        for (auto const& g : result.generations) {
            fronts.push_back(g.fronts);
            first.push_back(g.first_front);
        }
        rep["generations"] = {{"fronts", fronts}, {"first_front", first}};
        repeats.push_back(rep);

        best_errors.push_back(result.best_error());
        max_evals = std::max(max_evals, result.true_evaluations);
        if (args.verbose) {
            std::cerr << "repeat " << r << ": best error " << result.best_error() << ", " << result.front.size()
                      << " front members, " << result.true_evaluations << " true evaluations\n";
        }
    }
    report["repeats"] = repeats;
    auto stats = run_stats(best_errors);
    report["stats"] = {{"best_errors", stats.values}, {"mean", stats.mean}, {"std", stats.std}, {"repeats", stats.repeats},
                       {"max_true_evaluations", max_evals}};
    if (args.timing) {
        report["wall_clock_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    }

    write_file_atomic(args.out, report.dump(2) + "\n");

    if (!args.metrics_csv.empty()) {
        std::ostringstream csv;
        csv << "metric,value\n";
        csv << "best_error_mean," << format_double(stats.mean) << '\n';
        csv << "best_error_std," << format_double(stats.std) << '\n';
        csv << "repeats," << stats.repeats << '\n';
        csv << "max_true_evaluations," << max_evals << '\n';
        if (!qualities.empty()) {
            double acc = 0.0, f1 = 0.0;
            for (auto const& q : qualities) { acc += q.accuracy; f1 += q.f1; }
            csv << "surrogate_accuracy_mean," << format_double(acc / static_cast<double>(qualities.size())) << '\n';
            csv << "surrogate_f1_mean," << format_double(f1 / static_cast<double>(qualities.size())) << '\n';
        }
        write_file_atomic(args.metrics_csv, csv.str());
    }

    std::cout << "best error " << format_double(stats.mean) << " +- " << format_double(stats.std) << " over "
              << stats.repeats << " repeat(s); report written to " << args.out << '\n';
    return kSuccess;
}

// ------------------------------------------------------- train-surrogate

struct TrainArgs {
    CommonRunFlags run;
    std::string bench_file;
    std::string out{"ensemble.bin"};
    std::string dump_pairs;
    bool verbose{false};
};

inline auto cmd_train_surrogate(TrainArgs args) -> int
{
    args.run.finalize();
    auto const& cfg = args.run.cfg;
    Ensemble::validate_size(cfg.nm);
    cfg.hyper.validate();
    if (cfg.ns < 1) { throw config_error("--ns must be at least 1"); }
    if (cfg.rounds < 1) { throw config_error("--rounds must be at least 1"); }

    auto table = load_table(resolve_bench_path(args.bench_file));
    ObjectiveOracle oracle(table, cfg.train_field);
    EnsembleTrainingLog log;
    auto ensemble = train_surrogate_phase(cfg, oracle, &log);

    if (args.verbose) {
        for (std::size_t r = 0; r < log.epoch_losses.size(); ++r) {
            std::cout << "block " << r << " positive fraction " << format_double(log.positive_fraction[r]) << '\n';
            for (std::size_t e = 0; e < log.epoch_losses[r].size(); ++e) {
                std::cout << "block " << r << " epoch " << e + 1 << " loss " << format_double(log.epoch_losses[r][e]) << '\n';
            }
        }
    }
    if (!args.dump_pairs.empty()) {
        // Block 0's training set, regenerated from its stream.
        Rng rng = make_rng(cfg.seed, 1);
        ObjectiveOracle replay(table, cfg.train_field);
        auto ds = sample_ds(replay, cfg.ns, rng);
        Rng block_rng = make_rng(derive_seed(cfg.seed, 2), 1000);
        auto pairs = assemble_training_set(ds, cfg.rounds, block_rng);
        std::ostringstream csv;
        write_training_set(csv, pairs, ds);
        write_file_atomic(args.dump_pairs, csv.str());
    }

    std::ostringstream bin;
    write_ensemble(bin, ensemble);
    write_file_atomic(args.out, bin.str());
    std::cout << "trained " << ensemble.size() << " blocks on " << oracle.count() << " architectures; saved to " << args.out
              << '\n';
    return kSuccess;
}

// -------------------------------------------------------- eval-surrogate

struct EvalArgs {
    CommonRunFlags run;
    std::string bench_file;
    std::string ensemble;
    std::string out;
    std::string json_out;
    std::size_t pairs{10000};
    std::vector<std::size_t> sweep_nm;
    std::vector<std::size_t> sweep_ns;
};

inline auto cmd_eval_surrogate(EvalArgs args) -> int
{
    args.run.finalize();
    auto const& cfg = args.run.cfg;
    if (args.pairs < 1) { throw config_error("--pairs must be at least 1"); }
    if (!args.sweep_nm.empty() && !args.sweep_ns.empty()) { throw config_error("--sweep-nm and --sweep-ns are exclusive"); }
    if (args.sweep_nm.empty() && args.sweep_ns.empty() && args.ensemble.empty()) {
        throw config_error("--ensemble is required unless a sweep is requested");
    }
    for (auto nm : args.sweep_nm) { Ensemble::validate_size(nm); }
    for (auto ns : args.sweep_ns) {
        if (ns < 1) { throw config_error("--sweep-ns values must be positive"); }
    }
    if (!args.sweep_ns.empty()) { Ensemble::validate_size(cfg.nm); }
    cfg.hyper.validate();

    auto table = load_table(resolve_bench_path(args.bench_file));
    auto evaluate = [&](Ensemble const& m, std::span<Genotype const> excluded) {
        Rng rng = make_rng(cfg.seed, 7);
        return evaluate_surrogate(m, table, excluded, args.pairs, cfg.train_field, rng);
    };

    std::ostringstream csv;
    nlohmann::ordered_json json;
    json["dataset"] = table.dataset();
    json["pairs"] = args.pairs;
    json["seed"] = cfg.seed;

    if (!args.sweep_nm.empty()) {
        RunConfig c = cfg;
        c.nm = *std::max_element(args.sweep_nm.begin(), args.sweep_nm.end());
        ObjectiveOracle oracle(table, c.train_field);
        auto full = train_surrogate_phase(c, oracle);
        csv << "nm,accuracy,f1,tp,fp,tn,fn\n";
        json["sweep"] = "nm";
        json["rows"] = nlohmann::ordered_json::array();
        for (auto nm : args.sweep_nm) {
            auto m = full.prefix(nm);
            auto q = evaluate(m, m.training_archs());
            csv << nm << ',' << format_double(q.accuracy) << ',' << format_double(q.f1) << ',' << q.confusion.tp << ','
                << q.confusion.fp << ',' << q.confusion.tn << ',' << q.confusion.fn << '\n';
            auto row = quality_json(q);
            row["nm"] = nm;
            json["rows"].push_back(row);
        }
    } else if (!args.sweep_ns.empty()) {
        csv << "ns,accuracy,f1,tp,fp,tn,fn\n";
        json["sweep"] = "ns";
        json["rows"] = nlohmann::ordered_json::array();
        auto emit = [&](std::string const& label, SurrogateQuality const& q) {
            csv << label << ',' << format_double(q.accuracy) << ',' << format_double(q.f1) << ',' << q.confusion.tp << ','
                << q.confusion.fp << ',' << q.confusion.tn << ',' << q.confusion.fn << '\n';
            auto row = quality_json(q);
            row["ns"] = label;
            json["rows"].push_back(row);
        };
        auto baseline = untrained_ensemble(cfg.nm, derive_seed(cfg.seed, 2));
        emit("none", evaluate(baseline, {}));
        for (auto ns : args.sweep_ns) {
            RunConfig c = cfg;
            c.ns = ns;
            ObjectiveOracle oracle(table, c.train_field);
            auto m = train_surrogate_phase(c, oracle);
            emit(std::to_string(ns), evaluate(m, m.training_archs()));
        }
    } else {
        auto m = load_ensemble(args.ensemble);
        auto q = evaluate(m, m.training_archs());
        csv << "metric,value\n";
        csv << "accuracy," << format_double(q.accuracy) << '\n';
        csv << "f1," << format_double(q.f1) << '\n';
        csv << "tp," << q.confusion.tp << "\nfp," << q.confusion.fp << "\ntn," << q.confusion.tn << "\nfn," << q.confusion.fn
            << '\n';
        csv << "pairs," << args.pairs << '\n';
        csv << "excluded," << m.training_archs().size() << '\n';
        json["nm"] = m.size();
        json["metrics"] = quality_json(q);
    }

    std::cout << csv.str();
    if (!args.out.empty()) { write_file_atomic(args.out, csv.str()); }
    if (!args.json_out.empty()) { write_file_atomic(args.json_out, json.dump(2) + "\n"); }
    return kSuccess;
}

// --------------------------------------------------------- gen-synthetic

struct SynthArgs {
    std::uint64_t seed{1};
    int size_exponent{6};
    std::string out{"synthetic.csv"};
    std::string front_out;
};

inline auto default_front_path(std::filesystem::path const& out) -> std::filesystem::path
{
    auto p = out;
    p.replace_extension();
    p += ".front.csv";
    return p;
}

inline auto cmd_gen_synthetic(SynthArgs args) -> int
{
    auto table = synthetic_table(args.seed, args.size_exponent);
    std::ostringstream csv;
    write_table(csv, table);

    auto front = pareto_set(table, AccuracyField::Test);
    std::ostringstream side;
    side << "arch,test_error,params_mb,flops_m\n";
    for (auto const& g : front) {
        auto o = objectives(table, g, AccuracyField::Test);
        side << g.str() << ',' << format_double(o.error) << ',' << format_double(o.params) << ',' << format_double(o.flops) << '\n';
    }
    std::filesystem::path front_path = args.front_out.empty() ? default_front_path(args.out) : std::filesystem::path(args.front_out);

    write_file_atomic(args.out, csv.str());
    write_file_atomic(front_path, side.str());
    std::cout << "wrote " << table.size() << " architectures to " << args.out << " and " << front.size()
              << " Pareto-optimal architectures to " << front_path.string() << '\n';
    return kSuccess;
}

// Reads the front sidecar written by gen-synthetic.
inline auto read_front_sidecar(std::filesystem::path const& path) -> std::vector<Genotype>
{
    std::ifstream in(path);
    if (!in) { throw data_error("cannot open '" + path.string() + "'"); }
    std::string line;
    std::getline(in, line);
    std::vector<Genotype> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) { continue; }
        try {
            out.push_back(Genotype::parse(std::string_view(line).substr(0, line.find(','))));
        } catch (invalid_encoding const& e) {
            throw parse_error(e.what(), lineno);
        }
    }
    return out;
}

// ----------------------------------------------------------------- entry

template <typename Fn>
auto guarded(Fn&& fn) -> int
{
    try {
        return fn();
    } catch (config_error const& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (data_error const& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kData;
    } catch (std::exception const& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntime;
    }
}

inline auto run(std::vector<std::string> argv) -> int
{
    CLI::App app{"Multi-objective architecture search driven by a Siamese dominance surrogate"};
    app.require_subcommand(1);

    SearchArgs search;
    auto* s = app.add_subcommand("search", "Run surrogate-assisted searches and write a JSON report");
    s->add_option("--bench-file", search.bench_file, "Benchmark CSV (also looked up under $SNAS_BENCH_DIR)")->required();
    add_training_flags(*s, search.run);
    s->add_option("--pop", search.run.cfg.pop, "Population size N (even)")->capture_default_str();
    s->add_option("--gens", search.run.cfg.gens, "Generations T")->capture_default_str();
    s->add_option("--rc", search.run.cfg.rc, "Crossover rate")->capture_default_str();
    s->add_option("--rm", search.run.cfg.rm, "Per-bit mutation rate")->capture_default_str();
    s->add_option("--report-field", search.run.report_field, "Accuracy used for the final front: train, valid or test")
        ->capture_default_str();
    s->add_option("--repeats", search.repeats, "Independent runs (seed, seed+1, ...)")->capture_default_str();
    s->add_option("--surrogate-from", search.surrogate_from, "Pretrained ensemble file (transfer mode, skips Phase 1)");
    s->add_option("--eval-pairs", search.eval_pairs, "Also score the surrogate on this many held-out pairs");
    s->add_option("--out", search.out, "Report path")->capture_default_str();
    s->add_option("--metrics-csv", search.metrics_csv, "Optional metric,value CSV");
    s->add_flag("--keep-duplicates", search.run.keep_duplicates, "Keep duplicate genotypes through survivor selection");
    s->add_flag("--timing", search.timing, "Record wall-clock seconds in the report");
    s->add_flag("-v,--verbose", search.verbose, "Progress on stderr");

    TrainArgs train;
    auto* t = app.add_subcommand("train-surrogate", "Train and save a surrogate ensemble");
    t->add_option("--bench-file", train.bench_file, "Benchmark CSV")->required();
    add_training_flags(*t, train.run);
    t->add_option("--out", train.out, "Ensemble file")->capture_default_str();
    t->add_option("--dump-pairs", train.dump_pairs, "Write block 0's training pairs as CSV");
    t->add_flag("-v,--verbose", train.verbose, "Print per-epoch losses");

    EvalArgs eval;
    auto* e = app.add_subcommand("eval-surrogate", "Score an ensemble on held-out pairs, or sweep Nm / Ns");
    e->add_option("--bench-file", eval.bench_file, "Benchmark CSV")->required();
    e->add_option("--ensemble", eval.ensemble, "Ensemble file");
    add_training_flags(*e, eval.run);
    e->add_option("--pairs", eval.pairs, "Evaluation pairs")->capture_default_str();
    e->add_option("--sweep-nm", eval.sweep_nm, "Comma-separated ensemble sizes")->delimiter(',');
    e->add_option("--sweep-ns", eval.sweep_ns, "Comma-separated sample counts")->delimiter(',');
    e->add_option("--out", eval.out, "CSV output path");
    e->add_option("--json", eval.json_out, "JSON output path");

    SynthArgs synth;
    auto* g = app.add_subcommand("gen-synthetic", "Write a synthetic benchmark table and its exact Pareto set");
    g->add_option("--seed", synth.seed, "Seed")->required();
    g->add_option("--size-exponent", synth.size_exponent, "Free edges (table has 5^k rows)")->capture_default_str();
    g->add_option("--out", synth.out, "Table CSV")->capture_default_str();
    g->add_option("--front-out", synth.front_out, "Pareto-set CSV (default: <out stem>.front.csv)");

    try {
        std::vector<std::string> rev(argv.rbegin(), argv.rend());
        app.parse(rev);
    } catch (CLI::ParseError const& err) {
        int code = app.exit(err);
        return code == 0 ? kSuccess : kUsage;
    }

    if (s->parsed()) { return guarded([&] { return cmd_search(search); }); }
    if (t->parsed()) { return guarded([&] { return cmd_train_surrogate(train); }); }
    if (e->parsed()) { return guarded([&] { return cmd_eval_surrogate(eval); }); }
    if (g->parsed()) { return guarded([&] { return cmd_gen_synthetic(synth); }); }
    return kUsage;
}

inline auto run(int argc, char** argv) -> int
{
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) { args.emplace_back(argv[i]); }
    return run(std::move(args));
}

} // namespace snas::cli

#endif
