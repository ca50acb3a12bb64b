// SPDX-License-Identifier: MIT
// SPDX-FileCopyrightText: Copyright 2026 siamese-nas contributors

// End-to-end acceptance checks. Prints one PASS / FAIL / SKIP line per
// criterion and exits non-zero if any criterion fails. Checks that need
// the real CIFAR-10 benchmark table read $SNAS_BENCH_DIR/cifar10.csv and
// are skipped when it is absent.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include <snas/cli.hpp>
#include <snas/snas.hpp>

namespace fs = std::filesystem;
using namespace snas;

namespace {

enum class Verdict { Pass, Fail, Skip };

int failures = 0;

void report(int id, Verdict v, std::string const& what, std::string const& detail)
{
    char const* tag = v == Verdict::Pass ? "PASS" : v == Verdict::Fail ? "FAIL" : "SKIP";
    if (v == Verdict::Fail) { ++failures; }
    std::cout << tag << " criterion " << id << ": " << what << " (" << detail << ")" << std::endl;
}

auto verdict(bool ok) -> Verdict { return ok ? Verdict::Pass : Verdict::Fail; }

auto fmt(double v, int prec = 4) -> std::string
{
    std::ostringstream s;
    s.precision(prec);
    s << std::fixed << v;
    return s.str();
}

auto real_table() -> std::optional<BenchmarkTable>
{
    char const* dir = std::getenv(cli::kBenchDirEnv);
    if (dir == nullptr || *dir == '\0') { return std::nullopt; }
    auto path = fs::path(dir) / "cifar10.csv";
    if (!fs::exists(path)) { return std::nullopt; }
    return load_table(path, "cifar10");
}

// Trains the default ensemble once on the real table and reuses it for 1 and 2.
struct RealSurrogate {
    Ensemble ensemble;
    std::vector<Sample> ds;
};

auto train_real(BenchmarkTable const& table) -> RealSurrogate
{
    RunConfig cfg;
    cfg.seed = 1;
    ObjectiveOracle oracle(table, cfg.train_field);
    Rng rng = make_rng(cfg.seed, 1);
    auto ds = sample_ds(oracle, cfg.ns, rng);
    EnsembleTrainingOptions opt;
    opt.blocks = cfg.nm;
    opt.rounds = cfg.rounds;
    opt.hyper = cfg.hyper;
    opt.seed = derive_seed(cfg.seed, 2);
    return {train_ensemble(ds, opt), ds};
}

void criteria_real(std::optional<BenchmarkTable> const& table)
{
    if (!table) {
        std::string why = "$SNAS_BENCH_DIR/cifar10.csv not found";
        report(1, Verdict::Skip, "surrogate accuracy >= 89 and F1 >= 0.63 on 10,000 held-out pairs", why);
        report(2, Verdict::Skip, "Nm=7 accuracy exceeds Nm=1 accuracy by >= 1 point", why);
        report(3, Verdict::Skip, "best error <= 5.8 in >= 8/10 repeats and = 5.63 in >= 5/10", why);
        report(5, Verdict::Skip, "positive-label fraction of the 60,000-pair set in [0.40, 0.60]", why);
        return;
    }
    if (table->size() != kSpaceSize) {
        std::string why = "table has " + std::to_string(table->size()) + " rows, expected 15625";
        for (int id : {1, 2, 3, 5}) { report(id, Verdict::Fail, "real-table criterion", why); }
        return;
    }

    auto s = train_real(*table);
    auto eval = [&](Ensemble const& m) {
        Rng rng = make_rng(1, 7);
        return evaluate_surrogate(m, *table, s.ensemble.training_archs(), 10000, AccuracyField::Train, rng);
    };
    auto q7 = eval(s.ensemble);
    report(1, verdict(q7.accuracy >= 89.0 && q7.f1 >= 0.63), "surrogate accuracy >= 89 and F1 >= 0.63 on 10,000 held-out pairs",
           "accuracy " + fmt(q7.accuracy, 2) + ", F1 " + fmt(q7.f1, 3));

    auto q1 = eval(s.ensemble.prefix(1));
    report(2, verdict(q7.accuracy >= q1.accuracy + 1.0), "Nm=7 accuracy exceeds Nm=1 accuracy by >= 1 point",
           "Nm=7 " + fmt(q7.accuracy, 2) + ", Nm=1 " + fmt(q1.accuracy, 2));

    {
        Rng rng = make_rng(1, 1000);
        auto pairs = assemble_training_set(s.ds, 100, rng);
        double frac = positive_fraction(pairs);
        report(5, verdict(pairs.size() == 60000 && frac >= 0.40 && frac <= 0.60),
               "positive-label fraction of the 60,000-pair set in [0.40, 0.60]",
               std::to_string(pairs.size()) + " pairs, fraction " + fmt(frac));
    }

    int within = 0, exact = 0;
    std::size_t max_evals = 0;
    std::ostringstream errs;
    for (std::uint64_t r = 0; r < 10; ++r) {
        RunConfig cfg;
        cfg.seed = 100 + r;
        auto res = run_search(cfg, *table);
        double best = res.best_error();
        within += best <= 5.8 ? 1 : 0;
        exact += std::abs(best - 5.63) < 1e-6 ? 1 : 0;
        max_evals = std::max(max_evals, res.true_evaluations);
        errs << (r == 0 ? "" : " ") << fmt(best, 2);
    }
    report(3, verdict(within >= 8 && exact >= 5), "best error <= 5.8 in >= 8/10 repeats and = 5.63 in >= 5/10",
           std::to_string(within) + "/10 within, " + std::to_string(exact) + "/10 exact; errors " + errs.str() +
               "; max true evaluations " + std::to_string(max_evals));
}

// O(n^2) peeling oracle.
auto brute_force_fronts(std::span<ObjectiveVector const> objs) -> FrontPartition
{
    std::vector<bool> placed(objs.size(), false);
    std::size_t left = objs.size();
    FrontPartition out;
    while (left > 0) {
        std::vector<std::size_t> front;
        for (std::size_t i = 0; i < objs.size(); ++i) {
            if (placed[i]) { continue; }
            bool dominated = false;
            for (std::size_t j = 0; j < objs.size() && !dominated; ++j) {
                dominated = !placed[j] && dominates(objs[j], objs[i]);
            }
            if (!dominated) { front.push_back(i); }
        }
        for (auto i : front) { placed[i] = true; }
        left -= front.size();
        out.push_back(front);
    }
    return out;
}

void criterion_sorting()
{
    Rng rng(2026);
    std::uniform_int_distribution<std::size_t> size(1, 200);
    std::uniform_int_distribution<int> coarse(0, 7); // frequent ties
    std::uniform_real_distribution<double> fine(0.0, 100.0);
    int matched = 0;
    constexpr int populations = 1000;
    for (int p = 0; p < populations; ++p) {
        std::vector<ObjectiveVector> objs(size(rng));
        bool ties = p % 2 == 0;
        for (auto& o : objs) {
            o = ties ? ObjectiveVector{double(coarse(rng)), double(coarse(rng)), double(coarse(rng))}
                     : ObjectiveVector{fine(rng), fine(rng), fine(rng)};
        }
        matched += ens_sort_objectives(objs) == brute_force_fronts(objs) ? 1 : 0;
    }
    report(6, verdict(matched == populations), "ENS partition equals brute-force sort on 1,000 random populations",
           std::to_string(matched) + "/" + std::to_string(populations) + " identical");
}

// Smallest |pre-activation| over every ReLU the batch passes through.
auto kink_distance(SiameseBlock const& blk, std::span<PairExample const> batch) -> double
{
    double d = std::numeric_limits<double>::infinity();
    for (auto const& ex : batch) {
        SiameseBlock::Vec z1 = blk.embed_pre(ex.first);
        SiameseBlock::Vec z2 = blk.embed_pre(ex.second);
        SiameseBlock::Vec diff = z1.cwiseMax(0.0) - z2.cwiseMax(0.0);
        SiameseBlock::HVec u = blk.hidden_weights() * diff + blk.hidden_bias();
        d = std::min({d, z1.cwiseAbs().minCoeff(), z2.cwiseAbs().minCoeff(), u.cwiseAbs().minCoeff()});
    }
    return d;
}

// A central difference whose +-h probe crosses a ReLU kink measures the mean
// of two one-sided slopes, not the derivative. Draws with a pre-activation
// closer than kKinkMargin to zero are redrawn; the margin is several times the
// largest shift a single +-h step can cause, and rejections are reported.
void criterion_gradients()
{
    constexpr double h = 1e-5;
    constexpr double kKinkMargin = 1e-4;
    constexpr int instances = 100;
    double worst = 0.0;
    int passed = 0;
    int rejected = 0;
    Rng rng(77);
    for (int inst = 0; inst < instances;) {
        auto blk = SiameseBlock::initialized(rng);
        std::normal_distribution<double> n(0.0, 0.1);
        for (std::size_t k = BlockLayout::embed_b; k < BlockLayout::hidden_w; ++k) { blk.params()[k] = n(rng); }
        for (std::size_t k = BlockLayout::hidden_b; k < BlockLayout::out_w; ++k) { blk.params()[k] = n(rng); }
        blk.params()[BlockLayout::out_b] = n(rng);
        std::vector<PairExample> batch;
        std::bernoulli_distribution coin(0.5);
        for (int i = 0; i < 4; ++i) {
            batch.push_back({encode(random_genotype(rng)), encode(random_genotype(rng)), coin(rng) ? 1.0 : 0.0});
        }
        if (kink_distance(blk, batch) < kKinkMargin) {
            ++rejected;
            continue;
        }
        ++inst;
        auto analytic = loss_and_grads(blk, batch).grads;
        double inst_worst = 0.0;
        for (Eigen::Index k = 0; k < analytic.size(); ++k) {
            SiameseBlock plus = blk, minus = blk;
            plus.params()[k] += h;
            minus.params()[k] -= h;
            double numeric = (mean_loss(plus, batch) - mean_loss(minus, batch)) / (2 * h);
            double a = analytic[k];
            double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
            inst_worst = std::max(inst_worst, rel);
        }
        worst = std::max(worst, inst_worst);
        passed += inst_worst < 1e-4 ? 1 : 0;
    }
    std::ostringstream d;
    d << passed << "/" << instances << " instances, worst relative error " << std::scientific << std::setprecision(2) << worst
      << "; " << rejected << " draws redrawn for a pre-activation within 1e-4 of a ReLU kink";
    report(7, verdict(passed == instances), "analytic gradients match central differences (rel. error < 1e-4)", d.str());
}

void criterion_encoding()
{
    Rng rng(8);
    std::size_t one_hot = 0, valid_inputs = 0, valid_unchanged = 0;
    constexpr int vectors = 10000;
    for (int t = 0; t < vectors; ++t) {
        // Mix uniform vectors with lightly corrupted valid ones so both repair paths and no-op inputs occur.
        RawBits raw;
        if (t % 2 == 0) {
            raw = RawBits(rng() & ((1ULL << kNumBits) - 1));
        } else {
            raw = encode(random_genotype(rng)).raw();
            if (t % 4 == 1) { raw.flip(rng() % kNumBits); }
        }
        bool ok = true;
        for (std::size_t g = 0; g < kNumEdges; ++g) { ok = ok && BitVector30::group_count(raw, g) == 1; }
        auto out = repair(raw, rng);
        bool hot = true;
        for (std::size_t g = 0; g < kNumEdges; ++g) { hot = hot && BitVector30::group_count(out.raw(), g) == 1; }
        one_hot += hot ? 1 : 0;
        if (ok) {
            ++valid_inputs;
            valid_unchanged += out.raw() == raw ? 1 : 0;
        }
    }
    std::size_t round_trips = 0;
    for (auto const& g : all_genotypes()) { round_trips += decode(encode(g)) == g && encode(decode(encode(g))) == encode(g) ? 1 : 0; }
    bool pass = one_hot == vectors && valid_unchanged == valid_inputs && round_trips == kSpaceSize;
    report(8, verdict(pass), "repair fuzzing and encode/decode round trips",
           std::to_string(one_hot) + "/10000 one-hot, " + std::to_string(valid_unchanged) + "/" + std::to_string(valid_inputs) +
               " valid inputs unchanged, " + std::to_string(round_trips) + "/15625 round trips");
}

void criteria_synthetic()
{
    auto table = synthetic_table(1);
    auto global = pareto_set(table, AccuracyField::Test);

    RunConfig cfg;
    cfg.seed = 1;
    Ensemble trained;
    auto res = run_search(cfg, table, nullptr, {}, &trained);

    auto found = front_genotypes(res.front);
    double recall = front_recall(found, global);
    bool nondominated = true;
    for (auto const& e : res.front) {
        for (auto const& ind : res.population) {
            nondominated = nondominated && !dominates(objectives(table, ind.genotype, cfg.report_field), e.objectives);
        }
    }
    report(9, verdict(recall >= 0.30 && nondominated), "synthetic search recovers >= 30% of the global Pareto set",
           "recall " + fmt(recall, 3) + " (" + std::to_string(static_cast<int>(std::lround(recall * double(global.size())))) + "/" +
               std::to_string(global.size()) + "), " + std::to_string(res.front.size()) + " returned, all non-dominated: " +
               (nondominated ? "yes" : "no"));

    // Transfer: the ensemble trained on table seed 1 drives a search on a different table.
    auto other = synthetic_table(2);
    RunConfig tcfg;
    tcfg.seed = 2;
    auto transfer = run_search(tcfg, other, &trained);
    bool fresh_ok = res.true_evaluations <= cfg.ns + cfg.pop && res.true_evaluations <= 650;
    bool transfer_ok = transfer.true_evaluations <= tcfg.pop && transfer.true_evaluations <= 50;
    report(4, verdict(fresh_ok && transfer_ok), "true evaluations <= 650 fresh and <= 50 transfer",
           "fresh " + std::to_string(res.true_evaluations) + ", transfer " + std::to_string(transfer.true_evaluations));
}

auto slurp(fs::path const& p) -> std::string
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void criterion_determinism()
{
    auto dir = fs::temp_directory_path() / "snas_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto bench = (dir / "synthetic.csv").string();
    std::ostringstream sink;
    auto* old = std::cout.rdbuf(sink.rdbuf());
    int g = cli::run({"gen-synthetic", "--seed", "1", "--out", bench});
    auto search = [&](char const* out) {
        return cli::run({"search", "--bench-file", bench, "--seed", "5", "--gens", "300", "--repeats", "2", "--eval-pairs",
                         "1000", "--out", (dir / out).string()});
    };
    int a = search("a.json");
    int b = search("b.json");
    std::cout.rdbuf(old);
    auto ra = slurp(dir / "a.json");
    auto rb = slurp(dir / "b.json");
    bool same = g == 0 && a == 0 && b == 0 && !ra.empty() && ra == rb;
    report(10, verdict(same), "identical search flags give byte-identical reports",
           "exit codes " + std::to_string(a) + "/" + std::to_string(b) + ", " + std::to_string(ra.size()) + " bytes, " +
               (ra == rb ? "identical" : "different"));
    fs::remove_all(dir);
}

} // namespace

auto main() -> int
{
    try {
        criteria_real(real_table());
        criterion_sorting();
        criterion_gradients();
        criterion_encoding();
        criteria_synthetic();
        criterion_determinism();
    } catch (std::exception const& e) {
        std::cout << "FAIL acceptance run aborted: " << e.what() << std::endl;
        return 1;
    }
    return failures == 0 ? 0 : 1;
}
