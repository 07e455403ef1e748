// Acceptance run: one PASS/FAIL line per criterion. Tolerances and budgets
// are fixed here.

#include "checks.hpp"
#include "eguot/data.hpp"
#include "eguot/experiments.hpp"
#include "eguot/networks.hpp"
#include "eguot/training.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <map>
#include <set>
#include <string>

using namespace eguot;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kGradientBudgetSeconds = 60.0;
constexpr double kOracleBudgetSeconds = 60.0;
constexpr double kToyBudgetSeconds = 15.0 * 60.0;
constexpr double kAblationBudgetSeconds = 2.0 * 3600.0;
constexpr double kToyRatio = 1.0 / 3.0;
constexpr int kToyMinSeeds = 4;
constexpr int kCollapseMinSeeds = 4;
constexpr double kAlpha = 0.05;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = false;
    std::string summary;
    std::vector<std::string> details;
};

void print(int id, const Outcome& o) {
    std::printf("%s criterion %d: %s\n", o.pass ? "PASS" : "FAIL", id, o.summary.c_str());
    for (const auto& d : o.details) std::printf("    %s\n", d.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::vector<std::string> failing(const std::vector<testing::Check>& checks) {
    std::vector<std::string> out;
    for (const auto& c : checks) {
        if (c.ok) continue;
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s: got %.10g, expected %.10g (tol %.3g)", c.name.c_str(), c.value, c.expected,
                      c.tolerance);
        out.emplace_back(buf);
    }
    return out;
}

Outcome check_table(const std::vector<testing::Check>& checks, double elapsed, double budget, const std::string& what) {
    Outcome o;
    const bool within = budget <= 0.0 || elapsed < budget;
    o.pass = testing::all_ok(checks) && within;
    std::size_t ok = 0;
    for (const auto& c : checks) ok += c.ok ? 1 : 0;
    o.summary = what + " " + std::to_string(ok) + "/" + std::to_string(checks.size()) + " checks in " +
                fmt("%.1f s", elapsed) + (budget > 0 ? fmt(" (budget %.0f s)", budget) : "");
    o.details = failing(checks);
    if (!within) o.details.push_back("over the time budget");
    return o;
}

// Runs presets once each; identical preset definitions share one run.
class PresetRunner {
public:
    PresetRunner(fs::path root, std::vector<uint64_t> seeds, std::optional<int64_t> epochs)
        : root_(std::move(root)), seeds_(std::move(seeds)), epochs_(epochs) {}

    const experiments::ExperimentReport& get(const std::string& name) {
        experiments::RunOptions opts;
        opts.seeds = seeds_;
        opts.epochs = epochs_;
        opts.grid_samples = 4;
        const auto preset = experiments::resolve_preset(name, opts);
        const auto key = nlohmann::json{{"config", preset.config}, {"corpus", preset.corpus},
                                        {"seeds", preset.seeds}, {"toy", preset.toy ? name : ""}}
                             .dump();
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        const auto t0 = Clock::now();
        std::printf("    running %s (%zu seeds)\n", name.c_str(), preset.seeds.size());
        std::fflush(stdout);
        auto rep = experiments::run_preset(preset, root_ / name, opts);
        seconds_[name] = seconds_since(t0);
        std::printf("    %s done in %.0f s\n", name.c_str(), seconds_[name]);
        std::fflush(stdout);
        return cache_.emplace(key, std::move(rep)).first->second;
    }

    double seconds(const std::string& name) const {
        auto it = seconds_.find(name);
        return it == seconds_.end() ? 0.0 : it->second;
    }

private:
    fs::path root_;
    std::vector<uint64_t> seeds_;
    std::optional<int64_t> epochs_;
    std::map<std::string, experiments::ExperimentReport> cache_;
    std::map<std::string, double> seconds_;
};

std::string paired_line(const std::string& label, const experiments::PairedComparison& c) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s: mean diff %+.4f, t %.3f vs critical %.3f, %lld seeds favourable -> %s",
                  label.c_str(), c.mean_difference, c.t_statistic, c.critical, static_cast<long long>(c.positive),
                  c.significant ? "significant" : "not significant");
    return buf;
}

std::vector<double> difference(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> d;
    for (std::size_t i = 0; i < a.size(); ++i) d.push_back(a[i] - b[i]);
    return d;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

Outcome criterion_toy(PresetRunner& runner) {
    const auto t0 = Clock::now();
    const auto& rep = runner.get("toy-2d");
    const double elapsed = seconds_since(t0);
    Outcome o;
    int good = 0;
    for (const auto& r : rep.runs) {
        const double u = r.extra.at("outlier_mass_uot");
        const double h = r.extra.at("outlier_mass_hinge_gan");
        const bool ok = u < kToyRatio * h;
        good += ok ? 1 : 0;
        char buf[160];
        std::snprintf(buf, sizeof buf, "seed %llu: uot %.4f, hinge %.4f -> %s", static_cast<unsigned long long>(r.seed),
                      u, h, ok ? "ok" : "not below a third");
        o.details.emplace_back(buf);
    }
    o.pass = good >= kToyMinSeeds && elapsed <= kToyBudgetSeconds;
    o.summary = "toy outlier mass below a third of hinge mode on " + std::to_string(good) + "/" +
                std::to_string(rep.runs.size()) + " seeds (need " + std::to_string(kToyMinSeeds) + ") in " +
                fmt("%.0f s", elapsed);
    return o;
}

Outcome criterion_collapse(PresetRunner& runner) {
    const auto& c3 = runner.get("C3");
    const auto& c4 = runner.get("C4");
    auto count = [](const std::vector<bool>& flags) { return static_cast<int>(std::count(flags.begin(), flags.end(), true)); };
    const int n3 = count(c3.collapse_flags());
    const int n4 = count(c4.collapse_flags());
    Outcome o;
    o.pass = n3 >= kCollapseMinSeeds && n4 == 0;
    o.summary = "collapse flagged in C3 " + std::to_string(n3) + "/" + std::to_string(c3.runs.size()) + " (need " +
                std::to_string(kCollapseMinSeeds) + "), C4 " + std::to_string(n4) + "/" +
                std::to_string(c4.runs.size()) + " (need 0)";
    for (const auto* rep : {&c3, &c4}) {
        for (const auto& r : rep->runs) {
            double lowest = r.collapse_statistics.empty() ? 0.0 : r.collapse_statistics.front();
            for (double s : r.collapse_statistics) lowest = std::min(lowest, s);
            char buf[160];
            std::snprintf(buf, sizeof buf, "%s seed %llu: lowest statistic %.5f", rep->preset.c_str(),
                          static_cast<unsigned long long>(r.seed), lowest);
            o.details.emplace_back(buf);
        }
    }
    return o;
}

Outcome criterion_ablation(PresetRunner& runner) {
    const auto& c4 = runner.get("C4");
    const auto& c2 = runner.get("C2");
    const auto& c1 = runner.get("C1");
    const auto& e1 = runner.get("E1");
    const double elapsed = runner.seconds("C4") + runner.seconds("C2") + runner.seconds("C1") + runner.seconds("E1");
    const auto a = experiments::paired_greater(c4.per_seed("psnr"), c2.per_seed("psnr"), kAlpha);
    const auto b = experiments::paired_greater(c4.per_seed("psnr"), c1.per_seed("psnr"), kAlpha);
    const auto c = experiments::paired_greater(e1.per_seed("delta_e"), c4.per_seed("delta_e"), kAlpha);
    Outcome o;
    o.pass = a.significant && b.significant && c.significant && elapsed <= kAblationBudgetSeconds;
    o.summary = std::string("PSNR C4>C2 ") + (a.significant ? "yes" : "no") + ", PSNR C4>C1 " +
                (b.significant ? "yes" : "no") + ", dE E1>C4 " + (c.significant ? "yes" : "no") + " in " +
                fmt("%.0f s", elapsed);
    o.details = {paired_line("PSNR C4 - C2", a), paired_line("PSNR C4 - C1", b), paired_line("dE E1 - C4", c)};
    for (const auto* rep : {&c1, &c2, &c4, &e1}) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s: PSNR %.3f +- %.3f, dE %.3f +- %.3f", rep->preset.c_str(),
                      rep->summary.at("psnr").mean, rep->summary.at("psnr").std, rep->summary.at("delta_e").mean,
                      rep->summary.at("delta_e").std);
        o.details.emplace_back(buf);
    }
    return o;
}

Outcome criterion_robustness(PresetRunner& runner) {
    const auto drop_c1 = difference(runner.get("C1-clean").per_seed("psnr"), runner.get("C1-dirty").per_seed("psnr"));
    const auto drop_c4 = difference(runner.get("C4-clean").per_seed("psnr"), runner.get("C4-dirty").per_seed("psnr"));
    const auto cmp = experiments::paired_greater(drop_c1, drop_c4, kAlpha);
    Outcome o;
    o.pass = cmp.significant;
    o.summary = "clean-to-dirty PSNR drop, hinge " + fmt("%.3f", mean_of(drop_c1)) + " vs UOT " +
                fmt("%.3f", mean_of(drop_c4));
    o.details = {paired_line("drop C1 - drop C4", cmp)};
    return o;
}

Outcome criterion_paired(PresetRunner& runner) {
    const double paired = runner.get("C4-paired").summary.at("psnr").mean;
    const double unpaired = runner.get("C4").summary.at("psnr").mean;
    Outcome o;
    o.pass = paired >= unpaired;
    o.summary = "paired C4 PSNR " + fmt("%.3f", paired) + " vs unpaired " + fmt("%.3f", unpaired);
    return o;
}

Outcome criterion_determinism(const fs::path& root) {
    Outcome o;
    // Re-run equivalence on the metrics CSV.
    experiments::RunOptions opts;
    opts.seeds = std::vector<uint64_t>{3};
    opts.epochs = 2;
    const auto a = experiments::run_preset("C4", root / "determinism_a", opts);
    const auto b = experiments::run_preset("C4", root / "determinism_b", opts);
    const bool same_csv = a.metrics_csv() == b.metrics_csv();
    o.details.push_back(std::string("metrics CSV re-run: ") + (same_csv ? "identical" : "differs"));

    // Checkpoint and resume against an uninterrupted run.
    auto preset = experiments::resolve_preset("C4", opts);
    auto cfg = preset.config;
    cfg.seed = 3;
    cfg.epochs = 3;
    cfg.swa_last = 2;
    const auto corpus = data::build_corpus(preset.corpus);
    training::Trainer full(cfg, corpus.train);
    full.train();
    training::Trainer part(cfg, corpus.train);
    part.run_epoch();
    const auto ckpt = root / "determinism_ckpt";
    fs::remove_all(ckpt);
    part.save_checkpoint(ckpt);
    auto resumed = training::Trainer::resume(ckpt, corpus.train);
    resumed->train();
    const bool same_log = resumed->log_csv() == full.log_csv();
    const bool same_weights = networks::bitwise_equal(networks::snapshot(*resumed->final_transport()),
                                                      networks::snapshot(*full.final_transport()));
    o.details.push_back(std::string("resume loss log: ") + (same_log ? "identical" : "differs"));
    o.details.push_back(std::string("resume final weights: ") + (same_weights ? "identical" : "differ"));
    o.pass = same_csv && same_log && same_weights;
    o.summary = o.pass ? "re-run and resume are bitwise identical" : "determinism broken";
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    fs::path out = "acceptance_runs";
    std::vector<int> only;
    std::vector<uint64_t> seeds{1, 2, 3, 4, 5};
    std::optional<int64_t> epochs;
    app.add_option("--out", out, "Directory for experiment artifacts");
    app.add_option("--only", only, "Run only these criteria")->delimiter(',');
    app.add_option("--seeds", seeds, "Seeds for the preset criteria")->delimiter(',');
    app.add_option("--epochs", epochs, "Override the desk epoch budget (diagnostics only)");
    CLI11_PARSE(app, argc, argv);

    torch::set_num_threads(1);
    const std::set<int> wanted(only.begin(), only.end());
    auto enabled = [&](int id) { return wanted.empty() || wanted.count(id) > 0; };
    fs::create_directories(out);
    PresetRunner runner(out, seeds, epochs);

    bool all = true;
    auto report = [&](int id, const Outcome& o) {
        print(id, o);
        all = all && o.pass;
    };
    auto guarded = [&](int id, const std::function<Outcome()>& f) {
        if (!enabled(id)) return;
        try {
            report(id, f());
        } catch (const std::exception& e) {
            report(id, Outcome{false, std::string("error: ") + e.what(), {}});
        }
    };

    guarded(1, [] {
        const auto t0 = Clock::now();
        const auto checks = testing::gradient_suite();
        return check_table(checks, seconds_since(t0), kGradientBudgetSeconds, "gradient suite");
    });
    guarded(2, [] { return check_table(testing::analytic_loss_examples(), 0.0, 0.0, "closed-form loss values"); });
    guarded(3, [] {
        const auto t0 = Clock::now();
        const auto checks = testing::oracle_suite();
        return check_table(checks, seconds_since(t0), kOracleBudgetSeconds, "OT/UOT oracles");
    });
    guarded(4, [&] { return criterion_toy(runner); });
    guarded(5, [&] { return criterion_collapse(runner); });
    guarded(6, [&] { return criterion_ablation(runner); });
    guarded(7, [&] { return criterion_robustness(runner); });
    guarded(8, [&] { return criterion_paired(runner); });
    guarded(9, [&] { return criterion_determinism(out); });
    guarded(10, [] { return check_table(testing::imaging_metrics_suite(), 0.0, 0.0, "imaging and metric examples"); });
    return all ? 0 : 1;
}
