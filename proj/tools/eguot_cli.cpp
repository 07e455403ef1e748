// eguot: run presets, compare reports, render sample grids.

#include "eguot/data.hpp"
#include "eguot/error.hpp"
#include "eguot/experiments.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace eguot;
namespace fs = std::filesystem;

namespace {

// Corpus spec for a checkpoint: explicit preset, else the report two levels up.
data::CorpusSpec corpus_for(const fs::path& checkpoint, const std::string& preset) {
    if (!preset.empty()) return experiments::find_preset(preset).corpus;
    const auto report = checkpoint.parent_path().parent_path() / "report.json";
    std::ifstream in(report);
    if (!in) throw Error("no report.json next to " + checkpoint.string() + "; pass --preset");
    return nlohmann::json::parse(in).at("corpus").get<data::CorpusSpec>();
}

int run(const std::string& name, const std::vector<uint64_t>& seeds, std::optional<int64_t> epochs,
        const std::string& out, const std::vector<std::string>& overrides, bool quiet) {
    experiments::RunOptions opts;
    if (!seeds.empty()) opts.seeds = seeds;
    opts.epochs = epochs;
    opts.overrides = overrides;
    if (!quiet) opts.progress = [](const std::string& msg) { std::fprintf(stderr, "%s\n", msg.c_str()); };
    const fs::path dir = out.empty() ? experiments::default_output_dir(name) : fs::path(out);
    const auto rep = experiments::run_preset(name, dir, opts);
    std::cout << rep.metrics_csv();
    for (const auto& [metric, s] : rep.summary) {
        std::printf("# %s mean %.6f std %.6f\n", metric.c_str(), s.mean, s.std);
    }
    std::printf("# report %s\n", (dir / "report.json").c_str());
    return 0;
}

int compare(const std::vector<std::string>& paths, bool csv) {
    std::vector<experiments::ExperimentReport> reports;
    for (const auto& p : paths) {
        fs::path f = p;
        if (fs::is_directory(f)) f /= "report.json";
        reports.push_back(experiments::load_report(f));
    }
    const auto table = experiments::compare_reports(reports);
    std::cout << (csv ? table.to_csv() : table.to_text());
    return 0;
}

int grid(const std::string& checkpoint, const std::string& preset, const std::string& out, int64_t k,
         uint64_t seed) {
    const fs::path ck = checkpoint;
    const auto corpus = data::build_corpus(corpus_for(ck, preset));
    const fs::path path = out.empty() ? ck / "samples.png" : fs::path(out);
    experiments::emit_sample_grid(ck, corpus.test, path, k, seed);
    std::printf("%s\n", path.c_str());
    return 0;
}

int list() {
    for (const auto& p : experiments::presets()) {
        std::printf("%-10s %s\n", p.name.c_str(), p.description.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Experts-guided unbalanced OT for raw-to-sRGB: experiment runner"};
    app.require_subcommand(1);

    auto* run_cmd = app.add_subcommand("run", "Train and evaluate a preset over its seeds");
    std::string preset;
    std::vector<uint64_t> seeds;
    std::optional<int64_t> epochs;
    std::string out;
    std::vector<std::string> overrides;
    bool quiet = false;
    run_cmd->add_option("preset", preset, "Preset name (see `list`)")->required();
    run_cmd->add_option("--seeds", seeds, "Seeds, comma separated")->delimiter(',');
    run_cmd->add_option("--epochs", epochs, "Epoch budget override");
    run_cmd->add_option("--out", out, "Output directory (default $EGUOT_OUTPUT_ROOT/<preset> or runs/<preset>)");
    run_cmd->add_option("--override", overrides, "Config override key=value (repeatable)");
    run_cmd->add_flag("--quiet", quiet, "No progress on stderr");

    auto* cmp_cmd = app.add_subcommand("compare", "Rank finished runs by PSNR");
    std::vector<std::string> reports;
    bool csv = false;
    cmp_cmd->add_option("reports", reports, "report.json files or run directories")->required();
    cmp_cmd->add_flag("--csv", csv, "CSV instead of a text table");

    auto* grid_cmd = app.add_subcommand("grid", "Render input | prediction | ground truth rows");
    std::string checkpoint;
    std::string grid_preset;
    std::string grid_out;
    int64_t k = 4;
    uint64_t grid_seed = 0;
    grid_cmd->add_option("checkpoint", checkpoint, "Checkpoint directory")->required()->check(CLI::ExistingDirectory);
    grid_cmd->add_option("--preset", grid_preset, "Preset whose test corpus to use");
    grid_cmd->add_option("--out", grid_out, "PNG path (default <checkpoint>/samples.png)");
    grid_cmd->add_option("-k", k, "Number of rows");
    grid_cmd->add_option("--seed", grid_seed, "Sample selection seed");

    auto* list_cmd = app.add_subcommand("list", "List presets");

    CLI11_PARSE(app, argc, argv);
    torch::set_num_threads(1);
    try {
        if (*run_cmd) return run(preset, seeds, epochs, out, overrides, quiet);
        if (*cmp_cmd) return compare(reports, csv);
        if (*grid_cmd) return grid(checkpoint, grid_preset, grid_out, k, grid_seed);
        if (*list_cmd) return list();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "eguot: %s\n", e.what());
        return 1;
    }
    return 0;
}
