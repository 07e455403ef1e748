#pragma once

// Named experiment presets (framework and expert ablations, clean/dirty
// robustness pairs, paired mode, 2D toy), run orchestration and reports.

#include "eguot/data.hpp"
#include "eguot/metrics.hpp"
#include "eguot/networks.hpp"
#include "eguot/toy_ot.hpp"
#include "eguot/training.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace eguot::experiments {

struct ExperimentPreset {
    std::string name;
    std::string description;
    training::TrainConfig config;
    data::CorpusSpec corpus;
    std::vector<uint64_t> seeds;
    bool toy = false;
    toy_ot::ToySpec toy_spec;
};

/// Desk-scale training settings shared by the image presets.
training::TrainConfig desk_config();

const std::vector<ExperimentPreset>& presets();
std::vector<std::string> preset_names();
/// Throws with the list of available names (closest first) when unknown.
const ExperimentPreset& find_preset(const std::string& name);

struct MetricSummary {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation (0 for one value)
};

MetricSummary summarize(const std::vector<double>& values);

struct SeedResult {
    uint64_t seed = 0;
    metrics::MetricReport metrics;
    bool collapsed = false;
    std::vector<double> collapse_statistics;  // one per epoch
    std::vector<double> loss_curve;           // total transport objective per step
    std::map<std::string, double> extra;      // preset-specific scalars (toy statistics)
    std::string checkpoint;
    std::string grid;
    std::string loss_log;
    double seconds = 0.0;
};

struct ExperimentReport {
    std::string preset;
    nlohmann::json config;
    nlohmann::json corpus;
    std::vector<SeedResult> runs;
    std::map<std::string, MetricSummary> summary;

    [[nodiscard]] std::vector<bool> collapse_flags() const;
    [[nodiscard]] std::vector<double> per_seed(const std::string& metric) const;
    /// Per-seed metrics, one row each, fixed-precision; no timings.
    [[nodiscard]] std::string metrics_csv() const;
    [[nodiscard]] bool has_image_metrics() const;
    /// Recomputes `summary` from the per-seed rows.
    void resummarize();
};

void to_json(nlohmann::json& j, const ExperimentReport& r);
void from_json(const nlohmann::json& j, ExperimentReport& r);
ExperimentReport load_report(const std::filesystem::path& path);

struct RunOptions {
    std::optional<std::vector<uint64_t>> seeds;
    std::optional<int64_t> epochs;
    std::vector<std::string> overrides;  // dotted key=value onto the TrainConfig
    bool write_checkpoints = true;
    int64_t grid_samples = 4;
    std::function<void(const std::string&)> progress;
};

/// Resolved preset after seed/epoch/override options.
ExperimentPreset resolve_preset(const std::string& name, const RunOptions& opts);

/// Generates the corpus, trains and evaluates every seed and writes
/// report.json, metrics.csv, manifest.json and per-seed artifacts under
/// `output_dir`.
ExperimentReport run_preset(const std::string& name, const std::filesystem::path& output_dir,
                            const RunOptions& opts = {});
ExperimentReport run_preset(const ExperimentPreset& preset, const std::filesystem::path& output_dir,
                            const RunOptions& opts = {});

/// $EGUOT_OUTPUT_ROOT/<preset>, or runs/<preset> when unset.
std::filesystem::path default_output_dir(const std::string& preset);

std::string git_revision();

// -- comparison -------------------------------------------------------------

struct RankingRow {
    std::string name;
    double psnr = 0.0;
    double ssim = 0.0;
    double delta_e = 0.0;
    bool best_psnr = false;
    bool best_ssim = false;
    bool best_delta_e = false;
};

struct RankingTable {
    std::vector<RankingRow> rows;
    [[nodiscard]] std::string to_csv() const;
    [[nodiscard]] std::string to_text() const;
};

/// Orders by mean PSNR (descending), ties by lower mean Delta E, then by
/// name. Best values per metric are marked.
RankingTable compare_reports(const std::vector<ExperimentReport>& reports);

struct PairedComparison {
    double mean_difference = 0.0;
    double t_statistic = 0.0;
    double critical = 0.0;
    int64_t positive = 0;  // seeds where a > b
    bool significant = false;
};

/// One-sided paired t-test of mean(a - b) > 0 at level alpha (0.05 or
/// 0.01) over matched seeds (2 to 31 pairs).
PairedComparison paired_greater(const std::vector<double>& a, const std::vector<double>& b, double alpha = 0.05);

// -- checkpoints and sample grids -------------------------------------------

/// Final (weight-averaged when available) transport stored in a checkpoint.
networks::TransportPtr load_transport(const std::filesystem::path& checkpoint_dir);

/// Grid PNG with k rows of (demosaiced input | prediction | ground truth).
/// Samples are the first k of a seeded permutation of the test corpus.
void emit_sample_grid(const std::filesystem::path& checkpoint_dir, const data::Corpus& test,
                      const std::filesystem::path& path, int64_t k = 4, uint64_t seed = 0);
void emit_sample_grid(networks::TransportNetwork& transport, const data::Corpus& test,
                      const std::filesystem::path& path, int64_t k = 4, uint64_t seed = 0);

}  // namespace eguot::experiments
