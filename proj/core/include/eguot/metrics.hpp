#pragma once

// PSNR, SSIM and CIE76 color difference, plus corpus-level aggregation.

#include <torch/torch.h>

#include <nlohmann/json.hpp>

#include <functional>
#include <string>
#include <vector>

namespace eguot::metrics {

inline constexpr double kPsnrCap = 100.0;

/// 10 log10(1 / MSE) with peak 1.0, capped at 100 dB (returned for MSE = 0).
double psnr(const torch::Tensor& a, const torch::Tensor& b);

struct SsimOptions {
    int window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    /// Average per-channel SSIM instead of scoring the luma plane.
    bool per_channel = false;
};

/// Single-scale SSIM with a Gaussian window over every fully contained
/// window position, averaged. Inputs are [C,H,W] with C in {1,3}.
double ssim(const torch::Tensor& a, const torch::Tensor& b, const SsimOptions& opts = {});

/// Per-pixel Euclidean distance in CIELAB (CIE76), averaged over pixels.
double delta_e(const torch::Tensor& a, const torch::Tensor& b);

struct MetricRow {
    int64_t index = 0;
    double psnr = 0.0;
    double ssim = 0.0;
    double delta_e = 0.0;
};

struct MetricReport {
    double psnr = 0.0;
    double ssim = 0.0;
    double delta_e = 0.0;
    int64_t n_images = 0;
    std::vector<MetricRow> rows;

    /// Per-image rows, one line each, header first.
    [[nodiscard]] std::string to_csv() const;
    [[nodiscard]] nlohmann::json aggregates_json() const;
};

void to_json(nlohmann::json& j, const MetricReport& r);
void from_json(const nlohmann::json& j, MetricReport& r);

MetricReport report_from_rows(std::vector<MetricRow> rows);

/// Scores predictions [N,3,H,W] against references [N,3,H,W].
MetricReport evaluate_predictions(const torch::Tensor& predictions, const torch::Tensor& references);

using Predictor = std::function<torch::Tensor(const torch::Tensor&)>;

/// Runs `predictor` on raw batches (no grad) and scores against ground truth.
MetricReport evaluate_corpus(const Predictor& predictor, const torch::Tensor& raw, const torch::Tensor& gt,
                             int64_t batch = 16);

}  // namespace eguot::metrics
