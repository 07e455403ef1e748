#pragma once

// Synthetic paired raw/sRGB corpora: procedural scenes, a parametric camera
// forward model, target-domain outlier injection and the batch samplers.

#include <torch/torch.h>

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace eguot::data {

/// Deterministic 64-bit seed mixing (splitmix64 over the combined words).
uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b = 0);

struct CameraModel {
    /// Row-major 3x3, maps linear sRGB to sensor RGB.
    std::array<double, 9> color_matrix{0.78, 0.17, 0.05,  //
                                       0.12, 0.76, 0.12,  //
                                       0.04, 0.26, 0.70};
    double gamma = 2.2;
    double noise_read = 0.004;
    double noise_shot = 0.002;
    double exposure = 0.85;

    /// Throws on a singular/ill-conditioned matrix (cond >= 1e3), gamma or
    /// exposure <= 0, or negative noise.
    void validate() const;
    [[nodiscard]] double condition_number() const;

    static CameraModel identity();
};

void to_json(nlohmann::json& j, const CameraModel& c);
void from_json(const nlohmann::json& j, CameraModel& c);

enum class CorruptionOp { JitterHue, ShiftContrast, ShiftBrightness };

struct CorruptionSpec {
    double fraction = 0.0;
    std::vector<CorruptionOp> ops{CorruptionOp::JitterHue, CorruptionOp::ShiftContrast,
                                  CorruptionOp::ShiftBrightness};
    double hue_max_deg = 60.0;
    double contrast_min = 0.3;
    double contrast_max = 1.7;
    double brightness_max = 0.35;
    uint64_t seed = 0;

    void validate() const;
};

void to_json(nlohmann::json& j, const CorruptionSpec& c);
void from_json(const nlohmann::json& j, CorruptionSpec& c);

/// Procedural ground-truth scenes [count, 3, H, W] in [0,1]: smooth color
/// gradients, colored shapes, stripe/checker textures and noise fields.
/// Each image is generated from its own derived seed.
torch::Tensor generate_scenes(int64_t count, int64_t height, int64_t width, uint64_t seed);

/// inverse gamma -> color matrix -> exposure -> RGGB mosaic ->
/// heteroscedastic Gaussian noise (var = read^2 + shot * signal) -> clamp.
/// Accepts [3,H,W] or [B,3,H,W]; sample i of a batch uses derive_seed(seed, i).
torch::Tensor camera_forward(const torch::Tensor& gt, const CameraModel& cam, uint64_t seed);

struct CorruptionResult {
    torch::Tensor corpus;    // [N,3,H,W]
    std::vector<bool> mask;  // true where the image was corrupted
};

/// Transforms exactly floor(fraction * N) randomly chosen images; every
/// other image is returned bit-identical.
CorruptionResult corrupt_targets(const torch::Tensor& corpus, const CorruptionSpec& spec);

/// Applies one sampled set of ops to a single [3,H,W] image.
torch::Tensor corrupt_image(const torch::Tensor& image, const CorruptionSpec& spec, std::mt19937_64& rng);

/// Index batches for paired training: the same permutation on both sides.
class PairedSampler {
public:
    PairedSampler(int64_t corpus_size, int64_t batch, uint64_t seed);
    [[nodiscard]] int64_t steps_per_epoch() const { return n_ / batch_; }
    [[nodiscard]] std::vector<int64_t> batch(int64_t epoch, int64_t step) const;

private:
    int64_t n_;
    int64_t batch_;
    uint64_t seed_;
};

/// Index batches for unpaired training. The raw and sRGB permutations come
/// from independent sub-seeds; within one epoch no index repeats on either
/// side. Batches are addressable by (epoch, step) so a resumed run sees the
/// same stream; next() walks the stream in order.
class UnpairedSampler {
public:
    UnpairedSampler(int64_t raw_size, int64_t srgb_size, int64_t batch, uint64_t seed);

    struct Batch {
        std::vector<int64_t> raw;
        std::vector<int64_t> srgb;
    };

    [[nodiscard]] int64_t steps_per_epoch() const;
    [[nodiscard]] Batch batch(int64_t epoch, int64_t step) const;
    Batch next();
    void seek(int64_t epoch, int64_t step);

private:
    int64_t n_raw_;
    int64_t n_srgb_;
    int64_t batch_;
    uint64_t raw_seed_;
    uint64_t srgb_seed_;
    int64_t epoch_ = 0;
    int64_t step_ = 0;
};

/// Seeded permutation of [0, n).
std::vector<int64_t> permutation(int64_t n, uint64_t seed);

struct CorpusSpec {
    int64_t count = 512;
    int64_t height = 64;
    int64_t width = 64;
    uint64_t seed = 1;
    int64_t test_count = 64;
    uint64_t test_seed = 1001;
    CameraModel camera{};
    CorruptionSpec corruption{};
    /// Exploratory: also corrupt the source scenes before the camera model.
    bool corrupt_source = false;
};

void to_json(nlohmann::json& j, const CorpusSpec& c);
void from_json(const nlohmann::json& j, CorpusSpec& c);

struct Corpus {
    torch::Tensor raw;      // [N,4,H/2,W/2]
    torch::Tensor gt;       // [N,3,H,W] clean ground truth paired with raw
    torch::Tensor targets;  // [N,3,H,W] target-domain images (possibly corrupted)
    std::vector<bool> corrupted;

    [[nodiscard]] int64_t size() const { return raw.size(0); }
};

struct CorpusSet {
    CorpusSpec spec;
    Corpus train;
    Corpus test;  // always clean
};

CorpusSet build_corpus(const CorpusSpec& spec);

/// Directory of 16-bit PNGs (gt, targets, unpacked raw mosaics) plus
/// manifest.json with camera parameters, seeds and the corruption mask.
void save_corpus(const CorpusSet& set, const std::filesystem::path& dir);
CorpusSet load_corpus(const std::filesystem::path& dir);

}  // namespace eguot::data
