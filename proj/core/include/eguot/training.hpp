#pragma once

// Alternating N:1 optimization of potential + committee versus transport,
// cosine learning-rate schedule, weight averaging of the transport over the
// final epochs, collapse diagnostics and resumable checkpoints.

#include "eguot/data.hpp"
#include "eguot/losses.hpp"
#include "eguot/networks.hpp"

#include <torch/torch.h>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace eguot::training {

enum class Mode { Paired, Unpaired };
enum class Adversarial { Uot, HingeGan };

std::string to_string(Mode m);
std::string to_string(Adversarial a);

struct TrainConfig {
    Mode mode = Mode::Unpaired;
    Adversarial adversarial = Adversarial::Uot;

    losses::PenaltyKind phi1 = losses::PenaltyKind::Exp;
    losses::PenaltyKind phi2 = losses::PenaltyKind::Exp;
    double phi_clamp = 20.0;

    int64_t n_inner = 2;
    double gamma = 1.5;
    double tau = 1e-3;
    /// "mean" averages the unpaired cost over a sample's elements, "sum"
    /// adds them up (the cost then scales with the crop size).
    std::string cost_reduction = "mean";
    double lambda = 1.0;
    /// Weight of the L1 cost in paired mode.
    double paired_weight = 1.0;

    double lr_transport = 1e-4;
    double lr_potential = 2e-4;
    double lr_experts = 2e-4;
    /// Cosine floor as a fraction of each initial rate.
    double lr_min_ratio = 0.01;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double adam_eps = 1e-8;

    int64_t epochs = 60;
    int64_t swa_last = 10;
    int64_t batch = 8;
    /// Outer iterations per epoch; 0 derives it from one pass of the sampler.
    int64_t iterations_per_epoch = 0;
    /// Training crop side in sRGB pixels; 0 trains on full images.
    int64_t crop = 0;

    std::vector<networks::ExpertKind> experts{networks::ExpertKind::Color, networks::ExpertKind::Structure,
                                              networks::ExpertKind::Frequency};

    std::string transport_arch = "default";
    int64_t transport_width = 16;
    int64_t transport_depth = 2;
    std::string potential_arch = "default";
    int64_t potential_width = 16;
    int64_t potential_depth = 2;
    int64_t expert_width = 8;
    int64_t color_pretrain_epochs = 6;

    double collapse_threshold = 1e-3;
    int64_t collapse_probe = 16;

    uint64_t seed = 0;

    void validate() const;
    [[nodiscard]] losses::PenaltyPair penalty() const;
    [[nodiscard]] std::string hash() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

/// Applies "dotted.path=value" onto a JSON object. The value is parsed as
/// JSON when possible, otherwise taken as a string. Unknown leaf keys are an
/// error so typos do not pass silently.
void apply_override(nlohmann::json& j, const std::string& assignment);

/// lr_min + 0.5 (lr0 - lr_min)(1 + cos(pi step / total)).
double cosine_lr(int64_t step, int64_t total, double lr0, double lr_min);

using ParameterSet = std::vector<torch::Tensor>;

/// Element-wise arithmetic mean of parameter snapshots (accumulated in
/// double precision).
ParameterSet swa_finalize(const std::vector<ParameterSet>& snapshots);

struct CollapseCheck {
    bool collapsed = false;
    double statistic = 0.0;
};

/// Mean pairwise per-element RMS distance between outputs [B,...] (B >= 8);
/// collapsed when strictly below `threshold`.
CollapseCheck detect_mode_collapse(const torch::Tensor& outputs, double threshold = 1e-3);

struct Networks {
    networks::TransportPtr transport;
    networks::CriticPtr potential;
    networks::Committee committee;
};

/// Builds transport, potential and the enabled experts from the config.
/// The color expert's encoder is pretrained on `color_corpus` unless
/// `pretrain_color` is false (used when weights come from a checkpoint).
Networks build_networks(const TrainConfig& cfg, const torch::Tensor& color_corpus, bool pretrain_color = true);

struct Batch {
    torch::Tensor raw;     // [B,4,h,w]
    torch::Tensor target;  // [B,3,H,W] real samples for the critics
    torch::Tensor paired;  // [B,3,H,W] ground truth aligned with raw (paired mode)
    torch::Tensor anchor;  // [B,3,H,W] demosaiced raw (unpaired mode)
};

struct StepRecord {
    double potential_objective = 0.0;
    double r1_term = 0.0;
    double expert_disc_objective = 0.0;
};

struct EpochRecord {
    int64_t epoch = 0;
    double lr_transport = 0.0;
    CollapseCheck collapse;
};

struct StepCounters {
    int64_t potential_updates = 0;
    int64_t expert_updates = 0;
    int64_t transport_updates = 0;
};

class Trainer {
public:
    Trainer(TrainConfig cfg, const data::Corpus& corpus);
    Trainer(TrainConfig cfg, const data::Corpus& corpus, Networks nets);

    StepRecord potential_step(const Batch& batch);
    StepRecord experts_step(const Batch& batch);
    losses::LossBreakdown transport_step(const Batch& batch);

    /// One outer iteration: n_inner (potential, experts) pairs, then one
    /// transport step. Appends the breakdown to the log.
    losses::LossBreakdown outer_iteration();

    /// Runs one epoch (schedule update, iterations, SWA snapshot, collapse
    /// check).
    EpochRecord run_epoch();

    /// Runs the remaining epochs up to config.epochs. When a checkpoint
    /// directory is given, a non-finite loss saves state there before the
    /// NonFiniteLoss propagates.
    void train(const std::optional<std::filesystem::path>& abort_checkpoint = std::nullopt);

    /// Transport with weight averaging applied when snapshots exist,
    /// otherwise the live transport.
    [[nodiscard]] networks::TransportPtr final_transport();

    void save_checkpoint(const std::filesystem::path& dir, const nlohmann::json& metric_snapshot = {}) const;
    static std::unique_ptr<Trainer> resume(const std::filesystem::path& dir, const data::Corpus& corpus);

    Batch make_batch(int64_t stream_index) const;

    [[nodiscard]] const TrainConfig& config() const { return cfg_; }
    [[nodiscard]] Networks& nets() { return nets_; }
    [[nodiscard]] int64_t epoch() const { return epoch_; }
    [[nodiscard]] int64_t iterations_per_epoch() const;
    [[nodiscard]] const std::vector<losses::LossBreakdown>& log() const { return log_; }
    [[nodiscard]] const std::vector<EpochRecord>& epochs() const { return epoch_log_; }
    [[nodiscard]] const StepCounters& counters() const { return counters_; }
    [[nodiscard]] bool collapse_raised() const;
    [[nodiscard]] losses::PenaltyPair& penalty() { return penalty_; }

    /// Loss log as CSV, one row per transport step.
    [[nodiscard]] std::string log_csv() const;

private:
    void init_optimizers();
    void set_learning_rates(double fraction_done_epoch);
    torch::Tensor cost_per_sample(const torch::Tensor& generated, const Batch& batch) const;
    Batch next_batch();
    CollapseCheck collapse_check();
    [[nodiscard]] std::vector<torch::Tensor> probe_raw() const;

    TrainConfig cfg_;
    const data::Corpus* corpus_;
    Networks nets_;
    losses::PenaltyPair penalty_;
    std::unique_ptr<torch::optim::Adam> opt_transport_;
    std::unique_ptr<torch::optim::Adam> opt_potential_;
    std::unique_ptr<torch::optim::Adam> opt_experts_;
    std::unique_ptr<data::UnpairedSampler> sampler_;
    int64_t stream_index_ = 0;
    int64_t epoch_ = 0;
    StepCounters counters_;
    StepRecord last_inner_;
    std::vector<losses::LossBreakdown> log_;
    std::vector<EpochRecord> epoch_log_;
    std::vector<ParameterSet> swa_snapshots_;
};

struct TrainResult {
    std::unique_ptr<Trainer> trainer;
    networks::TransportPtr transport;  // weight-averaged final transport
};

/// Builds networks, runs the alternating loop for config.epochs epochs and
/// returns the trainer (holding the full loss log) with the averaged
/// transport.
TrainResult train(const TrainConfig& cfg, const data::Corpus& corpus);

}  // namespace eguot::training
