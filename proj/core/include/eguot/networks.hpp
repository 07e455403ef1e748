#pragma once

// Transport backbone, potential network and the expert committee. Builders
// are seed-deterministic: weights are drawn from a private generator, never
// from the global torch RNG.

#include <torch/torch.h>

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace eguot::networks {

enum class NetworkKind { Transport, Potential, ColorExpert, StructureExpert, FrequencyExpert };

enum class ExpertKind { Color, Structure, Frequency };

std::string to_string(ExpertKind kind);
ExpertKind expert_kind_from_string(const std::string& name);

struct NetworkSpec {
    NetworkKind kind = NetworkKind::Transport;
    int64_t width = 16;
    int64_t depth = 2;
    uint64_t seed = 0;
    /// Registry key; "default" resolves to the built-in architecture.
    std::string arch = "default";

    void validate() const;
};

/// Raw batch [B,4,H/2,W/2] -> sRGB batch [B,3,H,W] in [0,1].
class TransportNetwork : public torch::nn::Module {
public:
    virtual torch::Tensor forward(const torch::Tensor& raw) = 0;
};

/// sRGB batch [B,3,H,W] -> one unbounded logit per sample, shape [B].
class ImageCritic : public torch::nn::Module {
public:
    virtual torch::Tensor forward(const torch::Tensor& srgb) = 0;
    /// Parameters the optimizer may update (frozen sub-networks excluded).
    virtual std::vector<torch::Tensor> trainable_parameters();
};

using TransportPtr = std::shared_ptr<TransportNetwork>;
using CriticPtr = std::shared_ptr<ImageCritic>;

/// Value range squashing used by the transport head: the forward value is
/// clamp(x, 0, 1) exactly, while the gradient passes with slope 1 inside
/// the range and `leak` outside it.
torch::Tensor clamped_ramp(const torch::Tensor& x, double leak = 0.05);

TransportPtr build_transport(const NetworkSpec& spec);
CriticPtr build_potential(const NetworkSpec& spec);
CriticPtr build_structure_expert(const NetworkSpec& spec);
/// Full-resolution patch logits [B,1,h,w] of a structure expert.
torch::Tensor structure_patch_logits(ImageCritic& expert, const torch::Tensor& srgb);
CriticPtr build_frequency_expert(const NetworkSpec& spec);

// -- color expert -----------------------------------------------------------

/// Convolutional encoder over the L* channel (scaled to [0,1]); produces a
/// [B, 4*width, H/4, W/4] feature map.
class ColorEncoderImpl : public torch::nn::Module {
public:
    ColorEncoderImpl(int64_t width, uint64_t seed);
    torch::Tensor forward(const torch::Tensor& lightness);
    [[nodiscard]] int64_t out_channels() const { return out_channels_; }
    void freeze();
    [[nodiscard]] bool frozen() const { return frozen_; }

private:
    torch::nn::Sequential body_{nullptr};
    int64_t out_channels_;
    bool frozen_ = false;
};
TORCH_MODULE(ColorEncoder);

struct ColorPretrainResult {
    ColorEncoder encoder{nullptr};
    /// Validation L2 (a*, b* in units of 100) before training and after each epoch.
    std::vector<double> validation_l2;
};

/// Trains an encoder-decoder to predict (a*, b*) from L* on `corpus`
/// ([N,3,H,W], N >= 64) with an L2 loss and returns the frozen encoder.
ColorPretrainResult pretrain_color_encoder(const torch::Tensor& corpus, int64_t epochs, int64_t width,
                                           uint64_t seed, int64_t batch = 16, double lr = 2e-3);

/// Frozen encoder on L*, trainable fusion of its features with the
/// downsampled chroma planes, pooled chroma statistics, trainable head.
CriticPtr build_color_expert(ColorEncoder frozen_encoder, const NetworkSpec& spec);

// -- committee --------------------------------------------------------------

struct CommitteeMember {
    ExpertKind kind;
    CriticPtr network;
};

struct Committee {
    std::vector<CommitteeMember> members;

    [[nodiscard]] bool empty() const { return members.empty(); }
    [[nodiscard]] std::size_t size() const { return members.size(); }
    [[nodiscard]] std::vector<torch::Tensor> trainable_parameters() const;
};

struct CommitteeScores {
    std::vector<ExpertKind> labels;
    std::vector<torch::Tensor> scores;  // one [B] tensor per expert
};

CommitteeScores committee_score(const Committee& committee, const torch::Tensor& batch);

// -- registry ---------------------------------------------------------------

using TransportFactory = std::function<TransportPtr(const NetworkSpec&)>;
using CriticFactory = std::function<CriticPtr(const NetworkSpec&)>;

/// Name-keyed factories so alternate backbones can be selected from config.
class Registry {
public:
    static Registry& instance();

    void register_transport(const std::string& name, TransportFactory f);
    void register_potential(const std::string& name, CriticFactory f);
    [[nodiscard]] TransportPtr make_transport(const NetworkSpec& spec) const;
    [[nodiscard]] CriticPtr make_potential(const NetworkSpec& spec) const;
    [[nodiscard]] std::vector<std::string> transport_names() const;
    [[nodiscard]] std::vector<std::string> potential_names() const;

private:
    Registry();
    std::map<std::string, TransportFactory> transports_;
    std::map<std::string, CriticFactory> potentials_;
};

// -- parameter utilities ----------------------------------------------------

/// Deep copy of every parameter (and buffer) of a module, in registration order.
std::vector<torch::Tensor> snapshot(const torch::nn::Module& module);
bool bitwise_equal(const std::vector<torch::Tensor>& a, const std::vector<torch::Tensor>& b);
void load_snapshot(torch::nn::Module& module, const std::vector<torch::Tensor>& values);
int64_t parameter_count(const torch::nn::Module& module);

/// Re-draws all conv/linear weights from a private generator (scaled
/// uniform, fan-in) and zeroes biases.
void init_weights(torch::nn::Module& module, uint64_t seed);

}  // namespace eguot::networks
