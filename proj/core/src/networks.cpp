#include "eguot/networks.hpp"

#include "eguot/error.hpp"
#include "eguot/imaging.hpp"

#include <ATen/CPUGeneratorImpl.h>

#include <cmath>

namespace eguot::networks {

namespace nn = torch::nn;
namespace F = torch::nn::functional;

namespace {

constexpr double kSlope = 0.2;

nn::Conv2d conv(int64_t in, int64_t out, int64_t k, int64_t stride = 1, int64_t pad = -1) {
    if (pad < 0) pad = k / 2;
    return nn::Conv2d(nn::Conv2dOptions(in, out, k).stride(stride).padding(pad));
}

nn::LeakyReLU lrelu() { return nn::LeakyReLU(nn::LeakyReLUOptions().negative_slope(kSlope)); }

torch::Tensor act(const torch::Tensor& x) { return F::leaky_relu(x, F::LeakyReLUFuncOptions().negative_slope(kSlope)); }

void require_image_batch(const torch::Tensor& x, int64_t channels, const char* who) {
    if (!x.defined() || x.dim() != 4 || x.size(1) != channels) {
        throw Error(std::string(who) + ": expected [B," + std::to_string(channels) + ",H,W] input");
    }
}

}  // namespace

std::string to_string(ExpertKind kind) {
    switch (kind) {
        case ExpertKind::Color: return "color";
        case ExpertKind::Structure: return "structure";
        case ExpertKind::Frequency: return "frequency";
    }
    return "?";
}

ExpertKind expert_kind_from_string(const std::string& name) {
    if (name == "color") return ExpertKind::Color;
    if (name == "structure") return ExpertKind::Structure;
    if (name == "frequency") return ExpertKind::Frequency;
    throw Error("unknown expert '" + name + "' (expected color, structure or frequency)");
}

void NetworkSpec::validate() const {
    if (width < 1 || depth < 1) throw Error("NetworkSpec: width and depth must be >= 1");
}

std::vector<torch::Tensor> ImageCritic::trainable_parameters() {
    std::vector<torch::Tensor> out;
    for (auto& p : parameters())
        if (p.requires_grad()) out.push_back(p);
    return out;
}

torch::Tensor clamped_ramp(const torch::Tensor& x, double leak) {
    auto clamped = torch::clamp(x, 0.0, 1.0);
    auto excess = x - clamped;
    return clamped + leak * excess - (leak * excess).detach();
}

void init_weights(torch::nn::Module& module, uint64_t seed) {
    auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
    torch::NoGradGuard no_grad;
    for (auto& item : module.named_parameters(/*recurse=*/true)) {
        auto& p = item.value();
        const auto& name = item.key();
        const bool is_bias = name.size() >= 4 && name.compare(name.size() - 4, 4, "bias") == 0;
        if (is_bias || p.dim() < 2) {
            p.zero_();
            continue;
        }
        const int64_t fan_in = p.numel() / p.size(0);
        const double bound = std::sqrt(6.0 / ((1.0 + kSlope * kSlope) * static_cast<double>(fan_in)));
        auto u = torch::rand(p.sizes(), gen, torch::TensorOptions().dtype(p.scalar_type()));
        p.copy_(u * (2.0 * bound) - bound);
    }
}

// ---------------------------------------------------------------------------
// Transport: small U-Net on the packed planes with a pixel-shuffle 2x head.
// The residual variant predicts a correction on top of the bilinear
// demosaic; the direct variant predicts the image around mid-gray.

class UNetTransport : public TransportNetwork {
public:
    UNetTransport(const NetworkSpec& spec, bool residual) : depth_(spec.depth), residual_(residual) {
        const int64_t w = spec.width;
        stem_ = register_module("stem", nn::Sequential(conv(4, w, 3), lrelu(), conv(w, w, 3), lrelu()));
        int64_t c = w;
        for (int64_t d = 0; d < depth_; ++d) {
            down_.push_back(register_module("down" + std::to_string(d),
                                            nn::Sequential(conv(c, 2 * c, 3, 2), lrelu(), conv(2 * c, 2 * c, 3), lrelu())));
            c *= 2;
        }
        for (int64_t d = 0; d < depth_; ++d) {
            up_.push_back(register_module("up" + std::to_string(d), conv(c, c / 2, 3)));
            fuse_.push_back(register_module("fuse" + std::to_string(d), nn::Sequential(conv(c, c / 2, 3), lrelu())));
            c /= 2;
        }
        head_ = register_module("head", nn::Sequential(conv(w, w, 3), lrelu(), conv(w, 12, 1)));
        init_weights(*this, spec.seed);
        if (residual_) {
            torch::NoGradGuard ng;
            head_->ptr(2)->as<nn::Conv2d>()->weight.mul_(0.1);
        }
    }

    torch::Tensor forward(const torch::Tensor& raw) override {
        require_image_batch(raw, 4, "transport");
        if (raw.size(2) % (1LL << depth_) != 0 || raw.size(3) % (1LL << depth_) != 0) {
            throw Error("transport: raw spatial size must be divisible by " + std::to_string(1LL << depth_));
        }
        std::vector<torch::Tensor> skips;
        auto x = stem_->forward(raw * 2.0 - 1.0);
        for (auto& d : down_) {
            skips.push_back(x);
            x = d->forward(x);
        }
        for (std::size_t i = 0; i < up_.size(); ++i) {
            x = F::interpolate(x, F::InterpolateFuncOptions().scale_factor(std::vector<double>{2.0, 2.0}).mode(torch::kNearest));
            x = act(up_[i]->forward(x));
            x = fuse_[i]->forward(torch::cat({x, skips[skips.size() - 1 - i]}, 1));
        }
        auto y = torch::pixel_shuffle(head_->forward(x), 2);
        return clamped_ramp((residual_ ? imaging::demosaic_bilinear(raw) : torch::full_like(y, 0.5)) + y);
    }

private:
    int64_t depth_;
    bool residual_;
    nn::Sequential stem_{nullptr};
    nn::Sequential head_{nullptr};
    std::vector<nn::Sequential> down_;
    std::vector<nn::Conv2d> up_;
    std::vector<nn::Sequential> fuse_;
};

// ---------------------------------------------------------------------------
// Potential: strided conv encoder, global average pooling, MLP head.

class ConvPotential : public ImageCritic {
public:
    explicit ConvPotential(const NetworkSpec& spec) {
        int64_t c = spec.width;
        body_ = nn::Sequential(conv(3, c, 3), lrelu());
        for (int64_t d = 0; d <= spec.depth; ++d) {
            const int64_t next = std::min(2 * c, 8 * spec.width);
            body_->push_back(conv(c, next, 4, 2, 1));
            body_->push_back(lrelu());
            c = next;
        }
        register_module("body", body_);
        head_ = register_module("head", nn::Sequential(nn::Linear(c, c), lrelu(), nn::Linear(c, 1)));
        init_weights(*this, spec.seed);
    }

    torch::Tensor forward(const torch::Tensor& srgb) override {
        require_image_batch(srgb, 3, "potential");
        auto f = body_->forward(srgb * 2.0 - 1.0).mean({2, 3});
        return head_->forward(f).squeeze(1);
    }

private:
    nn::Sequential body_{nullptr};
    nn::Sequential head_{nullptr};
};

// ---------------------------------------------------------------------------
// Structure expert: one PatchGAN classifier shared across three scales.

class MultiScalePatchExpert : public ImageCritic {
public:
    explicit MultiScalePatchExpert(const NetworkSpec& spec) : depth_(spec.depth) {
        int64_t c = spec.width;
        patch_ = nn::Sequential(conv(3, c, 4, 2, 1), lrelu());
        for (int64_t d = 1; d < depth_; ++d) {
            patch_->push_back(conv(c, 2 * c, 4, 2, 1));
            patch_->push_back(lrelu());
            c *= 2;
        }
        patch_->push_back(conv(c, 1, 3, 1, 1));
        register_module("patch", patch_);
        init_weights(*this, spec.seed);
    }

    [[nodiscard]] int64_t min_side() const { return 8LL << depth_; }

    /// Patch logits at full resolution, [B,1,h,w].
    torch::Tensor patch_logits(const torch::Tensor& srgb) { return patch_->forward(srgb * 2.0 - 1.0); }

    torch::Tensor forward(const torch::Tensor& srgb) override {
        require_image_batch(srgb, 3, "structure expert");
        if (srgb.size(2) < min_side() || srgb.size(3) < min_side()) {
            throw Error("structure expert: input smaller than " + std::to_string(min_side()) +
                        " pixels cannot cover the quarter-scale patch field");
        }
        torch::Tensor total;
        auto x = srgb;
        for (int s = 0; s < kScales; ++s) {
            if (s > 0) x = F::avg_pool2d(x, F::AvgPool2dFuncOptions(2));
            auto m = patch_logits(x).mean({1, 2, 3});
            total = s == 0 ? m : total + m;
        }
        return total / static_cast<double>(kScales);
    }

private:
    static constexpr int kScales = 3;
    int64_t depth_;
    nn::Sequential patch_{nullptr};
};

torch::Tensor structure_patch_logits(ImageCritic& expert, const torch::Tensor& srgb) {
    auto* s = dynamic_cast<MultiScalePatchExpert*>(&expert);
    if (s == nullptr) throw Error("structure_patch_logits: not a structure expert");
    return s->patch_logits(srgb);
}

// ---------------------------------------------------------------------------
// Frequency expert: grayscale -> centered log-magnitude spectrum ->
// per-sample standardization -> light CNN -> 4x4 pooled map -> linear.

class SpectrumExpert : public ImageCritic {
public:
    explicit SpectrumExpert(const NetworkSpec& spec) {
        const int64_t c = spec.width;
        body_ = register_module("body", nn::Sequential(conv(1, c, 3, 2), lrelu(), conv(c, 2 * c, 3, 2), lrelu(),
                                                       conv(2 * c, 2 * c, 3, 1), lrelu()));
        head_ = register_module("head", nn::Linear(2 * c * 16, 1));
        init_weights(*this, spec.seed);
    }

    torch::Tensor forward(const torch::Tensor& srgb) override {
        require_image_batch(srgb, 3, "frequency expert");
        auto spec = imaging::fft_log_magnitude(imaging::to_grayscale(srgb), 1e-8);
        auto mean = spec.mean({1, 2, 3}, true);
        auto std = (spec - mean).pow(2).mean({1, 2, 3}, true).add(1e-6).sqrt();
        auto f = body_->forward((spec - mean) / std);
        f = F::adaptive_avg_pool2d(f, F::AdaptiveAvgPool2dFuncOptions(4));
        return head_->forward(f.flatten(1)).squeeze(1);
    }

private:
    nn::Sequential body_{nullptr};
    nn::Linear head_{nullptr};
};

// ---------------------------------------------------------------------------
// Color expert

ColorEncoderImpl::ColorEncoderImpl(int64_t width, uint64_t seed) : out_channels_(4 * width) {
    body_ = register_module("body", nn::Sequential(conv(1, width, 3), lrelu(), conv(width, 2 * width, 4, 2, 1), lrelu(),
                                                   conv(2 * width, 4 * width, 4, 2, 1), lrelu(),
                                                   conv(4 * width, 4 * width, 3), lrelu()));
    init_weights(*this, seed);
}

torch::Tensor ColorEncoderImpl::forward(const torch::Tensor& lightness) { return body_->forward(lightness * 2.0 - 1.0); }

void ColorEncoderImpl::freeze() {
    for (auto& p : parameters()) p.requires_grad_(false);
    frozen_ = true;
}

namespace {

class ColorDecoderImpl : public torch::nn::Module {
public:
    ColorDecoderImpl(int64_t in, int64_t width, uint64_t seed) {
        body_ = register_module("body", nn::Sequential(conv(in, 2 * width, 3), lrelu()));
        mid_ = register_module("mid", nn::Sequential(conv(2 * width, width, 3), lrelu()));
        out_ = register_module("out", conv(width, 2, 1));
        init_weights(*this, seed);
    }
    torch::Tensor forward(const torch::Tensor& f) {
        auto up = [](const torch::Tensor& t) {
            return F::interpolate(t, F::InterpolateFuncOptions().scale_factor(std::vector<double>{2.0, 2.0}).mode(torch::kNearest));
        };
        auto x = body_->forward(up(f));
        x = mid_->forward(up(x));
        return out_->forward(x);
    }

private:
    nn::Sequential body_{nullptr};
    nn::Sequential mid_{nullptr};
    nn::Conv2d out_{nullptr};
};
TORCH_MODULE(ColorDecoder);

// L* in [0,1] and (a*, b*) in units of 100.
std::pair<torch::Tensor, torch::Tensor> split_lab(const torch::Tensor& srgb) {
    auto lab = imaging::rgb_to_lab(srgb);
    using torch::indexing::Slice;
    return {lab.index({Slice(), Slice(0, 1)}) / 100.0, lab.index({Slice(), Slice(1, 3)}) / 100.0};
}

class ColorExpertNet : public ImageCritic {
public:
    ColorExpertNet(ColorEncoder encoder, const NetworkSpec& spec) : encoder_(std::move(encoder)) {
        if (!encoder_) throw Error("color expert: missing frozen encoder");
        encoder_->freeze();
        register_module("encoder", encoder_);
        const int64_t c = 2 * spec.width;
        fusion_ = register_module("fusion", nn::Sequential(conv(encoder_->out_channels() + 2, c, 1), lrelu(),
                                                           conv(c, c, 3), lrelu()));
        head_ = register_module("head", nn::Sequential(nn::Linear(c + kStats, c), lrelu(), nn::Linear(c, 1)));
        // Encoder weights come from pretraining; only fusion and head are drawn here.
        init_weights(*fusion_, spec.seed);
        init_weights(*head_, data_seed(spec.seed));
    }

    torch::Tensor forward(const torch::Tensor& srgb) override {
        require_image_batch(srgb, 3, "color expert");
        auto [light, chroma] = split_lab(srgb);
        auto feats = encoder_->forward(light);
        auto chroma_ds = F::adaptive_avg_pool2d(chroma, F::AdaptiveAvgPool2dFuncOptions(
                                                            std::vector<int64_t>{feats.size(2), feats.size(3)}));
        auto fused = fusion_->forward(torch::cat({feats, chroma_ds * 4.0}, 1)).mean({2, 3});
        auto mean = chroma.mean({2, 3});
        auto std = (chroma - chroma.mean({2, 3}, true)).pow(2).mean({2, 3}).add(1e-6).sqrt();
        auto magnitude = chroma.pow(2).sum(1).add(1e-6).sqrt().mean({1, 2}).unsqueeze(1);
        auto stats = torch::cat({mean, std, magnitude}, 1) * 4.0;
        return head_->forward(torch::cat({fused, stats}, 1)).squeeze(1);
    }

private:
    static constexpr int64_t kStats = 5;
    static uint64_t data_seed(uint64_t s) { return s ^ 0x9e3779b97f4a7c15ULL; }
    ColorEncoder encoder_;
    nn::Sequential fusion_{nullptr};
    nn::Sequential head_{nullptr};
};

}  // namespace

ColorPretrainResult pretrain_color_encoder(const torch::Tensor& corpus, int64_t epochs, int64_t width,
                                           uint64_t seed, int64_t batch, double lr) {
    if (corpus.dim() != 4 || corpus.size(1) != 3) throw Error("pretrain_color_encoder: expected [N,3,H,W]");
    if (corpus.size(0) < 64) throw Error("pretrain_color_encoder: corpus needs at least 64 images");
    if (corpus.size(2) % 4 != 0 || corpus.size(3) % 4 != 0) {
        throw Error("pretrain_color_encoder: image size must be divisible by 4");
    }
    const int64_t n = corpus.size(0);
    const int64_t n_val = std::max<int64_t>(8, n / 8);
    const int64_t n_train = n - n_val;

    ColorEncoder encoder(width, seed);
    ColorDecoder decoder(encoder->out_channels(), width, seed + 1);

    torch::Tensor light, chroma;
    {
        torch::NoGradGuard g;
        std::tie(light, chroma) = split_lab(corpus);
    }
    auto val_light = light.slice(0, n_train), val_chroma = chroma.slice(0, n_train);

    auto evaluate = [&] {
        torch::NoGradGuard g;
        return (decoder->forward(encoder->forward(val_light)) - val_chroma).pow(2).mean().item<double>();
    };

    std::vector<torch::Tensor> params = encoder->parameters();
    for (auto& p : decoder->parameters()) params.push_back(p);
    torch::optim::Adam opt(params, torch::optim::AdamOptions(lr).betas({0.9, 0.999}));

    ColorPretrainResult result;
    result.validation_l2.push_back(evaluate());
    for (int64_t e = 0; e < epochs; ++e) {
        // Fixed per-epoch order derived from the seed.
        auto gen = at::make_generator<at::CPUGeneratorImpl>(seed * 7919 + static_cast<uint64_t>(e));
        auto order = torch::randperm(n_train, gen, torch::kLong);
        for (int64_t s = 0; s + batch <= n_train; s += batch) {
            auto idx = order.slice(0, s, s + batch);
            auto pred = decoder->forward(encoder->forward(light.index_select(0, idx)));
            auto loss = (pred - chroma.index_select(0, idx)).pow(2).mean();
            opt.zero_grad();
            loss.backward();
            opt.step();
        }
        result.validation_l2.push_back(evaluate());
    }
    encoder->freeze();
    result.encoder = encoder;
    return result;
}

TransportPtr build_transport(const NetworkSpec& spec) {
    spec.validate();
    return Registry::instance().make_transport(spec);
}

CriticPtr build_potential(const NetworkSpec& spec) {
    spec.validate();
    return Registry::instance().make_potential(spec);
}

CriticPtr build_structure_expert(const NetworkSpec& spec) {
    spec.validate();
    return std::make_shared<MultiScalePatchExpert>(spec);
}

CriticPtr build_frequency_expert(const NetworkSpec& spec) {
    spec.validate();
    return std::make_shared<SpectrumExpert>(spec);
}

CriticPtr build_color_expert(ColorEncoder frozen_encoder, const NetworkSpec& spec) {
    spec.validate();
    return std::make_shared<ColorExpertNet>(std::move(frozen_encoder), spec);
}

std::vector<torch::Tensor> Committee::trainable_parameters() const {
    std::vector<torch::Tensor> out;
    for (const auto& m : members) {
        auto p = m.network->trainable_parameters();
        out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

CommitteeScores committee_score(const Committee& committee, const torch::Tensor& batch) {
    CommitteeScores s;
    for (const auto& m : committee.members) {
        s.labels.push_back(m.kind);
        s.scores.push_back(m.network->forward(batch));
    }
    return s;
}

// ---------------------------------------------------------------------------
// Registry

Registry::Registry() {
    transports_["default"] = [](const NetworkSpec& s) -> TransportPtr { return std::make_shared<UNetTransport>(s, true); };
    transports_["unet"] = transports_["default"];
    transports_["unet-direct"] = [](const NetworkSpec& s) -> TransportPtr {
        return std::make_shared<UNetTransport>(s, false);
    };
    potentials_["default"] = [](const NetworkSpec& s) -> CriticPtr { return std::make_shared<ConvPotential>(s); };
    potentials_["convnet"] = potentials_["default"];
}

Registry& Registry::instance() {
    static Registry r;
    return r;
}

void Registry::register_transport(const std::string& name, TransportFactory f) { transports_[name] = std::move(f); }
void Registry::register_potential(const std::string& name, CriticFactory f) { potentials_[name] = std::move(f); }

TransportPtr Registry::make_transport(const NetworkSpec& spec) const {
    auto it = transports_.find(spec.arch);
    if (it == transports_.end()) throw Error("no transport backbone registered as '" + spec.arch + "'");
    return it->second(spec);
}

CriticPtr Registry::make_potential(const NetworkSpec& spec) const {
    auto it = potentials_.find(spec.arch);
    if (it == potentials_.end()) throw Error("no potential network registered as '" + spec.arch + "'");
    return it->second(spec);
}

std::vector<std::string> Registry::transport_names() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : transports_) out.push_back(k);
    return out;
}

std::vector<std::string> Registry::potential_names() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : potentials_) out.push_back(k);
    return out;
}

// ---------------------------------------------------------------------------

std::vector<torch::Tensor> snapshot(const torch::nn::Module& module) {
    std::vector<torch::Tensor> out;
    for (const auto& p : module.parameters()) out.push_back(p.detach().clone());
    for (const auto& b : module.buffers()) out.push_back(b.detach().clone());
    return out;
}

bool bitwise_equal(const std::vector<torch::Tensor>& a, const std::vector<torch::Tensor>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].sizes() != b[i].sizes() || a[i].scalar_type() != b[i].scalar_type()) return false;
        if (!torch::equal(a[i], b[i])) return false;
    }
    return true;
}

void load_snapshot(torch::nn::Module& module, const std::vector<torch::Tensor>& values) {
    auto params = module.parameters();
    auto buffers = module.buffers();
    if (values.size() != params.size() + buffers.size()) throw Error("load_snapshot: parameter count mismatch");
    torch::NoGradGuard g;
    std::size_t i = 0;
    for (auto& p : params) {
        if (p.sizes() != values[i].sizes()) throw Error("load_snapshot: shape mismatch");
        p.copy_(values[i++]);
    }
    for (auto& b : buffers) b.copy_(values[i++]);
}

int64_t parameter_count(const torch::nn::Module& module) {
    int64_t n = 0;
    for (const auto& p : module.parameters()) n += p.numel();
    return n;
}

}  // namespace eguot::networks
