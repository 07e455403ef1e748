#include "eguot/training.hpp"

#include "eguot/error.hpp"
#include "eguot/imaging.hpp"
#include "rng.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace eguot::training {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Mode m) { return m == Mode::Paired ? "paired" : "unpaired"; }
std::string to_string(Adversarial a) { return a == Adversarial::Uot ? "uot" : "hinge_gan"; }

namespace {

Mode mode_from_string(const std::string& s) {
    if (s == "paired") return Mode::Paired;
    if (s == "unpaired") return Mode::Unpaired;
    throw Error("unknown mode '" + s + "' (expected paired or unpaired)");
}

Adversarial adversarial_from_string(const std::string& s) {
    if (s == "uot") return Adversarial::Uot;
    if (s == "hinge_gan") return Adversarial::HingeGan;
    throw Error("unknown adversarial objective '" + s + "' (expected uot or hinge_gan)");
}

double item(const torch::Tensor& t) { return t.item<double>(); }

void require_finite(double v, const char* step, int64_t iteration) {
    if (!std::isfinite(v)) {
        throw NonFiniteLoss(std::string(step) + ": non-finite objective at outer iteration " +
                            std::to_string(iteration));
    }
}

// Switches requires_grad off for a parameter list while in scope.
class FreezeGuard {
public:
    explicit FreezeGuard(std::vector<torch::Tensor> params) : params_(std::move(params)) {
        for (auto& p : params_) {
            prev_.push_back(p.requires_grad());
            p.requires_grad_(false);
        }
    }
    ~FreezeGuard() {
        for (std::size_t i = 0; i < params_.size(); ++i) params_[i].requires_grad_(prev_[i]);
    }
    FreezeGuard(const FreezeGuard&) = delete;
    FreezeGuard& operator=(const FreezeGuard&) = delete;

private:
    std::vector<torch::Tensor> params_;
    std::vector<bool> prev_;
};

std::unique_ptr<torch::optim::Adam> make_adam(const std::vector<torch::Tensor>& params, double lr,
                                              const TrainConfig& cfg) {
    if (params.empty()) return nullptr;
    auto opts = torch::optim::AdamOptions(lr).betas({cfg.beta1, cfg.beta2}).eps(cfg.adam_eps).weight_decay(0.0);
    return std::make_unique<torch::optim::Adam>(params, opts);
}

void set_lr(torch::optim::Adam* opt, double lr) {
    if (opt == nullptr) return;
    for (auto& group : opt->param_groups()) {
        static_cast<torch::optim::AdamOptions&>(group.options()).lr(lr);
    }
}

void save_optimizer(const torch::optim::Adam* opt, const fs::path& path) {
    if (opt == nullptr) return;
    torch::serialize::OutputArchive ar;
    opt->save(ar);
    ar.save_to(path.string());
}

void load_optimizer(torch::optim::Adam* opt, const fs::path& path) {
    if (opt == nullptr) return;
    if (!fs::exists(path)) throw Error("checkpoint: missing " + path.string());
    torch::serialize::InputArchive ar;
    ar.load_from(path.string());
    opt->load(ar);
}

void save_tensors(const std::vector<torch::Tensor>& v, const fs::path& path) { torch::save(v, path.string()); }

std::vector<torch::Tensor> load_tensors(const fs::path& path) {
    if (!fs::exists(path)) throw Error("checkpoint: missing " + path.string());
    std::vector<torch::Tensor> v;
    torch::load(v, path.string());
    return v;
}

json breakdown_to_json(const losses::LossBreakdown& b) {
    return json::array({b.cost_term, b.potential_term, b.expert_term, b.potential_objective,
                        b.expert_disc_objective, b.r1_term, b.lambda, b.total_transport});
}

losses::LossBreakdown breakdown_from_json(const json& j) {
    losses::LossBreakdown b;
    b.cost_term = j.at(0).get<double>();
    b.potential_term = j.at(1).get<double>();
    b.expert_term = j.at(2).get<double>();
    b.potential_objective = j.at(3).get<double>();
    b.expert_disc_objective = j.at(4).get<double>();
    b.r1_term = j.at(5).get<double>();
    b.lambda = j.at(6).get<double>();
    b.total_transport = j.at(7).get<double>();
    return b;
}

std::string fnv1a_hex(const std::string& s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// config

void TrainConfig::validate() const {
    if (n_inner < 1) throw Error("config: n_inner must be >= 1");
    if (epochs < 0) throw Error("config: epochs must be >= 0");
    if (swa_last < 0 || swa_last > epochs) throw Error("config: swa_last must lie in [0, epochs]");
    if (!(lr_transport > 0) || !(lr_potential > 0) || !(lr_experts > 0)) {
        throw Error("config: learning rates must be > 0");
    }
    if (!(lr_min_ratio >= 0) || lr_min_ratio > 1) throw Error("config: lr_min_ratio must lie in [0, 1]");
    if (!(gamma >= 0) || !(tau >= 0) || !(lambda >= 0)) throw Error("config: gamma, tau, lambda must be >= 0");
    if (cost_reduction != "mean" && cost_reduction != "sum") throw Error("config: cost_reduction must be mean or sum");
    if (!(paired_weight >= 0)) throw Error("config: paired_weight must be >= 0");
    if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1)) throw Error("config: betas must lie in [0, 1)");
    if (!(adam_eps > 0)) throw Error("config: adam_eps must be > 0");
    if (batch < 1) throw Error("config: batch must be >= 1");
    if (iterations_per_epoch < 0) throw Error("config: iterations_per_epoch must be >= 0");
    if (crop < 0 || crop % 2 != 0) throw Error("config: crop must be an even size (0 for full images)");
    if (!(collapse_threshold >= 0)) throw Error("config: collapse_threshold must be >= 0");
    if (collapse_probe < 8) throw Error("config: collapse_probe must be >= 8");
    for (std::size_t i = 0; i < experts.size(); ++i) {
        for (std::size_t k = i + 1; k < experts.size(); ++k) {
            if (experts[i] == experts[k]) throw Error("config: expert listed twice");
        }
    }
}

losses::PenaltyPair TrainConfig::penalty() const {
    losses::PenaltyPair p;
    p.phi1_kind = phi1;
    p.phi2_kind = phi2;
    p.clamp_max = phi_clamp;
    return p;
}

std::string TrainConfig::hash() const { return fnv1a_hex(json(*this).dump()); }

void to_json(json& j, const TrainConfig& c) {
    std::vector<std::string> experts;
    for (auto e : c.experts) experts.push_back(networks::to_string(e));
    j = json{{"mode", to_string(c.mode)},
             {"adversarial", to_string(c.adversarial)},
             {"phi1", losses::to_string(c.phi1)},
             {"phi2", losses::to_string(c.phi2)},
             {"phi_clamp", c.phi_clamp},
             {"n_inner", c.n_inner},
             {"gamma", c.gamma},
             {"tau", c.tau},
             {"cost_reduction", c.cost_reduction},
             {"lambda", c.lambda},
             {"paired_weight", c.paired_weight},
             {"lr_transport", c.lr_transport},
             {"lr_potential", c.lr_potential},
             {"lr_experts", c.lr_experts},
             {"lr_min_ratio", c.lr_min_ratio},
             {"beta1", c.beta1},
             {"beta2", c.beta2},
             {"adam_eps", c.adam_eps},
             {"epochs", c.epochs},
             {"swa_last", c.swa_last},
             {"batch", c.batch},
             {"iterations_per_epoch", c.iterations_per_epoch},
             {"crop", c.crop},
             {"experts", experts},
             {"transport_arch", c.transport_arch},
             {"transport_width", c.transport_width},
             {"transport_depth", c.transport_depth},
             {"potential_arch", c.potential_arch},
             {"potential_width", c.potential_width},
             {"potential_depth", c.potential_depth},
             {"expert_width", c.expert_width},
             {"color_pretrain_epochs", c.color_pretrain_epochs},
             {"collapse_threshold", c.collapse_threshold},
             {"collapse_probe", c.collapse_probe},
             {"seed", c.seed}};
}

void from_json(const json& j, TrainConfig& c) {
    const TrainConfig d;
    c.mode = mode_from_string(j.value("mode", to_string(d.mode)));
    c.adversarial = adversarial_from_string(j.value("adversarial", to_string(d.adversarial)));
    c.phi1 = losses::penalty_kind_from_string(j.value("phi1", losses::to_string(d.phi1)));
    c.phi2 = losses::penalty_kind_from_string(j.value("phi2", losses::to_string(d.phi2)));
    c.phi_clamp = j.value("phi_clamp", d.phi_clamp);
    c.n_inner = j.value("n_inner", d.n_inner);
    c.gamma = j.value("gamma", d.gamma);
    c.tau = j.value("tau", d.tau);
    c.cost_reduction = j.value("cost_reduction", d.cost_reduction);
    c.lambda = j.value("lambda", d.lambda);
    c.paired_weight = j.value("paired_weight", d.paired_weight);
    c.lr_transport = j.value("lr_transport", d.lr_transport);
    c.lr_potential = j.value("lr_potential", d.lr_potential);
    c.lr_experts = j.value("lr_experts", d.lr_experts);
    c.lr_min_ratio = j.value("lr_min_ratio", d.lr_min_ratio);
    c.beta1 = j.value("beta1", d.beta1);
    c.beta2 = j.value("beta2", d.beta2);
    c.adam_eps = j.value("adam_eps", d.adam_eps);
    c.epochs = j.value("epochs", d.epochs);
    c.swa_last = j.value("swa_last", d.swa_last);
    c.batch = j.value("batch", d.batch);
    c.iterations_per_epoch = j.value("iterations_per_epoch", d.iterations_per_epoch);
    c.crop = j.value("crop", d.crop);
    if (j.contains("experts")) {
        c.experts.clear();
        for (const auto& e : j.at("experts")) c.experts.push_back(networks::expert_kind_from_string(e.get<std::string>()));
    } else {
        c.experts = d.experts;
    }
    c.transport_arch = j.value("transport_arch", d.transport_arch);
    c.transport_width = j.value("transport_width", d.transport_width);
    c.transport_depth = j.value("transport_depth", d.transport_depth);
    c.potential_arch = j.value("potential_arch", d.potential_arch);
    c.potential_width = j.value("potential_width", d.potential_width);
    c.potential_depth = j.value("potential_depth", d.potential_depth);
    c.expert_width = j.value("expert_width", d.expert_width);
    c.color_pretrain_epochs = j.value("color_pretrain_epochs", d.color_pretrain_epochs);
    c.collapse_threshold = j.value("collapse_threshold", d.collapse_threshold);
    c.collapse_probe = j.value("collapse_probe", d.collapse_probe);
    c.seed = j.value("seed", d.seed);
}

void apply_override(json& j, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw Error("override '" + assignment + "' is not key=value");
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);

    json* node = &j;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (!node->is_object() || !node->contains(key)) throw Error("override: unknown key '" + path + "'");
        node = &(*node)[key];
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    *node = value;
}

// ---------------------------------------------------------------------------
// schedule, averaging, diagnostics

double cosine_lr(int64_t step, int64_t total, double lr0, double lr_min) {
    if (step < 0 || step > total) throw Error("cosine_lr: step outside [0, total]");
    if (total == 0) return lr0;
    if (step == total) return lr_min;
    const double c = std::cos(std::numbers::pi * static_cast<double>(step) / static_cast<double>(total));
    return lr_min + 0.5 * (lr0 - lr_min) * (1.0 + c);
}

ParameterSet swa_finalize(const std::vector<ParameterSet>& snapshots) {
    if (snapshots.empty()) throw Error("swa_finalize: no snapshots");
    const auto& first = snapshots.front();
    for (const auto& s : snapshots) {
        if (s.size() != first.size()) throw Error("swa_finalize: snapshot parameter counts differ");
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (!s[i].sizes().equals(first[i].sizes())) throw Error("swa_finalize: parameter shape mismatch");
        }
    }
    ParameterSet out;
    const double k = static_cast<double>(snapshots.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        auto acc = torch::zeros(first[i].sizes(), torch::kFloat64);
        for (const auto& s : snapshots) acc += s[i].to(torch::kFloat64);
        out.push_back((acc / k).to(first[i].scalar_type()));
    }
    return out;
}

CollapseCheck detect_mode_collapse(const torch::Tensor& outputs, double threshold) {
    if (!outputs.defined() || outputs.dim() < 2) throw Error("detect_mode_collapse: expected a batch");
    const int64_t b = outputs.size(0);
    if (b < 8) throw Error("detect_mode_collapse: need at least 8 outputs, got " + std::to_string(b));
    auto flat = outputs.detach().to(torch::kFloat64).flatten(1);
    const double elems = static_cast<double>(flat.size(1));
    // Squared distances via the Gram matrix would lose precision near zero;
    // b is small, so take the pairs directly.
    double sum = 0.0;
    for (int64_t i = 0; i < b; ++i) {
        auto d = ((flat.narrow(0, i + 1, b - i - 1) - flat[i]).pow(2).sum(1) / elems).sqrt();
        sum += d.sum().item<double>();
    }
    CollapseCheck c;
    c.statistic = sum / (static_cast<double>(b) * static_cast<double>(b - 1) / 2.0);
    c.collapsed = c.statistic < threshold;
    return c;
}

// ---------------------------------------------------------------------------
// networks

Networks build_networks(const TrainConfig& cfg, const torch::Tensor& color_corpus, bool pretrain_color) {
    using networks::NetworkKind;
    using networks::NetworkSpec;
    Networks nets;
    nets.transport = networks::build_transport(
        NetworkSpec{NetworkKind::Transport, cfg.transport_width, cfg.transport_depth,
                    data::derive_seed(cfg.seed, 101), cfg.transport_arch});
    nets.potential = networks::build_potential(
        NetworkSpec{NetworkKind::Potential, cfg.potential_width, cfg.potential_depth,
                    data::derive_seed(cfg.seed, 102), cfg.potential_arch});
    for (auto kind : cfg.experts) {
        const uint64_t seed = data::derive_seed(cfg.seed, 103, static_cast<uint64_t>(kind));
        switch (kind) {
            case networks::ExpertKind::Color: {
                networks::ColorEncoder enc{nullptr};
                if (pretrain_color && cfg.color_pretrain_epochs > 0) {
                    enc = networks::pretrain_color_encoder(color_corpus, cfg.color_pretrain_epochs,
                                                           cfg.expert_width, data::derive_seed(seed, 1))
                              .encoder;
                } else {
                    enc = networks::ColorEncoder(cfg.expert_width, data::derive_seed(seed, 1));
                    enc->freeze();
                }
                nets.committee.members.push_back(
                    {kind, networks::build_color_expert(
                               enc, NetworkSpec{NetworkKind::ColorExpert, cfg.expert_width, 2, seed})});
                break;
            }
            case networks::ExpertKind::Structure:
                nets.committee.members.push_back(
                    {kind, networks::build_structure_expert(
                               NetworkSpec{NetworkKind::StructureExpert, cfg.expert_width, 2, seed})});
                break;
            case networks::ExpertKind::Frequency:
                nets.committee.members.push_back(
                    {kind, networks::build_frequency_expert(
                               NetworkSpec{NetworkKind::FrequencyExpert, cfg.expert_width, 2, seed})});
                break;
        }
    }
    return nets;
}

// ---------------------------------------------------------------------------
// trainer

Trainer::Trainer(TrainConfig cfg, const data::Corpus& corpus)
    : Trainer(cfg, corpus, build_networks(cfg, corpus.targets)) {}

Trainer::Trainer(TrainConfig cfg, const data::Corpus& corpus, Networks nets)
    : cfg_(std::move(cfg)), corpus_(&corpus), nets_(std::move(nets)), penalty_(cfg_.penalty()) {
    cfg_.validate();
    if (corpus.size() < 1) throw Error("trainer: empty corpus");
    if (!nets_.transport || !nets_.potential) throw Error("trainer: transport and potential are required");
    if (cfg_.crop > 0 && (cfg_.crop > corpus.targets.size(2) || cfg_.crop > corpus.targets.size(3))) {
        throw Error("trainer: crop larger than the images");
    }
    sampler_ = std::make_unique<data::UnpairedSampler>(corpus.size(), corpus.targets.size(0), cfg_.batch,
                                                       data::derive_seed(cfg_.seed, 201));
    init_optimizers();
}

void Trainer::init_optimizers() {
    opt_transport_ = make_adam(nets_.transport->parameters(), cfg_.lr_transport, cfg_);
    opt_potential_ = make_adam(nets_.potential->trainable_parameters(), cfg_.lr_potential, cfg_);
    opt_experts_ = make_adam(nets_.committee.trainable_parameters(), cfg_.lr_experts, cfg_);
}

int64_t Trainer::iterations_per_epoch() const {
    if (cfg_.iterations_per_epoch > 0) return cfg_.iterations_per_epoch;
    return std::max<int64_t>(1, sampler_->steps_per_epoch() / (cfg_.n_inner + 1));
}

void Trainer::set_learning_rates(double epoch) {
    const auto e = static_cast<int64_t>(epoch);
    auto lr = [&](double lr0) { return cosine_lr(e, cfg_.epochs, lr0, lr0 * cfg_.lr_min_ratio); };
    set_lr(opt_transport_.get(), lr(cfg_.lr_transport));
    set_lr(opt_potential_.get(), lr(cfg_.lr_potential));
    set_lr(opt_experts_.get(), lr(cfg_.lr_experts));
}

Batch Trainer::make_batch(int64_t stream_index) const {
    const int64_t per_epoch = sampler_->steps_per_epoch();
    const int64_t e = stream_index / per_epoch;
    const int64_t s = stream_index % per_epoch;
    auto b = sampler_->batch(e, s);
    if (cfg_.mode == Mode::Paired) b.srgb = b.raw;

    auto raw_idx = torch::tensor(b.raw, torch::kLong);
    auto tgt_idx = torch::tensor(b.srgb, torch::kLong);
    Batch out;
    out.raw = corpus_->raw.index_select(0, raw_idx);
    out.target = corpus_->targets.index_select(0, tgt_idx);

    if (cfg_.crop > 0) {
        const int64_t c = cfg_.crop;
        const int64_t h = out.target.size(2);
        const int64_t w = out.target.size(3);
        std::mt19937_64 rng(data::derive_seed(cfg_.seed, 202, static_cast<uint64_t>(stream_index)));
        std::vector<torch::Tensor> raws;
        std::vector<torch::Tensor> tgts;
        for (int64_t i = 0; i < out.raw.size(0); ++i) {
            const int64_t ry = detail::uniform_int(rng, 0, (h - c) / 2);
            const int64_t rx = detail::uniform_int(rng, 0, (w - c) / 2);
            int64_t ty = 2 * ry;
            int64_t tx = 2 * rx;
            if (cfg_.mode == Mode::Unpaired) {
                ty = detail::uniform_int(rng, 0, h - c);
                tx = detail::uniform_int(rng, 0, w - c);
            }
            raws.push_back(out.raw[i].narrow(1, ry, c / 2).narrow(2, rx, c / 2));
            tgts.push_back(out.target[i].narrow(1, ty, c).narrow(2, tx, c));
        }
        out.raw = torch::stack(raws).contiguous();
        out.target = torch::stack(tgts).contiguous();
    }
    if (cfg_.mode == Mode::Paired) {
        out.paired = out.target;
    } else {
        out.anchor = imaging::demosaic_bilinear(out.raw);
    }
    return out;
}

Batch Trainer::next_batch() { return make_batch(stream_index_++); }

torch::Tensor Trainer::cost_per_sample(const torch::Tensor& generated, const Batch& batch) const {
    if (cfg_.mode == Mode::Paired) {
        auto c = losses::paired_cost_per_sample(generated, batch.paired);
        return cfg_.paired_weight == 1.0 ? c : c * cfg_.paired_weight;
    }
    auto anchor = batch.anchor.defined() ? batch.anchor : imaging::demosaic_bilinear(batch.raw);
    auto c = losses::unpaired_cost_per_sample(generated, anchor, cfg_.tau);
    return cfg_.cost_reduction == "sum" ? c * static_cast<double>(generated[0].numel()) : c;
}

StepRecord Trainer::potential_step(const Batch& batch) {
    const int64_t it = counters_.transport_updates;
    torch::Tensor fake;
    torch::Tensor cost;
    {
        torch::NoGradGuard ng;
        fake = nets_.transport->forward(batch.raw);
        cost = cost_per_sample(fake, batch);
    }
    auto pot_fake = nets_.potential->forward(fake);
    auto real = batch.target.detach().clone();
    if (cfg_.gamma > 0) real.requires_grad_(true);
    auto pot_real = nets_.potential->forward(real);
    torch::Tensor r1 = cfg_.gamma > 0 ? losses::r1_penalty(pot_real, real, cfg_.gamma)
                                      : torch::zeros({}, pot_real.options());

    torch::Tensor objective;
    if (cfg_.adversarial == Adversarial::Uot) {
        objective = losses::potential_objective(cost, pot_fake, pot_real, penalty_, r1);
    } else {
        objective = losses::hinge_disc_objective(pot_real, pot_fake) + r1;
    }
    StepRecord rec;
    rec.potential_objective = item(objective);
    rec.r1_term = item(r1);
    require_finite(rec.potential_objective, "potential step", it);

    if (opt_potential_) {
        opt_potential_->zero_grad();
        objective.backward();
        opt_potential_->step();
    }
    ++counters_.potential_updates;
    last_inner_.potential_objective = rec.potential_objective;
    last_inner_.r1_term = rec.r1_term;
    return rec;
}

StepRecord Trainer::experts_step(const Batch& batch) {
    StepRecord rec;
    if (nets_.committee.empty()) {
        last_inner_.expert_disc_objective = 0.0;
        return rec;
    }
    torch::Tensor fake;
    {
        torch::NoGradGuard ng;
        fake = nets_.transport->forward(batch.raw);
    }
    auto real_scores = networks::committee_score(nets_.committee, batch.target);
    auto fake_scores = networks::committee_score(nets_.committee, fake);
    auto objective = losses::expert_disc_objective(real_scores.scores, fake_scores.scores);
    rec.expert_disc_objective = item(objective);
    require_finite(rec.expert_disc_objective, "experts step", counters_.transport_updates);

    if (opt_experts_) {
        opt_experts_->zero_grad();
        if (objective.requires_grad()) objective.backward();
        opt_experts_->step();
    }
    ++counters_.expert_updates;
    last_inner_.expert_disc_objective = rec.expert_disc_objective;
    return rec;
}

losses::LossBreakdown Trainer::transport_step(const Batch& batch) {
    auto frozen = nets_.potential->trainable_parameters();
    for (auto& p : nets_.committee.trainable_parameters()) frozen.push_back(p);
    FreezeGuard guard(std::move(frozen));

    auto fake = nets_.transport->forward(batch.raw);
    auto cost = cost_per_sample(fake, batch).mean();
    auto pot = nets_.potential->forward(fake).mean();
    std::vector<torch::Tensor> scores;
    if (!nets_.committee.empty()) scores = networks::committee_score(nets_.committee, fake).scores;
    auto lexp = losses::expert_gen_objective(scores);
    auto lt = losses::transport_objective(cost.unsqueeze(0), pot.unsqueeze(0));
    auto total = losses::total_transport_objective(lt, lexp, cfg_.lambda);

    losses::LossBreakdown b;
    b.cost_term = item(cost);
    b.potential_term = item(pot);
    b.expert_term = scores.empty() ? 0.0 : item(lexp);
    b.potential_objective = last_inner_.potential_objective;
    b.expert_disc_objective = last_inner_.expert_disc_objective;
    b.r1_term = last_inner_.r1_term;
    b.lambda = cfg_.lambda;
    b.compose_total();
    require_finite(b.total_transport, "transport step", counters_.transport_updates);
    require_finite(item(total), "transport step", counters_.transport_updates);

    opt_transport_->zero_grad();
    total.backward();
    opt_transport_->step();
    ++counters_.transport_updates;
    return b;
}

losses::LossBreakdown Trainer::outer_iteration() {
    for (int64_t k = 0; k < cfg_.n_inner; ++k) {
        const auto batch = next_batch();
        potential_step(batch);
        experts_step(batch);
    }
    auto b = transport_step(next_batch());
    log_.push_back(b);
    return b;
}

std::vector<torch::Tensor> Trainer::probe_raw() const {
    const int64_t n = std::min<int64_t>(cfg_.collapse_probe, corpus_->size());
    if (n < 8) return {};
    return {corpus_->raw.narrow(0, 0, n)};
}

CollapseCheck Trainer::collapse_check() {
    auto probe = probe_raw();
    if (probe.empty()) return {};
    torch::NoGradGuard ng;
    return detect_mode_collapse(nets_.transport->forward(probe.front()), cfg_.collapse_threshold);
}

EpochRecord Trainer::run_epoch() {
    if (epoch_ >= cfg_.epochs) throw Error("trainer: epoch budget exhausted");
    set_learning_rates(static_cast<double>(epoch_));
    EpochRecord rec;
    rec.epoch = epoch_;
    rec.lr_transport = cosine_lr(epoch_, cfg_.epochs, cfg_.lr_transport, cfg_.lr_transport * cfg_.lr_min_ratio);
    const int64_t iters = iterations_per_epoch();
    for (int64_t i = 0; i < iters; ++i) outer_iteration();
    ++epoch_;
    if (epoch_ > cfg_.epochs - cfg_.swa_last) swa_snapshots_.push_back(networks::snapshot(*nets_.transport));
    rec.collapse = collapse_check();
    epoch_log_.push_back(rec);
    return rec;
}

void Trainer::train(const std::optional<fs::path>& abort_checkpoint) {
    while (epoch_ < cfg_.epochs) {
        try {
            run_epoch();
        } catch (const NonFiniteLoss&) {
            if (abort_checkpoint) save_checkpoint(*abort_checkpoint, json{{"aborted", true}});
            throw;
        }
    }
}

bool Trainer::collapse_raised() const {
    for (const auto& e : epoch_log_) {
        if (e.collapse.collapsed) return true;
    }
    return false;
}

networks::TransportPtr Trainer::final_transport() {
    if (swa_snapshots_.empty()) return nets_.transport;
    auto t = networks::build_transport(networks::NetworkSpec{networks::NetworkKind::Transport, cfg_.transport_width,
                                                             cfg_.transport_depth, data::derive_seed(cfg_.seed, 101),
                                                             cfg_.transport_arch});
    networks::load_snapshot(*t, swa_finalize(swa_snapshots_));
    return t;
}

std::string Trainer::log_csv() const {
    std::ostringstream os;
    os << "iteration,epoch,cost_term,potential_term,expert_term,potential_objective,expert_disc_objective,"
          "r1_term,lambda,total_transport\n";
    const int64_t per = iterations_per_epoch();
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    for (std::size_t i = 0; i < log_.size(); ++i) {
        const auto& b = log_[i];
        os << i << ',' << static_cast<int64_t>(i) / per << ',' << num(b.cost_term) << ',' << num(b.potential_term)
           << ',' << num(b.expert_term) << ',' << num(b.potential_objective) << ','
           << num(b.expert_disc_objective) << ',' << num(b.r1_term) << ',' << num(b.lambda) << ','
           << num(b.total_transport) << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// checkpoints

void Trainer::save_checkpoint(const fs::path& dir, const json& metric_snapshot) const {
    fs::create_directories(dir);
    save_tensors(networks::snapshot(*nets_.transport), dir / "transport.pt");
    save_tensors(networks::snapshot(*nets_.potential), dir / "potential.pt");
    for (const auto& m : nets_.committee.members) {
        save_tensors(networks::snapshot(*m.network), dir / ("expert_" + networks::to_string(m.kind) + ".pt"));
    }
    save_optimizer(opt_transport_.get(), dir / "opt_transport.pt");
    save_optimizer(opt_potential_.get(), dir / "opt_potential.pt");
    save_optimizer(opt_experts_.get(), dir / "opt_experts.pt");
    std::vector<torch::Tensor> swa_flat;
    for (const auto& s : swa_snapshots_) swa_flat.insert(swa_flat.end(), s.begin(), s.end());
    save_tensors(swa_flat, dir / "swa.pt");

    json log = json::array();
    for (const auto& b : log_) log.push_back(breakdown_to_json(b));
    json epochs = json::array();
    for (const auto& e : epoch_log_) {
        epochs.push_back({{"epoch", e.epoch},
                          {"lr_transport", e.lr_transport},
                          {"collapsed", e.collapse.collapsed},
                          {"collapse_statistic", e.collapse.statistic}});
    }
    json manifest{{"format", 1},
                  {"config", cfg_},
                  {"config_hash", cfg_.hash()},
                  {"epoch", epoch_},
                  {"stream_index", stream_index_},
                  {"counters",
                   {{"potential", counters_.potential_updates},
                    {"experts", counters_.expert_updates},
                    {"transport", counters_.transport_updates}}},
                  {"last_inner",
                   {last_inner_.potential_objective, last_inner_.r1_term, last_inner_.expert_disc_objective}},
                  {"swa_count", swa_snapshots_.size()},
                  {"epochs", epochs},
                  {"log", log},
                  {"metric_snapshot", metric_snapshot.is_null() ? json::object() : metric_snapshot}};
    std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
    std::ofstream(dir / "loss_log.csv") << log_csv();
}

std::unique_ptr<Trainer> Trainer::resume(const fs::path& dir, const data::Corpus& corpus) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw Error("checkpoint: cannot read " + (dir / "manifest.json").string());
    const json m = json::parse(in);
    const TrainConfig cfg = m.at("config").get<TrainConfig>();
    if (cfg.hash() != m.at("config_hash").get<std::string>()) throw Error("checkpoint: config hash mismatch");

    auto nets = build_networks(cfg, corpus.targets, false);
    networks::load_snapshot(*nets.transport, load_tensors(dir / "transport.pt"));
    networks::load_snapshot(*nets.potential, load_tensors(dir / "potential.pt"));
    for (auto& member : nets.committee.members) {
        networks::load_snapshot(*member.network,
                                load_tensors(dir / ("expert_" + networks::to_string(member.kind) + ".pt")));
    }
    auto t = std::make_unique<Trainer>(cfg, corpus, std::move(nets));
    load_optimizer(t->opt_transport_.get(), dir / "opt_transport.pt");
    load_optimizer(t->opt_potential_.get(), dir / "opt_potential.pt");
    load_optimizer(t->opt_experts_.get(), dir / "opt_experts.pt");

    const auto swa_count = m.at("swa_count").get<std::size_t>();
    if (swa_count > 0) {
        const auto flat = load_tensors(dir / "swa.pt");
        if (flat.size() % swa_count != 0) throw Error("checkpoint: corrupt weight-averaging snapshots");
        const std::size_t per = flat.size() / swa_count;
        for (std::size_t k = 0; k < swa_count; ++k) {
            t->swa_snapshots_.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(k * per),
                                           flat.begin() + static_cast<std::ptrdiff_t>((k + 1) * per));
        }
    }
    t->epoch_ = m.at("epoch").get<int64_t>();
    t->stream_index_ = m.at("stream_index").get<int64_t>();
    t->counters_.potential_updates = m.at("counters").at("potential").get<int64_t>();
    t->counters_.expert_updates = m.at("counters").at("experts").get<int64_t>();
    t->counters_.transport_updates = m.at("counters").at("transport").get<int64_t>();
    const auto& li = m.at("last_inner");
    t->last_inner_ = {li.at(0).get<double>(), li.at(1).get<double>(), li.at(2).get<double>()};
    for (const auto& b : m.at("log")) t->log_.push_back(breakdown_from_json(b));
    for (const auto& e : m.at("epochs")) {
        EpochRecord r;
        r.epoch = e.at("epoch").get<int64_t>();
        r.lr_transport = e.at("lr_transport").get<double>();
        r.collapse.collapsed = e.at("collapsed").get<bool>();
        r.collapse.statistic = e.at("collapse_statistic").get<double>();
        t->epoch_log_.push_back(r);
    }
    return t;
}

TrainResult train(const TrainConfig& cfg, const data::Corpus& corpus) {
    TrainResult r;
    r.trainer = std::make_unique<Trainer>(cfg, corpus);
    r.trainer->train();
    r.transport = r.trainer->final_transport();
    return r;
}

}  // namespace eguot::training
