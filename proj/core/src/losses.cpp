#include "eguot/losses.hpp"

#include "eguot/error.hpp"

#include <cmath>

namespace eguot::losses {

namespace {

void require_finite(double t, const char* what) {
    if (!std::isfinite(t)) {
        throw Error(std::string(what) + ": non-finite input");
    }
}

void require_per_sample(const torch::Tensor& t, const char* what) {
    if (!t.defined() || t.dim() != 1) {
        throw Error(std::string(what) + ": expected a [B] tensor of per-sample values");
    }
}

void require_same_shape(const torch::Tensor& a, const torch::Tensor& b, const char* what) {
    if (!a.defined() || !b.defined() || a.sizes() != b.sizes()) {
        throw Error(std::string(what) + ": shape mismatch");
    }
    if (a.dim() < 1 || a.size(0) == 0) {
        throw Error(std::string(what) + ": empty batch");
    }
}

torch::Tensor zero_like_scalar(const std::vector<torch::Tensor>& hint) {
    if (!hint.empty() && hint.front().defined()) {
        return torch::zeros({}, hint.front().options());
    }
    return torch::zeros({});
}

}  // namespace

double phi_exp(double t, double clamp_max) {
    require_finite(t, "phi_exp");
    return std::exp(std::min(t, clamp_max));
}

double hinge(double t) {
    require_finite(t, "hinge");
    return std::max(0.0, 1.0 + t);
}

torch::Tensor hinge(const torch::Tensor& t) { return torch::relu(1.0 + t); }

std::string to_string(PenaltyKind kind) {
    switch (kind) {
        case PenaltyKind::Exp: return "exp";
        case PenaltyKind::Softplus: return "softplus";
        case PenaltyKind::Identity: return "identity";
    }
    return "exp";
}

PenaltyKind penalty_kind_from_string(const std::string& name) {
    if (name == "exp") return PenaltyKind::Exp;
    if (name == "softplus") return PenaltyKind::Softplus;
    if (name == "identity") return PenaltyKind::Identity;
    throw Error("unknown penalty function '" + name + "' (expected exp, softplus or identity)");
}

torch::Tensor apply_penalty(PenaltyKind kind, const torch::Tensor& t, double clamp_max) {
    auto clamped = torch::clamp_max(t, clamp_max);
    switch (kind) {
        case PenaltyKind::Exp: return torch::exp(clamped);
        case PenaltyKind::Softplus: return torch::nn::functional::softplus(clamped);
        case PenaltyKind::Identity: return clamped;
    }
    return torch::exp(clamped);
}

double apply_penalty(PenaltyKind kind, double t, double clamp_max) {
    require_finite(t, "penalty");
    const double c = std::min(t, clamp_max);
    switch (kind) {
        case PenaltyKind::Exp: return std::exp(c);
        case PenaltyKind::Softplus: return c > 30.0 ? c : std::log1p(std::exp(c));
        case PenaltyKind::Identity: return c;
    }
    return std::exp(c);
}

torch::Tensor PenaltyPair::phi1(const torch::Tensor& t) const {
    if (observer) observer(1);
    return apply_penalty(phi1_kind, t, clamp_max);
}

torch::Tensor PenaltyPair::phi2(const torch::Tensor& t) const {
    if (observer) observer(2);
    return apply_penalty(phi2_kind, t, clamp_max);
}

double PenaltyPair::phi1(double t) const { return apply_penalty(phi1_kind, t, clamp_max); }
double PenaltyPair::phi2(double t) const { return apply_penalty(phi2_kind, t, clamp_max); }

torch::Tensor unpaired_cost_per_sample(const torch::Tensor& generated, const torch::Tensor& anchor,
                                       double tau) {
    require_same_shape(generated, anchor, "unpaired_cost");
    if (tau < 0.0) throw Error("unpaired_cost: tau must be non-negative");
    return tau * (generated - anchor).pow(2).flatten(1).mean(1);
}

torch::Tensor unpaired_cost(const torch::Tensor& generated, const torch::Tensor& anchor, double tau) {
    return unpaired_cost_per_sample(generated, anchor, tau).mean();
}

torch::Tensor paired_cost_per_sample(const torch::Tensor& generated, const torch::Tensor& target) {
    require_same_shape(generated, target, "paired_cost");
    return (generated - target).abs().flatten(1).mean(1);
}

torch::Tensor paired_cost(const torch::Tensor& generated, const torch::Tensor& target) {
    return paired_cost_per_sample(generated, target).mean();
}

torch::Tensor r1_penalty(const torch::Tensor& outputs, const torch::Tensor& inputs, double gamma) {
    require_per_sample(outputs, "r1_penalty");
    if (outputs.size(0) != inputs.size(0)) {
        throw Error("r1_penalty: potential must return one scalar per sample");
    }
    if (gamma < 0.0) throw Error("r1_penalty: gamma must be non-negative");
    if (!inputs.requires_grad()) throw Error("r1_penalty: real batch must track gradients");
    if (gamma == 0.0 || !outputs.requires_grad()) {
        return torch::zeros({}, inputs.options().requires_grad(false));
    }
    auto grads = torch::autograd::grad({outputs.sum()}, {inputs}, {}, /*retain_graph=*/true,
                                       /*create_graph=*/true, /*allow_unused=*/true);
    if (!grads[0].defined()) {
        return torch::zeros({}, inputs.options().requires_grad(false));
    }
    auto sq_norm = grads[0].pow(2).flatten(1).sum(1);
    return 0.5 * gamma * sq_norm.mean();
}

torch::Tensor r1_penalty(const std::function<torch::Tensor(const torch::Tensor&)>& potential,
                         const torch::Tensor& real_batch, double gamma) {
    auto inputs = real_batch.detach().clone().requires_grad_(true);
    return r1_penalty(potential(inputs), inputs, gamma);
}

torch::Tensor potential_objective(const torch::Tensor& cost, const torch::Tensor& pot_fake,
                                  const torch::Tensor& pot_real, const PenaltyPair& penalty,
                                  const torch::Tensor& r1) {
    require_per_sample(cost, "potential_objective");
    require_per_sample(pot_fake, "potential_objective");
    require_per_sample(pot_real, "potential_objective");
    if (cost.size(0) == 0 || pot_real.size(0) == 0) throw Error("potential_objective: empty batch");
    if (cost.size(0) != pot_fake.size(0)) {
        throw Error("potential_objective: cost and fake potentials differ in batch size");
    }
    return penalty.phi1(-cost + pot_fake).mean() + penalty.phi2(-pot_real).mean() + r1;
}

torch::Tensor transport_objective(const torch::Tensor& cost, const torch::Tensor& pot_fake) {
    require_per_sample(cost, "transport_objective");
    require_per_sample(pot_fake, "transport_objective");
    if (cost.size(0) == 0) throw Error("transport_objective: empty batch");
    if (cost.size(0) != pot_fake.size(0)) throw Error("transport_objective: batch size mismatch");
    return cost.mean() - pot_fake.mean();
}

torch::Tensor expert_disc_objective(const std::vector<torch::Tensor>& real_scores,
                                    const std::vector<torch::Tensor>& fake_scores) {
    if (real_scores.size() != fake_scores.size()) {
        throw Error("expert_disc_objective: real and fake expert counts differ");
    }
    auto total = zero_like_scalar(real_scores);
    for (std::size_t i = 0; i < real_scores.size(); ++i) {
        total = total + hinge(-real_scores[i]).mean() + hinge(fake_scores[i]).mean();
    }
    return total;
}

torch::Tensor expert_gen_objective(const std::vector<torch::Tensor>& fake_scores) {
    auto total = zero_like_scalar(fake_scores);
    for (const auto& s : fake_scores) {
        total = total - s.mean();
    }
    return total;
}

torch::Tensor total_transport_objective(const torch::Tensor& lt, const torch::Tensor& lexp,
                                        double lambda) {
    if (lambda == 0.0) return lt;
    return lt + lambda * lexp;
}

torch::Tensor hinge_disc_objective(const torch::Tensor& real_scores,
                                   const torch::Tensor& fake_scores) {
    return hinge(-real_scores).mean() + hinge(fake_scores).mean();
}

double LossBreakdown::recompose() const {
    return (cost_term - potential_term) + lambda * expert_term;
}

}  // namespace eguot::losses
