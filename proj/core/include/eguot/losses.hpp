#pragma once

// Scalar objectives of the experts-guided unbalanced OT framework. Every
// function works on plain batched tensors so the image pipeline and the 2D
// toy experiments share one implementation.

#include <torch/torch.h>

#include <functional>
#include <string>
#include <vector>

namespace eguot::losses {

/// exp(min(t, clamp_max)). Throws on non-finite t.
double phi_exp(double t, double clamp_max = 20.0);

/// max(0, 1 + t). Throws on non-finite t.
double hinge(double t);

torch::Tensor hinge(const torch::Tensor& t);

enum class PenaltyKind { Exp, Softplus, Identity };

std::string to_string(PenaltyKind kind);
PenaltyKind penalty_kind_from_string(const std::string& name);

/// Convex, non-decreasing pair (phi1, phi2) relaxing the marginal
/// constraints. Inputs are clamped at `clamp_max` before activation.
///
/// `observer`, when set, is called with 1 or 2 each time the corresponding
/// function is evaluated on a tensor. Tests use it to prove code paths
/// that must not touch the pair.
struct PenaltyPair {
    PenaltyKind phi1_kind = PenaltyKind::Exp;
    PenaltyKind phi2_kind = PenaltyKind::Exp;
    double clamp_max = 20.0;
    std::function<void(int)> observer;

    torch::Tensor phi1(const torch::Tensor& t) const;
    torch::Tensor phi2(const torch::Tensor& t) const;
    double phi1(double t) const;
    double phi2(double t) const;
};

torch::Tensor apply_penalty(PenaltyKind kind, const torch::Tensor& t, double clamp_max);
double apply_penalty(PenaltyKind kind, double t, double clamp_max);

/// tau * mean((generated - anchor)^2) per sample, shape [B].
torch::Tensor unpaired_cost_per_sample(const torch::Tensor& generated, const torch::Tensor& anchor,
                                       double tau);
/// Batch mean of unpaired_cost_per_sample (= tau * mean over all elements).
torch::Tensor unpaired_cost(const torch::Tensor& generated, const torch::Tensor& anchor, double tau);

/// mean |generated - target| per sample, shape [B].
torch::Tensor paired_cost_per_sample(const torch::Tensor& generated, const torch::Tensor& target);
torch::Tensor paired_cost(const torch::Tensor& generated, const torch::Tensor& target);

/// (gamma/2) * batch mean of ||d potential / d input||^2, the squared norm
/// summed over one sample's elements. `outputs` must be the [B] potential
/// values computed from `inputs`, which must require grad. The returned
/// tensor keeps the graph so it can be differentiated w.r.t. the potential's
/// parameters.
torch::Tensor r1_penalty(const torch::Tensor& outputs, const torch::Tensor& inputs, double gamma);

/// Convenience form: evaluates `potential` on a grad-tracking copy of
/// `real_batch`.
torch::Tensor r1_penalty(const std::function<torch::Tensor(const torch::Tensor&)>& potential,
                         const torch::Tensor& real_batch, double gamma);

/// mean phi1(-cost + pot_fake) + mean phi2(-pot_real) + r1.
torch::Tensor potential_objective(const torch::Tensor& cost, const torch::Tensor& pot_fake,
                                  const torch::Tensor& pot_real, const PenaltyPair& penalty,
                                  const torch::Tensor& r1);

/// mean(cost - pot_fake).
torch::Tensor transport_objective(const torch::Tensor& cost, const torch::Tensor& pot_fake);

/// Sum over experts of [mean h(-D(real)) + mean h(D(fake))].
torch::Tensor expert_disc_objective(const std::vector<torch::Tensor>& real_scores,
                                    const std::vector<torch::Tensor>& fake_scores);

/// Sum over experts of mean(-D(fake)); zero for an empty committee.
torch::Tensor expert_gen_objective(const std::vector<torch::Tensor>& fake_scores);

/// lt + lambda * lexp.
torch::Tensor total_transport_objective(const torch::Tensor& lt, const torch::Tensor& lexp,
                                        double lambda);

/// Symmetric hinge objectives used when the potential network is reused as
/// a plain discriminator (framework ablation without the UOT objective).
torch::Tensor hinge_disc_objective(const torch::Tensor& real_scores,
                                   const torch::Tensor& fake_scores);

/// Per-step record of every scalar term.
struct LossBreakdown {
    double cost_term = 0.0;              // transport-step cost mean
    double potential_term = 0.0;         // transport-step potential mean on fakes
    double expert_term = 0.0;            // expert generator objective
    double potential_objective = 0.0;    // last potential-step objective
    double expert_disc_objective = 0.0;  // last experts-step objective
    double r1_term = 0.0;
    double lambda = 1.0;
    double total_transport = 0.0;

    /// (cost_term - potential_term) + lambda * expert_term.
    [[nodiscard]] double recompose() const;
    void compose_total() { total_transport = recompose(); }
    [[nodiscard]] bool recomposes_exactly() const { return total_transport == recompose(); }
};

}  // namespace eguot::losses
