#pragma once

// 2D verification bed: exact discrete OT / quadratic-penalty UOT solvers and
// a small neural transport map trained with the same objectives as the
// image pipeline.

#include "eguot/training.hpp"

#include <Eigen/Dense>
#include <torch/torch.h>

#include <array>
#include <filesystem>
#include <memory>
#include <vector>

namespace eguot::toy_ot {

struct PointCloud {
    Eigen::MatrixX2d points;
    Eigen::VectorXd weights;

    /// Equal unit masses.
    static PointCloud uniform(Eigen::MatrixX2d points);
    /// Throws unless N >= 1, weights >= 0 (one per point) and all values finite.
    void validate() const;
    [[nodiscard]] Eigen::Index size() const { return points.rows(); }
};

struct TransportPlan {
    Eigen::MatrixXd matrix;           // N x M, non-negative
    Eigen::VectorXd source_marginal;  // realized row sums
    Eigen::VectorXd target_marginal;  // realized column sums
    double transport_cost = 0.0;      // sum pi_ij |s_i - t_j|^2
    double divergence_cost = 0.0;     // marginal penalty (0 for balanced OT)
    [[nodiscard]] double objective() const { return transport_cost + divergence_cost; }
};

/// Pairwise squared Euclidean distances, N x M.
Eigen::MatrixXd squared_distance_matrix(const PointCloud& source, const PointCloud& target);

/// Balanced OT with quadratic cost. Both mass vectors are normalized to 1;
/// the LP is solved exactly by the transportation simplex (N*M <= 10^4).
TransportPlan discrete_ot_oracle(const PointCloud& source, const PointCloud& target);

/// Same LP over an explicit cost matrix and marginals (equal totals).
TransportPlan solve_transportation(const Eigen::MatrixXd& cost, const Eigen::VectorXd& supply,
                                   const Eigen::VectorXd& demand);

/// min <C, pi> + relaxation * (|pi 1 - a|^2 + |pi^T 1 - b|^2) over pi >= 0,
/// with the masses taken as given. Solved by a primal-dual interior point
/// method.
TransportPlan discrete_uot_oracle(const PointCloud& source, const PointCloud& target, double relaxation);

// -- neural toy map ---------------------------------------------------------

struct ToySpec {
    int64_t n_source = 1024;
    int64_t n_target = 1024;
    double sigma = 1.0;
    std::array<double, 2> source_center{0.0, 0.0};
    std::array<double, 2> core_center{2.0, 0.0};
    double outlier_fraction = 0.15;
    /// Outlier cluster offset from the core center along +y, in units of sigma.
    double outlier_distance = 20.0;
    uint64_t seed = 7;
};

struct ToyData {
    Eigen::MatrixX2d source;
    Eigen::MatrixX2d target;
    std::vector<bool> target_is_outlier;
    Eigen::Vector2d core_center;
    Eigen::Vector2d outlier_center;
};

/// Gaussian clouds; exactly floor(outlier_fraction * n_target) target
/// samples come from the outlier cluster.
ToyData make_toy_data(const ToySpec& spec);

/// Optimization settings for the toy map (UOT objective, no committee).
training::TrainConfig default_toy_config();

class ToyMlpImpl : public torch::nn::Module {
public:
    ToyMlpImpl(int64_t in, int64_t out, int64_t hidden, double scale, bool residual, uint64_t seed);
    torch::Tensor forward(const torch::Tensor& x);

private:
    torch::nn::Sequential body_{nullptr};
    double scale_;
    bool residual_;
};
TORCH_MODULE(ToyMlp);

struct ToyResult {
    ToyMlp map{nullptr};
    Eigen::MatrixX2d mapped;  // T applied to every source sample
    /// Fraction of mapped source samples nearer the outlier center than the
    /// core center.
    double outlier_mass = 0.0;
    /// Mean |T(x) - x| over the source samples.
    double mean_displacement = 0.0;
    std::vector<double> transport_objective;  // one entry per transport step
};

/// Trains T and P on the toy clouds with the configured adversarial
/// objective (committee unused). Cost is tau * mean((T(x) - x)^2).
/// `hidden` is the MLP width.
ToyResult train_toy_map(const ToyData& data, const training::TrainConfig& cfg, int64_t hidden = 64);

/// Fraction of rows of `mapped` nearer to `outlier` than to `core`.
double outlier_mass(const Eigen::MatrixX2d& mapped, const Eigen::Vector2d& core, const Eigen::Vector2d& outlier);

/// Scatter plot: source (blue), target core (green), target outliers
/// (orange), mapped points (red).
void write_scatter_png(const std::filesystem::path& path, const ToyData& data, const Eigen::MatrixX2d& mapped,
                       int64_t size = 512);

}  // namespace eguot::toy_ot
