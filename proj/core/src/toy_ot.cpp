#include "eguot/toy_ot.hpp"

#include "eguot/error.hpp"
#include "eguot/imaging.hpp"
#include "eguot/losses.hpp"
#include "eguot/networks.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace eguot::toy_ot {

namespace {

constexpr Eigen::Index kMaxCells = 10000;

void check_sizes(const PointCloud& s, const PointCloud& t) {
    s.validate();
    t.validate();
    if (s.size() * t.size() > kMaxCells) {
        throw Error("toy_ot: N*M = " + std::to_string(s.size() * t.size()) + " exceeds the 10^4 cell limit");
    }
}

struct Cell {
    Eigen::Index i;
    Eigen::Index j;
};

}  // namespace

PointCloud PointCloud::uniform(Eigen::MatrixX2d points) {
    PointCloud p;
    p.weights = Eigen::VectorXd::Ones(points.rows());
    p.points = std::move(points);
    return p;
}

void PointCloud::validate() const {
    if (points.rows() < 1) throw Error("point cloud: empty");
    if (weights.size() != points.rows()) throw Error("point cloud: one weight per point required");
    if (!points.allFinite() || !weights.allFinite()) throw Error("point cloud: non-finite values");
    if ((weights.array() < 0).any()) throw Error("point cloud: negative weight");
}

Eigen::MatrixXd squared_distance_matrix(const PointCloud& source, const PointCloud& target) {
    Eigen::MatrixXd c(source.size(), target.size());
    for (Eigen::Index i = 0; i < source.size(); ++i) {
        for (Eigen::Index j = 0; j < target.size(); ++j) {
            c(i, j) = (source.points.row(i) - target.points.row(j)).squaredNorm();
        }
    }
    return c;
}

// ---------------------------------------------------------------------------
// transportation simplex

TransportPlan solve_transportation(const Eigen::MatrixXd& cost, const Eigen::VectorXd& supply,
                                   const Eigen::VectorXd& demand) {
    const Eigen::Index n = cost.rows();
    const Eigen::Index m = cost.cols();
    if (supply.size() != n || demand.size() != m) throw Error("transportation: marginal sizes do not match cost");
    if (n * m > kMaxCells) throw Error("transportation: problem exceeds the 10^4 cell limit");
    if ((supply.array() < 0).any() || (demand.array() < 0).any()) throw Error("transportation: negative mass");
    const double total = supply.sum();
    if (std::abs(total - demand.sum()) > 1e-12 * std::max(1.0, total)) {
        throw Error("transportation: supply and demand totals differ");
    }

    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, m);
    std::vector<Cell> basis;
    {
        // Northwest corner start; exactly n+m-1 basic cells forming a tree.
        Eigen::VectorXd a = supply;
        Eigen::VectorXd b = demand;
        Eigen::Index i = 0;
        Eigen::Index j = 0;
        while (true) {
            const double q = std::min(a(i), b(j));
            x(i, j) = q;
            basis.push_back({i, j});
            a(i) -= q;
            b(j) -= q;
            if (i == n - 1 && j == m - 1) break;
            if ((a(i) <= b(j) && i < n - 1) || j == m - 1) {
                ++i;
            } else {
                ++j;
            }
        }
    }

    const double scale = std::max(1.0, cost.cwiseAbs().maxCoeff());
    const double tol = 1e-12 * scale;
    const Eigen::Index nodes = n + m;
    const int64_t max_iter = 50 * n * m + 1000;

    for (int64_t iter = 0;; ++iter) {
        if (iter > max_iter) throw Error("transportation: simplex did not terminate");

        std::vector<std::vector<std::pair<Eigen::Index, std::size_t>>> adj(static_cast<std::size_t>(nodes));
        for (std::size_t k = 0; k < basis.size(); ++k) {
            adj[static_cast<std::size_t>(basis[k].i)].push_back({n + basis[k].j, k});
            adj[static_cast<std::size_t>(n + basis[k].j)].push_back({basis[k].i, k});
        }

        // Potentials u (rows) and v (columns) from c_ij = u_i + v_j on the tree.
        Eigen::VectorXd pot = Eigen::VectorXd::Zero(nodes);
        std::vector<bool> seen(static_cast<std::size_t>(nodes), false);
        std::deque<Eigen::Index> queue{0};
        seen[0] = true;
        while (!queue.empty()) {
            const auto u = queue.front();
            queue.pop_front();
            for (const auto& [w, k] : adj[static_cast<std::size_t>(u)]) {
                if (seen[static_cast<std::size_t>(w)]) continue;
                seen[static_cast<std::size_t>(w)] = true;
                pot(w) = cost(basis[k].i, basis[k].j) - pot(u);
                queue.push_back(w);
            }
        }

        // Bland's rule: first cell with negative reduced cost.
        Cell enter{-1, -1};
        for (Eigen::Index i = 0; i < n && enter.i < 0; ++i) {
            for (Eigen::Index j = 0; j < m; ++j) {
                if (cost(i, j) - pot(i) - pot(n + j) < -tol) {
                    enter = {i, j};
                    break;
                }
            }
        }
        if (enter.i < 0) break;

        // Tree path from row enter.i to column enter.j.
        std::vector<std::pair<Eigen::Index, std::size_t>> parent(static_cast<std::size_t>(nodes), {-1, 0});
        std::vector<bool> visited(static_cast<std::size_t>(nodes), false);
        queue = {enter.i};
        visited[static_cast<std::size_t>(enter.i)] = true;
        const Eigen::Index goal = n + enter.j;
        while (!queue.empty() && !visited[static_cast<std::size_t>(goal)]) {
            const auto u = queue.front();
            queue.pop_front();
            for (const auto& [w, k] : adj[static_cast<std::size_t>(u)]) {
                if (visited[static_cast<std::size_t>(w)]) continue;
                visited[static_cast<std::size_t>(w)] = true;
                parent[static_cast<std::size_t>(w)] = {u, k};
                queue.push_back(w);
            }
        }
        std::vector<std::size_t> path;  // basis indices from enter.i to goal
        for (Eigen::Index v = goal; v != enter.i; v = parent[static_cast<std::size_t>(v)].first) {
            path.push_back(parent[static_cast<std::size_t>(v)].second);
        }
        std::reverse(path.begin(), path.end());

        // Odd positions (1st, 3rd, ...) of the path lose mass.
        double theta = std::numeric_limits<double>::infinity();
        std::size_t leave = 0;
        for (std::size_t p = 0; p < path.size(); p += 2) {
            const auto& c = basis[path[p]];
            if (x(c.i, c.j) < theta) {
                theta = x(c.i, c.j);
                leave = path[p];
            }
        }
        for (std::size_t p = 0; p < path.size(); ++p) {
            const auto& c = basis[path[p]];
            x(c.i, c.j) += (p % 2 == 0) ? -theta : theta;
        }
        x(basis[leave].i, basis[leave].j) = 0.0;
        x(enter.i, enter.j) = theta;
        basis[leave] = enter;
    }

    x = x.cwiseMax(0.0);
    TransportPlan plan;
    plan.source_marginal = x.rowwise().sum();
    plan.target_marginal = x.colwise().sum().transpose();
    plan.transport_cost = (x.array() * cost.array()).sum();
    plan.divergence_cost = 0.0;
    plan.matrix = std::move(x);
    return plan;
}

TransportPlan discrete_ot_oracle(const PointCloud& source, const PointCloud& target) {
    check_sizes(source, target);
    const double ws = source.weights.sum();
    const double wt = target.weights.sum();
    if (!(ws > 0) || !(wt > 0)) throw Error("discrete_ot_oracle: total mass must be positive");
    Eigen::VectorXd a = source.weights / ws;
    Eigen::VectorXd b = target.weights / wt;
    // Absorb the rounding residue of the normalization into the largest entry.
    Eigen::Index k = 0;
    b.maxCoeff(&k);
    b(k) += a.sum() - b.sum();
    return solve_transportation(squared_distance_matrix(source, target), a, b);
}

// ---------------------------------------------------------------------------
// quadratic-penalty UOT by a Mehrotra predictor-corrector interior point

TransportPlan discrete_uot_oracle(const PointCloud& source, const PointCloud& target, double relaxation) {
    check_sizes(source, target);
    if (!(relaxation > 0) || !std::isfinite(relaxation)) throw Error("discrete_uot_oracle: relaxation must be > 0");
    const Eigen::Index n = source.size();
    const Eigen::Index m = target.size();
    const Eigen::Index cells = n * m;
    const double r2 = 2.0 * relaxation;

    const Eigen::MatrixXd cost = squared_distance_matrix(source, target);
    const Eigen::VectorXd& a = source.weights;
    const Eigen::VectorXd& b = target.weights;

    // Cells are stored row-major: k = i*m + j.
    auto A = [&](const Eigen::VectorXd& v) {
        Eigen::VectorXd out(n + m);
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> mat(v.data(), n, m);
        out.head(n) = mat.rowwise().sum();
        out.tail(m) = mat.colwise().sum().transpose();
        return out;
    };
    auto At = [&](const Eigen::VectorXd& y) {
        Eigen::VectorXd out(cells);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < m; ++j) out(i * m + j) = y(i) + y(n + j);
        }
        return out;
    };

    Eigen::VectorXd marg(n + m);
    marg << a, b;
    Eigen::VectorXd c(cells);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) c(i * m + j) = cost(i, j);
    }
    const Eigen::VectorXd g = c - r2 * At(marg);
    auto Q = [&](const Eigen::VectorXd& v) { return Eigen::VectorXd(r2 * At(A(v))); };

    // (D + 2r A^T A)^{-1} rhs via Woodbury on the (n+m)-dimensional core.
    auto solve = [&](const Eigen::VectorXd& dinv, const Eigen::VectorXd& rhs) {
        Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n + m, n + m);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < m; ++j) {
                const double d = dinv(i * m + j);
                s(i, i) += d;
                s(n + j, n + j) += d;
                s(i, n + j) = d;
                s(n + j, i) = d;
            }
        }
        s.diagonal().array() += 1.0 / r2;
        const Eigen::VectorXd w = dinv.cwiseProduct(rhs);
        const Eigen::VectorXd t = s.ldlt().solve(A(w));
        return Eigen::VectorXd(w - dinv.cwiseProduct(At(t)));
    };

    auto max_step = [](const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
        double alpha = 1.0;
        for (Eigen::Index k = 0; k < v.size(); ++k) {
            if (dv(k) < 0) alpha = std::min(alpha, -v(k) / dv(k));
        }
        return alpha;
    };

    const double gscale = 1.0 + g.cwiseAbs().maxCoeff();
    const double mass = std::max(marg.sum() / 2.0, 1e-12);
    Eigen::VectorXd x = Eigen::VectorXd::Constant(cells, mass / static_cast<double>(cells));
    Eigen::VectorXd z = Eigen::VectorXd::Constant(cells, gscale);
    const auto dn = static_cast<double>(cells);

    bool converged = false;
    for (int iter = 0; iter < 500; ++iter) {
        const Eigen::VectorXd rd = Q(x) + g - z;
        const double mu = x.dot(z) / dn;
        if (mu <= 1e-15 * gscale * mass && rd.cwiseAbs().maxCoeff() <= 1e-11 * gscale) {
            converged = true;
            break;
        }
        const Eigen::VectorXd dinv = x.cwiseQuotient(z);

        // Predictor.
        Eigen::VectorXd rc = -x.cwiseProduct(z);
        Eigen::VectorXd dx = solve(dinv, -rd + rc.cwiseQuotient(x));
        Eigen::VectorXd dz = (rc - z.cwiseProduct(dx)).cwiseQuotient(x);
        double alpha = std::min(max_step(x, dx), max_step(z, dz));
        const double mu_aff = (x + alpha * dx).dot(z + alpha * dz) / dn;
        const double sigma = std::pow(mu_aff / mu, 3.0);

        // Corrector.
        rc = -x.cwiseProduct(z) - dx.cwiseProduct(dz) + Eigen::VectorXd::Constant(cells, sigma * mu);
        dx = solve(dinv, -rd + rc.cwiseQuotient(x));
        dz = (rc - z.cwiseProduct(dx)).cwiseQuotient(x);
        alpha = std::min(1.0, 0.995 * std::min(max_step(x, dx), max_step(z, dz)));
        x += alpha * dx;
        z += alpha * dz;
    }
    if (!converged) throw Error("discrete_uot_oracle: interior point method did not converge");

    TransportPlan plan;
    plan.matrix = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(x.data(), n, m);
    plan.source_marginal = plan.matrix.rowwise().sum();
    plan.target_marginal = plan.matrix.colwise().sum().transpose();
    plan.transport_cost = (plan.matrix.array() * cost.array()).sum();
    plan.divergence_cost =
        relaxation * ((plan.source_marginal - a).squaredNorm() + (plan.target_marginal - b).squaredNorm());
    return plan;
}

// ---------------------------------------------------------------------------
// toy data and map

ToyData make_toy_data(const ToySpec& spec) {
    if (spec.n_source < 1 || spec.n_target < 1) throw Error("toy data: sample counts must be >= 1");
    if (!(spec.sigma > 0)) throw Error("toy data: sigma must be > 0");
    if (!(spec.outlier_fraction >= 0 && spec.outlier_fraction < 1)) {
        throw Error("toy data: outlier_fraction must lie in [0, 1)");
    }
    ToyData d;
    d.core_center = {spec.core_center[0], spec.core_center[1]};
    d.outlier_center = d.core_center + Eigen::Vector2d(0.0, spec.outlier_distance * spec.sigma);

    std::mt19937_64 rs(data::derive_seed(spec.seed, 1));
    d.source.resize(spec.n_source, 2);
    for (int64_t i = 0; i < spec.n_source; ++i) {
        d.source(i, 0) = spec.source_center[0] + spec.sigma * detail::normal(rs);
        d.source(i, 1) = spec.source_center[1] + spec.sigma * detail::normal(rs);
    }

    const auto n_out = static_cast<int64_t>(std::floor(spec.outlier_fraction * static_cast<double>(spec.n_target)));
    std::mt19937_64 rt(data::derive_seed(spec.seed, 2));
    d.target.resize(spec.n_target, 2);
    d.target_is_outlier.assign(static_cast<std::size_t>(spec.n_target), false);
    for (int64_t i = 0; i < spec.n_target; ++i) {
        const bool out = i < n_out;
        const Eigen::Vector2d center = out ? d.outlier_center : d.core_center;
        d.target(i, 0) = center(0) + spec.sigma * detail::normal(rt);
        d.target(i, 1) = center(1) + spec.sigma * detail::normal(rt);
        d.target_is_outlier[static_cast<std::size_t>(i)] = out;
    }
    return d;
}

training::TrainConfig default_toy_config() {
    training::TrainConfig c;
    c.experts.clear();
    c.tau = 0.0015;
    c.gamma = 0.1;
    c.batch = 128;
    c.epochs = 800;
    c.iterations_per_epoch = 20;
    c.swa_last = 0;
    c.lr_transport = 3e-3;
    c.lr_potential = 6e-3;
    c.lr_experts = 6e-3;
    c.lr_min_ratio = 0.1;
    return c;
}

ToyMlpImpl::ToyMlpImpl(int64_t in, int64_t out, int64_t hidden, double scale, bool residual, uint64_t seed)
    : scale_(scale), residual_(residual) {
    namespace nn = torch::nn;
    auto act = [] { return nn::LeakyReLU(nn::LeakyReLUOptions().negative_slope(0.2)); };
    body_ = register_module("body", nn::Sequential(nn::Linear(in, hidden), act(), nn::Linear(hidden, hidden), act(),
                                                   nn::Linear(hidden, out)));
    networks::init_weights(*this, seed);
    if (residual_) {
        torch::NoGradGuard ng;
        body_->ptr(4)->as<nn::Linear>()->weight.zero_();
    }
}

torch::Tensor ToyMlpImpl::forward(const torch::Tensor& x) {
    auto y = body_->forward(x / scale_);
    if (residual_) return x + scale_ * y;
    return y.squeeze(-1);
}

namespace {

torch::Tensor to_tensor(const Eigen::MatrixX2d& m) {
    auto t = torch::empty({m.rows(), 2}, torch::kFloat64);
    auto acc = t.accessor<double, 2>();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        acc[i][0] = m(i, 0);
        acc[i][1] = m(i, 1);
    }
    return t.to(torch::kFloat32);
}

Eigen::MatrixX2d to_matrix(const torch::Tensor& t) {
    auto d = t.detach().to(torch::kFloat64).contiguous();
    auto acc = d.accessor<double, 2>();
    Eigen::MatrixX2d m(d.size(0), 2);
    for (int64_t i = 0; i < d.size(0); ++i) {
        m(i, 0) = acc[i][0];
        m(i, 1) = acc[i][1];
    }
    return m;
}

}  // namespace

double outlier_mass(const Eigen::MatrixX2d& mapped, const Eigen::Vector2d& core, const Eigen::Vector2d& outlier) {
    if (mapped.rows() == 0) throw Error("outlier_mass: no points");
    int64_t hits = 0;
    for (Eigen::Index i = 0; i < mapped.rows(); ++i) {
        const Eigen::Vector2d p = mapped.row(i).transpose();
        if ((p - outlier).squaredNorm() < (p - core).squaredNorm()) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(mapped.rows());
}

ToyResult train_toy_map(const ToyData& data, const training::TrainConfig& cfg, int64_t hidden) {
    cfg.validate();
    if (!cfg.experts.empty()) throw Error("train_toy_map: the expert committee is image-specific; disable it");
    if (hidden < 1) throw Error("train_toy_map: hidden width must be >= 1");

    const auto src = to_tensor(data.source);
    const auto tgt = to_tensor(data.target);
    const double scale = std::max(1.0, std::sqrt(tgt.pow(2).sum(1).mean().item<double>()));

    ToyMlp transport(2, 2, hidden, scale, true, data::derive_seed(cfg.seed, 301));
    ToyMlp potential(2, 1, hidden, scale, false, data::derive_seed(cfg.seed, 302));
    auto adam = [&](const std::vector<torch::Tensor>& params, double lr) {
        return torch::optim::Adam(
            params, torch::optim::AdamOptions(lr).betas({cfg.beta1, cfg.beta2}).eps(cfg.adam_eps));
    };
    auto opt_t = adam(transport->parameters(), cfg.lr_transport);
    auto opt_p = adam(potential->parameters(), cfg.lr_potential);
    const auto penalty = cfg.penalty();

    data::UnpairedSampler sampler(src.size(0), tgt.size(0), cfg.batch, data::derive_seed(cfg.seed, 303));
    const int64_t per_epoch = sampler.steps_per_epoch();
    const int64_t iters = cfg.iterations_per_epoch > 0 ? cfg.iterations_per_epoch
                                                       : std::max<int64_t>(1, per_epoch / (cfg.n_inner + 1));
    int64_t stream = 0;
    auto next = [&] {
        const auto b = sampler.batch(stream / per_epoch, stream % per_epoch);
        ++stream;
        return std::make_pair(src.index_select(0, torch::tensor(b.raw, torch::kLong)),
                              tgt.index_select(0, torch::tensor(b.srgb, torch::kLong)));
    };
    auto set_lr = [](torch::optim::Adam& opt, double lr) {
        for (auto& g : opt.param_groups()) static_cast<torch::optim::AdamOptions&>(g.options()).lr(lr);
    };

    ToyResult result;
    for (int64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        set_lr(opt_t, training::cosine_lr(epoch, cfg.epochs, cfg.lr_transport, cfg.lr_transport * cfg.lr_min_ratio));
        set_lr(opt_p, training::cosine_lr(epoch, cfg.epochs, cfg.lr_potential, cfg.lr_potential * cfg.lr_min_ratio));
        for (int64_t it = 0; it < iters; ++it) {
            for (int64_t k = 0; k < cfg.n_inner; ++k) {
                auto [x, y] = next();
                torch::Tensor fake;
                torch::Tensor cost;
                {
                    torch::NoGradGuard ng;
                    fake = transport->forward(x);
                    cost = losses::unpaired_cost_per_sample(fake, x, cfg.tau);
                }
                auto pot_fake = potential->forward(fake);
                auto real = y.clone();
                if (cfg.gamma > 0) real.requires_grad_(true);
                auto pot_real = potential->forward(real);
                auto r1 = cfg.gamma > 0 ? losses::r1_penalty(pot_real, real, cfg.gamma)
                                        : torch::zeros({}, pot_real.options());
                auto obj = cfg.adversarial == training::Adversarial::Uot
                               ? losses::potential_objective(cost, pot_fake, pot_real, penalty, r1)
                               : losses::hinge_disc_objective(pot_real, pot_fake) + r1;
                if (!std::isfinite(obj.item<double>())) throw NonFiniteLoss("toy potential step: non-finite objective");
                opt_p.zero_grad();
                obj.backward();
                opt_p.step();
            }
            auto x = next().first;
            for (auto& p : potential->parameters()) p.requires_grad_(false);
            auto fake = transport->forward(x);
            auto lt = losses::transport_objective(losses::unpaired_cost_per_sample(fake, x, cfg.tau),
                                                  potential->forward(fake));
            for (auto& p : potential->parameters()) p.requires_grad_(true);
            const double v = lt.item<double>();
            if (!std::isfinite(v)) throw NonFiniteLoss("toy transport step: non-finite objective");
            result.transport_objective.push_back(v);
            opt_t.zero_grad();
            lt.backward();
            opt_t.step();
        }
    }

    torch::NoGradGuard ng;
    result.mapped = to_matrix(transport->forward(src));
    result.mean_displacement = (result.mapped - data.source).rowwise().norm().mean();
    result.outlier_mass = outlier_mass(result.mapped, data.core_center, data.outlier_center);
    result.map = transport;
    return result;
}

void write_scatter_png(const std::filesystem::path& path, const ToyData& data, const Eigen::MatrixX2d& mapped,
                       int64_t size) {
    if (size < 16) throw Error("scatter: canvas too small");
    Eigen::Vector2d lo = data.source.colwise().minCoeff().transpose();
    Eigen::Vector2d hi = data.source.colwise().maxCoeff().transpose();
    for (const Eigen::MatrixX2d* m : {&data.target, &mapped}) {
        if (m->rows() == 0) continue;
        lo = lo.cwiseMin(m->colwise().minCoeff().transpose());
        hi = hi.cwiseMax(m->colwise().maxCoeff().transpose());
    }
    const double span = std::max((hi - lo).maxCoeff(), 1e-9) * 1.05;
    const Eigen::Vector2d mid = (lo + hi) / 2.0;

    auto img = torch::ones({3, size, size}, torch::kFloat32);
    auto acc = img.accessor<float, 3>();
    auto plot = [&](const Eigen::MatrixX2d& pts, std::array<float, 3> rgb, const std::vector<bool>* mask, bool want) {
        for (Eigen::Index i = 0; i < pts.rows(); ++i) {
            if (mask != nullptr && (*mask)[static_cast<std::size_t>(i)] != want) continue;
            const double u = (pts(i, 0) - mid(0)) / span + 0.5;
            const double v = 0.5 - (pts(i, 1) - mid(1)) / span;
            const auto px = static_cast<int64_t>(u * static_cast<double>(size - 1));
            const auto py = static_cast<int64_t>(v * static_cast<double>(size - 1));
            for (int64_t dy = -1; dy <= 1; ++dy) {
                for (int64_t dx = -1; dx <= 1; ++dx) {
                    const int64_t yy = py + dy;
                    const int64_t xx = px + dx;
                    if (yy < 0 || yy >= size || xx < 0 || xx >= size) continue;
                    for (int c = 0; c < 3; ++c) acc[c][yy][xx] = rgb[static_cast<std::size_t>(c)];
                }
            }
        }
    };
    plot(data.source, {0.20f, 0.35f, 0.85f}, nullptr, true);
    plot(data.target, {0.15f, 0.65f, 0.25f}, &data.target_is_outlier, false);
    plot(data.target, {0.95f, 0.55f, 0.10f}, &data.target_is_outlier, true);
    plot(mapped, {0.85f, 0.10f, 0.10f}, nullptr, true);
    imaging::write_png(path, img, 8);
}

}  // namespace eguot::toy_ot
