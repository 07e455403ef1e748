#include <doctest.h>

#include "require_checks.hpp"
#include "eguot/error.hpp"
#include "eguot/toy_ot.hpp"

#include <filesystem>
#include <random>

using namespace eguot;
using namespace eguot::toy_ot;
using testing::require_checks;

namespace {

PointCloud random_cloud(int n, std::mt19937_64& rng, bool unit_mass) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    PointCloud c;
    c.points.resize(n, 2);
    c.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        c.points(i, 0) = 3.0 * u(rng);
        c.points(i, 1) = 3.0 * u(rng);
        c.weights(i) = 0.1 + u(rng);
    }
    if (unit_mass) c.weights /= c.weights.sum();
    return c;
}

}  // namespace

TEST_CASE("oracle examples") { require_checks(testing::oracle_suite()); }

TEST_CASE("enumeration oracle agrees with a hand-solved 2x2 instance") {
    Eigen::MatrixXd c(2, 2);
    c << 0, 1, 1, 0;
    Eigen::VectorXd a(2);
    a << 0.7, 0.3;
    Eigen::VectorXd b(2);
    b << 0.4, 0.6;
    // Diagonal first: 0.4 at (0,0), 0.3 at (1,1), the remaining 0.3 at (0,1).
    CHECK(testing::enumerate_ot_cost(c, a, b) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("one-by-two closed form satisfies its optimality conditions") {
    for (double r : {0.5, 1.0, 10.0}) {
        for (double c2 : {0.0, 0.3, 50.0}) {
            const auto [p, q] = testing::uot_one_by_two(c2, r, 1.0, 0.9, 0.1);
            auto f = [&](double pp, double qq) {
                return c2 * qq + r * ((pp + qq - 1) * (pp + qq - 1) + (pp - 0.9) * (pp - 0.9) + (qq - 0.1) * (qq - 0.1));
            };
            for (double dp : {-1e-3, 0.0, 1e-3}) {
                for (double dq : {-1e-3, 0.0, 1e-3}) {
                    if (p + dp < 0 || q + dq < 0) continue;
                    CHECK(f(p + dp, q + dq) >= f(p, q) - 1e-12);
                }
            }
        }
    }
}

TEST_CASE("oracle plans are non-negative and meet their marginals") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 5; ++rep) {
        const auto s = random_cloud(6, rng, false);
        const auto t = random_cloud(5, rng, false);
        const auto ot = discrete_ot_oracle(s, t);
        CHECK(ot.matrix.minCoeff() >= 0.0);
        CHECK((ot.matrix.rowwise().sum() - s.weights / s.weights.sum()).cwiseAbs().maxCoeff() < 1e-9);
        CHECK((ot.matrix.colwise().sum().transpose() - t.weights / t.weights.sum()).cwiseAbs().maxCoeff() < 1e-9);
        CHECK(ot.divergence_cost == 0.0);

        const auto uot = discrete_uot_oracle(s, t, 2.0);
        CHECK(uot.matrix.minCoeff() >= 0.0);
        CHECK((uot.matrix.rowwise().sum() - uot.source_marginal).cwiseAbs().maxCoeff() < 1e-9);
        CHECK((uot.matrix.colwise().sum().transpose() - uot.target_marginal).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("relaxed problem is never worse than the balanced plan at its own objective") {
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 5; ++rep) {
        const auto s = random_cloud(4, rng, true);
        const auto t = random_cloud(5, rng, true);
        for (double r : {0.1, 1.0, 100.0}) {
            CHECK(discrete_uot_oracle(s, t, r).objective() <= discrete_ot_oracle(s, t).transport_cost + 1e-9);
        }
    }
}

TEST_CASE("oracle preconditions") {
    std::mt19937_64 rng(1);
    auto big = random_cloud(101, rng, true);
    CHECK_THROWS_AS(discrete_ot_oracle(big, big), Error);
    auto s = random_cloud(2, rng, true);
    CHECK_THROWS_AS(discrete_uot_oracle(s, s, 0.0), Error);
    s.weights(0) = -1;
    CHECK_THROWS_AS(s.validate(), Error);
}

TEST_CASE("toy data plants the requested outlier count") {
    ToySpec spec;
    spec.n_target = 200;
    auto d = make_toy_data(spec);
    int64_t n = 0;
    for (bool b : d.target_is_outlier) n += b ? 1 : 0;
    CHECK(n == 30);
    CHECK((d.outlier_center - d.core_center).norm() == doctest::Approx(20.0));
    CHECK(outlier_mass(d.target, d.core_center, d.outlier_center) == doctest::Approx(0.15));
}

TEST_CASE("toy map without outliers stays on the core") {
    ToySpec spec;
    spec.outlier_fraction = 0.0;
    spec.seed = 3;
    auto cfg = default_toy_config();
    cfg.seed = 3;
    auto res = train_toy_map(make_toy_data(spec), cfg);
    CHECK(res.outlier_mass < 0.02);
}

TEST_CASE("toy map is the identity between equal distributions under a large cost") {
    ToySpec spec;
    spec.outlier_fraction = 0.0;
    spec.core_center = spec.source_center;
    auto cfg = default_toy_config();
    cfg.tau = 10.0;
    auto res = train_toy_map(make_toy_data(spec), cfg);
    CHECK(res.mean_displacement < 0.1 * spec.sigma);
}

TEST_CASE("toy training is seed-deterministic") {
    ToySpec spec;
    spec.n_source = spec.n_target = 256;
    auto cfg = default_toy_config();
    cfg.epochs = 3;
    auto a = train_toy_map(make_toy_data(spec), cfg);
    auto b = train_toy_map(make_toy_data(spec), cfg);
    CHECK(a.outlier_mass == b.outlier_mass);
    CHECK(a.mapped == b.mapped);
    const auto path = std::filesystem::temp_directory_path() / "eguot_toy_scatter.png";
    write_scatter_png(path, make_toy_data(spec), a.mapped, 128);
    CHECK(std::filesystem::file_size(path) > 0);
    std::filesystem::remove(path);
}
