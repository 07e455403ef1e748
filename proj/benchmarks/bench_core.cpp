#include "eguot/data.hpp"
#include "eguot/experiments.hpp"
#include "eguot/imaging.hpp"
#include "eguot/losses.hpp"
#include "eguot/metrics.hpp"
#include "eguot/networks.hpp"
#include "eguot/toy_ot.hpp"
#include "eguot/training.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace eguot;

namespace {

torch::Tensor images(int64_t b, int64_t size, uint64_t seed) {
    auto gen = torch::make_generator<at::CPUGeneratorImpl>(seed);
    return torch::rand({b, 3, size, size}, gen);
}

void BM_Demosaic(benchmark::State& state) {
    const auto raw = imaging::mosaic(images(8, state.range(0), 1));
    for (auto _ : state) benchmark::DoNotOptimize(imaging::demosaic_bilinear(raw));
}
BENCHMARK(BM_Demosaic)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_RgbToLab(benchmark::State& state) {
    const auto x = images(8, state.range(0), 2);
    for (auto _ : state) benchmark::DoNotOptimize(imaging::rgb_to_lab(x));
}
BENCHMARK(BM_RgbToLab)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_FftLogMagnitude(benchmark::State& state) {
    const auto g = imaging::to_grayscale(images(8, state.range(0), 3));
    for (auto _ : state) benchmark::DoNotOptimize(imaging::fft_log_magnitude(g, 1e-6));
}
BENCHMARK(BM_FftLogMagnitude)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_Ssim(benchmark::State& state) {
    const auto a = images(1, state.range(0), 4)[0];
    const auto b = images(1, state.range(0), 5)[0];
    for (auto _ : state) benchmark::DoNotOptimize(metrics::ssim(a, b));
}
BENCHMARK(BM_Ssim)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_PotentialObjective(benchmark::State& state) {
    const int64_t n = state.range(0);
    const auto cost = torch::rand({n}, torch::kFloat64);
    const auto fake = torch::randn({n}, torch::kFloat64);
    const auto real = torch::randn({n}, torch::kFloat64);
    const losses::PenaltyPair penalty;
    const auto r1 = torch::zeros({}, torch::kFloat64);
    for (auto _ : state) benchmark::DoNotOptimize(losses::potential_objective(cost, fake, real, penalty, r1));
}
BENCHMARK(BM_PotentialObjective)->Arg(8)->Arg(1024)->Unit(benchmark::kMicrosecond);

void BM_TransportForward(benchmark::State& state) {
    networks::NetworkSpec spec;
    spec.kind = networks::NetworkKind::Transport;
    spec.width = 16;
    auto t = networks::build_transport(spec);
    torch::NoGradGuard ng;
    const auto raw = imaging::mosaic(images(8, state.range(0), 6));
    for (auto _ : state) benchmark::DoNotOptimize(t->forward(raw));
}
BENCHMARK(BM_TransportForward)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_OuterIteration(benchmark::State& state) {
    data::CorpusSpec cs;
    cs.count = 64;
    cs.height = cs.width = 32;
    cs.test_count = 8;
    const auto corpus = data::build_corpus(cs);
    auto cfg = experiments::desk_config();
    cfg.color_pretrain_epochs = 1;
    training::Trainer trainer(cfg, corpus.train);
    for (auto _ : state) benchmark::DoNotOptimize(trainer.outer_iteration());
}
BENCHMARK(BM_OuterIteration)->Unit(benchmark::kMillisecond);

void BM_DiscreteOtOracle(benchmark::State& state) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n(0.0, 1.0);
    const auto m = state.range(0);
    Eigen::MatrixX2d s(m, 2);
    Eigen::MatrixX2d t(m, 2);
    for (Eigen::Index i = 0; i < m; ++i) {
        s.row(i) << n(rng), n(rng);
        t.row(i) << 2 + n(rng), n(rng);
    }
    const auto src = toy_ot::PointCloud::uniform(s);
    const auto tgt = toy_ot::PointCloud::uniform(t);
    for (auto _ : state) benchmark::DoNotOptimize(toy_ot::discrete_ot_oracle(src, tgt));
}
BENCHMARK(BM_DiscreteOtOracle)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_DiscreteUotOracle(benchmark::State& state) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0.0, 1.0);
    const auto m = state.range(0);
    Eigen::MatrixX2d s(m, 2);
    Eigen::MatrixX2d t(m, 2);
    for (Eigen::Index i = 0; i < m; ++i) {
        s.row(i) << n(rng), n(rng);
        t.row(i) << 2 + n(rng), n(rng);
    }
    const auto src = toy_ot::PointCloud::uniform(s);
    const auto tgt = toy_ot::PointCloud::uniform(t);
    for (auto _ : state) benchmark::DoNotOptimize(toy_ot::discrete_uot_oracle(src, tgt, 1.0));
}
BENCHMARK(BM_DiscreteUotOracle)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
