#include <doctest.h>

#include "eguot/data.hpp"
#include "eguot/error.hpp"
#include "eguot/imaging.hpp"

#include <cmath>
#include <filesystem>
#include <set>

using namespace eguot;

TEST_CASE("scene generation is deterministic per seed") {
    auto a = data::generate_scenes(1, 32, 32, 9);
    auto b = data::generate_scenes(1, 32, 32, 9);
    CHECK(torch::equal(a, b));
    CHECK_FALSE(torch::equal(a, data::generate_scenes(1, 32, 32, 10)));
}

TEST_CASE("scene generation validates its arguments") {
    CHECK_THROWS_AS(data::generate_scenes(0, 32, 32, 1), Error);
    CHECK_THROWS_AS(data::generate_scenes(1, 15, 32, 1), Error);
    CHECK_THROWS_AS(data::generate_scenes(1, 8, 8, 1), Error);
}

TEST_CASE("corpus channel means stay within the regression bound") {
    auto scenes = data::generate_scenes(100, 32, 32, 1);
    auto means = scenes.mean({0, 2, 3});
    for (int c = 0; c < 3; ++c) {
        const double m = means[c].item<double>();
        CHECK(m >= 0.3);
        CHECK(m <= 0.7);
    }
    CHECK(scenes.min().item<double>() >= 0.0);
    CHECK(scenes.max().item<double>() <= 1.0);
}

TEST_CASE("identity camera reduces to the mosaic") {
    auto cam = data::CameraModel::identity();
    auto gt = data::generate_scenes(2, 16, 16, 4);
    CHECK(torch::allclose(data::camera_forward(gt, cam, 3), imaging::mosaic(gt), 0.0, 1e-6));
}

TEST_CASE("zero image yields read noise only") {
    auto cam = data::CameraModel::identity();
    cam.noise_read = 0.01;
    cam.noise_shot = 0.5;
    auto raw = data::camera_forward(torch::zeros({3, 64, 64}), cam, 1);
    // Half-normal after clamping at zero: mean sigma / sqrt(2 pi).
    const double expected = 0.01 / std::sqrt(2.0 * M_PI);
    CHECK(raw.mean().item<double>() == doctest::Approx(expected).epsilon(0.1));
}

TEST_CASE("gamma on a constant gray") {
    auto cam = data::CameraModel::identity();
    cam.gamma = 2.2;
    auto raw = data::camera_forward(torch::full({3, 4, 4}, 0.5), cam, 1);
    CHECK((raw - std::pow(0.5, 2.2)).abs().max().item<double>() < 1e-6);
}

TEST_CASE("camera validation") {
    data::CameraModel cam;
    CHECK_NOTHROW(cam.validate());
    CHECK(cam.condition_number() < 1e3);
    cam.color_matrix = {1, 0, 0, 1, 0, 0, 0, 0, 1};
    CHECK_THROWS_AS(cam.validate(), Error);
    cam = data::CameraModel{};
    cam.noise_read = -1;
    CHECK_THROWS_AS(cam.validate(), Error);
}

TEST_CASE("corruption touches exactly floor(fraction N) targets") {
    auto corpus = data::generate_scenes(100, 16, 16, 2);
    data::CorruptionSpec spec;
    spec.seed = 5;
    for (double f : {0.0, 0.15, 1.0}) {
        spec.fraction = f;
        auto res = data::corrupt_targets(corpus, spec);
        int64_t marked = 0;
        for (int64_t i = 0; i < 100; ++i) {
            const bool same = torch::equal(res.corpus[i], corpus[i]);
            if (res.mask[static_cast<std::size_t>(i)]) {
                ++marked;
                CHECK_FALSE(same);
            } else {
                CHECK(same);
            }
        }
        CHECK(marked == static_cast<int64_t>(std::floor(f * 100)));
    }
}

TEST_CASE("corruption never reaches the raw side") {
    data::CorpusSpec spec;
    spec.count = 64;
    spec.test_count = 8;
    spec.height = spec.width = 16;
    auto clean = data::build_corpus(spec);
    spec.corruption.fraction = 0.25;
    spec.corruption.seed = 3;
    auto dirty = data::build_corpus(spec);
    CHECK(torch::equal(clean.train.raw, dirty.train.raw));
    CHECK(torch::equal(clean.train.gt, dirty.train.gt));
    CHECK_FALSE(torch::equal(clean.train.targets, dirty.train.targets));
    CHECK(torch::equal(clean.test.gt, dirty.test.gt));
    CHECK_NOTHROW(imaging::check_raw(dirty.train.raw));
    CHECK_NOTHROW(imaging::check_srgb(dirty.train.targets));
}

TEST_CASE("unpaired sampler covers each index once per epoch") {
    data::UnpairedSampler s(4, 4, 2, 7);
    CHECK(s.steps_per_epoch() == 2);
    std::multiset<int64_t> raw;
    std::multiset<int64_t> srgb;
    for (int64_t step = 0; step < 2; ++step) {
        auto b = s.batch(0, step);
        raw.insert(b.raw.begin(), b.raw.end());
        srgb.insert(b.srgb.begin(), b.srgb.end());
    }
    CHECK(raw == std::multiset<int64_t>{0, 1, 2, 3});
    CHECK(srgb == std::multiset<int64_t>{0, 1, 2, 3});
    CHECK_THROWS_AS(data::UnpairedSampler(4, 4, 5, 1), Error);
}

TEST_CASE("unpaired sampler streams are reproducible and seekable") {
    data::UnpairedSampler a(16, 16, 4, 11);
    data::UnpairedSampler b(16, 16, 4, 11);
    for (int i = 0; i < 10; ++i) {
        auto x = a.next();
        auto y = b.next();
        CHECK(x.raw == y.raw);
        CHECK(x.srgb == y.srgb);
    }
    data::UnpairedSampler c(16, 16, 4, 11);
    c.seek(2, 1);
    auto direct = a.batch(2, 1);
    auto sought = c.next();
    CHECK(direct.raw == sought.raw);
}

TEST_CASE("raw and sRGB index coincidence matches 1/N") {
    const int64_t n = 16;
    data::UnpairedSampler s(n, n, 1, 21);
    int64_t hits = 0;
    int64_t draws = 0;
    for (int64_t epoch = 0; epoch < 200; ++epoch) {
        for (int64_t step = 0; step < n; ++step, ++draws) {
            auto b = s.batch(epoch, step);
            if (b.raw[0] == b.srgb[0]) ++hits;
        }
    }
    const double p = 1.0 / static_cast<double>(n);
    const double mean = p * static_cast<double>(draws);
    const double sd = std::sqrt(static_cast<double>(draws) * p * (1 - p));
    CHECK(std::abs(static_cast<double>(hits) - mean) <= 3 * sd);
}

TEST_CASE("joint index counts pass a chi-square independence test") {
    const int64_t n = 64;
    data::UnpairedSampler s(n, n, 1, 99);
    std::vector<int64_t> counts(static_cast<std::size_t>(n * n), 0);
    const int64_t draws = 10000;
    for (int64_t k = 0; k < draws; ++k) {
        auto b = s.next();
        counts[static_cast<std::size_t>(b.raw[0] * n + b.srgb[0])]++;
    }
    // Marginals are uniform by construction, so the expected cell count is draws / n^2.
    const double expected = static_cast<double>(draws) / static_cast<double>(n * n);
    double chi2 = 0.0;
    for (auto c : counts) chi2 += (static_cast<double>(c) - expected) * (static_cast<double>(c) - expected) / expected;
    // df = (n-1)^2 = 3969; the p = 0.01 upper critical value via Wilson-Hilferty.
    const double df = static_cast<double>((n - 1) * (n - 1));
    const double z = 2.326347874;
    const double crit = df * std::pow(1 - 2 / (9 * df) + z * std::sqrt(2 / (9 * df)), 3);
    CHECK(chi2 < crit);
}

TEST_CASE("paired sampler applies one permutation") {
    data::PairedSampler s(10, 3, 4);
    CHECK(s.steps_per_epoch() == 3);
    auto a = s.batch(1, 2);
    CHECK(a == s.batch(1, 2));
    CHECK(a.size() == 3);
}

TEST_CASE("corpus save and load round trip") {
    data::CorpusSpec spec;
    spec.count = 64;
    spec.test_count = 4;
    spec.height = spec.width = 16;
    spec.corruption.fraction = 0.1;
    auto set = data::build_corpus(spec);
    const auto dir = std::filesystem::temp_directory_path() / "eguot_corpus_test";
    std::filesystem::remove_all(dir);
    data::save_corpus(set, dir);
    auto back = data::load_corpus(dir);
    CHECK(back.train.corrupted == set.train.corrupted);
    CHECK((back.train.gt - set.train.gt).abs().max().item<double>() < 1e-4);
    CHECK((back.train.raw - set.train.raw).abs().max().item<double>() < 1e-4);
    CHECK(back.spec.seed == spec.seed);
    std::filesystem::remove_all(dir);
}
