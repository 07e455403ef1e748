#include <doctest.h>

#include "eguot/data.hpp"
#include "eguot/error.hpp"
#include "eguot/imaging.hpp"
#include "eguot/losses.hpp"
#include "eguot/networks.hpp"

using namespace eguot;
using namespace eguot::networks;

namespace {

NetworkSpec spec_of(NetworkKind kind, uint64_t seed = 3, int64_t width = 8) {
    NetworkSpec s;
    s.kind = kind;
    s.width = width;
    s.seed = seed;
    return s;
}

torch::Tensor random_images(int64_t b, int64_t size, uint64_t seed) {
    auto gen = torch::make_generator<at::CPUGeneratorImpl>(seed);
    return torch::rand({b, 3, size, size}, gen);
}

ColorEncoder small_encoder() {
    static ColorEncoder enc = [] {
        auto corpus = data::generate_scenes(64, 32, 32, 1);
        return pretrain_color_encoder(corpus, 1, 4, 7).encoder;
    }();
    return enc;
}

}  // namespace

TEST_CASE("transport shape and range contract") {
    auto t = build_transport(spec_of(NetworkKind::Transport));
    for (int64_t h : {16, 32, 48, 64}) {
        auto raw = torch::rand({2, 4, h / 2, h / 2});
        auto out = t->forward(raw);
        CHECK(out.sizes() == torch::IntArrayRef({2, 3, h, h}));
        CHECK(out.min().item<double>() >= 0.0);
        CHECK(out.max().item<double>() <= 1.0);
    }
    CHECK_THROWS_AS(t->forward(torch::rand({1, 3, 8, 8})), Error);
    CHECK_THROWS_AS(t->forward(torch::rand({1, 4, 6, 6})), Error);
    CHECK(parameter_count(*t) <= 2'000'000);
}

TEST_CASE("builders are seed-deterministic") {
    auto a = build_transport(spec_of(NetworkKind::Transport, 5));
    auto b = build_transport(spec_of(NetworkKind::Transport, 5));
    auto c = build_transport(spec_of(NetworkKind::Transport, 6));
    CHECK(bitwise_equal(snapshot(*a), snapshot(*b)));
    CHECK_FALSE(bitwise_equal(snapshot(*a), snapshot(*c)));
    auto p = build_potential(spec_of(NetworkKind::Potential, 5));
    auto q = build_potential(spec_of(NetworkKind::Potential, 5));
    CHECK(bitwise_equal(snapshot(*p), snapshot(*q)));
    auto s1 = build_structure_expert(spec_of(NetworkKind::StructureExpert, 5));
    auto s2 = build_structure_expert(spec_of(NetworkKind::StructureExpert, 5));
    CHECK(bitwise_equal(snapshot(*s1), snapshot(*s2)));
}

TEST_CASE("direct transport variant satisfies the same contract") {
    auto s = spec_of(NetworkKind::Transport);
    s.arch = "unet-direct";
    auto t = Registry::instance().make_transport(s);
    auto out = t->forward(torch::rand({2, 4, 16, 16}));
    CHECK(out.sizes() == torch::IntArrayRef({2, 3, 32, 32}));
    CHECK(out.min().item<double>() >= 0.0);
    CHECK(out.max().item<double>() <= 1.0);
}

TEST_CASE("potential scores samples independently") {
    auto p = build_potential(spec_of(NetworkKind::Potential));
    auto x = random_images(3, 32, 1);
    auto single = p->forward(x);
    CHECK(single.sizes() == torch::IntArrayRef({3}));
    auto doubled = p->forward(torch::cat({x, x}));
    CHECK(torch::allclose(doubled.narrow(0, 0, 3), single, 1e-5, 1e-6));
    CHECK(torch::allclose(doubled.narrow(0, 3, 3), single, 1e-5, 1e-6));
    auto y = x.clone().requires_grad_(true);
    p->forward(y).sum().backward();
    CHECK(torch::isfinite(y.grad()).all().item<bool>());
}

TEST_CASE("every critic is differentiable on random input") {
    std::vector<CriticPtr> critics{build_potential(spec_of(NetworkKind::Potential)),
                                   build_structure_expert(spec_of(NetworkKind::StructureExpert)),
                                   build_frequency_expert(spec_of(NetworkKind::FrequencyExpert)),
                                   build_color_expert(small_encoder(), spec_of(NetworkKind::ColorExpert))};
    for (auto& c : critics) {
        for (int64_t size : {32, 64}) {
            auto x = random_images(2, size, 4).requires_grad_(true);
            auto out = c->forward(x);
            CHECK(out.sizes() == torch::IntArrayRef({2}));
            out.sum().backward();
            CHECK(torch::isfinite(x.grad()).all().item<bool>());
            CHECK(x.grad().abs().sum().item<double>() > 0.0);
        }
    }
}

TEST_CASE("structure expert is local and rejects small inputs") {
    auto s = build_structure_expert(spec_of(NetworkKind::StructureExpert));
    CHECK_THROWS_AS(s->forward(random_images(1, 16, 2)), Error);
    auto x = random_images(1, 64, 3).requires_grad_(true);
    auto logits = structure_patch_logits(*s, x);
    const int64_t h = logits.size(2);
    logits[0][0][h / 2][h / 2].backward();
    auto support = x.grad().abs().sum(1)[0].gt(0);
    const auto rows = support.any(1).sum().item<int64_t>();
    const auto cols = support.any(0).sum().item<int64_t>();
    CHECK(rows > 0);
    CHECK(rows < 64);
    CHECK(cols < 64);
    CHECK_THROWS_AS(structure_patch_logits(*build_potential(spec_of(NetworkKind::Potential)), x), Error);
}

TEST_CASE("frequency expert is translation invariant") {
    auto f = build_frequency_expert(spec_of(NetworkKind::FrequencyExpert));
    auto x = random_images(2, 32, 8);
    auto shifted = torch::roll(x, {5, 11}, {2, 3});
    CHECK(torch::allclose(f->forward(x), f->forward(shifted), 0.0, 1e-5));
}

TEST_CASE("color encoder pretraining") {
    SUBCASE("gray corpus predicts neutral chroma") {
        auto gray = data::generate_scenes(64, 32, 32, 2).mean(1, true).expand({64, 3, 32, 32}).contiguous();
        auto res = pretrain_color_encoder(gray, 3, 4, 1);
        CHECK(res.encoder->frozen());
        // validation_l2 is in units of 100 Lab; convert the RMS to Lab units.
        CHECK(std::sqrt(res.validation_l2.back()) * 100.0 < 2.0);
    }
    SUBCASE("validation loss decreases on the default corpus") {
        auto corpus = data::generate_scenes(128, 32, 32, 1);
        auto res = pretrain_color_encoder(corpus, 5, 4, 1);
        CHECK(res.validation_l2.size() == 6);
        CHECK(res.validation_l2.back() < res.validation_l2.front());
    }
    SUBCASE("too small a corpus is rejected") {
        CHECK_THROWS_AS(pretrain_color_encoder(data::generate_scenes(8, 32, 32, 1), 1, 4, 1), Error);
    }
}

TEST_CASE("color expert freezes the encoder and reads chroma") {
    auto enc = small_encoder();
    auto expert = build_color_expert(enc, spec_of(NetworkKind::ColorExpert));
    auto before = snapshot(*enc);
    for (const auto& p : enc->parameters()) CHECK_FALSE(p.requires_grad());
    for (const auto& p : expert->trainable_parameters()) CHECK(p.requires_grad());

    auto opt = torch::optim::Adam(expert->trainable_parameters(), torch::optim::AdamOptions(1e-2));
    for (int i = 0; i < 3; ++i) {
        opt.zero_grad();
        expert->forward(random_images(4, 32, 10 + static_cast<uint64_t>(i))).sum().backward();
        opt.step();
    }
    CHECK(bitwise_equal(before, snapshot(*enc)));

    // Same L*, different chroma: score moves and the chroma gradient is non-zero.
    auto lab = imaging::rgb_to_lab(torch::full({1, 3, 32, 32}, 0.5)).to(torch::kFloat32);
    lab.select(1, 1).fill_(20.0);
    auto tinted = imaging::lab_to_rgb(lab).clamp(0, 1);
    auto neutral = torch::full({1, 3, 32, 32}, 0.5);
    CHECK(std::abs(expert->forward(tinted).item<double>() - expert->forward(neutral).item<double>()) > 0.0);
    auto l = imaging::rgb_to_lab(random_images(1, 32, 12)).requires_grad_(true);
    expert->forward(imaging::lab_to_rgb(l)).sum().backward();
    CHECK(l.grad().narrow(1, 1, 2).abs().sum().item<double>() > 0.0);
}

TEST_CASE("committee scoring") {
    Committee full{{{ExpertKind::Color, build_color_expert(small_encoder(), spec_of(NetworkKind::ColorExpert))},
                    {ExpertKind::Structure, build_structure_expert(spec_of(NetworkKind::StructureExpert))},
                    {ExpertKind::Frequency, build_frequency_expert(spec_of(NetworkKind::FrequencyExpert))}}};
    auto x = random_images(5, 32, 1);
    auto scores = committee_score(full, x);
    CHECK(scores.scores.size() == 3);
    for (const auto& s : scores.scores) CHECK(s.sizes() == torch::IntArrayRef({5}));

    Committee e1{{full.members[1], full.members[2]}};
    auto s1 = committee_score(e1, x);
    const bool labels_ok = s1.labels == std::vector<ExpertKind>{ExpertKind::Structure, ExpertKind::Frequency};
    CHECK(labels_ok);

    Committee none;
    auto s0 = committee_score(none, x);
    CHECK(s0.scores.empty());
    CHECK(losses::expert_gen_objective(s0.scores).item<double>() == 0.0);
}

TEST_CASE("registry resolves names and rejects unknown ones") {
    auto names = Registry::instance().transport_names();
    CHECK(std::find(names.begin(), names.end(), "default") != names.end());
    auto s = spec_of(NetworkKind::Transport);
    s.arch = "nope";
    CHECK_THROWS_AS(Registry::instance().make_transport(s), Error);
    Registry::instance().register_transport("tiny", [](const NetworkSpec& sp) {
        auto copy = sp;
        copy.arch = "default";
        copy.width = 4;
        return build_transport(copy);
    });
    s.arch = "tiny";
    CHECK(parameter_count(*Registry::instance().make_transport(s)) <
          parameter_count(*build_transport(spec_of(NetworkKind::Transport))));
}

TEST_CASE("clamped ramp passes a leaky gradient outside the range") {
    auto x = torch::tensor({-0.5, 0.3, 1.4}, torch::dtype(torch::kFloat64).requires_grad(true));
    auto y = clamped_ramp(x, 0.05);
    CHECK(torch::equal(y.detach(), torch::tensor({0.0, 0.3, 1.0}, torch::kFloat64)));
    y.sum().backward();
    CHECK(torch::allclose(x.grad(), torch::tensor({0.05, 1.0, 0.05}, torch::kFloat64)));
}
