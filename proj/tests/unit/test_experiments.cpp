#include <doctest.h>

#include "eguot/error.hpp"
#include "eguot/experiments.hpp"
#include "eguot/imaging.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace eguot;
using namespace eguot::experiments;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    auto d = fs::temp_directory_path() / name;
    fs::remove_all(d);
    return d;
}

ExperimentReport fake_report(const std::string& name, double psnr, double de) {
    ExperimentReport r;
    r.preset = name;
    SeedResult s;
    s.seed = 1;
    s.metrics = metrics::report_from_rows({{0, psnr, 0.5, de}});
    r.runs.push_back(s);
    r.resummarize();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("preset catalogue") {
    const auto names = preset_names();
    for (const char* n : {"C1", "C2", "C3", "C4", "E1", "E2", "E3", "C1-clean", "C1-dirty", "C4-clean", "C4-dirty",
                          "C4-paired", "toy-2d"}) {
        CHECK(std::find(names.begin(), names.end(), n) != names.end());
    }
    CHECK(find_preset("C1").config.adversarial == training::Adversarial::HingeGan);
    CHECK(find_preset("C2").config.experts.empty());
    CHECK(find_preset("C3").config.tau == 0.0);
    CHECK(find_preset("C4").config.experts.size() == 3);
    CHECK(find_preset("E1").config.experts.size() == 2);
    CHECK(find_preset("C4-paired").config.mode == training::Mode::Paired);
    CHECK(find_preset("C4-dirty").corpus.corruption.fraction == doctest::Approx(0.15));
    CHECK(find_preset("C4-clean").corpus.corruption.fraction == 0.0);
    CHECK(find_preset("toy-2d").toy);
    for (const auto& p : presets()) {
        CHECK_FALSE(p.seeds.empty());
        CHECK(std::count(names.begin(), names.end(), p.name) == 1);
    }
}

TEST_CASE("unknown preset lists suggestions") {
    try {
        find_preset("C5");
        FAIL("expected an error");
    } catch (const Error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("C4") != std::string::npos);
        CHECK(msg.find("toy-2d") != std::string::npos);
    }
}

TEST_CASE("resolve applies seeds, epochs and overrides") {
    RunOptions o;
    o.seeds = std::vector<uint64_t>{9};
    o.epochs = 2;
    o.overrides = {"tau=0.5", "lambda=0"};
    auto p = resolve_preset("C4", o);
    CHECK(p.seeds == std::vector<uint64_t>{9});
    CHECK(p.config.epochs == 2);
    CHECK(p.config.swa_last <= 2);
    CHECK(p.config.tau == 0.5);
    CHECK(p.config.lambda == 0.0);
    o.overrides = {"not_a_key=1"};
    CHECK_THROWS_AS(resolve_preset("C4", o), Error);
}

TEST_CASE("summary statistics") {
    auto s = summarize({1.0, 2.0, 3.0, 4.0});
    CHECK(s.mean == doctest::Approx(2.5));
    CHECK(s.std == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(summarize({7.0}).std == 0.0);
}

TEST_CASE("ranking order and tie-breaks") {
    auto one = compare_reports({fake_report("A", 20, 5)});
    CHECK(one.rows.size() == 1);
    CHECK(one.rows[0].best_psnr);

    auto two = compare_reports({fake_report("A", 20, 5), fake_report("B", 21, 9)});
    CHECK(two.rows[0].name == "B");
    CHECK(two.rows[0].best_psnr);
    CHECK(two.rows[1].best_delta_e);

    auto tie = compare_reports({fake_report("A", 20, 6), fake_report("B", 20, 4)});
    CHECK(tie.rows[0].name == "B");
    auto tie2 = compare_reports({fake_report("Z", 20, 4), fake_report("Y", 20, 4)});
    CHECK(tie2.rows[0].name == "Y");

    CHECK(two.to_csv().rfind("rank,name,psnr,ssim,delta_e", 0) == 0);
    CHECK(two.to_text().find("B") != std::string::npos);

    ExperimentReport toy;
    toy.preset = "toy";
    SeedResult s;
    s.extra["outlier_mass_uot"] = 0.1;
    toy.runs.push_back(s);
    toy.resummarize();
    CHECK_THROWS_AS(compare_reports({fake_report("A", 20, 5), toy}), Error);
}

TEST_CASE("paired one-sided comparison") {
    auto r = paired_greater({2.0, 2.1, 1.9, 2.2, 2.05}, {1.0, 1.2, 1.1, 0.9, 1.0});
    CHECK(r.significant);
    CHECK(r.positive == 5);
    CHECK(r.critical == doctest::Approx(2.132).epsilon(1e-3));
    auto n = paired_greater({1.0, 2.0, 3.0, 4.0, 5.0}, {1.5, 1.5, 3.5, 3.5, 5.5});
    CHECK_FALSE(n.significant);
    // Differences d = {1, 2, 3}: mean 2, sd 1, t = 2 / (1 / sqrt 3).
    auto t = paired_greater({1.0, 2.0, 3.0}, {0.0, 0.0, 0.0});
    CHECK(t.t_statistic == doctest::Approx(2.0 * std::sqrt(3.0)));
    CHECK_THROWS_AS(paired_greater({1.0}, {0.0}), Error);
    CHECK_THROWS_AS(paired_greater({1.0, 2.0}, {0.0}), Error);
}

TEST_CASE("report json round trip") {
    auto r = fake_report("A", 20, 5);
    nlohmann::json j = r;
    auto back = j.get<ExperimentReport>();
    CHECK(back.metrics_csv() == r.metrics_csv());
    CHECK(back.summary.at("psnr").mean == r.summary.at("psnr").mean);
}

TEST_CASE("output root follows the environment") {
    ::setenv("EGUOT_OUTPUT_ROOT", "/tmp/eguot_root", 1);
    CHECK(default_output_dir("C4") == fs::path("/tmp/eguot_root") / "C4");
    ::unsetenv("EGUOT_OUTPUT_ROOT");
    CHECK(default_output_dir("C4") == fs::path("runs") / "C4");
    CHECK_FALSE(git_revision().empty());
}

TEST_CASE("C4 one-epoch smoke run and sample grids") {
    RunOptions o;
    o.seeds = std::vector<uint64_t>{1};
    o.epochs = 1;
    const auto out = temp_dir("eguot_c4_smoke");
    auto rep = run_preset("C4", out, o);

    REQUIRE(rep.runs.size() == 1);
    const auto& run = rep.runs.front();
    CHECK(rep.preset == "C4");
    CHECK(rep.has_image_metrics());
    CHECK(run.metrics.n_images > 0);
    CHECK(std::isfinite(run.metrics.psnr));
    CHECK(run.collapse_statistics.size() == 1);
    CHECK_FALSE(run.loss_curve.empty());
    CHECK(rep.summary.count("psnr") == 1);
    CHECK(rep.config.at("epochs") == 1);
    for (const char* f : {"report.json", "metrics.csv", "manifest.json"}) CHECK(fs::exists(out / f));
    CHECK(fs::exists(run.checkpoint));
    CHECK(fs::exists(run.grid));
    CHECK(fs::exists(run.loss_log));
    auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
    CHECK(manifest.contains("git_revision"));
    CHECK(manifest.contains("seeds"));

    auto loaded = load_report(out / "report.json");
    CHECK(loaded.metrics_csv() == rep.metrics_csv());

    auto corpus = data::build_corpus(find_preset("C4").corpus);
    const auto g1 = out / "g1.png";
    const auto g2 = out / "g2.png";
    emit_sample_grid(run.checkpoint, corpus.test, g1, 1);
    emit_sample_grid(run.checkpoint, corpus.test, g2, 1);
    CHECK(slurp(g1) == slurp(g2));
    auto img = imaging::read_png(g1);
    const int64_t h = corpus.test.gt.size(2);
    const int64_t w = corpus.test.gt.size(3);
    CHECK(img.size(1) == h);
    CHECK(img.size(2) == 3 * w + 2 * 2);
    CHECK_THROWS_AS(emit_sample_grid(run.checkpoint, corpus.test, out / "g3.png", corpus.test.size() + 1), Error);
    fs::remove_all(out);
}
