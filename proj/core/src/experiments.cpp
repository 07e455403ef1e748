#include "eguot/experiments.hpp"

#include "eguot/error.hpp"
#include "eguot/imaging.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#ifndef EGUOT_GIT_REVISION
#define EGUOT_GIT_REVISION "unknown"
#endif

namespace eguot::experiments {

namespace fs = std::filesystem;
using nlohmann::json;
using networks::ExpertKind;

namespace {

const std::vector<uint64_t> kDefaultSeeds{1, 2, 3, 4, 5};

ExperimentPreset image_preset(std::string name, std::string description, training::TrainConfig cfg,
                              double outlier_fraction = 0.0) {
    ExperimentPreset p;
    p.name = std::move(name);
    p.description = std::move(description);
    p.config = std::move(cfg);
    p.corpus.corruption.fraction = outlier_fraction;
    p.corpus.corruption.seed = 77;
    p.seeds = kDefaultSeeds;
    return p;
}

training::TrainConfig without(training::TrainConfig c, ExpertKind kind) {
    std::erase(c.experts, kind);
    return c;
}

std::vector<ExperimentPreset> make_presets() {
    using training::Adversarial;
    const auto base = desk_config();
    auto hinge = base;
    hinge.adversarial = Adversarial::HingeGan;
    auto no_experts = base;
    no_experts.experts.clear();
    auto no_cost = base;
    no_cost.tau = 0.0;
    auto paired = base;
    paired.mode = training::Mode::Paired;

    std::vector<ExperimentPreset> v;
    v.push_back(image_preset("C1", "hinge adversarial objective with the full committee", hinge));
    v.push_back(image_preset("C2", "UOT objective without experts", no_experts));
    v.push_back(image_preset("C3", "UOT objective with the full committee and no transport cost (tau = 0)", no_cost));
    v.push_back(image_preset("C4", "UOT objective with the full committee", base));
    v.push_back(image_preset("E1", "C4 without the color expert", without(base, ExpertKind::Color)));
    v.push_back(image_preset("E2", "C4 without the structure expert", without(base, ExpertKind::Structure)));
    v.push_back(image_preset("E3", "C4 without the frequency expert", without(base, ExpertKind::Frequency)));
    v.push_back(image_preset("C1-clean", "C1 on the clean target corpus", hinge));
    v.push_back(image_preset("C1-dirty", "C1 with 15% corrupted target images", hinge, 0.15));
    v.push_back(image_preset("C4-clean", "C4 on the clean target corpus", base));
    v.push_back(image_preset("C4-dirty", "C4 with 15% corrupted target images", base, 0.15));
    v.push_back(image_preset("C4-paired", "C4 trained with the paired L1 cost", paired));

    ExperimentPreset toy;
    toy.name = "toy-2d";
    toy.description = "2D clouds with a 15% outlier cluster: UOT versus hinge adversarial map";
    toy.config = toy_ot::default_toy_config();
    toy.seeds = kDefaultSeeds;
    toy.toy = true;
    v.push_back(toy);
    return v;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1);
    std::vector<std::size_t> cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const auto ca = static_cast<char>(std::tolower(static_cast<unsigned char>(a[i - 1])));
            const auto cb = static_cast<char>(std::tolower(static_cast<unsigned char>(b[j - 1])));
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca == cb ? 0 : 1)});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("failed writing " + path.string());
}

void say(const RunOptions& opts, const std::string& msg) {
    if (opts.progress) opts.progress(msg);
}

// One-sided Student t critical values for df = 1..30.
constexpr double kT05[] = {6.314, 2.920, 2.353, 2.132, 2.015, 1.943, 1.895, 1.860, 1.833, 1.812,
                           1.796, 1.782, 1.771, 1.761, 1.753, 1.746, 1.740, 1.734, 1.729, 1.725,
                           1.721, 1.717, 1.714, 1.711, 1.708, 1.706, 1.703, 1.701, 1.699, 1.697};
constexpr double kT01[] = {31.821, 6.965, 4.541, 3.747, 3.365, 3.143, 2.998, 2.896, 2.821, 2.764,
                           2.718,  2.681, 2.650, 2.624, 2.602, 2.583, 2.567, 2.552, 2.539, 2.528,
                           2.518,  2.508, 2.500, 2.492, 2.485, 2.479, 2.473, 2.467, 2.462, 2.457};

SeedResult run_image_seed(const ExperimentPreset& preset, uint64_t seed, const data::CorpusSet& corpus,
                          const fs::path& dir, const RunOptions& opts) {
    const auto start = std::chrono::steady_clock::now();
    auto cfg = preset.config;
    cfg.seed = seed;
    training::Trainer trainer(cfg, corpus.train);
    trainer.train();
    auto transport = trainer.final_transport();

    SeedResult r;
    r.seed = seed;
    r.metrics = metrics::evaluate_corpus([&](const torch::Tensor& raw) { return transport->forward(raw); },
                                         corpus.test.raw, corpus.test.gt);
    r.collapsed = trainer.collapse_raised();
    for (const auto& e : trainer.epochs()) r.collapse_statistics.push_back(e.collapse.statistic);
    for (const auto& b : trainer.log()) r.loss_curve.push_back(b.total_transport);

    const fs::path seed_dir = dir / ("seed_" + std::to_string(seed));
    fs::create_directories(seed_dir);
    r.loss_log = (seed_dir / "loss_log.csv").string();
    write_text(r.loss_log, trainer.log_csv());
    write_text(seed_dir / "metrics.csv", r.metrics.to_csv());
    if (opts.write_checkpoints) {
        const fs::path ck = seed_dir / "checkpoint";
        trainer.save_checkpoint(ck, r.metrics.aggregates_json());
        torch::save(networks::snapshot(*transport), (ck / "final_transport.pt").string());
        r.checkpoint = ck.string();
    }
    if (opts.grid_samples > 0) {
        const fs::path grid = seed_dir / "samples.png";
        emit_sample_grid(*transport, corpus.test, grid, std::min<int64_t>(opts.grid_samples, corpus.test.size()),
                         seed);
        r.grid = grid.string();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

SeedResult run_toy_seed(const ExperimentPreset& preset, uint64_t seed, const fs::path& dir) {
    const auto start = std::chrono::steady_clock::now();
    auto spec = preset.toy_spec;
    spec.seed = seed;
    const auto data = toy_ot::make_toy_data(spec);
    auto uot_cfg = preset.config;
    uot_cfg.seed = seed;
    uot_cfg.adversarial = training::Adversarial::Uot;
    auto hinge_cfg = uot_cfg;
    hinge_cfg.adversarial = training::Adversarial::HingeGan;
    const auto uot = toy_ot::train_toy_map(data, uot_cfg);
    const auto hinge = toy_ot::train_toy_map(data, hinge_cfg);

    SeedResult r;
    r.seed = seed;
    r.extra["outlier_mass_uot"] = uot.outlier_mass;
    r.extra["outlier_mass_hinge_gan"] = hinge.outlier_mass;
    r.extra["mean_displacement_uot"] = uot.mean_displacement;
    r.extra["mean_displacement_hinge_gan"] = hinge.mean_displacement;
    r.loss_curve = uot.transport_objective;
    const fs::path seed_dir = dir / ("seed_" + std::to_string(seed));
    fs::create_directories(seed_dir);
    toy_ot::write_scatter_png(seed_dir / "scatter_uot.png", data, uot.mapped);
    toy_ot::write_scatter_png(seed_dir / "scatter_hinge_gan.png", data, hinge.mapped);
    r.grid = (seed_dir / "scatter_uot.png").string();
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// presets

training::TrainConfig desk_config() {
    training::TrainConfig c;
    c.epochs = 12;
    c.swa_last = 3;
    c.batch = 8;
    c.crop = 32;
    c.transport_width = 16;
    c.potential_width = 16;
    c.expert_width = 8;
    c.color_pretrain_epochs = 4;
    return c;
}

const std::vector<ExperimentPreset>& presets() {
    static const std::vector<ExperimentPreset> all = make_presets();
    return all;
}

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& p : presets()) names.push_back(p.name);
    return names;
}

const ExperimentPreset& find_preset(const std::string& name) {
    for (const auto& p : presets()) {
        if (p.name == name) return p;
    }
    auto names = preset_names();
    std::stable_sort(names.begin(), names.end(), [&](const std::string& a, const std::string& b) {
        return edit_distance(name, a) < edit_distance(name, b);
    });
    std::string msg = "unknown preset '" + name + "'; available (closest first):";
    for (const auto& n : names) msg += " " + n;
    throw Error(msg);
}

ExperimentPreset resolve_preset(const std::string& name, const RunOptions& opts) {
    auto p = find_preset(name);
    if (opts.seeds) {
        if (opts.seeds->empty()) throw Error("run: seed list is empty");
        p.seeds = *opts.seeds;
    }
    if (opts.epochs) {
        p.config.epochs = *opts.epochs;
        p.config.swa_last = std::min(p.config.swa_last, p.config.epochs);
    }
    if (!opts.overrides.empty()) {
        json j = p.config;
        for (const auto& o : opts.overrides) training::apply_override(j, o);
        p.config = j.get<training::TrainConfig>();
    }
    p.config.validate();
    return p;
}

// ---------------------------------------------------------------------------
// reports

MetricSummary summarize(const std::vector<double>& values) {
    MetricSummary s;
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return s;
}

std::vector<bool> ExperimentReport::collapse_flags() const {
    std::vector<bool> out;
    for (const auto& r : runs) out.push_back(r.collapsed);
    return out;
}

bool ExperimentReport::has_image_metrics() const {
    return !runs.empty() && std::all_of(runs.begin(), runs.end(), [](const SeedResult& r) {
               return r.metrics.n_images > 0;
           });
}

std::vector<double> ExperimentReport::per_seed(const std::string& metric) const {
    std::vector<double> out;
    for (const auto& r : runs) {
        if (metric == "psnr") {
            out.push_back(r.metrics.psnr);
        } else if (metric == "ssim") {
            out.push_back(r.metrics.ssim);
        } else if (metric == "delta_e") {
            out.push_back(r.metrics.delta_e);
        } else {
            const auto it = r.extra.find(metric);
            if (it == r.extra.end()) throw Error("report '" + preset + "': no metric '" + metric + "'");
            out.push_back(it->second);
        }
    }
    return out;
}

void ExperimentReport::resummarize() {
    summary.clear();
    if (runs.empty()) return;
    if (has_image_metrics()) {
        for (const char* m : {"psnr", "ssim", "delta_e"}) summary[m] = summarize(per_seed(m));
    }
    for (const auto& [key, _] : runs.front().extra) summary[key] = summarize(per_seed(key));
}

std::string ExperimentReport::metrics_csv() const {
    std::ostringstream os;
    std::vector<std::string> extra_keys;
    if (!runs.empty()) {
        for (const auto& [k, _] : runs.front().extra) extra_keys.push_back(k);
    }
    os << "seed,psnr,ssim,delta_e,collapsed";
    for (const auto& k : extra_keys) os << ',' << k;
    os << '\n';
    for (const auto& r : runs) {
        os << r.seed << ',' << fmt(r.metrics.psnr) << ',' << fmt(r.metrics.ssim) << ',' << fmt(r.metrics.delta_e)
           << ',' << (r.collapsed ? 1 : 0);
        for (const auto& k : extra_keys) os << ',' << fmt(r.extra.at(k));
        os << '\n';
    }
    return os.str();
}

void to_json(json& j, const ExperimentReport& r) {
    json runs = json::array();
    for (const auto& s : r.runs) {
        runs.push_back({{"seed", s.seed},
                        {"metrics", s.metrics},
                        {"collapsed", s.collapsed},
                        {"collapse_statistics", s.collapse_statistics},
                        {"loss_curve", s.loss_curve},
                        {"extra", s.extra},
                        {"checkpoint", s.checkpoint},
                        {"grid", s.grid},
                        {"loss_log", s.loss_log},
                        {"seconds", s.seconds}});
    }
    json summary = json::object();
    for (const auto& [k, v] : r.summary) summary[k] = {{"mean", v.mean}, {"std", v.std}};
    j = json{{"preset", r.preset}, {"config", r.config}, {"corpus", r.corpus}, {"runs", runs}, {"summary", summary}};
}

void from_json(const json& j, ExperimentReport& r) {
    r.preset = j.at("preset").get<std::string>();
    r.config = j.value("config", json::object());
    r.corpus = j.value("corpus", json::object());
    r.runs.clear();
    for (const auto& s : j.at("runs")) {
        SeedResult x;
        x.seed = s.at("seed").get<uint64_t>();
        x.metrics = s.at("metrics").get<metrics::MetricReport>();
        x.collapsed = s.value("collapsed", false);
        x.collapse_statistics = s.value("collapse_statistics", std::vector<double>{});
        x.loss_curve = s.value("loss_curve", std::vector<double>{});
        x.extra = s.value("extra", std::map<std::string, double>{});
        x.checkpoint = s.value("checkpoint", "");
        x.grid = s.value("grid", "");
        x.loss_log = s.value("loss_log", "");
        x.seconds = s.value("seconds", 0.0);
        r.runs.push_back(std::move(x));
    }
    r.resummarize();
}

ExperimentReport load_report(const fs::path& path) {
    fs::path file = fs::is_directory(path) ? path / "report.json" : path;
    std::ifstream in(file);
    if (!in) throw Error("cannot read report " + file.string());
    return json::parse(in).get<ExperimentReport>();
}

// ---------------------------------------------------------------------------
// runs

std::string git_revision() { return EGUOT_GIT_REVISION; }

fs::path default_output_dir(const std::string& preset) {
    const char* root = std::getenv("EGUOT_OUTPUT_ROOT");
    return fs::path(root != nullptr && *root != '\0' ? root : "runs") / preset;
}

ExperimentReport run_preset(const std::string& name, const fs::path& output_dir, const RunOptions& opts) {
    return run_preset(resolve_preset(name, opts), output_dir, opts);
}

ExperimentReport run_preset(const ExperimentPreset& preset, const fs::path& output_dir, const RunOptions& opts) {
    if (preset.seeds.empty()) throw Error("preset '" + preset.name + "' has no seeds");
    std::error_code ec;
    fs::create_directories(output_dir, ec);
    if (ec) throw Error("cannot create output directory " + output_dir.string() + ": " + ec.message());

    const auto start = std::chrono::steady_clock::now();
    ExperimentReport report;
    report.preset = preset.name;
    report.config = preset.config;

    if (preset.toy) {
        report.corpus = {{"toy", true}, {"outlier_fraction", preset.toy_spec.outlier_fraction},
                         {"outlier_distance", preset.toy_spec.outlier_distance}};
        for (auto seed : preset.seeds) {
            say(opts, preset.name + ": seed " + std::to_string(seed));
            report.runs.push_back(run_toy_seed(preset, seed, output_dir));
        }
    } else {
        report.corpus = preset.corpus;
        say(opts, preset.name + ": building corpus");
        const auto corpus = data::build_corpus(preset.corpus);
        for (auto seed : preset.seeds) {
            say(opts, preset.name + ": seed " + std::to_string(seed));
            report.runs.push_back(run_image_seed(preset, seed, corpus, output_dir, opts));
            const auto& r = report.runs.back();
            say(opts, preset.name + ": seed " + std::to_string(seed) + " psnr " + fmt(r.metrics.psnr) +
                          " delta_e " + fmt(r.metrics.delta_e) + (r.collapsed ? " collapsed" : ""));
        }
    }
    report.resummarize();

    write_text(output_dir / "report.json", json(report).dump(2) + "\n");
    write_text(output_dir / "metrics.csv", report.metrics_csv());
    json durations = json::array();
    for (const auto& r : report.runs) durations.push_back({{"seed", r.seed}, {"seconds", r.seconds}});
    const json manifest{
        {"preset", preset.name},
        {"description", preset.description},
        {"config", preset.config},
        {"corpus", report.corpus},
        {"seeds", preset.seeds},
        {"git_revision", git_revision()},
        {"durations", durations},
        {"total_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}};
    write_text(output_dir / "manifest.json", manifest.dump(2) + "\n");
    return report;
}

// ---------------------------------------------------------------------------
// comparison

RankingTable compare_reports(const std::vector<ExperimentReport>& reports) {
    if (reports.empty()) throw Error("compare: no reports");
    RankingTable t;
    for (const auto& r : reports) {
        if (!r.has_image_metrics() || !r.summary.contains("psnr")) {
            throw Error("compare: report '" + r.preset + "' has no image metrics (schema mismatch)");
        }
        t.rows.push_back({r.preset, r.summary.at("psnr").mean, r.summary.at("ssim").mean,
                          r.summary.at("delta_e").mean});
    }
    std::stable_sort(t.rows.begin(), t.rows.end(), [](const RankingRow& a, const RankingRow& b) {
        if (a.psnr != b.psnr) return a.psnr > b.psnr;
        if (a.delta_e != b.delta_e) return a.delta_e < b.delta_e;
        return a.name < b.name;
    });
    double best_psnr = t.rows.front().psnr;
    double best_ssim = t.rows.front().ssim;
    double best_de = t.rows.front().delta_e;
    for (const auto& r : t.rows) {
        best_psnr = std::max(best_psnr, r.psnr);
        best_ssim = std::max(best_ssim, r.ssim);
        best_de = std::min(best_de, r.delta_e);
    }
    for (auto& r : t.rows) {
        r.best_psnr = r.psnr == best_psnr;
        r.best_ssim = r.ssim == best_ssim;
        r.best_delta_e = r.delta_e == best_de;
    }
    return t;
}

std::string RankingTable::to_csv() const {
    std::ostringstream os;
    os << "rank,name,psnr,ssim,delta_e,best\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        std::string best;
        if (r.best_psnr) best += "psnr;";
        if (r.best_ssim) best += "ssim;";
        if (r.best_delta_e) best += "delta_e;";
        if (!best.empty()) best.pop_back();
        os << i + 1 << ',' << r.name << ',' << fmt(r.psnr) << ',' << fmt(r.ssim) << ',' << fmt(r.delta_e) << ','
           << best << '\n';
    }
    return os.str();
}

std::string RankingTable::to_text() const {
    std::size_t w = 4;
    for (const auto& r : rows) w = std::max(w, r.name.size());
    std::ostringstream os;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-4s  %-*s  %9s  %7s  %8s\n", "rank", static_cast<int>(w), "name", "PSNR",
                  "SSIM", "dE");
    os << buf;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        std::snprintf(buf, sizeof buf, "%-4zu  %-*s  %8.3f%c  %6.4f%c  %7.3f%c\n", i + 1, static_cast<int>(w),
                      r.name.c_str(), r.psnr, r.best_psnr ? '*' : ' ', r.ssim, r.best_ssim ? '*' : ' ', r.delta_e,
                      r.best_delta_e ? '*' : ' ');
        os << buf;
    }
    os << "(* best per column)\n";
    return os.str();
}

PairedComparison paired_greater(const std::vector<double>& a, const std::vector<double>& b, double alpha) {
    if (a.size() != b.size()) throw Error("paired comparison: unequal sample counts");
    if (a.size() < 2 || a.size() > 31) throw Error("paired comparison: need 2 to 31 pairs");
    const double* table = nullptr;
    if (alpha == 0.05) {
        table = kT05;
    } else if (alpha == 0.01) {
        table = kT01;
    } else {
        throw Error("paired comparison: alpha must be 0.05 or 0.01");
    }
    std::vector<double> d(a.size());
    PairedComparison c;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d[i] = a[i] - b[i];
        if (d[i] > 0) ++c.positive;
    }
    const auto s = summarize(d);
    c.mean_difference = s.mean;
    c.critical = table[a.size() - 2];
    if (s.std == 0.0) {
        c.t_statistic = s.mean > 0 ? std::numeric_limits<double>::infinity()
                                   : (s.mean < 0 ? -std::numeric_limits<double>::infinity() : 0.0);
    } else {
        c.t_statistic = s.mean / (s.std / std::sqrt(static_cast<double>(d.size())));
    }
    c.significant = c.t_statistic > c.critical;
    return c;
}

// ---------------------------------------------------------------------------
// checkpoints and grids

networks::TransportPtr load_transport(const fs::path& checkpoint_dir) {
    std::ifstream in(checkpoint_dir / "manifest.json");
    if (!in) throw Error("cannot read checkpoint manifest in " + checkpoint_dir.string());
    const auto cfg = json::parse(in).at("config").get<training::TrainConfig>();
    auto t = networks::build_transport(networks::NetworkSpec{networks::NetworkKind::Transport, cfg.transport_width,
                                                             cfg.transport_depth, 0, cfg.transport_arch});
    fs::path weights = checkpoint_dir / "final_transport.pt";
    if (!fs::exists(weights)) weights = checkpoint_dir / "transport.pt";
    if (!fs::exists(weights)) throw Error("checkpoint has no transport weights: " + checkpoint_dir.string());
    std::vector<torch::Tensor> values;
    torch::load(values, weights.string());
    networks::load_snapshot(*t, values);
    return t;
}

void emit_sample_grid(const fs::path& checkpoint_dir, const data::Corpus& test, const fs::path& path, int64_t k,
                      uint64_t seed) {
    auto t = load_transport(checkpoint_dir);
    emit_sample_grid(*t, test, path, k, seed);
}

void emit_sample_grid(networks::TransportNetwork& transport, const data::Corpus& test, const fs::path& path,
                      int64_t k, uint64_t seed) {
    if (k < 1) throw Error("sample grid: k must be >= 1");
    if (k > test.size()) {
        throw Error("sample grid: k = " + std::to_string(k) + " exceeds the corpus size " +
                    std::to_string(test.size()));
    }
    const auto perm = data::permutation(test.size(), data::derive_seed(seed, 401));
    const auto idx = torch::tensor(std::vector<int64_t>(perm.begin(), perm.begin() + k), torch::kLong);
    const auto raw = test.raw.index_select(0, idx);
    const auto gt = test.gt.index_select(0, idx);
    torch::Tensor pred;
    {
        torch::NoGradGuard ng;
        pred = transport.forward(raw);
    }
    const auto input = imaging::demosaic_bilinear(raw);
    const int64_t h = gt.size(2);
    const int64_t w = gt.size(3);
    constexpr int64_t gap = 2;
    auto canvas = torch::ones({3, k * h + (k - 1) * gap, 3 * w + 2 * gap}, torch::kFloat32);
    for (int64_t i = 0; i < k; ++i) {
        const int64_t y = i * (h + gap);
        const torch::Tensor panels[] = {input[i], pred[i], gt[i]};
        for (int64_t p = 0; p < 3; ++p) {
            canvas.narrow(1, y, h).narrow(2, p * (w + gap), w).copy_(panels[p].clamp(0.0, 1.0));
        }
    }
    try {
        imaging::write_png(path, canvas, 8);
    } catch (const Error& e) {
        throw Error(std::string("sample grid: ") + e.what());
    }
}

}  // namespace eguot::experiments
