#include "eguot/data.hpp"

#include "eguot/error.hpp"
#include "eguot/imaging.hpp"
#include "rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace eguot::data {

using detail::normal;
using detail::uniform;
using detail::uniform01;

uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b) {
    auto mix = [](uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(base) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
}

// ---------------------------------------------------------------------------
// Camera

double CameraModel::condition_number() const {
    Eigen::Matrix3d m;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m(r, c) = color_matrix[static_cast<std::size_t>(3 * r + c)];
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(m);
    const auto& s = svd.singularValues();
    if (s(2) <= 0.0) return std::numeric_limits<double>::infinity();
    return s(0) / s(2);
}

void CameraModel::validate() const {
    if (!(condition_number() < 1e3)) throw Error("CameraModel: color matrix is ill-conditioned");
    if (!(gamma > 0.0)) throw Error("CameraModel: gamma must be positive");
    if (!(exposure > 0.0)) throw Error("CameraModel: exposure must be positive");
    if (noise_read < 0.0 || noise_shot < 0.0) throw Error("CameraModel: noise must be non-negative");
}

CameraModel CameraModel::identity() {
    CameraModel c;
    c.color_matrix = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    c.gamma = 1.0;
    c.noise_read = 0.0;
    c.noise_shot = 0.0;
    c.exposure = 1.0;
    return c;
}

void to_json(nlohmann::json& j, const CameraModel& c) {
    j = {{"color_matrix", c.color_matrix}, {"gamma", c.gamma},           {"noise_read", c.noise_read},
         {"noise_shot", c.noise_shot},     {"exposure", c.exposure}};
}

void from_json(const nlohmann::json& j, CameraModel& c) {
    CameraModel d;
    c.color_matrix = j.value("color_matrix", d.color_matrix);
    c.gamma = j.value("gamma", d.gamma);
    c.noise_read = j.value("noise_read", d.noise_read);
    c.noise_shot = j.value("noise_shot", d.noise_shot);
    c.exposure = j.value("exposure", d.exposure);
}

// ---------------------------------------------------------------------------
// Corruption spec

namespace {
const char* op_name(CorruptionOp op) {
    switch (op) {
        case CorruptionOp::JitterHue: return "jitter_hue";
        case CorruptionOp::ShiftContrast: return "shift_contrast";
        case CorruptionOp::ShiftBrightness: return "shift_brightness";
    }
    return "?";
}

CorruptionOp op_from_name(const std::string& s) {
    if (s == "jitter_hue") return CorruptionOp::JitterHue;
    if (s == "shift_contrast") return CorruptionOp::ShiftContrast;
    if (s == "shift_brightness") return CorruptionOp::ShiftBrightness;
    throw Error("unknown corruption op '" + s + "'");
}
}  // namespace

void CorruptionSpec::validate() const {
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw Error("CorruptionSpec: fraction must be in [0, 1]");
    if (fraction > 0.0 && ops.empty()) throw Error("CorruptionSpec: no corruption ops selected");
    if (!(contrast_min > 0.0 && contrast_min <= contrast_max)) throw Error("CorruptionSpec: bad contrast range");
}

void to_json(nlohmann::json& j, const CorruptionSpec& c) {
    std::vector<std::string> ops;
    for (auto op : c.ops) ops.emplace_back(op_name(op));
    j = {{"fraction", c.fraction},         {"ops", ops},
         {"hue_max_deg", c.hue_max_deg},   {"contrast_min", c.contrast_min},
         {"contrast_max", c.contrast_max}, {"brightness_max", c.brightness_max},
         {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, CorruptionSpec& c) {
    CorruptionSpec d;
    c.fraction = j.value("fraction", d.fraction);
    if (j.contains("ops")) {
        c.ops.clear();
        for (const auto& s : j.at("ops")) c.ops.push_back(op_from_name(s.get<std::string>()));
    }
    c.hue_max_deg = j.value("hue_max_deg", d.hue_max_deg);
    c.contrast_min = j.value("contrast_min", d.contrast_min);
    c.contrast_max = j.value("contrast_max", d.contrast_max);
    c.brightness_max = j.value("brightness_max", d.brightness_max);
    c.seed = j.value("seed", d.seed);
}

// ---------------------------------------------------------------------------
// Scenes

namespace {

struct Rgb {
    float r, g, b;
};

Rgb random_color(std::mt19937_64& rng) {
    return {static_cast<float>(uniform01(rng)), static_cast<float>(uniform01(rng)),
            static_cast<float>(uniform01(rng))};
}

void render_scene(torch::TensorAccessor<float, 3> img, int64_t h, int64_t w, std::mt19937_64& rng) {
    // Background: linear gradient between two colors.
    const Rgb c0 = random_color(rng);
    const Rgb c1 = random_color(rng);
    const double theta = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    const double dx = std::cos(theta), dy = std::sin(theta);
    const double half = 0.5 * std::sqrt(static_cast<double>(h * h + w * w));
    for (int64_t y = 0; y < h; ++y) {
        for (int64_t x = 0; x < w; ++x) {
            const double p = ((x - w / 2.0) * dx + (y - h / 2.0) * dy) / (2.0 * half) + 0.5;
            const auto t = static_cast<float>(std::clamp(p, 0.0, 1.0));
            img[0][y][x] = c0.r + (c1.r - c0.r) * t;
            img[1][y][x] = c0.g + (c1.g - c0.g) * t;
            img[2][y][x] = c0.b + (c1.b - c0.b) * t;
        }
    }

    // Colored shapes: rectangles and ellipses.
    const auto n_shapes = detail::uniform_int(rng, 3, 6);
    for (int64_t s = 0; s < n_shapes; ++s) {
        const Rgb c = random_color(rng);
        const bool ellipse = uniform01(rng) < 0.5;
        const double cx = uniform(rng, 0.0, static_cast<double>(w));
        const double cy = uniform(rng, 0.0, static_cast<double>(h));
        const double rx = uniform(rng, 0.08, 0.3) * static_cast<double>(w);
        const double ry = uniform(rng, 0.08, 0.3) * static_cast<double>(h);
        for (int64_t y = 0; y < h; ++y) {
            for (int64_t x = 0; x < w; ++x) {
                const double ux = (x + 0.5 - cx) / rx;
                const double uy = (y + 0.5 - cy) / ry;
                const bool inside = ellipse ? (ux * ux + uy * uy <= 1.0) : (std::abs(ux) <= 1.0 && std::abs(uy) <= 1.0);
                if (inside) {
                    img[0][y][x] = c.r;
                    img[1][y][x] = c.g;
                    img[2][y][x] = c.b;
                }
            }
        }
    }

    // Textured patch: oriented stripes or a checkerboard between two colors.
    const auto n_tex = detail::uniform_int(rng, 1, 2);
    for (int64_t s = 0; s < n_tex; ++s) {
        const Rgb a = random_color(rng);
        const Rgb b = random_color(rng);
        const bool checker = uniform01(rng) < 0.4;
        const double period = uniform(rng, 2.5, 10.0);
        const double ang = uniform(rng, 0.0, std::numbers::pi);
        const double ca = std::cos(ang), sa = std::sin(ang);
        const int64_t pw = detail::uniform_int(rng, w / 5, w / 2);
        const int64_t ph = detail::uniform_int(rng, h / 5, h / 2);
        const int64_t x0 = detail::uniform_int(rng, 0, w - pw);
        const int64_t y0 = detail::uniform_int(rng, 0, h - ph);
        for (int64_t y = y0; y < y0 + ph; ++y) {
            for (int64_t x = x0; x < x0 + pw; ++x) {
                double t;
                if (checker) {
                    const auto ix = static_cast<int64_t>(std::floor(x / period * 2.0));
                    const auto iy = static_cast<int64_t>(std::floor(y / period * 2.0));
                    t = ((ix + iy) % 2 == 0) ? 1.0 : 0.0;
                } else {
                    t = 0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * (x * ca + y * sa) / period);
                }
                const auto tf = static_cast<float>(t);
                img[0][y][x] = b.r + (a.r - b.r) * tf;
                img[1][y][x] = b.g + (a.g - b.g) * tf;
                img[2][y][x] = b.b + (a.b - b.b) * tf;
            }
        }
    }

    // Smooth noise field (bilinear value noise on a coarse lattice) plus a
    // small amount of per-pixel grain.
    constexpr int64_t kLattice = 6;
    const double amp = uniform(rng, 0.03, 0.12);
    float lattice[3][kLattice + 1][kLattice + 1];
    for (auto& ch : lattice)
        for (auto& row : ch)
            for (auto& v : row) v = static_cast<float>(uniform(rng, -amp, amp));
    for (int64_t y = 0; y < h; ++y) {
        const double fy = static_cast<double>(y) / static_cast<double>(h) * kLattice;
        const auto iy = static_cast<int64_t>(fy);
        const double ty = fy - static_cast<double>(iy);
        for (int64_t x = 0; x < w; ++x) {
            const double fx = static_cast<double>(x) / static_cast<double>(w) * kLattice;
            const auto ix = static_cast<int64_t>(fx);
            const double tx = fx - static_cast<double>(ix);
            for (int c = 0; c < 3; ++c) {
                const double v = (1 - ty) * ((1 - tx) * lattice[c][iy][ix] + tx * lattice[c][iy][ix + 1]) +
                                 ty * ((1 - tx) * lattice[c][iy + 1][ix] + tx * lattice[c][iy + 1][ix + 1]);
                const double grain = 0.01 * normal(rng);
                img[c][y][x] = static_cast<float>(std::clamp(img[c][y][x] + v + grain, 0.0, 1.0));
            }
        }
    }
}

}  // namespace

torch::Tensor generate_scenes(int64_t count, int64_t height, int64_t width, uint64_t seed) {
    if (count < 1) throw Error("generate_scenes: count must be >= 1");
    if (height < 16 || width < 16 || height % 2 != 0 || width % 2 != 0) {
        throw Error("generate_scenes: size must be even and at least 16x16");
    }
    auto out = torch::empty({count, 3, height, width}, torch::kFloat32);
    auto acc = out.accessor<float, 4>();
    for (int64_t i = 0; i < count; ++i) {
        std::mt19937_64 rng(derive_seed(seed, static_cast<uint64_t>(i), 0x5ce7e));
        render_scene(acc[i], height, width, rng);
    }
    return out;
}

torch::Tensor camera_forward(const torch::Tensor& gt, const CameraModel& cam, uint64_t seed) {
    cam.validate();
    const bool single = gt.dim() == 3;
    auto batch = single ? gt.unsqueeze(0) : gt;
    if (batch.dim() != 4 || batch.size(1) != 3) throw Error("camera_forward: expected [B,3,H,W]");

    auto x = batch.to(torch::kFloat64);
    auto lin = torch::pow(x.clamp_min(0.0), cam.gamma);
    auto m = torch::tensor(std::vector<double>(cam.color_matrix.begin(), cam.color_matrix.end()),
                           torch::kFloat64)
                 .view({3, 3});
    auto sensor = torch::einsum("ij,bjhw->bihw", {m, lin}) * cam.exposure;
    auto raw = imaging::mosaic(sensor).contiguous();

    if (cam.noise_read > 0.0 || cam.noise_shot > 0.0) {
        auto acc = raw.accessor<double, 4>();
        for (int64_t b = 0; b < raw.size(0); ++b) {
            std::mt19937_64 rng(derive_seed(seed, static_cast<uint64_t>(b), 0xca3e7a));
            for (int64_t c = 0; c < raw.size(1); ++c)
                for (int64_t y = 0; y < raw.size(2); ++y)
                    for (int64_t xx = 0; xx < raw.size(3); ++xx) {
                        const double s = std::max(acc[b][c][y][xx], 0.0);
                        const double sigma = std::sqrt(cam.noise_read * cam.noise_read + cam.noise_shot * s);
                        acc[b][c][y][xx] += sigma * normal(rng);
                    }
        }
    }
    auto out = raw.clamp(0.0, 1.0).to(torch::kFloat32);
    return single ? out.squeeze(0) : out;
}

// ---------------------------------------------------------------------------
// Corruption

torch::Tensor corrupt_image(const torch::Tensor& image, const CorruptionSpec& spec, std::mt19937_64& rng) {
    // Each op joins with probability 1/2; at least one is always applied.
    // Magnitudes are drawn from the outer half of each range so the result
    // is visibly off-domain.
    std::vector<CorruptionOp> chosen;
    for (auto op : spec.ops)
        if (uniform01(rng) < 0.5) chosen.push_back(op);
    if (chosen.empty()) {
        chosen.push_back(spec.ops[static_cast<std::size_t>(detail::uniform_int(rng, 0, static_cast<int64_t>(spec.ops.size()) - 1))]);
    }
    auto sign = [&rng] { return uniform01(rng) < 0.5 ? -1.0 : 1.0; };

    auto x = image.to(torch::kFloat64);
    for (auto op : chosen) {
        switch (op) {
            case CorruptionOp::JitterHue: {
                const double deg = sign() * uniform(rng, spec.hue_max_deg / 3.0, spec.hue_max_deg);
                const double th = deg * std::numbers::pi / 180.0;
                const double k = 1.0 / std::sqrt(3.0);
                const double c = std::cos(th), s = std::sin(th), t = 1.0 - c;
                // Rodrigues rotation about the gray axis.
                auto rot = torch::tensor({c + t * k * k, t * k * k - s * k, t * k * k + s * k,  //
                                          t * k * k + s * k, c + t * k * k, t * k * k - s * k,  //
                                          t * k * k - s * k, t * k * k + s * k, c + t * k * k},
                                         torch::kFloat64)
                               .view({3, 3});
                x = torch::einsum("ij,jhw->ihw", {rot, x});
                break;
            }
            case CorruptionOp::ShiftContrast: {
                const double lo_mid = (spec.contrast_min + 1.0) / 2.0;
                const double hi_mid = (spec.contrast_max + 1.0) / 2.0;
                const double scale = uniform01(rng) < 0.5 ? uniform(rng, spec.contrast_min, lo_mid)
                                                          : uniform(rng, hi_mid, spec.contrast_max);
                auto mean = x.mean();
                x = (x - mean) * scale + mean;
                break;
            }
            case CorruptionOp::ShiftBrightness: {
                x = x + sign() * uniform(rng, spec.brightness_max / 2.0, spec.brightness_max);
                break;
            }
        }
    }
    return x.clamp(0.0, 1.0).to(image.scalar_type());
}

CorruptionResult corrupt_targets(const torch::Tensor& corpus, const CorruptionSpec& spec) {
    spec.validate();
    if (corpus.dim() != 4 || corpus.size(1) != 3) throw Error("corrupt_targets: expected [N,3,H,W]");
    const int64_t n = corpus.size(0);
    const auto k = static_cast<int64_t>(std::floor(spec.fraction * static_cast<double>(n) + 1e-9));

    CorruptionResult result{corpus.clone(), std::vector<bool>(static_cast<std::size_t>(n), false)};
    if (k == 0) return result;
    auto order = permutation(n, derive_seed(spec.seed, 0xc0ffee));
    std::sort(order.begin(), order.begin() + k);
    for (int64_t i = 0; i < k; ++i) {
        const int64_t idx = order[static_cast<std::size_t>(i)];
        std::mt19937_64 rng(derive_seed(spec.seed, static_cast<uint64_t>(idx), 0xbad));
        result.corpus[idx].copy_(corrupt_image(corpus[idx], spec, rng));
        result.mask[static_cast<std::size_t>(idx)] = true;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Samplers

std::vector<int64_t> permutation(int64_t n, uint64_t seed) {
    std::vector<int64_t> p(static_cast<std::size_t>(n));
    for (int64_t i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
    std::mt19937_64 rng(seed);
    detail::shuffle(p, rng);
    return p;
}

PairedSampler::PairedSampler(int64_t corpus_size, int64_t batch, uint64_t seed)
    : n_(corpus_size), batch_(batch), seed_(seed) {
    if (n_ < 1) throw Error("PairedSampler: empty corpus");
    if (batch_ < 1 || batch_ > n_) throw Error("PairedSampler: batch larger than corpus");
}

std::vector<int64_t> PairedSampler::batch(int64_t epoch, int64_t step) const {
    auto perm = permutation(n_, derive_seed(seed_, static_cast<uint64_t>(epoch), 0x9a1));
    const auto start = perm.begin() + step * batch_;
    return {start, start + batch_};
}

UnpairedSampler::UnpairedSampler(int64_t raw_size, int64_t srgb_size, int64_t batch, uint64_t seed)
    : n_raw_(raw_size),
      n_srgb_(srgb_size),
      batch_(batch),
      raw_seed_(derive_seed(seed, 0x7a3)),
      srgb_seed_(derive_seed(seed, 0x5e6b)) {
    if (n_raw_ < 1 || n_srgb_ < 1) throw Error("UnpairedSampler: empty corpus");
    if (batch_ < 1 || batch_ > std::min(n_raw_, n_srgb_)) {
        throw Error("UnpairedSampler: batch larger than corpus");
    }
}

int64_t UnpairedSampler::steps_per_epoch() const { return std::min(n_raw_, n_srgb_) / batch_; }

UnpairedSampler::Batch UnpairedSampler::batch(int64_t epoch, int64_t step) const {
    auto pr = permutation(n_raw_, derive_seed(raw_seed_, static_cast<uint64_t>(epoch)));
    auto ps = permutation(n_srgb_, derive_seed(srgb_seed_, static_cast<uint64_t>(epoch)));
    Batch b;
    b.raw.assign(pr.begin() + step * batch_, pr.begin() + (step + 1) * batch_);
    b.srgb.assign(ps.begin() + step * batch_, ps.begin() + (step + 1) * batch_);
    return b;
}

UnpairedSampler::Batch UnpairedSampler::next() {
    auto b = batch(epoch_, step_);
    if (++step_ >= steps_per_epoch()) {
        step_ = 0;
        ++epoch_;
    }
    return b;
}

void UnpairedSampler::seek(int64_t epoch, int64_t step) {
    epoch_ = epoch;
    step_ = step;
}

// ---------------------------------------------------------------------------
// Corpus

void to_json(nlohmann::json& j, const CorpusSpec& c) {
    j = {{"count", c.count},           {"height", c.height},     {"width", c.width},
         {"seed", c.seed},             {"test_count", c.test_count}, {"test_seed", c.test_seed},
         {"camera", c.camera},         {"corruption", c.corruption}, {"corrupt_source", c.corrupt_source}};
}

void from_json(const nlohmann::json& j, CorpusSpec& c) {
    CorpusSpec d;
    c.count = j.value("count", d.count);
    c.height = j.value("height", d.height);
    c.width = j.value("width", d.width);
    c.seed = j.value("seed", d.seed);
    c.test_count = j.value("test_count", d.test_count);
    c.test_seed = j.value("test_seed", d.test_seed);
    c.camera = j.value("camera", d.camera);
    c.corruption = j.value("corruption", d.corruption);
    c.corrupt_source = j.value("corrupt_source", d.corrupt_source);
}

namespace {
Corpus make_split(int64_t count, int64_t h, int64_t w, uint64_t seed, const CameraModel& cam,
                  const CorruptionSpec* corruption, bool corrupt_source) {
    Corpus c;
    c.gt = generate_scenes(count, h, w, seed);
    auto source = c.gt;
    c.targets = c.gt;
    c.corrupted.assign(static_cast<std::size_t>(count), false);
    if (corruption != nullptr && corruption->fraction > 0.0) {
        auto res = corrupt_targets(c.gt, *corruption);
        c.corrupted = res.mask;
        if (corrupt_source) {
            source = res.corpus;
        } else {
            c.targets = res.corpus;
        }
    }
    c.raw = camera_forward(source, cam, derive_seed(seed, 0x7a3e));
    return c;
}
}  // namespace

CorpusSet build_corpus(const CorpusSpec& spec) {
    spec.camera.validate();
    spec.corruption.validate();
    CorpusSet set{spec, {}, {}};
    set.train = make_split(spec.count, spec.height, spec.width, spec.seed, spec.camera, &spec.corruption,
                           spec.corrupt_source);
    set.test = make_split(spec.test_count, spec.height, spec.width, spec.test_seed, spec.camera, nullptr, false);
    return set;
}

namespace {
void save_split(const Corpus& c, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (int64_t i = 0; i < c.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "%05lld", static_cast<long long>(i));
        imaging::write_png(dir / (std::string(name) + "_gt.png"), c.gt[i], 16);
        imaging::write_png(dir / (std::string(name) + "_target.png"), c.targets[i], 16);
        imaging::write_png(dir / (std::string(name) + "_raw.png"), imaging::unpack_bayer(c.raw[i]), 16);
    }
    torch::save(std::vector<torch::Tensor>{c.raw, c.gt, c.targets}, (dir / "tensors.pt").string());
}

Corpus load_split(const std::filesystem::path& dir, const std::vector<bool>& mask) {
    std::vector<torch::Tensor> t;
    torch::load(t, (dir / "tensors.pt").string());
    if (t.size() != 3) throw Error("load_corpus: malformed tensors.pt in " + dir.string());
    return Corpus{t[0], t[1], t[2], mask};
}
}  // namespace

void save_corpus(const CorpusSet& set, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    save_split(set.train, dir / "train");
    save_split(set.test, dir / "test");
    nlohmann::json manifest = {{"spec", set.spec},
                               {"train_size", set.train.size()},
                               {"test_size", set.test.size()},
                               {"corruption_mask", set.train.corrupted}};
    std::ofstream(dir / "manifest.json") << manifest.dump(2) << "\n";
}

CorpusSet load_corpus(const std::filesystem::path& dir) {
    std::ifstream f(dir / "manifest.json");
    if (!f) throw Error("load_corpus: no manifest.json in " + dir.string());
    auto manifest = nlohmann::json::parse(f);
    CorpusSet set;
    set.spec = manifest.at("spec").get<CorpusSpec>();
    set.train = load_split(dir / "train", manifest.at("corruption_mask").get<std::vector<bool>>());
    set.test = load_split(dir / "test", std::vector<bool>(manifest.at("test_size").get<std::size_t>(), false));
    return set;
}

}  // namespace eguot::data
