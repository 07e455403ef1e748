#include "eguot/metrics.hpp"

#include "eguot/error.hpp"
#include "eguot/imaging.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace eguot::metrics {

namespace {

void require_same(const torch::Tensor& a, const torch::Tensor& b, const char* who) {
    if (!a.defined() || !b.defined() || a.sizes() != b.sizes()) {
        throw Error(std::string(who) + ": shape mismatch");
    }
    if (a.numel() == 0) throw Error(std::string(who) + ": empty input");
}

torch::Tensor gaussian_window(int size, double sigma) {
    auto x = torch::arange(size, torch::kFloat64) - static_cast<double>(size - 1) / 2.0;
    auto g = torch::exp(-(x * x) / (2.0 * sigma * sigma));
    return g / g.sum();
}

// Valid-mode separable filtering of [C,1,H,W].
torch::Tensor filter(const torch::Tensor& img, const torch::Tensor& g) {
    namespace F = torch::nn::functional;
    const int64_t n = g.size(0);
    auto h = F::conv2d(img, g.view({1, 1, 1, n}));
    return F::conv2d(h, g.view({1, 1, n, 1}));
}

}  // namespace

double psnr(const torch::Tensor& a, const torch::Tensor& b) {
    require_same(a, b, "psnr");
    const double mse = (a.to(torch::kFloat64) - b.to(torch::kFloat64)).pow(2).mean().item<double>();
    if (mse <= 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double ssim(const torch::Tensor& a, const torch::Tensor& b, const SsimOptions& opts) {
    require_same(a, b, "ssim");
    if (a.dim() != 3 || (a.size(0) != 1 && a.size(0) != 3)) throw Error("ssim: expected [1|3, H, W]");
    if (a.size(1) < opts.window || a.size(2) < opts.window) {
        throw Error("ssim: image smaller than the " + std::to_string(opts.window) + "x" +
                    std::to_string(opts.window) + " window");
    }
    auto x = a.to(torch::kFloat64);
    auto y = b.to(torch::kFloat64);
    if (x.size(0) == 3 && !opts.per_channel) {
        x = imaging::to_grayscale(x);
        y = imaging::to_grayscale(y);
    }
    x = x.unsqueeze(1);  // [C,1,H,W]
    y = y.unsqueeze(1);
    const auto g = gaussian_window(opts.window, opts.sigma);
    const double c1 = (opts.k1) * (opts.k1);
    const double c2 = (opts.k2) * (opts.k2);

    auto mu_x = filter(x, g);
    auto mu_y = filter(y, g);
    auto sxx = filter(x * x, g) - mu_x * mu_x;
    auto syy = filter(y * y, g) - mu_y * mu_y;
    auto sxy = filter(x * y, g) - mu_x * mu_y;
    auto map = ((2.0 * mu_x * mu_y + c1) * (2.0 * sxy + c2)) /
               ((mu_x * mu_x + mu_y * mu_y + c1) * (sxx + syy + c2));
    return map.mean().item<double>();
}

double delta_e(const torch::Tensor& a, const torch::Tensor& b) {
    require_same(a, b, "delta_e");
    auto la = imaging::rgb_to_lab(a.to(torch::kFloat64));
    auto lb = imaging::rgb_to_lab(b.to(torch::kFloat64));
    const int64_t channel_dim = la.dim() - 3;
    return (la - lb).pow(2).sum(channel_dim).sqrt().mean().item<double>();
}

std::string MetricReport::to_csv() const {
    std::ostringstream os;
    os << "index,psnr,ssim,delta_e\n";
    char line[160];
    for (const auto& r : rows) {
        std::snprintf(line, sizeof(line), "%lld,%.17g,%.17g,%.17g\n", static_cast<long long>(r.index), r.psnr,
                      r.ssim, r.delta_e);
        os << line;
    }
    return os.str();
}

nlohmann::json MetricReport::aggregates_json() const {
    return {{"psnr", psnr}, {"ssim", ssim}, {"delta_e", delta_e}, {"n_images", n_images}, {"lpips", nullptr}};
}

void to_json(nlohmann::json& j, const MetricReport& r) {
    j = r.aggregates_json();
    j["rows"] = nlohmann::json::array();
    for (const auto& row : r.rows) {
        j["rows"].push_back({{"index", row.index}, {"psnr", row.psnr}, {"ssim", row.ssim}, {"delta_e", row.delta_e}});
    }
}

void from_json(const nlohmann::json& j, MetricReport& r) {
    std::vector<MetricRow> rows;
    for (const auto& row : j.at("rows")) {
        rows.push_back({row.at("index").get<int64_t>(), row.at("psnr").get<double>(), row.at("ssim").get<double>(),
                        row.at("delta_e").get<double>()});
    }
    r = report_from_rows(std::move(rows));
}

MetricReport report_from_rows(std::vector<MetricRow> rows) {
    if (rows.empty()) throw Error("metric report needs at least one image");
    MetricReport r;
    r.n_images = static_cast<int64_t>(rows.size());
    for (const auto& row : rows) {
        r.psnr += row.psnr;
        r.ssim += row.ssim;
        r.delta_e += row.delta_e;
    }
    const auto n = static_cast<double>(rows.size());
    r.psnr /= n;
    r.ssim /= n;
    r.delta_e /= n;
    r.rows = std::move(rows);
    return r;
}

MetricReport evaluate_predictions(const torch::Tensor& predictions, const torch::Tensor& references) {
    require_same(predictions, references, "evaluate_predictions");
    if (predictions.dim() != 4) throw Error("evaluate_predictions: expected [N,3,H,W]");
    std::vector<MetricRow> rows;
    for (int64_t i = 0; i < predictions.size(0); ++i) {
        rows.push_back({i, psnr(predictions[i], references[i]), ssim(predictions[i], references[i]),
                        delta_e(predictions[i], references[i])});
    }
    return report_from_rows(std::move(rows));
}

MetricReport evaluate_corpus(const Predictor& predictor, const torch::Tensor& raw, const torch::Tensor& gt,
                             int64_t batch) {
    if (!raw.defined() || raw.size(0) == 0) throw Error("evaluate_corpus: empty corpus");
    if (raw.size(0) != gt.size(0)) throw Error("evaluate_corpus: raw and ground truth differ in size");
    torch::NoGradGuard no_grad;
    std::vector<torch::Tensor> preds;
    for (int64_t s = 0; s < raw.size(0); s += batch) {
        preds.push_back(predictor(raw.slice(0, s, std::min(s + batch, raw.size(0)))).detach());
    }
    return evaluate_predictions(torch::cat(preds, 0), gt);
}

}  // namespace eguot::metrics
