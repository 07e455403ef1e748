#include "eguot/imaging.hpp"

#include "eguot/error.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

namespace eguot::imaging {

namespace {

// sRGB primaries, D65. The white point is taken as the row sums so that
// (1,1,1) maps to an exactly neutral L*=100.
constexpr double kRgbToXyz[3][3] = {{0.4124564, 0.3575761, 0.1804375},
                                    {0.2126729, 0.7151522, 0.0721750},
                                    {0.0193339, 0.1191920, 0.9503041}};
constexpr double kLabDelta = 6.0 / 29.0;

struct Batched {
    torch::Tensor t;
    bool squeezed;
};

Batched as_batch(const torch::Tensor& t, int64_t channels, const char* what) {
    if (!t.defined() || (t.dim() != 3 && t.dim() != 4)) {
        throw Error(std::string(what) + ": expected [C,H,W] or [B,C,H,W]");
    }
    auto b = t.dim() == 3 ? t.unsqueeze(0) : t;
    if (channels > 0 && b.size(1) != channels) {
        throw Error(std::string(what) + ": expected " + std::to_string(channels) + " channels, got " +
                    std::to_string(b.size(1)));
    }
    return {b, t.dim() == 3};
}

torch::Tensor unbatch(const torch::Tensor& t, bool squeezed) { return squeezed ? t.squeeze(0) : t; }

torch::Tensor rgb_to_xyz_matrix(const torch::TensorOptions& opts) {
    return torch::tensor({kRgbToXyz[0][0], kRgbToXyz[0][1], kRgbToXyz[0][2], kRgbToXyz[1][0],
                          kRgbToXyz[1][1], kRgbToXyz[1][2], kRgbToXyz[2][0], kRgbToXyz[2][1],
                          kRgbToXyz[2][2]},
                         torch::TensorOptions().dtype(torch::kFloat64))
        .view({3, 3})
        .to(opts);
}

torch::Tensor white_point(const torch::TensorOptions& opts) {
    return rgb_to_xyz_matrix(opts).sum(1);
}

// [B,3,H,W] x [3,3]^T over the channel axis.
torch::Tensor apply_color_matrix(const torch::Tensor& img, const torch::Tensor& m) {
    return torch::einsum("ij,bjhw->bihw", {m, img});
}

torch::Tensor lab_f(const torch::Tensor& t) {
    const double d3 = kLabDelta * kLabDelta * kLabDelta;
    auto cube = torch::pow(torch::clamp_min(t, d3), 1.0 / 3.0);
    auto lin = t / (3.0 * kLabDelta * kLabDelta) + 4.0 / 29.0;
    return torch::where(t > d3, cube, lin);
}

torch::Tensor lab_f_inv(const torch::Tensor& f) {
    auto cube = f.pow(3);
    auto lin = 3.0 * kLabDelta * kLabDelta * (f - 4.0 / 29.0);
    return torch::where(f > kLabDelta, cube, lin);
}

}  // namespace

RawImage::RawImage(torch::Tensor t) : planes(std::move(t)) {
    if (planes.dim() != 3) throw Error("RawImage: expected [4, H/2, W/2]");
    check_raw(planes);
}

SrgbImage::SrgbImage(torch::Tensor t) : planes(std::move(t)) {
    if (planes.dim() != 3) throw Error("SrgbImage: expected [3, H, W]");
    check_srgb(planes);
}

namespace {
void check_range(const torch::Tensor& t, const char* what) {
    if (!torch::isfinite(t).all().item<bool>()) throw Error(std::string(what) + ": non-finite values");
    if (t.numel() > 0 && (t.min().item<double>() < 0.0 || t.max().item<double>() > 1.0)) {
        throw Error(std::string(what) + ": values outside [0, 1]");
    }
}
}  // namespace

void check_raw(const torch::Tensor& t) {
    as_batch(t, 4, "raw image");
    check_range(t, "raw image");
}

void check_srgb(const torch::Tensor& t) {
    as_batch(t, 3, "sRGB image");
    check_range(t, "sRGB image");
}

torch::Tensor mosaic(const torch::Tensor& rgb) {
    auto [b, squeezed] = as_batch(rgb, 3, "mosaic");
    if (b.size(2) % 2 != 0 || b.size(3) % 2 != 0) {
        throw Error("mosaic: height and width must be even");
    }
    using torch::indexing::None;
    using torch::indexing::Slice;
    auto r = b.index({Slice(), 0, Slice(0, None, 2), Slice(0, None, 2)});
    auto g1 = b.index({Slice(), 1, Slice(0, None, 2), Slice(1, None, 2)});
    auto g2 = b.index({Slice(), 1, Slice(1, None, 2), Slice(0, None, 2)});
    auto bl = b.index({Slice(), 2, Slice(1, None, 2), Slice(1, None, 2)});
    return unbatch(torch::stack({r, g1, g2, bl}, 1), squeezed);
}

torch::Tensor unpack_bayer(const torch::Tensor& raw) {
    auto [b, squeezed] = as_batch(raw, 4, "unpack_bayer");
    // pixel_shuffle places channel (2*dy + dx) at offset (dy, dx): R(0,0),
    // G(0,1), G(1,0), B(1,1) is exactly the packing order.
    return unbatch(torch::pixel_shuffle(b, 2), squeezed);
}

torch::Tensor pack_bayer(const torch::Tensor& mosaic_plane) {
    auto [b, squeezed] = as_batch(mosaic_plane, 1, "pack_bayer");
    if (b.size(2) % 2 != 0 || b.size(3) % 2 != 0) {
        throw Error("pack_bayer: height and width must be even");
    }
    return unbatch(torch::pixel_unshuffle(b, 2), squeezed);
}

torch::Tensor demosaic_bilinear(const torch::Tensor& raw) {
    auto [b, squeezed] = as_batch(raw, 4, "demosaic_bilinear");
    const auto opts = b.options();
    const int64_t n = b.size(0);
    const int64_t h = b.size(2) * 2;
    const int64_t w = b.size(3) * 2;

    auto plane = torch::pixel_shuffle(b, 2);  // [B,1,H,W]

    // Sampling masks of the three color channels on the full grid.
    auto sel = torch::tensor({1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0}, opts)
                   .view({3, 4, 1, 1})
                   .expand({3, 4, h / 2, w / 2});
    auto masks = torch::pixel_shuffle(sel, 2).view({1, 3, h, w});

    auto rb_kernel = torch::tensor({1.0, 2.0, 1.0, 2.0, 4.0, 2.0, 1.0, 2.0, 1.0}, opts).view({3, 3});
    auto g_kernel = torch::tensor({0.0, 1.0, 0.0, 1.0, 4.0, 1.0, 0.0, 1.0, 0.0}, opts).view({3, 3});
    auto weight = torch::stack({rb_kernel, g_kernel, rb_kernel}).unsqueeze(1);  // [3,1,3,3]

    namespace F = torch::nn::functional;
    auto sparse = plane.expand({n, 3, h, w}) * masks;
    auto num = F::conv2d(sparse, weight, F::Conv2dFuncOptions().padding(1).groups(3));
    auto den = F::conv2d(masks, weight, F::Conv2dFuncOptions().padding(1).groups(3));
    return unbatch(torch::clamp(num / den, 0.0, 1.0), squeezed);
}

torch::Tensor srgb_to_linear(const torch::Tensor& srgb) {
    auto hi = torch::pow((torch::clamp_min(srgb, 0.04045) + 0.055) / 1.055, 2.4);
    auto lo = srgb / 12.92;
    return torch::where(srgb > 0.04045, hi, lo);
}

torch::Tensor linear_to_srgb(const torch::Tensor& linear) {
    auto hi = 1.055 * torch::pow(torch::clamp_min(linear, 0.0031308), 1.0 / 2.4) - 0.055;
    auto lo = 12.92 * linear;
    return torch::where(linear > 0.0031308, hi, lo);
}

torch::Tensor rgb_to_lab(const torch::Tensor& srgb) {
    auto [b, squeezed] = as_batch(srgb, 3, "rgb_to_lab");
    const auto opts = b.options();
    auto xyz = apply_color_matrix(srgb_to_linear(b), rgb_to_xyz_matrix(opts));
    auto f = lab_f(xyz / white_point(opts).view({1, 3, 1, 1}));
    auto fx = f.select(1, 0), fy = f.select(1, 1), fz = f.select(1, 2);
    auto lab = torch::stack({116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)}, 1);
    return unbatch(lab, squeezed);
}

torch::Tensor lab_to_rgb(const torch::Tensor& lab) {
    auto [b, squeezed] = as_batch(lab, 3, "lab_to_rgb");
    const auto opts = b.options();
    auto fy = (b.select(1, 0) + 16.0) / 116.0;
    auto fx = fy + b.select(1, 1) / 500.0;
    auto fz = fy - b.select(1, 2) / 200.0;
    auto xyz = lab_f_inv(torch::stack({fx, fy, fz}, 1)) * white_point(opts).view({1, 3, 1, 1});
    auto lin = apply_color_matrix(xyz, torch::linalg_inv(rgb_to_xyz_matrix(opts)));
    return unbatch(linear_to_srgb(lin), squeezed);
}

torch::Tensor to_grayscale(const torch::Tensor& srgb) {
    auto [b, squeezed] = as_batch(srgb, 3, "to_grayscale");
    auto g = 0.299 * b.select(1, 0) + 0.587 * b.select(1, 1) + 0.114 * b.select(1, 2);
    return unbatch(g.unsqueeze(1), squeezed);
}

torch::Tensor fft_log_magnitude(const torch::Tensor& gray, double eps) {
    if (!gray.defined() || gray.dim() < 2) throw Error("fft_log_magnitude: expected [..., H, W]");
    auto spec = torch::fft::fft2(gray);
    torch::Tensor mag;
    if (eps > 0.0) {
        auto ri = torch::view_as_real(spec);
        mag = torch::sqrt(ri.pow(2).sum(-1) + eps);
    } else {
        mag = spec.abs();
    }
    return torch::fft::fftshift(torch::log1p(mag), std::vector<int64_t>{-2, -1});
}

// ---------------------------------------------------------------------------
// PNG

namespace {

struct PngWriteBuffer {
    std::vector<unsigned char> bytes;
};

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
    auto* buf = static_cast<PngWriteBuffer*>(png_get_io_ptr(png));
    buf->bytes.insert(buf->bytes.end(), data, data + length);
}

void png_flush_noop(png_structp) {}

[[noreturn]] void png_error_to_exception(png_structp, png_const_charp msg) {
    throw Error(std::string("png: ") + msg);
}

void png_warning_ignore(png_structp, png_const_charp) {}

}  // namespace

std::vector<unsigned char> encode_png(const torch::Tensor& image, int bit_depth) {
    if (bit_depth != 8 && bit_depth != 16) throw Error("encode_png: bit depth must be 8 or 16");
    if (image.dim() != 3 || (image.size(0) != 1 && image.size(0) != 3)) {
        throw Error("encode_png: expected [1|3, H, W]");
    }
    const int64_t channels = image.size(0);
    const int64_t h = image.size(1);
    const int64_t w = image.size(2);
    const double maxval = bit_depth == 8 ? 255.0 : 65535.0;
    auto hwc = torch::round(image.detach().to(torch::kFloat64).clamp(0.0, 1.0) * maxval)
                   .permute({1, 2, 0})
                   .contiguous()
                   .to(torch::kInt32);
    auto acc = hwc.accessor<int32_t, 3>();

    const int bytes_per_sample = bit_depth / 8;
    std::vector<unsigned char> pixels(static_cast<std::size_t>(h * w * channels * bytes_per_sample));
    std::size_t k = 0;
    for (int64_t y = 0; y < h; ++y) {
        for (int64_t x = 0; x < w; ++x) {
            for (int64_t c = 0; c < channels; ++c) {
                const auto v = static_cast<uint32_t>(acc[y][x][c]);
                if (bytes_per_sample == 2) pixels[k++] = static_cast<unsigned char>(v >> 8);
                pixels[k++] = static_cast<unsigned char>(v & 0xFF);
            }
        }
    }

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_to_exception,
                                              png_warning_ignore);
    if (png == nullptr) throw Error("encode_png: cannot create write struct");
    png_infop info = png_create_info_struct(png);
    std::unique_ptr<png_structp, void (*)(png_structp*)> guard(&png, [](png_structp* p) {
        png_destroy_write_struct(p, nullptr);
    });
    PngWriteBuffer out;
    png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
    png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), bit_depth,
                 channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t stride = static_cast<std::size_t>(w * channels * bytes_per_sample);
    for (int64_t y = 0; y < h; ++y) {
        png_write_row(png, pixels.data() + static_cast<std::size_t>(y) * stride);
    }
    png_write_end(png, nullptr);
    png_destroy_info_struct(png, &info);
    return out.bytes;
}

void write_png(const std::filesystem::path& path, const torch::Tensor& image, int bit_depth) {
    const auto bytes = encode_png(image, bit_depth);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("write_png: cannot open " + path.string());
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error("write_png: write failed for " + path.string());
}

torch::Tensor read_png(const std::filesystem::path& path) {
    std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "rb"), &std::fclose);
    if (!fp) throw Error("read_png: cannot open " + path.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_to_exception,
                                             png_warning_ignore);
    if (png == nullptr) throw Error("read_png: cannot create read struct");
    png_infop info = png_create_info_struct(png);
    struct Cleanup {
        png_structp* png;
        png_infop* info;
        ~Cleanup() { png_destroy_read_struct(png, info, nullptr); }
    } cleanup{&png, &info};

    png_init_io(png, fp.get());
    png_read_info(png, info);
    const auto color_type = png_get_color_type(png, info);
    const int bit_depth = png_get_bit_depth(png, info);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const auto w = static_cast<int64_t>(png_get_image_width(png, info));
    const auto h = static_cast<int64_t>(png_get_image_height(png, info));
    const int channels = png_get_channels(png, info);
    const int depth = png_get_bit_depth(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    std::vector<unsigned char> data(stride * static_cast<std::size_t>(h));
    std::vector<png_bytep> rows(static_cast<std::size_t>(h));
    for (int64_t y = 0; y < h; ++y) rows[static_cast<std::size_t>(y)] = data.data() + stride * static_cast<std::size_t>(y);
    png_read_image(png, rows.data());

    auto out = torch::empty({channels, h, w}, torch::kFloat32);
    auto acc = out.accessor<float, 3>();
    const double maxval = depth == 16 ? 65535.0 : 255.0;
    for (int64_t y = 0; y < h; ++y) {
        const unsigned char* row = rows[static_cast<std::size_t>(y)];
        for (int64_t x = 0; x < w; ++x) {
            for (int c = 0; c < channels; ++c) {
                const std::size_t idx = static_cast<std::size_t>(x * channels + c);
                const double v = depth == 16 ? static_cast<double>((row[2 * idx] << 8) | row[2 * idx + 1])
                                             : static_cast<double>(row[idx]);
                acc[c][y][x] = static_cast<float>(v / maxval);
            }
        }
    }
    return out;
}

}  // namespace eguot::imaging
