#pragma once

// Deterministic image primitives. All functions accept a single image
// [C, H, W] or a batch [B, C, H, W] and preserve dtype; they are built from
// differentiable tensor ops so the experts can backpropagate through them.

#include <torch/torch.h>

#include <filesystem>

namespace eguot::imaging {

/// Packed RGGB Bayer raw: 4 half-resolution planes ordered R, G(R row),
/// G(B row), B, values in [0, 1].
struct RawImage {
    torch::Tensor planes;  // [4, H/2, W/2]

    explicit RawImage(torch::Tensor t);
    [[nodiscard]] int64_t height() const { return planes.size(1) * 2; }
    [[nodiscard]] int64_t width() const { return planes.size(2) * 2; }
};

/// Gamma-encoded sRGB, [3, H, W], values in [0, 1].
struct SrgbImage {
    torch::Tensor planes;

    explicit SrgbImage(torch::Tensor t);
    [[nodiscard]] int64_t height() const { return planes.size(1); }
    [[nodiscard]] int64_t width() const { return planes.size(2); }
};

/// Throws unless `t` is [4,h,w] or [B,4,h,w], finite, within [0,1].
void check_raw(const torch::Tensor& t);
/// Throws unless `t` is [3,H,W] or [B,3,H,W], finite, within [0,1].
void check_srgb(const torch::Tensor& t);

/// Samples the RGGB pattern (R at even row / even column) and packs it into
/// four half-resolution planes. Odd spatial sizes are rejected.
torch::Tensor mosaic(const torch::Tensor& rgb);

/// Inverse of the packing step: 4 planes back to a single-plane mosaic
/// [1, H, W] (or [B, 1, H, W]).
torch::Tensor unpack_bayer(const torch::Tensor& raw);
/// Single-plane mosaic to 4 packed planes.
torch::Tensor pack_bayer(const torch::Tensor& mosaic_plane);

/// Bilinear demosaic by normalized convolution; exact on constant images
/// (borders included) and on linear fields away from the border. Output is
/// clamped to [0, 1]. This is the fixed anchor of the unpaired cost.
torch::Tensor demosaic_bilinear(const torch::Tensor& raw);

/// sRGB -> linear (two-piece transfer function) -> XYZ (D65) -> CIELAB.
/// Channels are L* in [0,100], a*, b*.
torch::Tensor rgb_to_lab(const torch::Tensor& srgb);
torch::Tensor lab_to_rgb(const torch::Tensor& lab);

torch::Tensor srgb_to_linear(const torch::Tensor& srgb);
torch::Tensor linear_to_srgb(const torch::Tensor& linear);

/// Luma with weights 0.299 / 0.587 / 0.114, shape [1, H, W].
torch::Tensor to_grayscale(const torch::Tensor& srgb);

/// log(1 + |DFT2(gray)|) with the DC bin moved to the center. Unnormalized
/// forward transform. A positive `eps` computes the magnitude as
/// sqrt(re^2 + im^2 + eps), which keeps the gradient finite at zero bins.
torch::Tensor fft_log_magnitude(const torch::Tensor& gray, double eps = 0.0);

/// Writes [C,H,W] in [0,1] (C = 1 or 3) as 8- or 16-bit PNG.
void write_png(const std::filesystem::path& path, const torch::Tensor& image, int bit_depth = 8);
/// Reads an 8/16-bit gray or RGB(A) PNG into float [C,H,W] in [0,1].
torch::Tensor read_png(const std::filesystem::path& path);
/// Encodes to PNG bytes in memory (same format as write_png).
std::vector<unsigned char> encode_png(const torch::Tensor& image, int bit_depth = 8);

}  // namespace eguot::imaging
