#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace salco {

// Dense row-major, channel-fastest float32 grid. Doubles as an image
// (dim0 x dim1 pixels, values in [0,1]) and as a spatial feature map
// (dim0 x dim1 cells, C channels).
struct Tensor {
    uint32_t dim0 = 0;
    uint32_t dim1 = 0;
    uint32_t channels = 0;
    std::vector<float> data;

    Tensor() = default;
    Tensor(uint32_t d0, uint32_t d1, uint32_t c)
        : dim0(d0), dim1(d1), channels(c), data(static_cast<size_t>(d0) * d1 * c, 0.0f) {}

    size_t index(uint32_t r, uint32_t c, uint32_t ch) const {
        return (static_cast<size_t>(r) * dim1 + c) * channels + ch;
    }
    float& at(uint32_t r, uint32_t c, uint32_t ch) { return data[index(r, c, ch)]; }
    float at(uint32_t r, uint32_t c, uint32_t ch) const { return data[index(r, c, ch)]; }

    // Channel vector of one grid cell.
    std::span<const float> cell(uint32_t r, uint32_t c) const {
        return {data.data() + index(r, c, 0), channels};
    }

    size_t size() const { return data.size(); }
    bool empty() const { return dim0 == 0 || dim1 == 0 || channels == 0; }

    bool operator==(const Tensor&) const = default;
};

using ImageTensor = Tensor;
using FeatureMap = Tensor;

// Throws ArgumentError when the tensor violates its type invariants.
void validate_finite(const Tensor& t);          // feature maps: finite values
void validate_image(const ImageTensor& t);      // images: finite and in [0,1]

// SGFM container: "SGFM" magic, three little-endian u32 dims
// (dim0, dim1, channels), then dim0*dim1*channels little-endian IEEE-754
// floats, row-major, channel-fastest. Byte-exact round trip.
Tensor load_tensor(const std::filesystem::path& path);
void save_tensor(const Tensor& t, const std::filesystem::path& path);

// Bilinear interpolation with pixel-center sampling. Output values are
// convex combinations of the input, so the global [min,max] never widens.
ImageTensor bilinear_resize(const ImageTensor& img, uint32_t out_h, uint32_t out_w);

// <a,b> / (||a|| ||b||), accumulated in double and clamped to [-1,1].
// Zero-norm inputs yield 0.0 so degenerate features never abort a run.
double cosine_similarity(std::span<const float> a, std::span<const float> b);
double cosine_similarity(std::span<const double> a, std::span<const double> b);

}  // namespace salco
