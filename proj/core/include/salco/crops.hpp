#pragma once

#include <cstdint>
#include <string>

#include "salco/regions.hpp"
#include "salco/rng.hpp"
#include "salco/tensor.hpp"

namespace salco {

// Inclusive pixel rectangle.
struct PixelBox {
    uint32_t top = 0, left = 0, bottom = 0, right = 0;
    uint32_t height() const { return bottom - top + 1; }
    uint32_t width() const { return right - left + 1; }
    uint64_t area() const { return static_cast<uint64_t>(height()) * width(); }
    bool operator==(const PixelBox&) const = default;
};

struct CropSpec {
    uint32_t top = 0, left = 0;     // top-left pixel
    uint32_t height = 1, width = 1; // pixel extents
    bool flip = false;
    uint64_t noise_seed = 0;
    bool operator==(const CropSpec&) const = default;
};

// Two augmented views of one region, carrying the region's score unchanged.
struct CropPair {
    CropSpec first;
    CropSpec second;
    float score = 0.0f;
    uint32_t source_region = 0;
};

// Maps a feature-grid bbox to the covered pixel rectangle at the given
// stride, clipped to the image bounds.
PixelBox grid_box_to_pixels(const GridBox& bbox, uint32_t stride, uint32_t img_h, uint32_t img_w);

// Random crop inside the box: area fraction U[0.08, 1.0] of the box, aspect
// ratio U[3/4, 4/3], uniform center, sizes rounded half-away-from-zero with
// a floor of 1 pixel, then shifted so the rectangle stays inside the box.
CropSpec random_crop_in_box(const PixelBox& box, Rng& rng);

// Two independent crops of the region's pixel box.
CropPair make_pair(const Region& region, uint32_t stride, const ImageTensor& img, Rng& rng);

// crop -> optional horizontal flip -> bilinear resize to out x out ->
// additive Gaussian noise (seeded, clamped to [0,1]). noise_sigma = 0 disables.
ImageTensor extract_view(const ImageTensor& img, const CropSpec& spec, uint32_t out = 96,
                         float noise_sigma = 0.02f);

// "top left height width flip seed"
std::string format_crop_line(const CropSpec& spec);

}  // namespace salco
