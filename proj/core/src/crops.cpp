#include "salco/crops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "salco/error.hpp"

namespace salco {

PixelBox grid_box_to_pixels(const GridBox& bbox, uint32_t stride, uint32_t img_h, uint32_t img_w) {
    if (stride < 1) throw ArgumentError("grid_box_to_pixels: stride must be >= 1");
    if (img_h == 0 || img_w == 0) throw ArgumentError("grid_box_to_pixels: empty image");

    PixelBox px;
    px.top = bbox.row_min * stride;
    px.left = bbox.col_min * stride;
    px.bottom = std::min((bbox.row_max + 1) * stride - 1, img_h - 1);
    px.right = std::min((bbox.col_max + 1) * stride - 1, img_w - 1);
    if (px.top > px.bottom || px.left > px.right)
        throw ArgumentError("grid_box_to_pixels: bbox outside image");
    return px;
}

namespace {

// Half-away-from-zero rounding with a floor of 1 and a cap at the box extent.
uint32_t round_extent(double v, uint32_t cap) {
    const double r = std::round(v);
    if (r < 1.0) return 1;
    if (r > static_cast<double>(cap)) return cap;
    return static_cast<uint32_t>(r);
}

}  // namespace

CropSpec random_crop_in_box(const PixelBox& box, Rng& rng) {
    const double area = static_cast<double>(box.area());
    const double frac = rng.uniform(0.08, 1.0);
    const double aspect = rng.uniform(3.0 / 4.0, 4.0 / 3.0);

    CropSpec spec;
    spec.height = round_extent(std::sqrt(frac * area / aspect), box.height());
    spec.width = round_extent(std::sqrt(frac * area * aspect), box.width());

    const double cy = rng.uniform(static_cast<double>(box.top), static_cast<double>(box.top) + box.height());
    const double cx = rng.uniform(static_cast<double>(box.left), static_cast<double>(box.left) + box.width());

    const int64_t max_top = static_cast<int64_t>(box.bottom) - spec.height + 1;
    const int64_t max_left = static_cast<int64_t>(box.right) - spec.width + 1;
    spec.top = static_cast<uint32_t>(std::clamp<int64_t>(std::llround(cy - spec.height / 2.0),
                                                         box.top, max_top));
    spec.left = static_cast<uint32_t>(std::clamp<int64_t>(std::llround(cx - spec.width / 2.0),
                                                          box.left, max_left));
    spec.flip = rng.bernoulli(0.5);
    spec.noise_seed = rng.next_u64();
    return spec;
}

CropPair make_pair(const Region& region, uint32_t stride, const ImageTensor& img, Rng& rng) {
    const PixelBox box = grid_box_to_pixels(region.bbox, stride, img.dim0, img.dim1);
    CropPair pair;
    pair.first = random_crop_in_box(box, rng);
    pair.second = random_crop_in_box(box, rng);
    pair.score = region.score;
    pair.source_region = region.id;
    return pair;
}

ImageTensor extract_view(const ImageTensor& img, const CropSpec& spec, uint32_t out,
                         float noise_sigma) {
    if (out == 0) throw ArgumentError("extract_view: zero output size");
    if (spec.height == 0 || spec.width == 0 ||
        static_cast<uint64_t>(spec.top) + spec.height > img.dim0 ||
        static_cast<uint64_t>(spec.left) + spec.width > img.dim1)
        throw ArgumentError("extract_view: crop outside image");

    ImageTensor patch(spec.height, spec.width, img.channels);
    for (uint32_t r = 0; r < spec.height; ++r) {
        for (uint32_t c = 0; c < spec.width; ++c) {
            const uint32_t src_c = spec.flip ? spec.width - 1 - c : c;
            for (uint32_t ch = 0; ch < img.channels; ++ch)
                patch.at(r, c, ch) = img.at(spec.top + r, spec.left + src_c, ch);
        }
    }

    ImageTensor view = bilinear_resize(patch, out, out);
    if (noise_sigma > 0.0f) {
        Rng noise(spec.noise_seed);
        for (float& v : view.data) {
            const double noisy = v + noise_sigma * noise.normal();
            v = static_cast<float>(std::clamp(noisy, 0.0, 1.0));
        }
    }
    return view;
}

std::string format_crop_line(const CropSpec& spec) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%u %u %u %u %d %llu", spec.top, spec.left, spec.height,
                  spec.width, spec.flip ? 1 : 0, static_cast<unsigned long long>(spec.noise_seed));
    return buf;
}

}  // namespace salco
