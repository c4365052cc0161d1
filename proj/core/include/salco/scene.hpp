#pragma once

#include <cstdint>
#include <vector>

#include "salco/tensor.hpp"

namespace salco {

// Synthetic scene generator knobs. Backgrounds carry a mild gradient plus a
// sinusoidal stripe field and per-pixel noise; objects are solid rectangles
// or ellipses whose colors sit far from the background in RGB. The stripe
// field covers objects too, so it is a nuisance signal the encoder can learn
// to discard while the color offset stays predictive.
struct SceneConfig {
    uint32_t image_size = 128;
    uint32_t min_objects = 1;
    uint32_t max_objects = 4;
    double min_fraction = 0.05;  // object pixels / image pixels bounds
    double max_fraction = 0.40;
    double min_contrast = 0.4;   // RGB L2 distance floor, object vs background
    double stripe_amp_lo = 0.05;
    double stripe_amp_hi = 0.09;
    double pixel_noise = 0.015;
    double gradient_amp = 0.03;
};

struct SyntheticScene {
    ImageTensor image;
    std::vector<uint8_t> gt_mask;  // row-major, 1 exactly on object pixels
    uint32_t object_count = 0;
    uint64_t seed = 0;

    double object_fraction() const;
};

// Deterministic per seed. Retries internally until the object-pixel fraction
// lands inside [min_fraction, max_fraction].
SyntheticScene gen_scene(uint64_t seed, const SceneConfig& cfg);

}  // namespace salco
