#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "salco/graph.hpp"
#include "salco/rng.hpp"

namespace salco {

// Foreground mask from thresholding a saliency map at its mean.
struct BiPartitionMask {
    uint32_t height = 0;
    uint32_t width = 0;
    std::vector<uint8_t> bits;  // row-major, 1 = discriminative

    BiPartitionMask() = default;
    BiPartitionMask(uint32_t h, uint32_t w)
        : height(h), width(w), bits(static_cast<size_t>(h) * w, 0) {}

    bool at(uint32_t r, uint32_t c) const { return bits[static_cast<size_t>(r) * width + c] != 0; }
    void set(uint32_t r, uint32_t c, bool v) {
        bits[static_cast<size_t>(r) * width + c] = v ? 1 : 0;
    }
};

// Inclusive bounding box in grid cells.
struct GridBox {
    uint32_t row_min = 0, col_min = 0, row_max = 0, col_max = 0;
    bool operator==(const GridBox&) const = default;
};

// One 4-connected discriminative component with its relative-strength score.
struct Region {
    uint32_t id = 0;
    std::vector<std::pair<uint32_t, uint32_t>> cells;  // (row, col)
    GridBox bbox;
    float score = 0.0f;
};

// M_ij = 1 iff S_ij strictly exceeds mean(S).
BiPartitionMask threshold_mask(const SaliencyMap& s);

// Maximal 4-connected true components with at least min_area cells,
// ordered by (row_min, col_min, discovery order). Scores are left unset.
std::vector<Region> connected_regions(const BiPartitionMask& m, uint32_t min_area = 4);

// Scores each region by max(S over its cells) / max(S), then re-sorts
// descending by score (ties by ascending id). Throws when max(S) == 0.
std::vector<Region> score_regions(std::vector<Region> regions, const SaliencyMap& s);

// t draws with replacement, P(region i) = score_i / sum(scores).
std::vector<Region> sample_regions(const std::vector<Region>& regions, uint32_t t, Rng& rng);

// One inverse-CDF draw over nonnegative weights with positive total.
size_t sample_weighted_index(std::span<const double> weights, Rng& rng);

// "id row_min col_min row_max col_max score"
std::string format_region_line(const Region& r);

}  // namespace salco
