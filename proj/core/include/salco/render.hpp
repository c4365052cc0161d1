#pragma once

#include <filesystem>
#include <vector>

#include "salco/crops.hpp"
#include "salco/graph.hpp"
#include "salco/tensor.hpp"

namespace salco {

// 8-bit binary PGM (P5), byte = floor(value * 255 + 0.5).
void render_pgm(const SaliencyMap& s, const std::filesystem::path& path);

// 8-bit binary PPM (P6) of a 3-channel image with 1-pixel red outlines
// around the given boxes.
void render_ppm(const ImageTensor& img, const std::vector<PixelBox>& boxes,
                const std::filesystem::path& path);

}  // namespace salco
