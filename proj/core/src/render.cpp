#include "salco/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "salco/error.hpp"

namespace salco {

namespace {

unsigned char to_byte(float v) {
    const double scaled = std::floor(static_cast<double>(v) * 255.0 + 0.5);
    return static_cast<unsigned char>(std::clamp(scaled, 0.0, 255.0));
}

std::ofstream open_binary(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for write: " + path.string());
    return out;
}

}  // namespace

void render_pgm(const SaliencyMap& s, const std::filesystem::path& path) {
    if (s.size() == 0) throw ArgumentError("render_pgm: empty saliency map");
    auto out = open_binary(path);
    out << "P5\n" << s.width << ' ' << s.height << "\n255\n";
    for (float v : s.values) out.put(static_cast<char>(to_byte(v)));
    if (!out) throw IoError("write failed: " + path.string());
}

void render_ppm(const ImageTensor& img, const std::vector<PixelBox>& boxes,
                const std::filesystem::path& path) {
    if (img.empty() || img.channels != 3) throw ArgumentError("render_ppm: need a 3-channel image");

    std::vector<unsigned char> px(static_cast<size_t>(img.dim0) * img.dim1 * 3);
    for (uint32_t y = 0; y < img.dim0; ++y)
        for (uint32_t x = 0; x < img.dim1; ++x)
            for (uint32_t c = 0; c < 3; ++c)
                px[(static_cast<size_t>(y) * img.dim1 + x) * 3 + c] = to_byte(img.at(y, x, c));

    const auto paint_red = [&](uint32_t y, uint32_t x) {
        if (y >= img.dim0 || x >= img.dim1) return;
        const size_t i = (static_cast<size_t>(y) * img.dim1 + x) * 3;
        px[i] = 255;
        px[i + 1] = 0;
        px[i + 2] = 0;
    };
    for (const PixelBox& b : boxes) {
        for (uint32_t x = b.left; x <= b.right; ++x) {
            paint_red(b.top, x);
            paint_red(b.bottom, x);
        }
        for (uint32_t y = b.top; y <= b.bottom; ++y) {
            paint_red(y, b.left);
            paint_red(y, b.right);
        }
    }

    auto out = open_binary(path);
    out << "P6\n" << img.dim1 << ' ' << img.dim0 << "\n255\n";
    out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace salco
