#include "salco/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "salco/error.hpp"

namespace salco {

namespace {

constexpr char kMagic[4] = {'S', 'G', 'F', 'M'};

void put_u32le(std::string& out, uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

uint32_t get_u32le(const unsigned char* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

}  // namespace

void validate_finite(const Tensor& t) {
    if (t.empty()) throw ArgumentError("tensor has an empty dimension");
    if (t.data.size() != static_cast<size_t>(t.dim0) * t.dim1 * t.channels)
        throw ArgumentError("tensor data length does not match dimensions");
    for (float v : t.data)
        if (!std::isfinite(v)) throw ArgumentError("tensor contains non-finite value");
}

void validate_image(const ImageTensor& t) {
    validate_finite(t);
    for (float v : t.data)
        if (v < 0.0f || v > 1.0f) throw ArgumentError("image value outside [0,1]");
}

Tensor load_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());

    unsigned char header[16];
    in.read(reinterpret_cast<char*>(header), sizeof(header));
    if (in.gcount() != sizeof(header)) throw FormatError("truncated SGFM header: " + path.string());
    if (std::memcmp(header, kMagic, 4) != 0) throw FormatError("bad SGFM magic: " + path.string());

    Tensor t;
    t.dim0 = get_u32le(header + 4);
    t.dim1 = get_u32le(header + 8);
    t.channels = get_u32le(header + 12);

    const uint64_t count = static_cast<uint64_t>(t.dim0) * t.dim1 * t.channels;
    if (t.dim0 == 0 || t.dim1 == 0 || t.channels == 0)
        throw FormatError("SGFM header has empty dimension: " + path.string());
    if (count > (1ull << 31)) throw FormatError("SGFM dimensions overflow: " + path.string());

    std::vector<unsigned char> payload(count * 4);
    in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
    if (static_cast<uint64_t>(in.gcount()) != payload.size())
        throw FormatError("truncated SGFM payload: " + path.string());
    if (in.peek() != std::ifstream::traits_type::eof())
        throw FormatError("trailing bytes after SGFM payload: " + path.string());

    t.data.resize(count);
    for (uint64_t i = 0; i < count; ++i) {
        const uint32_t bits = get_u32le(payload.data() + i * 4);
        float f;
        std::memcpy(&f, &bits, 4);
        t.data[i] = f;
    }
    return t;
}

void save_tensor(const Tensor& t, const std::filesystem::path& path) {
    validate_finite(t);

    std::string buf;
    buf.reserve(16 + t.data.size() * 4);
    buf.append(kMagic, 4);
    put_u32le(buf, t.dim0);
    put_u32le(buf, t.dim1);
    put_u32le(buf, t.channels);
    for (float f : t.data) {
        uint32_t bits;
        std::memcpy(&bits, &f, 4);
        put_u32le(buf, bits);
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for write: " + path.string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

ImageTensor bilinear_resize(const ImageTensor& img, uint32_t out_h, uint32_t out_w) {
    if (img.empty()) throw ArgumentError("bilinear_resize: empty input");
    if (out_h == 0 || out_w == 0) throw ArgumentError("bilinear_resize: zero target dimension");

    ImageTensor out(out_h, out_w, img.channels);
    const double sy = static_cast<double>(img.dim0) / out_h;
    const double sx = static_cast<double>(img.dim1) / out_w;

    for (uint32_t oy = 0; oy < out_h; ++oy) {
        double fy = (oy + 0.5) * sy - 0.5;
        fy = std::clamp(fy, 0.0, static_cast<double>(img.dim0 - 1));
        const uint32_t y0 = static_cast<uint32_t>(fy);
        const uint32_t y1 = std::min(y0 + 1, img.dim0 - 1);
        const double wy = fy - y0;
        for (uint32_t ox = 0; ox < out_w; ++ox) {
            double fx = (ox + 0.5) * sx - 0.5;
            fx = std::clamp(fx, 0.0, static_cast<double>(img.dim1 - 1));
            const uint32_t x0 = static_cast<uint32_t>(fx);
            const uint32_t x1 = std::min(x0 + 1, img.dim1 - 1);
            const double wx = fx - x0;
            for (uint32_t c = 0; c < img.channels; ++c) {
                const double top = (1.0 - wx) * img.at(y0, x0, c) + wx * img.at(y0, x1, c);
                const double bot = (1.0 - wx) * img.at(y1, x0, c) + wx * img.at(y1, x1, c);
                out.at(oy, ox, c) = static_cast<float>((1.0 - wy) * top + wy * bot);
            }
        }
    }
    return out;
}

namespace {

template <typename T>
double cosine_impl(std::span<const T> a, std::span<const T> b) {
    if (a.size() != b.size()) throw ArgumentError("cosine_similarity: length mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double x = a[i], y = b[i];
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

}  // namespace

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
    return cosine_impl(a, b);
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    return cosine_impl(a, b);
}

}  // namespace salco
