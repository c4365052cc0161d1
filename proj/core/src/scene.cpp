#include "salco/scene.hpp"

#include <algorithm>
#include <cmath>

#include "salco/error.hpp"
#include "salco/rng.hpp"

namespace salco {

double SyntheticScene::object_fraction() const {
    size_t on = 0;
    for (uint8_t b : gt_mask) on += b;
    return static_cast<double>(on) / static_cast<double>(gt_mask.size());
}

namespace {

struct Shape {
    bool ellipse;
    uint32_t top, left, h, w;
    float color[3];
};

bool inside_shape(const Shape& s, uint32_t y, uint32_t x) {
    if (y < s.top || y >= s.top + s.h || x < s.left || x >= s.left + s.w) return false;
    if (!s.ellipse) return true;
    const double cy = s.top + (s.h - 1) / 2.0, cx = s.left + (s.w - 1) / 2.0;
    const double ry = s.h / 2.0, rx = s.w / 2.0;
    const double dy = (y - cy) / ry, dx = (x - cx) / rx;
    return dy * dy + dx * dx <= 1.0;
}

}  // namespace

SyntheticScene gen_scene(uint64_t seed, const SceneConfig& cfg) {
    if (cfg.image_size < 16) throw ArgumentError("gen_scene: image_size too small");
    if (cfg.min_objects < 1 || cfg.max_objects < cfg.min_objects || cfg.max_objects > 4)
        throw ArgumentError("gen_scene: object count bounds must satisfy 1 <= min <= max <= 4");

    const uint32_t n = cfg.image_size;
    const Rng base = Rng(Rng::mix(stream::kScene, seed));

    for (uint64_t attempt = 0;; ++attempt) {
        if (attempt >= 1000) throw NumericError("gen_scene: could not satisfy fraction bounds");
        Rng rng = base.fork(attempt);

        float bg[3];
        for (float& c : bg) c = static_cast<float>(rng.uniform(0.25, 0.75));
        const double bg_norm = std::sqrt(static_cast<double>(bg[0]) * bg[0] +
                                         static_cast<double>(bg[1]) * bg[1] +
                                         static_cast<double>(bg[2]) * bg[2]);

        // Object palette = brightness-scaled background. The RGB direction is
        // unchanged, so the contrast lives purely in intensity: far in L2 but
        // invisible to any angle-preserving map of the raw pixels.
        const double dt = (cfg.min_contrast + 0.12) / bg_norm;
        const double max_c = std::max({bg[0], bg[1], bg[2]});
        const bool bright_ok = (1.0 + dt) * max_c <= 0.98;
        const bool go_bright = bright_ok && rng.bernoulli(0.5);
        const double scale = go_bright ? 1.0 + dt : std::max(1.0 - dt, 0.05);
        float palette[3];
        for (int c = 0; c < 3; ++c) palette[c] = static_cast<float>(scale * bg[c]);
        {
            double d2 = 0.0;
            for (int c = 0; c < 3; ++c) d2 += (palette[c] - bg[c]) * (palette[c] - bg[c]);
            if (std::sqrt(d2) < cfg.min_contrast + 0.005) continue;  // clamped too close; redraw
        }

        const bool horizontal = rng.bernoulli(0.5);
        const double period = 3.0 + static_cast<double>(rng.uniform_int(5));  // 3..7
        const double phase = rng.uniform(0.0, period);
        const double stripe_amp = rng.uniform(cfg.stripe_amp_lo, cfg.stripe_amp_hi);
        double stripe_w[3];
        for (double& w : stripe_w) w = rng.uniform(0.5, 1.0);
        double grad_y[3], grad_x[3];
        for (int c = 0; c < 3; ++c) {
            grad_y[c] = rng.uniform(-cfg.gradient_amp, cfg.gradient_amp);
            grad_x[c] = rng.uniform(-cfg.gradient_amp, cfg.gradient_amp);
        }

        const uint32_t count =
            cfg.min_objects +
            static_cast<uint32_t>(rng.uniform_int(cfg.max_objects - cfg.min_objects + 1));
        const double total_frac = rng.uniform(0.10, 0.32);

        std::vector<Shape> shapes;
        for (uint32_t i = 0; i < count; ++i) {
            Shape s;
            s.ellipse = rng.bernoulli(0.5);
            const double area =
                total_frac / count * rng.uniform(0.75, 1.25) * static_cast<double>(n) * n;
            const double aspect = rng.uniform(0.6, 1.7);
            s.h = static_cast<uint32_t>(
                std::clamp(std::round(std::sqrt(area / aspect)), 6.0, n - 2.0));
            s.w = static_cast<uint32_t>(
                std::clamp(std::round(std::sqrt(area * aspect)), 6.0, n - 2.0));
            s.top = static_cast<uint32_t>(rng.uniform_int(n - s.h + 1));
            s.left = static_cast<uint32_t>(rng.uniform_int(n - s.w + 1));
            // Per-object intensity jitter along the same color ray.
            const double shade = rng.uniform(0.97, 1.03);
            for (int c = 0; c < 3; ++c)
                s.color[c] = static_cast<float>(std::clamp(shade * palette[c], 0.0, 1.0));
            shapes.push_back(s);
        }

        SyntheticScene scene;
        scene.seed = seed;
        scene.object_count = count;
        scene.image = ImageTensor(n, n, 3);
        scene.gt_mask.assign(static_cast<size_t>(n) * n, 0);

        for (uint32_t y = 0; y < n; ++y) {
            for (uint32_t x = 0; x < n; ++x) {
                const Shape* hit = nullptr;
                for (const Shape& s : shapes)
                    if (inside_shape(s, y, x)) hit = &s;
                if (hit) scene.gt_mask[static_cast<size_t>(y) * n + x] = 1;

                const double coord = horizontal ? y : x;
                const double stripe =
                    stripe_amp * std::sin(6.283185307179586477 * (coord + phase) / period);
                const double gy = (static_cast<double>(y) / n - 0.5);
                const double gx = (static_cast<double>(x) / n - 0.5);
                for (uint32_t c = 0; c < 3; ++c) {
                    double v = hit ? hit->color[c] : bg[c] + gy * grad_y[c] + gx * grad_x[c];
                    v += stripe * stripe_w[c];
                    v += rng.uniform(-cfg.pixel_noise, cfg.pixel_noise);
                    scene.image.at(y, x, c) = static_cast<float>(std::clamp(v, 0.0, 1.0));
                }
            }
        }

        const double frac = scene.object_fraction();
        if (frac >= cfg.min_fraction + 0.005 && frac <= cfg.max_fraction - 0.005) return scene;
    }
}

}  // namespace salco
