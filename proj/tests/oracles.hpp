// Test-only reference implementations, kept independent of the library code
// paths they check: straight-line loops, std::mt19937 randomness, no calls
// into the functions under test.
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "salco/model.hpp"
#include "salco/tensor.hpp"

namespace oracle {

// Eq.-style normalized-cut energy from an explicit weight matrix.
inline double ncut_energy(uint32_t n, const std::vector<double>& w,
                          const std::vector<uint8_t>& fg_mask) {
    double cut = 0.0, assoc_f = 0.0, assoc_b = 0.0;
    for (uint32_t i = 0; i < n; ++i) {
        for (uint32_t j = 0; j < n; ++j) {
            const double e = w[static_cast<size_t>(i) * n + j];
            if (fg_mask[i])
                assoc_f += e;
            else
                assoc_b += e;
            if (fg_mask[i] && !fg_mask[j]) cut += e;
        }
    }
    return cut / assoc_f + cut / assoc_b;
}

// Exhaustive minimum over all 2^n - 2 bipartitions (n <= ~20).
inline double exhaustive_min_ncut(uint32_t n, const std::vector<double>& w) {
    double best = std::numeric_limits<double>::infinity();
    std::vector<uint8_t> mask(n);
    for (uint32_t bits = 1; bits + 1 < (1u << n); ++bits) {
        for (uint32_t i = 0; i < n; ++i) mask[i] = (bits >> i) & 1;
        best = std::min(best, ncut_energy(n, w, mask));
    }
    return best;
}

// Planted two-cluster weight matrix with intra/inter similarity ratio >= 5.
inline std::vector<double> planted_two_cluster(uint32_t n, uint32_t n_fg, std::mt19937& gen) {
    std::uniform_real_distribution<double> intra(0.9, 0.99);
    std::uniform_real_distribution<double> inter(0.02, 0.1);
    std::vector<double> w(static_cast<size_t>(n) * n, 0.0);
    for (uint32_t i = 0; i < n; ++i) {
        w[static_cast<size_t>(i) * n + i] = 1.0;
        for (uint32_t j = i + 1; j < n; ++j) {
            const bool same = (i < n_fg) == (j < n_fg);
            const double v = same ? intra(gen) : inter(gen);
            w[static_cast<size_t>(i) * n + j] = v;
            w[static_cast<size_t>(j) * n + i] = v;
        }
    }
    return w;
}

// Straight-line re-implementation of the full forward pass in double.
struct ForwardResult {
    std::vector<double> pooled, z, p;
};

inline ForwardResult forward(const salco::ModelParams& mp, const salco::ImageTensor& view) {
    const auto& c = mp.cfg;
    const uint32_t gh = view.dim0 / c.patch_px, gw = view.dim1 / c.patch_px;

    ForwardResult r;
    r.pooled.assign(c.feat_dim, 0.0);
    for (uint32_t gy = 0; gy < gh; ++gy) {
        for (uint32_t gx = 0; gx < gw; ++gx) {
            for (uint32_t f = 0; f < c.feat_dim; ++f) {
                double acc = mp.enc_b[f];
                size_t j = 0;
                for (uint32_t py = 0; py < c.patch_px; ++py)
                    for (uint32_t px = 0; px < c.patch_px; ++px)
                        for (uint32_t ch = 0; ch < c.in_channels; ++ch)
                            acc += static_cast<double>(
                                       mp.enc_w[static_cast<size_t>(f) * c.patch_dim() + j++]) *
                                   view.at(gy * c.patch_px + py, gx * c.patch_px + px, ch);
                r.pooled[f] += acc;
            }
        }
    }
    for (double& v : r.pooled) v /= static_cast<double>(gh) * gw;

    std::vector<double> h1(c.proj_hidden);
    for (uint32_t i = 0; i < c.proj_hidden; ++i) {
        double acc = mp.proj_b1[i];
        for (uint32_t j = 0; j < c.feat_dim; ++j)
            acc += static_cast<double>(mp.proj_w1[static_cast<size_t>(i) * c.feat_dim + j]) *
                   r.pooled[j];
        h1[i] = acc > 0.0 ? acc : 0.0;
    }
    r.z.assign(c.proj_dim, 0.0);
    for (uint32_t i = 0; i < c.proj_dim; ++i) {
        double acc = mp.proj_b2[i];
        for (uint32_t j = 0; j < c.proj_hidden; ++j)
            acc += static_cast<double>(mp.proj_w2[static_cast<size_t>(i) * c.proj_hidden + j]) *
                   h1[j];
        r.z[i] = acc;
    }
    std::vector<double> h2(c.pred_hidden);
    for (uint32_t i = 0; i < c.pred_hidden; ++i) {
        double acc = mp.pred_b1[i];
        for (uint32_t j = 0; j < c.proj_dim; ++j)
            acc += static_cast<double>(mp.pred_w1[static_cast<size_t>(i) * c.proj_dim + j]) *
                   r.z[j];
        h2[i] = acc > 0.0 ? acc : 0.0;
    }
    r.p.assign(c.proj_dim, 0.0);
    for (uint32_t i = 0; i < c.proj_dim; ++i) {
        double acc = mp.pred_b2[i];
        for (uint32_t j = 0; j < c.pred_hidden; ++j)
            acc += static_cast<double>(mp.pred_w2[static_cast<size_t>(i) * c.pred_hidden + j]) *
                   h2[j];
        r.p[i] = acc;
    }
    return r;
}

// Kink-aware central-difference gradient check (h in float storage, sums in
// double). Central differences are only a valid derivative estimate when the
// +-h evaluations share one ReLU activation pattern; coordinates that cross
// a kink are skipped and counted.
struct GradCheckReport {
    double max_tensor_rel = 0.0;  // worst per-tensor relative L2 error
    size_t skipped = 0;           // coordinates that crossed a ReLU kink
    size_t total = 0;
};

template <typename LossFn, typename PatternFn>
GradCheckReport fd_param_check(salco::ModelParams& params, const salco::Gradients& analytic,
                               double h, LossFn&& loss_of, PatternFn&& pattern_of) {
    GradCheckReport rep;
    const auto tensors = salco::param_tensors(params);
    for (size_t t = 0; t < salco::kParamTensorCount; ++t) {
        double diff2 = 0.0, ref2 = 0.0;
        for (size_t j = 0; j < tensors[t]->size(); ++j) {
            float& slot = (*tensors[t])[j];
            const float saved = slot;
            slot = static_cast<float>(saved + h);
            const double up = loss_of();
            const uint64_t pat_up = pattern_of();
            slot = static_cast<float>(saved - h);
            const double down = loss_of();
            const uint64_t pat_down = pattern_of();
            slot = saved;
            ++rep.total;
            if (pat_up != pat_down) {
                ++rep.skipped;
                continue;
            }
            const double fd = (up - down) / (2.0 * h);
            diff2 += (fd - analytic.g[t][j]) * (fd - analytic.g[t][j]);
            ref2 += fd * fd;
        }
        rep.max_tensor_rel =
            std::max(rep.max_tensor_rel, std::sqrt(diff2) / std::max(std::sqrt(ref2), 1e-12));
    }
    return rep;
}

inline uint64_t relu_pattern(const salco::ForwardCache& fc) {
    uint64_t h = 1469598103934665603ull;
    const auto mix_bit = [&](bool b) {
        h ^= b ? 0x9Eull : 0x3Cull;
        h *= 1099511628211ull;
    };
    for (double v : fc.pre1) mix_bit(v > 0.0);
    for (double v : fc.pre2) mix_bit(v > 0.0);
    return h;
}

struct Pgm {
    uint32_t width = 0, height = 0, maxval = 0;
    std::vector<unsigned char> bytes;
};

inline Pgm parse_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    Pgm pgm;
    std::string magic;
    in >> magic;
    if (magic != "P5") throw std::runtime_error("not a P5 file");
    in >> pgm.width >> pgm.height >> pgm.maxval;
    in.get();  // single whitespace after maxval
    pgm.bytes.resize(static_cast<size_t>(pgm.width) * pgm.height);
    in.read(reinterpret_cast<char*>(pgm.bytes.data()),
            static_cast<std::streamsize>(pgm.bytes.size()));
    if (!in || in.peek() != std::ifstream::traits_type::eof())
        throw std::runtime_error("bad PGM payload");
    return pgm;
}

inline salco::ImageTensor random_image(uint32_t h, uint32_t w, uint32_t c, std::mt19937& gen) {
    std::uniform_real_distribution<float> dist(0.0f, 1.0f);
    salco::ImageTensor t(h, w, c);
    for (float& v : t.data) v = dist(gen);
    return t;
}

}  // namespace oracle
