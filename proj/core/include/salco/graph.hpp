#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "salco/tensor.hpp"

namespace salco {

// Per-cell foreground probability field in [0,1], row-major.
struct SaliencyMap {
    uint32_t height = 0;
    uint32_t width = 0;
    std::vector<float> values;

    SaliencyMap() = default;
    SaliencyMap(uint32_t h, uint32_t w)
        : height(h), width(w), values(static_cast<size_t>(h) * w, 0.0f) {}

    float& at(uint32_t r, uint32_t c) { return values[static_cast<size_t>(r) * width + c]; }
    float at(uint32_t r, uint32_t c) const { return values[static_cast<size_t>(r) * width + c]; }
    size_t size() const { return values.size(); }

    Tensor to_tensor() const;
    static SaliencyMap from_tensor(const Tensor& t);  // requires channels == 1
};

// Dense symmetric self-similarity graph over the H*W cells of a feature map.
// Edges are cosine similarities clamped from below so every weight and every
// degree stays strictly positive.
struct AffinityGraph {
    uint32_t node_count = 0;
    std::vector<double> edges;    // n*n, row-major, symmetric
    std::vector<double> degrees;  // d_i = sum_j edges[i][j]

    double edge(uint32_t i, uint32_t j) const {
        return edges[static_cast<size_t>(i) * node_count + j];
    }

    // Builds a graph from an explicit symmetric weight matrix (tests and
    // oracles plant cluster structure this way). Validates symmetry and
    // positivity, then fills in degrees.
    static AffinityGraph from_matrix(uint32_t n, std::vector<double> weights);
};

AffinityGraph build_graph(const FeatureMap& fm, double eps_clamp = 1e-5);

struct SecondEigvec {
    std::vector<double> y;  // generalized eigenvector, unit D-norm
    double lambda = 0.0;
    double residual = 0.0;  // ||(D-E)y - lambda*D*y|| / ||D*y||
};

// Second-smallest solution of (D-E) y = lambda D y, computed through the
// substitution z = D^{1/2} y and a dense symmetric eigendecomposition of
// D^{-1/2} (D-E) D^{-1/2}. Throws NumericError when the residual exceeds 1e-6.
SecondEigvec second_eigvec(const AffinityGraph& g, double tol = 1e-8);

// cut(fg,bg)/cut(fg,V) + cut(fg,bg)/cut(bg,V). Sides must be nonempty,
// disjoint, and cover all nodes.
double ncut_energy(const AffinityGraph& g, std::span<const uint32_t> fg,
                   std::span<const uint32_t> bg);

// Sign-orients y so its max-|.| entry is positive, then min-max normalizes
// into [0,1]. A constant vector maps to all 0.5.
SaliencyMap saliency_from_eigvec(std::span<const double> y, uint32_t height, uint32_t width);

}  // namespace salco
