#include "salco/graph.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "salco/error.hpp"

namespace salco {

Tensor SaliencyMap::to_tensor() const {
    Tensor t(height, width, 1);
    t.data.assign(values.begin(), values.end());
    return t;
}

SaliencyMap SaliencyMap::from_tensor(const Tensor& t) {
    if (t.channels != 1) throw ArgumentError("saliency tensor must have 1 channel");
    SaliencyMap s(t.dim0, t.dim1);
    s.values.assign(t.data.begin(), t.data.end());
    return s;
}

AffinityGraph AffinityGraph::from_matrix(uint32_t n, std::vector<double> weights) {
    if (n < 2) throw ArgumentError("graph needs at least 2 nodes");
    if (weights.size() != static_cast<size_t>(n) * n)
        throw ArgumentError("weight matrix size mismatch");
    AffinityGraph g;
    g.node_count = n;
    g.edges = std::move(weights);
    g.degrees.assign(n, 0.0);
    for (uint32_t i = 0; i < n; ++i) {
        for (uint32_t j = 0; j < n; ++j) {
            const double w = g.edges[static_cast<size_t>(i) * n + j];
            if (!(w > 0.0)) throw ArgumentError("edge weights must be positive");
            if (w != g.edges[static_cast<size_t>(j) * n + i])
                throw ArgumentError("weight matrix must be symmetric");
            g.degrees[i] += w;
        }
    }
    return g;
}

AffinityGraph build_graph(const FeatureMap& fm, double eps_clamp) {
    const uint64_t n64 = static_cast<uint64_t>(fm.dim0) * fm.dim1;
    if (n64 < 2) throw ArgumentError("build_graph: need at least 2 cells");
    if (!(eps_clamp > 0.0)) throw ArgumentError("build_graph: eps_clamp must be > 0");
    const uint32_t n = static_cast<uint32_t>(n64);

    AffinityGraph g;
    g.node_count = n;
    g.edges.assign(static_cast<size_t>(n) * n, 0.0);
    g.degrees.assign(n, 0.0);

    for (uint32_t i = 0; i < n; ++i) {
        const auto fi = fm.cell(i / fm.dim1, i % fm.dim1);
        for (uint32_t j = i; j < n; ++j) {
            const auto fj = fm.cell(j / fm.dim1, j % fm.dim1);
            const double w = std::max(cosine_similarity(fi, fj), eps_clamp);
            g.edges[static_cast<size_t>(i) * n + j] = w;
            g.edges[static_cast<size_t>(j) * n + i] = w;
        }
    }
    for (uint32_t i = 0; i < n; ++i) {
        double d = 0.0;
        for (uint32_t j = 0; j < n; ++j) d += g.edges[static_cast<size_t>(i) * n + j];
        g.degrees[i] = d;
    }
    return g;
}

SecondEigvec second_eigvec(const AffinityGraph& g, double tol) {
    if (g.node_count < 2) throw ArgumentError("second_eigvec: need at least 2 nodes");
    if (!(tol > 0.0)) throw ArgumentError("second_eigvec: tol must be > 0");
    const uint32_t n = g.node_count;

    // M = D^{-1/2} (D - E) D^{-1/2}, symmetrized against rounding.
    Eigen::MatrixXd m(n, n);
    std::vector<double> dinv_sqrt(n);
    for (uint32_t i = 0; i < n; ++i) dinv_sqrt[i] = 1.0 / std::sqrt(g.degrees[i]);
    for (uint32_t i = 0; i < n; ++i) {
        for (uint32_t j = 0; j < n; ++j) {
            const double lap = (i == j ? g.degrees[i] : 0.0) - g.edge(i, j);
            m(i, j) = dinv_sqrt[i] * lap * dinv_sqrt[j];
        }
    }
    m = 0.5 * (m + m.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    if (solver.info() != Eigen::Success)
        throw NumericError("second_eigvec: eigensolver did not converge");

    // Eigenvalues come out ascending; column 1 is the second smallest.
    SecondEigvec out;
    out.lambda = solver.eigenvalues()(1);
    out.y.resize(n);
    const auto z = solver.eigenvectors().col(1);
    for (uint32_t i = 0; i < n; ++i) out.y[i] = dinv_sqrt[i] * z(i);

    // Generalized residual ||(D-E)y - lambda D y|| / ||D y||.
    double rnum = 0.0, rden = 0.0;
    for (uint32_t i = 0; i < n; ++i) {
        double lap_y = g.degrees[i] * out.y[i];
        for (uint32_t j = 0; j < n; ++j) lap_y -= g.edge(i, j) * out.y[j];
        const double dy = g.degrees[i] * out.y[i];
        const double r = lap_y - out.lambda * dy;
        rnum += r * r;
        rden += dy * dy;
    }
    out.residual = std::sqrt(rnum) / std::sqrt(rden);
    if (!(out.residual <= 1e-6))
        throw NumericError("second_eigvec: residual " + std::to_string(out.residual) +
                           " exceeds 1e-6");
    return out;
}

double ncut_energy(const AffinityGraph& g, std::span<const uint32_t> fg,
                   std::span<const uint32_t> bg) {
    const uint32_t n = g.node_count;
    if (fg.empty() || bg.empty()) throw ArgumentError("ncut_energy: empty side");
    if (fg.size() + bg.size() != n) throw ArgumentError("ncut_energy: sides must cover all nodes");

    std::vector<uint8_t> side(n, 0xff);
    for (uint32_t u : fg) {
        if (u >= n || side[u] != 0xff) throw ArgumentError("ncut_energy: invalid foreground set");
        side[u] = 1;
    }
    for (uint32_t u : bg) {
        if (u >= n || side[u] != 0xff) throw ArgumentError("ncut_energy: sides must be disjoint");
        side[u] = 0;
    }

    double cut_fb = 0.0, assoc_f = 0.0, assoc_b = 0.0;
    for (uint32_t i = 0; i < n; ++i) {
        if (side[i])
            assoc_f += g.degrees[i];
        else
            assoc_b += g.degrees[i];
        for (uint32_t j = 0; j < n; ++j)
            if (side[i] && !side[j]) cut_fb += g.edge(i, j);
    }
    return cut_fb / assoc_f + cut_fb / assoc_b;
}

SaliencyMap saliency_from_eigvec(std::span<const double> y, uint32_t height, uint32_t width) {
    if (y.size() != static_cast<size_t>(height) * width)
        throw ArgumentError("saliency_from_eigvec: length mismatch");

    size_t imax = 0;
    for (size_t i = 1; i < y.size(); ++i)
        if (std::abs(y[i]) > std::abs(y[imax])) imax = i;
    const double sign = y[imax] < 0.0 ? -1.0 : 1.0;

    double lo = sign * y[0], hi = sign * y[0];
    for (size_t i = 1; i < y.size(); ++i) {
        lo = std::min(lo, sign * y[i]);
        hi = std::max(hi, sign * y[i]);
    }

    SaliencyMap s(height, width);
    if (hi == lo) {
        std::fill(s.values.begin(), s.values.end(), 0.5f);
        return s;
    }
    for (size_t i = 0; i < y.size(); ++i)
        s.values[i] = static_cast<float>((sign * y[i] - lo) / (hi - lo));
    return s;
}

}  // namespace salco
