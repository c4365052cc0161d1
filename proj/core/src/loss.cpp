#include "salco/loss.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "salco/error.hpp"
#include "salco/tensor.hpp"

namespace salco {

MemoryQueue::MemoryQueue(size_t capacity, size_t dim) : capacity_(capacity), dim_(dim) {
    if (capacity == 0 || dim == 0) throw ArgumentError("MemoryQueue: zero capacity or dim");
}

void MemoryQueue::push(std::span<const float> embedding) {
    if (embedding.size() != dim_) throw ArgumentError("MemoryQueue: dimension mismatch");
    for (float v : embedding)
        if (!std::isfinite(v)) throw ArgumentError("MemoryQueue: non-finite embedding");
    entries_.emplace_back(embedding.begin(), embedding.end());
    while (entries_.size() > capacity_) entries_.pop_front();
}

void queue_push(MemoryQueue& q, const std::vector<std::vector<float>>& batch) {
    for (const auto& e : batch) q.push(e);
}

double pair_loss(std::span<const double> p_online, std::span<const double> z_target) {
    return -cosine_similarity(p_online, z_target);
}

namespace {

double score_weight(double score, double gamma) {
    if (score < 0.0) throw ArgumentError("saliency score must be nonnegative");
    if (gamma < 0.0) throw ArgumentError("gamma must be nonnegative");
    return std::pow(score, gamma);  // pow(0,0) == 1
}

}  // namespace

double intra_loss(const std::vector<PairTerm>& pairs, double gamma) {
    double acc = 0.0;
    for (const PairTerm& t : pairs) acc += score_weight(t.score, gamma) * pair_loss(t.p, t.z);
    return acc;
}

std::vector<std::vector<double>> nn_search(const MemoryQueue& q, std::span<const double> probe,
                                           size_t l) {
    if (l < 1) throw ArgumentError("nn_search: l must be >= 1");

    std::vector<std::pair<double, size_t>> sims;  // (similarity, insertion index)
    sims.reserve(q.size());
    std::vector<double> entry(q.dim());
    for (size_t i = 0; i < q.size(); ++i) {
        const auto e = q.entry(i);
        for (size_t k = 0; k < e.size(); ++k) entry[k] = e[k];
        sims.emplace_back(cosine_similarity(std::span<const double>(entry), probe), i);
    }
    std::stable_sort(sims.begin(), sims.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;  // ties: older entry first
    });

    const size_t count = std::min(l, sims.size());
    std::vector<std::vector<double>> out;
    out.reserve(count);
    for (size_t k = 0; k < count; ++k) {
        const auto e = q.entry(sims[k].second);
        out.emplace_back(e.begin(), e.end());
    }
    return out;
}

double inter_loss(const std::vector<InterProbe>& probes, const MemoryQueue& q, size_t l,
                  double gamma) {
    if (l < 1) throw ArgumentError("inter_loss: l must be >= 1");
    if (probes.empty() || q.size() == 0) return 0.0;

    double acc = 0.0;
    for (const InterProbe& probe : probes) {
        const double w = score_weight(probe.score, gamma);
        for (const auto& nb : nn_search(q, probe.p, l)) acc += w * pair_loss(probe.p, nb);
    }
    return acc / (static_cast<double>(probes.size()) * static_cast<double>(l));
}

double total_loss(double intra, double inter) { return intra + inter; }

std::vector<double> loss_grad(std::span<const double> p, std::span<const double> z) {
    if (p.size() != z.size()) throw ArgumentError("loss_grad: length mismatch");
    double np2 = 0.0, nz2 = 0.0, dot = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        np2 += p[i] * p[i];
        nz2 += z[i] * z[i];
        dot += p[i] * z[i];
    }
    std::vector<double> grad(p.size(), 0.0);
    if (np2 == 0.0 || nz2 == 0.0) return grad;

    const double np = std::sqrt(np2), nz = std::sqrt(nz2);
    const double cos = dot / (np * nz);
    for (size_t i = 0; i < p.size(); ++i) grad[i] = -(z[i] / (np * nz) - cos * p[i] / np2);
    return grad;
}

std::string format_loss_line(const LossReport& r) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%llu %.9g %.9g %.9g", static_cast<unsigned long long>(r.step),
                  r.intra, r.inter, r.total);
    return buf;
}

}  // namespace salco
