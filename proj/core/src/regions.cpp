#include "salco/regions.hpp"

#include <algorithm>
#include <cstdio>

#include "salco/error.hpp"

namespace salco {

BiPartitionMask threshold_mask(const SaliencyMap& s) {
    if (s.size() == 0) throw ArgumentError("threshold_mask: empty saliency map");
    double sum = 0.0;
    for (float v : s.values) sum += v;
    const double mean = sum / static_cast<double>(s.size());

    BiPartitionMask m(s.height, s.width);
    for (size_t i = 0; i < s.values.size(); ++i) m.bits[i] = s.values[i] > mean ? 1 : 0;
    return m;
}

std::vector<Region> connected_regions(const BiPartitionMask& m, uint32_t min_area) {
    if (min_area < 1) throw ArgumentError("connected_regions: min_area must be >= 1");

    const uint32_t h = m.height, w = m.width;
    std::vector<uint8_t> seen(static_cast<size_t>(h) * w, 0);
    std::vector<Region> out;
    std::vector<std::pair<uint32_t, uint32_t>> stack;

    for (uint32_t r = 0; r < h; ++r) {
        for (uint32_t c = 0; c < w; ++c) {
            const size_t idx = static_cast<size_t>(r) * w + c;
            if (!m.bits[idx] || seen[idx]) continue;

            Region reg;
            reg.bbox = {r, c, r, c};
            stack.clear();
            stack.emplace_back(r, c);
            seen[idx] = 1;
            while (!stack.empty()) {
                const auto [cr, cc] = stack.back();
                stack.pop_back();
                reg.cells.emplace_back(cr, cc);
                reg.bbox.row_min = std::min(reg.bbox.row_min, cr);
                reg.bbox.col_min = std::min(reg.bbox.col_min, cc);
                reg.bbox.row_max = std::max(reg.bbox.row_max, cr);
                reg.bbox.col_max = std::max(reg.bbox.col_max, cc);

                const auto visit = [&](uint32_t nr, uint32_t nc) {
                    const size_t nidx = static_cast<size_t>(nr) * w + nc;
                    if (m.bits[nidx] && !seen[nidx]) {
                        seen[nidx] = 1;
                        stack.emplace_back(nr, nc);
                    }
                };
                if (cr > 0) visit(cr - 1, cc);
                if (cr + 1 < h) visit(cr + 1, cc);
                if (cc > 0) visit(cr, cc - 1);
                if (cc + 1 < w) visit(cr, cc + 1);
            }
            if (reg.cells.size() >= min_area) out.push_back(std::move(reg));
        }
    }

    // Row-major discovery already fixes ties; sort keys are the bbox corner.
    std::stable_sort(out.begin(), out.end(), [](const Region& a, const Region& b) {
        if (a.bbox.row_min != b.bbox.row_min) return a.bbox.row_min < b.bbox.row_min;
        return a.bbox.col_min < b.bbox.col_min;
    });
    for (uint32_t i = 0; i < out.size(); ++i) out[i].id = i;
    return out;
}

std::vector<Region> score_regions(std::vector<Region> regions, const SaliencyMap& s) {
    double global_max = 0.0;
    for (float v : s.values) global_max = std::max(global_max, static_cast<double>(v));
    if (global_max <= 0.0) throw NumericError("score_regions: max saliency is 0");

    for (Region& r : regions) {
        double local_max = 0.0;
        for (const auto& [cr, cc] : r.cells) {
            if (cr >= s.height || cc >= s.width)
                throw ArgumentError("score_regions: region cell outside the saliency map");
            local_max = std::max(local_max, static_cast<double>(s.at(cr, cc)));
        }
        r.score = static_cast<float>(local_max / global_max);
    }
    std::stable_sort(regions.begin(), regions.end(), [](const Region& a, const Region& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    return regions;
}

size_t sample_weighted_index(std::span<const double> weights, Rng& rng) {
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw ArgumentError("sample_weighted_index: negative weight");
        total += w;
    }
    if (!(total > 0.0)) throw ArgumentError("sample_weighted_index: zero total weight");

    const double u = rng.uniform01() * total;
    double acc = 0.0;
    for (size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) return i;
    }
    return weights.size() - 1;  // u == total under rounding
}

std::vector<Region> sample_regions(const std::vector<Region>& regions, uint32_t t, Rng& rng) {
    if (regions.empty()) throw ArgumentError("sample_regions: empty region list");
    if (t < 1) throw ArgumentError("sample_regions: t must be >= 1");

    std::vector<double> weights(regions.size());
    for (size_t i = 0; i < regions.size(); ++i) weights[i] = regions[i].score;

    std::vector<Region> out;
    out.reserve(t);
    for (uint32_t k = 0; k < t; ++k) out.push_back(regions[sample_weighted_index(weights, rng)]);
    return out;
}

std::string format_region_line(const Region& r) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%u %u %u %u %u %.9g", r.id, r.bbox.row_min, r.bbox.col_min,
                  r.bbox.row_max, r.bbox.col_max, static_cast<double>(r.score));
    return buf;
}

}  // namespace salco
