#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <vector>

namespace salco {

// Fixed-capacity FIFO of recent target-branch embeddings, the cross-image
// positive pool for the inter-image loss.
class MemoryQueue {
public:
    MemoryQueue(size_t capacity, size_t dim);

    size_t capacity() const { return capacity_; }
    size_t dim() const { return dim_; }
    size_t size() const { return entries_.size(); }
    std::span<const float> entry(size_t i) const { return entries_[i]; }

    void push(std::span<const float> embedding);

private:
    size_t capacity_;
    size_t dim_;
    std::deque<std::vector<float>> entries_;
};

// Appends the batch in order, evicting oldest entries beyond capacity.
void queue_push(MemoryQueue& q, const std::vector<std::vector<float>>& batch);

// Negated cosine similarity, so minimizing aligns the pair. Zero-norm
// inputs yield 0.
double pair_loss(std::span<const double> p_online, std::span<const double> z_target);

struct PairTerm {
    std::vector<double> p;  // online predictor output
    std::vector<double> z;  // target projector output
    double score = 1.0;
};

// sum_i score_i^gamma * pair_loss(p_i, z_i); 0^0 == 1.
double intra_loss(const std::vector<PairTerm>& pairs, double gamma);

// Top-l queue entries by cosine similarity to the probe, descending,
// ties resolved oldest-first. Returns fewer when the queue is smaller.
std::vector<std::vector<double>> nn_search(const MemoryQueue& q, std::span<const double> probe,
                                           size_t l);

struct InterProbe {
    std::vector<double> p;
    double score = 1.0;
};

// (1/t)(1/l) sum_i sum_j score_i^gamma * (-cos(p_i, N_j)); empty queue -> 0.
double inter_loss(const std::vector<InterProbe>& probes, const MemoryQueue& q, size_t l,
                  double gamma);

double total_loss(double intra, double inter);

// d/dp of pair_loss(p, z) with z held constant (stop-gradient target).
std::vector<double> loss_grad(std::span<const double> p, std::span<const double> z);

struct LossReport {
    uint64_t step = 0;
    double intra = 0.0;
    double inter = 0.0;
    double total = 0.0;
};

// "step l_intra l_inter l_all"
std::string format_loss_line(const LossReport& r);

}  // namespace salco
