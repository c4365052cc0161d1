#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "salco/rng.hpp"
#include "salco/tensor.hpp"

namespace salco {

// Desk-scale stack: linear patch embedding -> 2-layer MLP projector ->
// 2-layer MLP predictor, ReLU between the dense layers, no normalization
// layers. Small enough that every gradient is finite-difference checkable.
struct ModelConfig {
    uint32_t patch_px = 8;
    uint32_t in_channels = 3;
    uint32_t feat_dim = 32;
    uint32_t proj_hidden = 64;
    uint32_t proj_dim = 16;
    uint32_t pred_hidden = 32;

    uint32_t patch_dim() const { return patch_px * patch_px * in_channels; }
    bool operator==(const ModelConfig&) const = default;
};

struct ModelParams {
    ModelConfig cfg;
    std::vector<float> enc_w, enc_b;
    std::vector<float> proj_w1, proj_b1;
    std::vector<float> proj_w2, proj_b2;
    std::vector<float> pred_w1, pred_b1;
    std::vector<float> pred_w2, pred_b2;

    bool operator==(const ModelParams&) const = default;
};

inline constexpr size_t kParamTensorCount = 10;

struct TensorShape {
    const char* name;
    uint32_t rows, cols;  // cols == fan_in for weights; biases use (rows, 1)
    uint32_t fan_in;
};

std::array<TensorShape, kParamTensorCount> param_shapes(const ModelConfig& cfg);
std::array<std::vector<float>*, kParamTensorCount> param_tensors(ModelParams& p);
std::array<const std::vector<float>*, kParamTensorCount> param_tensors(const ModelParams& p);

// Uniform +-1/sqrt(fan_in) for weights and biases, drawn in declaration order.
ModelParams init_params(const ModelConfig& cfg, Rng& rng);

// Parameter-shaped gradient accumulator (double precision).
struct Gradients {
    explicit Gradients(const ModelConfig& cfg);
    void reset();
    void scale(double s);
    std::array<std::vector<double>, kParamTensorCount> g;
};

// Non-overlapping patch embedding of a view whose dimensions are divisible
// by patch_px; one feature vector per patch cell.
FeatureMap encode(const ModelParams& params, const ImageTensor& view);

// Activations of one view kept for the backward pass. Since the patch
// embedding is linear, pooling commutes with it and only the mean patch
// needs caching.
struct ForwardCache {
    std::vector<double> mean_patch;
    std::vector<double> pooled;
    std::vector<double> pre1, h1;
    std::vector<double> z;  // projector output
    std::vector<double> pre2, h2;
    std::vector<double> p;  // predictor output
};

// Pool(encode(view)) -> projector -> z; predictor(z) -> p.
ForwardCache embed(const ModelParams& params, const ImageTensor& view);

// Accumulates d(loss)/d(params) for one view given d(loss)/dp.
void backward(const ModelParams& params, const ForwardCache& cache,
              std::span<const double> dloss_dp, Gradients& grads);

struct OptimState {
    double base_lr = 0.05;
    uint64_t total_steps = 1;
    uint64_t warmup_steps = 0;
    double weight_decay = 1e-4;
    double momentum = 0.9;
    uint64_t step = 0;
    std::array<std::vector<float>, kParamTensorCount> buffers;

    static OptimState make(const ModelConfig& cfg, double base_lr, uint64_t total_steps,
                           uint64_t warmup_steps, double weight_decay = 1e-4,
                           double momentum = 0.9);
    // Linear warm-up to base_lr, then cosine decay to 0 at total_steps.
    double lr_at(uint64_t step) const;
};

// m <- momentum*m + (grad + wd*param); param <- param - lr(step)*m; step++.
void sgd_step(ModelParams& params, const Gradients& grads, OptimState& opt);

struct EmaState {
    double tau0 = 0.99;
    uint64_t total_steps = 1;
    uint64_t step = 0;

    // Cosine ramp from tau0 at step 0 to 1 at total_steps.
    double tau_at(uint64_t step) const;
};

// target <- tau*target + (1-tau)*online, elementwise; advances ema.step.
void ema_update(const ModelParams& online, ModelParams& target, EmaState& ema);

// Checkpoint = every tensor concatenated in declaration order inside one
// SGFM container, plus a text manifest of names and shapes.
void save_checkpoint(const ModelParams& params, const std::filesystem::path& sgfm_path,
                     const std::filesystem::path& manifest_path);
ModelParams load_checkpoint(const std::filesystem::path& sgfm_path,
                            const std::filesystem::path& manifest_path);

}  // namespace salco
