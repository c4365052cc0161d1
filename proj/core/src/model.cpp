#include "salco/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "salco/error.hpp"

namespace salco {

std::array<TensorShape, kParamTensorCount> param_shapes(const ModelConfig& c) {
    return {{
        {"enc_w", c.feat_dim, c.patch_dim(), c.patch_dim()},
        {"enc_b", c.feat_dim, 1, c.patch_dim()},
        {"proj_w1", c.proj_hidden, c.feat_dim, c.feat_dim},
        {"proj_b1", c.proj_hidden, 1, c.feat_dim},
        {"proj_w2", c.proj_dim, c.proj_hidden, c.proj_hidden},
        {"proj_b2", c.proj_dim, 1, c.proj_hidden},
        {"pred_w1", c.pred_hidden, c.proj_dim, c.proj_dim},
        {"pred_b1", c.pred_hidden, 1, c.proj_dim},
        {"pred_w2", c.proj_dim, c.pred_hidden, c.pred_hidden},
        {"pred_b2", c.proj_dim, 1, c.pred_hidden},
    }};
}

std::array<std::vector<float>*, kParamTensorCount> param_tensors(ModelParams& p) {
    return {&p.enc_w,   &p.enc_b,   &p.proj_w1, &p.proj_b1, &p.proj_w2,
            &p.proj_b2, &p.pred_w1, &p.pred_b1, &p.pred_w2, &p.pred_b2};
}

std::array<const std::vector<float>*, kParamTensorCount> param_tensors(const ModelParams& p) {
    return {&p.enc_w,   &p.enc_b,   &p.proj_w1, &p.proj_b1, &p.proj_w2,
            &p.proj_b2, &p.pred_w1, &p.pred_b1, &p.pred_w2, &p.pred_b2};
}

ModelParams init_params(const ModelConfig& cfg, Rng& rng) {
    ModelParams p;
    p.cfg = cfg;
    const auto shapes = param_shapes(cfg);
    const auto tensors = param_tensors(p);
    for (size_t i = 0; i < kParamTensorCount; ++i) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(shapes[i].fan_in));
        tensors[i]->resize(static_cast<size_t>(shapes[i].rows) * shapes[i].cols);
        for (float& v : *tensors[i]) v = static_cast<float>(rng.uniform(-bound, bound));
    }
    return p;
}

Gradients::Gradients(const ModelConfig& cfg) {
    const auto shapes = param_shapes(cfg);
    for (size_t i = 0; i < kParamTensorCount; ++i)
        g[i].assign(static_cast<size_t>(shapes[i].rows) * shapes[i].cols, 0.0);
}

void Gradients::reset() {
    for (auto& t : g) std::fill(t.begin(), t.end(), 0.0);
}

void Gradients::scale(double s) {
    for (auto& t : g)
        for (double& v : t) v *= s;
}

namespace {

// out[r] = W[r,:] . x + b[r], double accumulation.
void dense(std::span<const float> w, std::span<const float> b, std::span<const double> x,
           std::vector<double>& out) {
    const size_t rows = b.size(), cols = x.size();
    out.resize(rows);
    for (size_t r = 0; r < rows; ++r) {
        double acc = b[r];
        const float* wr = w.data() + r * cols;
        for (size_t c = 0; c < cols; ++c) acc += static_cast<double>(wr[c]) * x[c];
        out[r] = acc;
    }
}

void relu(const std::vector<double>& pre, std::vector<double>& out) {
    out.resize(pre.size());
    for (size_t i = 0; i < pre.size(); ++i) out[i] = pre[i] > 0.0 ? pre[i] : 0.0;
}

// Accumulates dW += outer(dy, x), db += dy, and returns dx = W^T dy.
void dense_backward(std::span<const float> w, std::span<const double> x,
                    std::span<const double> dy, std::vector<double>& dw, std::vector<double>& db,
                    std::vector<double>& dx) {
    const size_t rows = dy.size(), cols = x.size();
    dx.assign(cols, 0.0);
    for (size_t r = 0; r < rows; ++r) {
        const double g = dy[r];
        db[r] += g;
        double* dwr = dw.data() + r * cols;
        const float* wr = w.data() + r * cols;
        for (size_t c = 0; c < cols; ++c) {
            dwr[c] += g * x[c];
            dx[c] += static_cast<double>(wr[c]) * g;
        }
    }
}

void check_view(const ModelParams& params, const ImageTensor& view) {
    const uint32_t px = params.cfg.patch_px;
    if (view.channels != params.cfg.in_channels)
        throw ArgumentError("encode: channel count mismatch");
    if (view.dim0 == 0 || view.dim1 == 0 || view.dim0 % px != 0 || view.dim1 % px != 0)
        throw ArgumentError("encode: view dimensions must be divisible by patch size");
}

}  // namespace

FeatureMap encode(const ModelParams& params, const ImageTensor& view) {
    check_view(params, view);
    const ModelConfig& c = params.cfg;
    const uint32_t px = c.patch_px;
    const uint32_t gh = view.dim0 / px, gw = view.dim1 / px;

    FeatureMap fm(gh, gw, c.feat_dim);
    std::vector<double> patch(c.patch_dim());
    for (uint32_t gy = 0; gy < gh; ++gy) {
        for (uint32_t gx = 0; gx < gw; ++gx) {
            size_t k = 0;
            for (uint32_t py = 0; py < px; ++py)
                for (uint32_t pxx = 0; pxx < px; ++pxx)
                    for (uint32_t ch = 0; ch < c.in_channels; ++ch)
                        patch[k++] = view.at(gy * px + py, gx * px + pxx, ch);
            for (uint32_t f = 0; f < c.feat_dim; ++f) {
                double acc = params.enc_b[f];
                const float* wr = params.enc_w.data() + static_cast<size_t>(f) * c.patch_dim();
                for (size_t j = 0; j < patch.size(); ++j)
                    acc += static_cast<double>(wr[j]) * patch[j];
                fm.at(gy, gx, f) = static_cast<float>(acc);
            }
        }
    }
    return fm;
}

ForwardCache embed(const ModelParams& params, const ImageTensor& view) {
    check_view(params, view);
    const ModelConfig& c = params.cfg;
    const uint32_t px = c.patch_px;
    const uint32_t gh = view.dim0 / px, gw = view.dim1 / px;
    const double num_patches = static_cast<double>(gh) * gw;

    ForwardCache fc;
    // The patch embedding is linear, so the spatial mean feature equals the
    // embedding of the mean patch.
    fc.mean_patch.assign(c.patch_dim(), 0.0);
    for (uint32_t gy = 0; gy < gh; ++gy) {
        for (uint32_t gx = 0; gx < gw; ++gx) {
            size_t k = 0;
            for (uint32_t py = 0; py < px; ++py)
                for (uint32_t pxx = 0; pxx < px; ++pxx)
                    for (uint32_t ch = 0; ch < c.in_channels; ++ch)
                        fc.mean_patch[k++] += view.at(gy * px + py, gx * px + pxx, ch);
        }
    }
    for (double& v : fc.mean_patch) v /= num_patches;

    dense(params.enc_w, params.enc_b, fc.mean_patch, fc.pooled);
    dense(params.proj_w1, params.proj_b1, fc.pooled, fc.pre1);
    relu(fc.pre1, fc.h1);
    dense(params.proj_w2, params.proj_b2, fc.h1, fc.z);
    dense(params.pred_w1, params.pred_b1, fc.z, fc.pre2);
    relu(fc.pre2, fc.h2);
    dense(params.pred_w2, params.pred_b2, fc.h2, fc.p);
    return fc;
}

void backward(const ModelParams& params, const ForwardCache& cache,
              std::span<const double> dloss_dp, Gradients& grads) {
    const ModelConfig& c = params.cfg;
    if (dloss_dp.size() != c.proj_dim) throw ArgumentError("backward: gradient size mismatch");

    std::vector<double> dh2, dpre2, dz, dh1, dpre1, dpooled, dpatch;
    dense_backward(params.pred_w2, cache.h2, dloss_dp, grads.g[8], grads.g[9], dh2);
    dpre2.resize(dh2.size());
    for (size_t i = 0; i < dh2.size(); ++i) dpre2[i] = cache.pre2[i] > 0.0 ? dh2[i] : 0.0;
    dense_backward(params.pred_w1, cache.z, dpre2, grads.g[6], grads.g[7], dz);
    dense_backward(params.proj_w2, cache.h1, dz, grads.g[4], grads.g[5], dh1);
    dpre1.resize(dh1.size());
    for (size_t i = 0; i < dh1.size(); ++i) dpre1[i] = cache.pre1[i] > 0.0 ? dh1[i] : 0.0;
    dense_backward(params.proj_w1, cache.pooled, dpre1, grads.g[2], grads.g[3], dpooled);
    dense_backward(params.enc_w, cache.mean_patch, dpooled, grads.g[0], grads.g[1], dpatch);
}

OptimState OptimState::make(const ModelConfig& cfg, double base_lr, uint64_t total_steps,
                            uint64_t warmup_steps, double weight_decay, double momentum) {
    OptimState opt;
    opt.base_lr = base_lr;
    opt.total_steps = total_steps;
    opt.warmup_steps = warmup_steps;
    opt.weight_decay = weight_decay;
    opt.momentum = momentum;
    const auto shapes = param_shapes(cfg);
    for (size_t i = 0; i < kParamTensorCount; ++i)
        opt.buffers[i].assign(static_cast<size_t>(shapes[i].rows) * shapes[i].cols, 0.0f);
    return opt;
}

double OptimState::lr_at(uint64_t s) const {
    if (warmup_steps > 0 && s < warmup_steps)
        return base_lr * static_cast<double>(s) / static_cast<double>(warmup_steps);
    if (total_steps <= warmup_steps) return 0.0;
    const double progress = std::min(
        1.0, static_cast<double>(s - warmup_steps) / static_cast<double>(total_steps - warmup_steps));
    return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

void sgd_step(ModelParams& params, const Gradients& grads, OptimState& opt) {
    const double lr = opt.lr_at(opt.step);
    const auto tensors = param_tensors(params);
    for (size_t i = 0; i < kParamTensorCount; ++i) {
        auto& theta = *tensors[i];
        if (grads.g[i].size() != theta.size()) throw ArgumentError("sgd_step: shape mismatch");
        auto& buf = opt.buffers[i];
        for (size_t j = 0; j < theta.size(); ++j) {
            const double m = opt.momentum * static_cast<double>(buf[j]) +
                             (grads.g[i][j] + opt.weight_decay * static_cast<double>(theta[j]));
            buf[j] = static_cast<float>(m);
            theta[j] = static_cast<float>(static_cast<double>(theta[j]) - lr * m);
        }
    }
    ++opt.step;
}

double EmaState::tau_at(uint64_t s) const {
    const double ratio =
        total_steps == 0
            ? 1.0
            : std::min(1.0, static_cast<double>(s) / static_cast<double>(total_steps));
    return 1.0 - (1.0 - tau0) * 0.5 * (1.0 + std::cos(std::numbers::pi * ratio));
}

void ema_update(const ModelParams& online, ModelParams& target, EmaState& ema) {
    const double tau = ema.tau_at(ema.step);
    const auto src = param_tensors(online);
    const auto dst = param_tensors(target);
    for (size_t i = 0; i < kParamTensorCount; ++i) {
        if (src[i]->size() != dst[i]->size()) throw ArgumentError("ema_update: shape mismatch");
        for (size_t j = 0; j < src[i]->size(); ++j)
            (*dst[i])[j] = static_cast<float>(tau * static_cast<double>((*dst[i])[j]) +
                                              (1.0 - tau) * static_cast<double>((*src[i])[j]));
    }
    ++ema.step;
}

void save_checkpoint(const ModelParams& params, const std::filesystem::path& sgfm_path,
                     const std::filesystem::path& manifest_path) {
    const auto shapes = param_shapes(params.cfg);
    const auto tensors = param_tensors(params);

    std::vector<float> flat;
    std::ostringstream manifest;
    for (size_t i = 0; i < kParamTensorCount; ++i) {
        flat.insert(flat.end(), tensors[i]->begin(), tensors[i]->end());
        manifest << shapes[i].name << ' ' << shapes[i].rows << ' ' << shapes[i].cols << '\n';
    }

    Tensor container(static_cast<uint32_t>(flat.size()), 1, 1);
    container.data = std::move(flat);
    save_tensor(container, sgfm_path);

    std::ofstream out(manifest_path, std::ios::trunc);
    if (!out) throw IoError("cannot write manifest: " + manifest_path.string());
    out << manifest.str();
}

ModelParams load_checkpoint(const std::filesystem::path& sgfm_path,
                            const std::filesystem::path& manifest_path) {
    ModelParams p;
    const auto shapes = param_shapes(p.cfg);

    std::ifstream in(manifest_path);
    if (!in) throw IoError("cannot open manifest: " + manifest_path.string());
    for (const TensorShape& s : shapes) {
        std::string name;
        uint32_t rows = 0, cols = 0;
        if (!(in >> name >> rows >> cols) || name != s.name || rows != s.rows || cols != s.cols)
            throw FormatError("manifest does not match model architecture: " +
                              manifest_path.string());
    }

    const Tensor container = load_tensor(sgfm_path);
    const auto tensors = param_tensors(p);
    size_t total = 0;
    for (const TensorShape& s : shapes) total += static_cast<size_t>(s.rows) * s.cols;
    if (container.data.size() != total)
        throw FormatError("checkpoint size mismatch: " + sgfm_path.string());

    size_t off = 0;
    for (size_t i = 0; i < kParamTensorCount; ++i) {
        const size_t n = static_cast<size_t>(shapes[i].rows) * shapes[i].cols;
        tensors[i]->assign(container.data.begin() + off, container.data.begin() + off + n);
        off += n;
    }
    return p;
}

}  // namespace salco
