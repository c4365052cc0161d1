#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "salco/crops.hpp"
#include "salco/graph.hpp"
#include "salco/loss.hpp"
#include "salco/model.hpp"
#include "salco/scene.hpp"

namespace salco {

struct TrainConfig {
    uint32_t epochs = 40;
    uint32_t refine_interval = 5;
    uint32_t t_regions = 4;
    uint32_t l_neighbors = 5;
    double gamma = 0.5;
    uint32_t queue_capacity = 512;
    uint32_t batch_size = 1;
    uint64_t master_seed = 17;
    uint32_t num_scenes = 64;
    uint32_t image_size = 128;
    uint32_t view_size = 96;
    uint32_t patch_px = 8;  // encoder stride
    double base_lr = 1.0;
    uint32_t warmup_epochs = 4;
    uint32_t min_area = 4;
    double eps_clamp = 1e-5;
    double noise_sigma = 0.02;
    double weight_decay = 1e-4;
    double sgd_momentum = 0.9;
    double ema_tau0 = 0.99;
    uint32_t threads = 1;
    bool symmetrize_loss = false;
    SceneConfig scene;

    uint32_t steps_per_epoch() const { return (num_scenes + batch_size - 1) / batch_size; }
    uint64_t total_steps() const { return static_cast<uint64_t>(epochs) * steps_per_epoch(); }
    ModelConfig model_config() const;
    void validate() const;
};

// Flat "key = value" lines; '#' comments and blank lines allowed; unknown
// keys rejected.
TrainConfig parse_train_config(const std::string& text);
TrainConfig load_train_config(const std::filesystem::path& path);
std::string serialize_train_config(const TrainConfig& cfg);

// A candidate crop domain with its saliency score.
struct ScoredBox {
    PixelBox box;
    float score = 1.0f;
};

struct ImageState {
    std::vector<ScoredBox> boxes;
    SaliencyMap saliency;
    bool has_saliency = false;
};

struct TrainState {
    TrainConfig cfg;
    ModelParams online;
    ModelParams target;
    OptimState opt;
    EmaState ema;
    MemoryQueue queue;
    std::vector<ImageState> images;
    uint32_t epoch = 0;
    uint64_t fallback_count = 0;
};

std::vector<SyntheticScene> make_dataset(const TrainConfig& cfg);

// Random-crop region boxes with score 1.0 per image, online params drawn
// uniform +-1/sqrt(fan_in), target = copy of online, queue filled to
// capacity with unit-normalized Gaussian vectors.
TrainState initialize_state(const TrainConfig& cfg);

// Full-image saliency through the online encoder; nullopt when the
// eigensolver fails for this image.
std::optional<SaliencyMap> compute_saliency(const ModelParams& params, const ImageTensor& image,
                                            double eps_clamp);

struct RefineStats {
    uint64_t fallbacks = 0;  // images that fell back to random crops
    double mean_iou = 0.0;
};

// Step 1 of the alternating scheme: recompute each image's saliency map,
// regions, and scores with the current online encoder. Images with no
// surviving region (or a failed eigensolve) fall back to random-crop boxes.
RefineStats refine_saliency(TrainState& st, const std::vector<SyntheticScene>& dataset);

// Threshold the saliency at its mean, replicate cells by stride onto the
// pixel grid, and intersect-over-union against the ground-truth mask.
double eval_iou(const SaliencyMap& s, const SyntheticScene& scene, uint32_t stride);

struct EvalStats {
    double mean_iou = 0.0;
    uint64_t fallbacks = 0;  // images whose eigensolve failed
};

// Mean saliency IoU of the given parameters over the dataset.
EvalStats evaluate_params(const ModelParams& params, const std::vector<SyntheticScene>& dataset,
                          const TrainConfig& cfg);

struct TrainOutput {
    TrainState state;
    std::string train_log;    // one "step l_intra l_inter l_all" line per step
    std::string metrics_log;  // eval / refine / final lines
    std::vector<uint32_t> refine_epochs;
    double baseline_iou = 0.0;     // all-foreground mask
    double epoch0_iou = 0.0;       // random-encoder saliency
    double final_refine_iou = 0.0; // at the last refinement
    double final_iou = 0.0;        // after the last epoch
};

TrainOutput train(const TrainConfig& cfg);
TrainOutput train(const TrainConfig& cfg, const std::vector<SyntheticScene>& dataset);

// Writes config.txt, train_log.txt, metrics.txt, checkpoint.sgfm,
// manifest.txt, target_checkpoint.sgfm, target_manifest.txt, plus a
// saliency PGM and box-overlay PPM for the first image.
void write_run_dir(const TrainOutput& out, const std::vector<SyntheticScene>& dataset,
                   const std::filesystem::path& dir);

}  // namespace salco
