// Command-line front end: saliency maps from feature maps, region and pair
// inspection, training on synthetic scenes, checkpoint evaluation, rendering.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "salco/crops.hpp"
#include "salco/error.hpp"
#include "salco/graph.hpp"
#include "salco/regions.hpp"
#include "salco/render.hpp"
#include "salco/rng.hpp"
#include "salco/tensor.hpp"
#include "salco/train.hpp"

namespace fs = std::filesystem;
using namespace salco;

namespace {

SaliencyMap saliency_from_featmap(const fs::path& input) {
    const FeatureMap fm = load_tensor(input);
    const AffinityGraph g = build_graph(fm);
    const SecondEigvec eig = second_eigvec(g);
    return saliency_from_eigvec(eig.y, fm.dim0, fm.dim1);
}

int cmd_saliency(const fs::path& input, const fs::path& output) {
    const SaliencyMap s = saliency_from_featmap(input);
    if (output.extension() == ".pgm")
        render_pgm(s, output);
    else
        save_tensor(s.to_tensor(), output);
    return kExitOk;
}

int cmd_regions(const fs::path& input, uint32_t min_area) {
    const SaliencyMap s = SaliencyMap::from_tensor(load_tensor(input));
    const BiPartitionMask mask = threshold_mask(s);
    std::vector<Region> regs = connected_regions(mask, min_area);
    if (!regs.empty()) regs = score_regions(std::move(regs), s);
    for (const Region& r : regs) std::cout << format_region_line(r) << '\n';
    return kExitOk;
}

int cmd_pairs(const fs::path& saliency_path, const fs::path& image_path, uint32_t t,
              uint64_t seed) {
    const SaliencyMap s = SaliencyMap::from_tensor(load_tensor(saliency_path));
    const ImageTensor img = load_tensor(image_path);
    if (s.height == 0 || s.width == 0 || img.dim0 % s.height != 0 || img.dim1 % s.width != 0)
        throw ArgumentError("image dimensions are not a multiple of the saliency grid");
    const uint32_t stride_h = img.dim0 / s.height;
    const uint32_t stride_w = img.dim1 / s.width;
    if (stride_h != stride_w) throw ArgumentError("non-square stride between image and grid");

    const BiPartitionMask mask = threshold_mask(s);
    std::vector<Region> regs = connected_regions(mask);
    if (regs.empty()) throw ArgumentError("no regions above the minimum area; nothing to pair");
    regs = score_regions(std::move(regs), s);

    Rng rng(seed);
    for (const Region& r : sample_regions(regs, t, rng)) {
        const CropPair pair = make_pair(r, stride_h, img, rng);
        std::cout << format_crop_line(pair.first) << '\n';
        std::cout << format_crop_line(pair.second) << '\n';
    }
    return kExitOk;
}

int cmd_train(const fs::path& config_path, const fs::path& out_dir) {
    const TrainConfig cfg = load_train_config(config_path);
    const auto dataset = make_dataset(cfg);
    const TrainOutput out = train(cfg, dataset);
    write_run_dir(out, dataset, out_dir);
    std::printf("baseline_iou %.9g\n", out.baseline_iou);
    std::printf("epoch0_iou %.9g\n", out.epoch0_iou);
    std::printf("final_refine_iou %.9g\n", out.final_refine_iou);
    std::printf("final_iou %.9g\n", out.final_iou);
    return kExitOk;
}

int cmd_eval(const fs::path& checkpoint_dir) {
    const TrainConfig cfg = load_train_config(checkpoint_dir / "config.txt");
    const ModelParams params =
        load_checkpoint(checkpoint_dir / "checkpoint.sgfm", checkpoint_dir / "manifest.txt");
    const EvalStats stats = evaluate_params(params, make_dataset(cfg), cfg);
    std::printf("mean_iou %.9g fallbacks %llu\n", stats.mean_iou,
                static_cast<unsigned long long>(stats.fallbacks));
    return kExitOk;
}

int cmd_render(const fs::path& input, const fs::path& output) {
    render_pgm(SaliencyMap::from_tensor(load_tensor(input)), output);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"saliency-guided contrastive learning toolkit"};
    app.require_subcommand(1);

    std::string in_path, out_path, image_path, config_path, out_dir, checkpoint_dir;
    uint32_t min_area = 4;
    uint32_t t = 4;
    uint64_t seed = 0;

    auto* saliency = app.add_subcommand("saliency", "saliency map from a feature map");
    saliency->add_option("featmap", in_path, "input feature map (.sgfm)")->required();
    saliency->add_option("-o,--output", out_path, "output .sgfm or .pgm")->required();

    auto* regions = app.add_subcommand("regions", "discriminative regions of a saliency map");
    regions->add_option("saliency", in_path, "input saliency map (.sgfm, 1 channel)")->required();
    regions->add_option("--min-area", min_area, "minimum component area in cells");

    auto* pairs = app.add_subcommand("pairs", "sample regions and emit crop pairs");
    pairs->add_option("saliency", in_path, "input saliency map (.sgfm)")->required();
    pairs->add_option("--image", image_path, "source image (.sgfm)")->required();
    pairs->add_option("-t", t, "number of sampled regions");
    pairs->add_option("--seed", seed, "sampling seed");

    auto* train_cmd = app.add_subcommand("train", "train on synthetic scenes");
    train_cmd->add_option("--config", config_path, "key = value config file")->required();
    train_cmd->add_option("--out", out_dir, "output directory")->required();

    auto* eval_cmd = app.add_subcommand("eval", "mean saliency IoU of a checkpoint");
    eval_cmd->add_option("--checkpoint", checkpoint_dir, "run directory from train")->required();

    auto* render = app.add_subcommand("render", "write a saliency map as PGM");
    render->add_option("saliency", in_path, "input saliency map (.sgfm)")->required();
    render->add_option("output", out_path, "output .pgm")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitArgument;
    }

    try {
        if (saliency->parsed()) return cmd_saliency(in_path, out_path);
        if (regions->parsed()) return cmd_regions(in_path, min_area);
        if (pairs->parsed()) return cmd_pairs(in_path, image_path, t, seed);
        if (train_cmd->parsed()) return cmd_train(config_path, out_dir);
        if (eval_cmd->parsed()) return cmd_eval(checkpoint_dir);
        if (render->parsed()) return cmd_render(in_path, out_path);
    } catch (const ArgumentError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitArgument;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumeric;
    }
    return kExitArgument;
}
