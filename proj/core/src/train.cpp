#include "salco/train.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "salco/error.hpp"
#include "salco/regions.hpp"
#include "salco/render.hpp"

namespace salco {

ModelConfig TrainConfig::model_config() const {
    ModelConfig mc;
    mc.patch_px = patch_px;
    return mc;
}

void TrainConfig::validate() const {
    if (epochs < 1) throw ArgumentError("config: epochs must be >= 1");
    if (refine_interval < 1) throw ArgumentError("config: refine_interval must be >= 1");
    if (t_regions < 1) throw ArgumentError("config: t_regions must be >= 1");
    if (l_neighbors < 1) throw ArgumentError("config: l_neighbors must be >= 1");
    if (gamma < 0.0) throw ArgumentError("config: gamma must be >= 0");
    if (queue_capacity < 1) throw ArgumentError("config: queue_capacity must be >= 1");
    if (batch_size < 1) throw ArgumentError("config: batch_size must be >= 1");
    if (num_scenes < 1) throw ArgumentError("config: num_scenes must be >= 1");
    if (patch_px < 1) throw ArgumentError("config: patch_px must be >= 1");
    if (image_size % patch_px != 0 || image_size / patch_px < 2)
        throw ArgumentError("config: image_size must be a multiple of patch_px with >= 2 cells");
    if (view_size % patch_px != 0 || view_size < patch_px)
        throw ArgumentError("config: view_size must be a positive multiple of patch_px");
    if (min_area < 1) throw ArgumentError("config: min_area must be >= 1");
    if (!(eps_clamp > 0.0)) throw ArgumentError("config: eps_clamp must be > 0");
    if (noise_sigma < 0.0) throw ArgumentError("config: noise_sigma must be >= 0");
    if (ema_tau0 < 0.0 || ema_tau0 > 1.0) throw ArgumentError("config: ema_tau0 must be in [0,1]");
    if (threads < 1) throw ArgumentError("config: threads must be >= 1");
    if (!(scene.min_fraction > 0.0) || !(scene.max_fraction < 1.0) ||
        scene.min_fraction >= scene.max_fraction)
        throw ArgumentError("config: scene fraction bounds invalid");
}

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_metric(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

void parallel_for(size_t n, uint32_t threads, const std::function<void(size_t)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    const uint32_t workers = static_cast<uint32_t>(std::min<size_t>(threads, n));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (uint32_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            try {
                for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

TrainConfig parse_train_config(const std::string& text) {
    TrainConfig cfg;

    const std::map<std::string, std::function<void(const std::string&)>> setters = {
        {"epochs", [&](const std::string& v) { cfg.epochs = static_cast<uint32_t>(std::stoul(v)); }},
        {"refine_interval", [&](const std::string& v) { cfg.refine_interval = static_cast<uint32_t>(std::stoul(v)); }},
        {"t_regions", [&](const std::string& v) { cfg.t_regions = static_cast<uint32_t>(std::stoul(v)); }},
        {"l_neighbors", [&](const std::string& v) { cfg.l_neighbors = static_cast<uint32_t>(std::stoul(v)); }},
        {"gamma", [&](const std::string& v) { cfg.gamma = std::stod(v); }},
        {"queue_capacity", [&](const std::string& v) { cfg.queue_capacity = static_cast<uint32_t>(std::stoul(v)); }},
        {"batch_size", [&](const std::string& v) { cfg.batch_size = static_cast<uint32_t>(std::stoul(v)); }},
        {"master_seed", [&](const std::string& v) { cfg.master_seed = std::stoull(v); }},
        {"num_scenes", [&](const std::string& v) { cfg.num_scenes = static_cast<uint32_t>(std::stoul(v)); }},
        {"image_size", [&](const std::string& v) { cfg.image_size = static_cast<uint32_t>(std::stoul(v)); }},
        {"view_size", [&](const std::string& v) { cfg.view_size = static_cast<uint32_t>(std::stoul(v)); }},
        {"patch_px", [&](const std::string& v) { cfg.patch_px = static_cast<uint32_t>(std::stoul(v)); }},
        {"base_lr", [&](const std::string& v) { cfg.base_lr = std::stod(v); }},
        {"warmup_epochs", [&](const std::string& v) { cfg.warmup_epochs = static_cast<uint32_t>(std::stoul(v)); }},
        {"min_area", [&](const std::string& v) { cfg.min_area = static_cast<uint32_t>(std::stoul(v)); }},
        {"eps_clamp", [&](const std::string& v) { cfg.eps_clamp = std::stod(v); }},
        {"noise_sigma", [&](const std::string& v) { cfg.noise_sigma = std::stod(v); }},
        {"weight_decay", [&](const std::string& v) { cfg.weight_decay = std::stod(v); }},
        {"sgd_momentum", [&](const std::string& v) { cfg.sgd_momentum = std::stod(v); }},
        {"ema_tau0", [&](const std::string& v) { cfg.ema_tau0 = std::stod(v); }},
        {"threads", [&](const std::string& v) { cfg.threads = static_cast<uint32_t>(std::stoul(v)); }},
        {"symmetrize_loss", [&](const std::string& v) { cfg.symmetrize_loss = (v == "1" || v == "true"); }},
        {"scene_min_objects", [&](const std::string& v) { cfg.scene.min_objects = static_cast<uint32_t>(std::stoul(v)); }},
        {"scene_max_objects", [&](const std::string& v) { cfg.scene.max_objects = static_cast<uint32_t>(std::stoul(v)); }},
        {"scene_min_fraction", [&](const std::string& v) { cfg.scene.min_fraction = std::stod(v); }},
        {"scene_max_fraction", [&](const std::string& v) { cfg.scene.max_fraction = std::stod(v); }},
        {"scene_min_contrast", [&](const std::string& v) { cfg.scene.min_contrast = std::stod(v); }},
        {"scene_stripe_amp_lo", [&](const std::string& v) { cfg.scene.stripe_amp_lo = std::stod(v); }},
        {"scene_stripe_amp_hi", [&](const std::string& v) { cfg.scene.stripe_amp_hi = std::stod(v); }},
        {"scene_pixel_noise", [&](const std::string& v) { cfg.scene.pixel_noise = std::stod(v); }},
        {"scene_gradient_amp", [&](const std::string& v) { cfg.scene.gradient_amp = std::stod(v); }},
    };

    const auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };

    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = trim(line.substr(0, line.find('#')));
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ArgumentError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end()) throw ArgumentError("unknown config key: " + key);
        try {
            it->second(value);
        } catch (const std::logic_error&) {
            throw ArgumentError("config key " + key + ": bad value '" + value + "'");
        }
    }
    cfg.scene.image_size = cfg.image_size;
    cfg.validate();
    return cfg;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_train_config(buf.str());
}

std::string serialize_train_config(const TrainConfig& cfg) {
    std::ostringstream out;
    out << "epochs = " << cfg.epochs << '\n';
    out << "refine_interval = " << cfg.refine_interval << '\n';
    out << "t_regions = " << cfg.t_regions << '\n';
    out << "l_neighbors = " << cfg.l_neighbors << '\n';
    out << "gamma = " << fmt_double(cfg.gamma) << '\n';
    out << "queue_capacity = " << cfg.queue_capacity << '\n';
    out << "batch_size = " << cfg.batch_size << '\n';
    out << "master_seed = " << cfg.master_seed << '\n';
    out << "num_scenes = " << cfg.num_scenes << '\n';
    out << "image_size = " << cfg.image_size << '\n';
    out << "view_size = " << cfg.view_size << '\n';
    out << "patch_px = " << cfg.patch_px << '\n';
    out << "base_lr = " << fmt_double(cfg.base_lr) << '\n';
    out << "warmup_epochs = " << cfg.warmup_epochs << '\n';
    out << "min_area = " << cfg.min_area << '\n';
    out << "eps_clamp = " << fmt_double(cfg.eps_clamp) << '\n';
    out << "noise_sigma = " << fmt_double(cfg.noise_sigma) << '\n';
    out << "weight_decay = " << fmt_double(cfg.weight_decay) << '\n';
    out << "sgd_momentum = " << fmt_double(cfg.sgd_momentum) << '\n';
    out << "ema_tau0 = " << fmt_double(cfg.ema_tau0) << '\n';
    out << "threads = " << cfg.threads << '\n';
    out << "symmetrize_loss = " << (cfg.symmetrize_loss ? 1 : 0) << '\n';
    out << "scene_min_objects = " << cfg.scene.min_objects << '\n';
    out << "scene_max_objects = " << cfg.scene.max_objects << '\n';
    out << "scene_min_fraction = " << fmt_double(cfg.scene.min_fraction) << '\n';
    out << "scene_max_fraction = " << fmt_double(cfg.scene.max_fraction) << '\n';
    out << "scene_min_contrast = " << fmt_double(cfg.scene.min_contrast) << '\n';
    out << "scene_stripe_amp_lo = " << fmt_double(cfg.scene.stripe_amp_lo) << '\n';
    out << "scene_stripe_amp_hi = " << fmt_double(cfg.scene.stripe_amp_hi) << '\n';
    out << "scene_pixel_noise = " << fmt_double(cfg.scene.pixel_noise) << '\n';
    out << "scene_gradient_amp = " << fmt_double(cfg.scene.gradient_amp) << '\n';
    return out.str();
}

std::vector<SyntheticScene> make_dataset(const TrainConfig& cfg) {
    SceneConfig sc = cfg.scene;
    sc.image_size = cfg.image_size;
    std::vector<SyntheticScene> scenes(cfg.num_scenes);
    parallel_for(cfg.num_scenes, cfg.threads, [&](size_t i) {
        scenes[i] = gen_scene(Rng::mix(cfg.master_seed, i), sc);
    });
    return scenes;
}

namespace {

std::vector<ScoredBox> random_boxes(const TrainConfig& cfg, Rng& rng) {
    const PixelBox full{0, 0, cfg.image_size - 1, cfg.image_size - 1};
    std::vector<ScoredBox> boxes;
    boxes.reserve(cfg.t_regions);
    for (uint32_t k = 0; k < cfg.t_regions; ++k) {
        const CropSpec spec = random_crop_in_box(full, rng);
        boxes.push_back({{spec.top, spec.left, spec.top + spec.height - 1,
                          spec.left + spec.width - 1},
                         1.0f});
    }
    return boxes;
}

}  // namespace

TrainState initialize_state(const TrainConfig& cfg) {
    cfg.validate();
    const ModelConfig mc = cfg.model_config();
    const Rng master(cfg.master_seed);

    TrainState st{.cfg = cfg,
                  .online = {},
                  .target = {},
                  .opt = {},
                  .ema = {},
                  .queue = MemoryQueue(cfg.queue_capacity, mc.proj_dim),
                  .images = {},
                  .epoch = 0,
                  .fallback_count = 0};

    Rng prng = master.fork(stream::kInitParams);
    st.online = init_params(mc, prng);
    st.target = st.online;

    const uint64_t warmup_steps =
        std::min<uint64_t>(static_cast<uint64_t>(cfg.warmup_epochs) * cfg.steps_per_epoch(),
                           cfg.total_steps());
    st.opt = OptimState::make(mc, cfg.base_lr, cfg.total_steps(), warmup_steps, cfg.weight_decay,
                              cfg.sgd_momentum);
    st.ema = EmaState{cfg.ema_tau0, cfg.total_steps(), 0};

    Rng qrng = master.fork(stream::kInitQueue);
    std::vector<float> entry(mc.proj_dim);
    for (uint32_t i = 0; i < cfg.queue_capacity; ++i) {
        double norm2 = 0.0;
        for (float& v : entry) {
            v = static_cast<float>(qrng.normal());
            norm2 += static_cast<double>(v) * v;
        }
        const double inv = norm2 > 0.0 ? 1.0 / std::sqrt(norm2) : 0.0;
        for (float& v : entry) v = static_cast<float>(v * inv);
        if (inv == 0.0) entry[0] = 1.0f;
        st.queue.push(entry);
    }

    st.images.resize(cfg.num_scenes);
    for (uint32_t i = 0; i < cfg.num_scenes; ++i) {
        Rng brng = master.fork(Rng::mix(stream::kInitBoxes, i));
        st.images[i].boxes = random_boxes(cfg, brng);
    }
    return st;
}

std::optional<SaliencyMap> compute_saliency(const ModelParams& params, const ImageTensor& image,
                                            double eps_clamp) {
    const FeatureMap fm = encode(params, image);
    const AffinityGraph g = build_graph(fm, eps_clamp);
    try {
        const SecondEigvec eig = second_eigvec(g);
        return saliency_from_eigvec(eig.y, fm.dim0, fm.dim1);
    } catch (const NumericError&) {
        return std::nullopt;
    }
}

double eval_iou(const SaliencyMap& s, const SyntheticScene& scene, uint32_t stride) {
    if (stride < 1) throw ArgumentError("eval_iou: stride must be >= 1");
    const BiPartitionMask m = threshold_mask(s);
    const uint32_t h = scene.image.dim0, w = scene.image.dim1;
    if (scene.gt_mask.size() != static_cast<size_t>(h) * w)
        throw ArgumentError("eval_iou: ground-truth mask size mismatch");

    uint64_t inter = 0, uni = 0;
    for (uint32_t y = 0; y < h; ++y) {
        const uint32_t cy = std::min(y / stride, m.height - 1);
        for (uint32_t x = 0; x < w; ++x) {
            const uint32_t cx = std::min(x / stride, m.width - 1);
            const bool pred = m.at(cy, cx);
            const bool gt = scene.gt_mask[static_cast<size_t>(y) * w + x] != 0;
            inter += pred && gt;
            uni += pred || gt;
        }
    }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

struct SaliencyPass {
    std::vector<std::optional<SaliencyMap>> maps;
    double mean_iou = 0.0;
    uint64_t eigen_failures = 0;
};

SaliencyPass run_saliency_pass(const ModelParams& params,
                               const std::vector<SyntheticScene>& dataset,
                               const TrainConfig& cfg) {
    SaliencyPass pass;
    pass.maps.resize(dataset.size());
    parallel_for(dataset.size(), cfg.threads, [&](size_t i) {
        pass.maps[i] = compute_saliency(params, dataset[i].image, cfg.eps_clamp);
    });
    double iou_sum = 0.0;
    for (size_t i = 0; i < dataset.size(); ++i) {
        if (pass.maps[i])
            iou_sum += eval_iou(*pass.maps[i], dataset[i], cfg.patch_px);
        else
            ++pass.eigen_failures;
    }
    pass.mean_iou = iou_sum / static_cast<double>(dataset.size());
    return pass;
}

}  // namespace

EvalStats evaluate_params(const ModelParams& params, const std::vector<SyntheticScene>& dataset,
                          const TrainConfig& cfg) {
    const SaliencyPass pass = run_saliency_pass(params, dataset, cfg);
    return {pass.mean_iou, pass.eigen_failures};
}

RefineStats refine_saliency(TrainState& st, const std::vector<SyntheticScene>& dataset) {
    if (dataset.size() != st.images.size())
        throw ArgumentError("refine_saliency: dataset/state size mismatch");
    const TrainConfig& cfg = st.cfg;
    const Rng master(cfg.master_seed);
    const SaliencyPass pass = run_saliency_pass(st.online, dataset, cfg);

    RefineStats stats;
    stats.mean_iou = pass.mean_iou;
    for (size_t i = 0; i < dataset.size(); ++i) {
        ImageState& istate = st.images[i];
        bool fell_back = true;
        if (pass.maps[i]) {
            const SaliencyMap& smap = *pass.maps[i];
            const BiPartitionMask mask = threshold_mask(smap);
            std::vector<Region> regs = connected_regions(mask, cfg.min_area);
            if (!regs.empty()) {
                regs = score_regions(std::move(regs), smap);
                istate.boxes.clear();
                for (const Region& r : regs)
                    istate.boxes.push_back({grid_box_to_pixels(r.bbox, cfg.patch_px,
                                                               cfg.image_size, cfg.image_size),
                                            r.score});
                istate.saliency = smap;
                istate.has_saliency = true;
                fell_back = false;
            } else {
                istate.saliency = smap;
                istate.has_saliency = true;
            }
        }
        if (fell_back) {
            Rng frng = master.fork(
                Rng::mix(stream::kFallback, static_cast<uint64_t>(st.epoch) * st.images.size() + i));
            istate.boxes = random_boxes(cfg, frng);
            ++stats.fallbacks;
        }
    }
    st.fallback_count += stats.fallbacks;
    return stats;
}

TrainOutput train(const TrainConfig& cfg) { return train(cfg, make_dataset(cfg)); }

TrainOutput train(const TrainConfig& cfg, const std::vector<SyntheticScene>& dataset) {
    cfg.validate();
    if (dataset.size() != cfg.num_scenes)
        throw ArgumentError("train: dataset size does not match num_scenes");

    TrainOutput out{.state = initialize_state(cfg),
                    .train_log = {},
                    .metrics_log = {},
                    .refine_epochs = {},
                    .baseline_iou = 0.0,
                    .epoch0_iou = 0.0,
                    .final_refine_iou = 0.0,
                    .final_iou = 0.0};
    TrainState& st = out.state;
    std::ostringstream tlog, mlog;
    const Rng master(cfg.master_seed);
    const ModelConfig mc = cfg.model_config();

    double baseline = 0.0;
    for (const SyntheticScene& sc : dataset) baseline += sc.object_fraction();
    out.baseline_iou = baseline / static_cast<double>(dataset.size());
    mlog << "baseline all_foreground_iou " << fmt_metric(out.baseline_iou) << '\n';

    {
        const SaliencyPass pass = run_saliency_pass(st.online, dataset, cfg);
        out.epoch0_iou = pass.mean_iou;
        mlog << "eval epoch 0 mean_iou " << fmt_metric(pass.mean_iou) << " fallbacks "
             << pass.eigen_failures << '\n';
    }

    Gradients grads(mc);
    uint64_t step = 0;
    for (uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        st.epoch = epoch;
        if (epoch != 0 && epoch % cfg.refine_interval == 0) {
            const RefineStats stats = refine_saliency(st, dataset);
            out.refine_epochs.push_back(epoch);
            out.final_refine_iou = stats.mean_iou;
            mlog << "refine epoch " << epoch << " mean_iou " << fmt_metric(stats.mean_iou)
                 << " fallbacks " << stats.fallbacks << '\n';
        }

        for (uint32_t b0 = 0; b0 < cfg.num_scenes; b0 += cfg.batch_size) {
            const uint32_t b1 = std::min(b0 + cfg.batch_size, cfg.num_scenes);
            grads.reset();
            double batch_intra = 0.0, batch_inter = 0.0;
            std::vector<std::vector<float>> to_push;

            for (uint32_t img = b0; img < b1; ++img) {
                const ImageState& istate = st.images[img];
                const ImageTensor& image = dataset[img].image;
                Rng prng = master.fork(Rng::mix(
                    stream::kPairs, static_cast<uint64_t>(epoch) * cfg.num_scenes + img));

                std::vector<double> weights(istate.boxes.size());
                for (size_t k = 0; k < weights.size(); ++k) weights[k] = istate.boxes[k].score;

                std::vector<PairTerm> terms;
                std::vector<ForwardCache> caches;
                for (uint32_t k = 0; k < cfg.t_regions; ++k) {
                    const ScoredBox& sb = istate.boxes[sample_weighted_index(weights, prng)];
                    const CropSpec spec1 = random_crop_in_box(sb.box, prng);
                    const CropSpec spec2 = random_crop_in_box(sb.box, prng);
                    const ImageTensor view1 =
                        extract_view(image, spec1, cfg.view_size, static_cast<float>(cfg.noise_sigma));
                    const ImageTensor view2 =
                        extract_view(image, spec2, cfg.view_size, static_cast<float>(cfg.noise_sigma));

                    ForwardCache online_fc = embed(st.online, view1);
                    ForwardCache target_fc = embed(st.target, view2);
                    terms.push_back({online_fc.p, target_fc.z, sb.score});
                    caches.push_back(std::move(online_fc));
                    if (cfg.symmetrize_loss) {
                        ForwardCache online_rev = embed(st.online, view2);
                        ForwardCache target_rev = embed(st.target, view1);
                        terms.push_back({online_rev.p, target_rev.z, sb.score});
                        caches.push_back(std::move(online_rev));
                    }
                }

                const double intra = intra_loss(terms, cfg.gamma);
                std::vector<InterProbe> probes;
                probes.reserve(terms.size());
                for (const PairTerm& t : terms) probes.push_back({t.p, t.score});
                const double inter = inter_loss(probes, st.queue, cfg.l_neighbors, cfg.gamma);

                // z is stored in the queue as float32, so validate the cast.
                bool finite_embeddings = true;
                for (const PairTerm& t : terms) {
                    for (double v : t.p) finite_embeddings &= std::isfinite(v);
                    for (double v : t.z) finite_embeddings &= std::isfinite(static_cast<float>(v));
                }
                if (!std::isfinite(intra) || !std::isfinite(inter) || !finite_embeddings) {
                    std::ostringstream msg;
                    msg << "non-finite loss at step " << step << " image " << img << ":";
                    for (size_t k = 0; k < terms.size(); ++k) {
                        double np = 0.0, nz = 0.0;
                        for (double v : terms[k].p) np += v * v;
                        for (double v : terms[k].z) nz += v * v;
                        msg << " pair " << k << " |p|=" << std::sqrt(np) << " |z|=" << std::sqrt(nz);
                    }
                    throw NumericError(msg.str());
                }

                const double inter_norm =
                    static_cast<double>(terms.size()) * static_cast<double>(cfg.l_neighbors);
                for (size_t k = 0; k < terms.size(); ++k) {
                    const double w = std::pow(terms[k].score, cfg.gamma);
                    std::vector<double> dp = loss_grad(terms[k].p, terms[k].z);
                    for (double& v : dp) v *= w;
                    if (st.queue.size() > 0) {
                        for (const auto& nb : nn_search(st.queue, terms[k].p, cfg.l_neighbors)) {
                            const std::vector<double> g = loss_grad(terms[k].p, nb);
                            for (size_t d = 0; d < dp.size(); ++d) dp[d] += w / inter_norm * g[d];
                        }
                    }
                    backward(st.online, caches[k], dp, grads);
                }

                batch_intra += intra;
                batch_inter += inter;
                for (const PairTerm& t : terms)
                    to_push.emplace_back(t.z.begin(), t.z.end());
            }

            const double inv_batch = 1.0 / static_cast<double>(b1 - b0);
            grads.scale(inv_batch);
            const LossReport rep{step, batch_intra * inv_batch, batch_inter * inv_batch,
                                 total_loss(batch_intra * inv_batch, batch_inter * inv_batch)};
            tlog << format_loss_line(rep) << '\n';

            sgd_step(st.online, grads, st.opt);
            ema_update(st.online, st.target, st.ema);
            queue_push(st.queue, to_push);
            ++step;
        }
    }

    st.epoch = cfg.epochs;
    {
        const SaliencyPass pass = run_saliency_pass(st.online, dataset, cfg);
        out.final_iou = pass.mean_iou;
        mlog << "final epoch " << cfg.epochs << " mean_iou " << fmt_metric(pass.mean_iou)
             << " fallbacks " << pass.eigen_failures << '\n';
    }
    if (out.refine_epochs.empty()) out.final_refine_iou = out.epoch0_iou;

    out.train_log = tlog.str();
    out.metrics_log = mlog.str();
    return out;
}

void write_run_dir(const TrainOutput& out, const std::vector<SyntheticScene>& dataset,
                   const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto write_text = [&](const char* name, const std::string& body) {
        std::ofstream f(dir / name, std::ios::trunc);
        if (!f) throw IoError("cannot write " + (dir / name).string());
        f << body;
    };
    write_text("config.txt", serialize_train_config(out.state.cfg));
    write_text("train_log.txt", out.train_log);
    write_text("metrics.txt", out.metrics_log);
    save_checkpoint(out.state.online, dir / "checkpoint.sgfm", dir / "manifest.txt");
    save_checkpoint(out.state.target, dir / "target_checkpoint.sgfm", dir / "target_manifest.txt");

    if (!dataset.empty()) {
        const auto smap =
            compute_saliency(out.state.online, dataset[0].image, out.state.cfg.eps_clamp);
        if (smap) render_pgm(*smap, dir / "saliency_final.pgm");
        std::vector<PixelBox> boxes;
        for (const ScoredBox& sb : out.state.images[0].boxes) boxes.push_back(sb.box);
        render_ppm(dataset[0].image, boxes, dir / "boxes_final.ppm");
    }
}

}  // namespace salco
