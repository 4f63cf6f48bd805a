#include "igd/fit.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "igd/rng.hpp"

namespace igd {

namespace {

constexpr std::uint64_t kTagGridJitter = 1;

struct BevEval {
    BevLossTerms terms;
    std::vector<KeypointFeatures> student_features;  ///< post-normalization
};

BevEval eval_bev_forward(const SceneBindings& bindings, const StudentState& state) {
    BevEval ev;
    ev.student_features.reserve(bindings.keypoints.size());
    for (const std::vector<BevPoint>& coords : bindings.keypoints) {
        KeypointFeatures f = bilinear_sample(state.bev, coords);
        ev.student_features.push_back(bindings.normalize_keypoints ? normalize_rows(f)
                                                                   : std::move(f));
    }
    ev.terms.inter_channel = inter_channel_loss(ev.student_features, bindings.teacher_features);
    ev.terms.inter_keypoint = inter_keypoint_loss(ev.student_features, bindings.teacher_features);
    return ev;
}

BevFeatureGrid scatter_feature_grads(const SceneBindings& bindings, const StudentState& state,
                                     const std::vector<Eigen::MatrixXd>& feature_grads) {
    BevFeatureGrid acc = BevFeatureGrid::zeros(state.bev.channels, state.bev.spec);
    for (std::size_t j = 0; j < bindings.keypoints.size(); ++j) {
        Eigen::MatrixXd up = feature_grads[j];
        if (bindings.normalize_keypoints) {
            const KeypointFeatures raw = bilinear_sample(state.bev, bindings.keypoints[j]);
            up = normalize_rows_grad(raw, up);
        }
        const BevFeatureGrid g = bilinear_sample_grad(state.bev, bindings.keypoints[j], up);
        for (std::size_t i = 0; i < acc.values.size(); ++i) acc.values[i] += g.values[i];
    }
    return acc;
}

void simplex_project(CategoricalDepthMap& map) {
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            double sum = 0.0;
            for (int k = 0; k < map.bins; ++k) {
                double& p = map.at(x, y, k);
                if (p < 1e-9) p = 1e-9;
                sum += p;
            }
            for (int k = 0; k < map.bins; ++k) map.at(x, y, k) /= sum;
        }
    }
}

bool has_target_pixels(const SceneBindings& bindings) {
    for (const std::vector<TargetPixelSet>& per_camera : bindings.targets) {
        for (const TargetPixelSet& t : per_camera) {
            if (!t.pixels.empty()) return true;
        }
    }
    return false;
}

// Same arithmetic as total_loss, minus the finiteness checks; the descent
// loop needs to see a non-finite total instead of a throw to flag divergence.
LossReport assemble_report(const DepthLossTerms& depth, const BevLossTerms& bev,
                           const LossWeights& weights) {
    LossReport r;
    r.det = 0.0;
    r.abs_depth = depth.abs_depth;
    r.inner_depth = depth.inner_depth;
    r.inter_channel = bev.inter_channel;
    r.inter_keypoint = bev.inter_keypoint;
    r.total = weights.w_det * r.det + weights.w_abs_depth * r.abs_depth +
              weights.w_inner_depth * r.inner_depth + weights.w_ic * r.inter_channel +
              weights.w_ik * r.inter_keypoint;
    return r;
}

LossEval eval_with_grads_impl(const Scene& scene, const SceneSpec& spec,
                              const SceneBindings& bindings, const StudentState& state,
                              const LossWeights& weights, bool checked) {
    check_compatible(scene, spec, state);
    const double ncam = static_cast<double>(scene.cameras.size());
    DepthLossTerms depth;
    TermGrads grads;
    for (std::size_t cam = 0; cam < scene.cameras.size(); ++cam) {
        BceResult bce = absolute_depth_bce(state.probs[cam], scene.gt_depth[cam], spec.bins);
        depth.abs_depth += bce.loss / ncam;
        for (double& v : bce.grad.values) v /= ncam;
        grads.abs_depth.push_back(std::move(bce.grad));

        depth.inner_depth +=
            inner_depth_loss(bindings.targets[cam], state.probs[cam], spec.bins).loss / ncam;
        DepthProbsGrad ig = inner_depth_loss_grad(bindings.targets[cam], state.probs[cam], spec.bins);
        for (double& v : ig.values) v /= ncam;
        grads.inner_depth.push_back(std::move(ig));
    }

    const BevEval bev = eval_bev_forward(bindings, state);
    grads.inter_channel = scatter_feature_grads(
        bindings, state, inter_channel_loss_grad(bev.student_features, bindings.teacher_features));
    grads.inter_keypoint = scatter_feature_grads(
        bindings, state, inter_keypoint_loss_grad(bev.student_features, bindings.teacher_features));

    LossEval out;
    out.report = checked ? total_loss(depth, bev.terms, 0.0, weights)
                         : assemble_report(depth, bev.terms, weights);
    out.grads = total_grad(grads, weights);
    return out;
}

FitTrace run_fit(const Scene& scene, const SceneSpec& spec, const FitConfig& config,
                 StudentState state) {
    const SceneBindings bindings = bind_scene(scene, spec, config.normalize_keypoints);
    const bool project = config.simplex_projection == "renormalize";
    const double lr = config.learning_rate;
    const bool with_metrics = has_target_pixels(bindings);

    FitTrace trace;
    if (with_metrics) trace.initial_metrics = target_depth_metrics(spec, bindings, state);
    trace.initial_gram_mismatch = gram_mismatch(bindings, state);

    LossEval ev = eval_with_grads_impl(scene, spec, bindings, state, config.weights, false);
    if (!std::isfinite(ev.report.total)) {
        throw std::domain_error("the initial student state evaluates to a non-finite loss");
    }
    trace.records.push_back({0, ev.report});

    // Kept one step behind `state` so a diverging update can be discarded and
    // the trace still ends on a state with a finite loss.
    StudentState last_good = state;

    for (int step = 1; step <= config.steps; ++step) {
        for (std::size_t cam = 0; cam < state.probs.size(); ++cam) {
            CategoricalDepthMap& map = state.probs[cam];
            const DepthProbsGrad& g = ev.grads.probs[cam];
            for (std::size_t i = 0; i < map.probs.size(); ++i) map.probs[i] -= lr * g.values[i];
            if (project) simplex_project(map);
        }
        for (std::size_t i = 0; i < state.bev.values.size(); ++i) {
            state.bev.values[i] -= lr * ev.grads.grid.values[i];
        }

        ev = eval_with_grads_impl(scene, spec, bindings, state, config.weights, false);
        if (!std::isfinite(ev.report.total)) {
            trace.diverged = true;
            state = std::move(last_good);
            break;
        }
        last_good = state;
        if (step % config.record_every == 0 || step == config.steps) {
            trace.records.push_back({step, ev.report});
        }
    }

    if (with_metrics) trace.final_metrics = target_depth_metrics(spec, bindings, state);
    trace.final_gram_mismatch = gram_mismatch(bindings, state);
    trace.final_state = std::move(state);
    return trace;
}

}  // namespace

SceneBindings bind_scene(const Scene& scene, const SceneSpec& spec, bool normalize_keypoints) {
    SceneBindings b;
    b.normalize_keypoints = normalize_keypoints;
    b.targets.reserve(scene.cameras.size());
    for (const CameraModel& cam : scene.cameras) {
        b.targets.push_back(localize_foreground(cam, scene.cloud, scene.boxes));
    }
    b.keypoints.reserve(scene.boxes.size());
    b.teacher_features.reserve(scene.boxes.size());
    for (const Box3D& box : scene.boxes) {
        b.keypoints.push_back(sample_keypoint_coords(box, spec.enlarge, spec.grid_side));
        KeypointFeatures f = bilinear_sample(scene.teacher_bev, b.keypoints.back());
        b.teacher_features.push_back(normalize_keypoints ? normalize_rows(f) : std::move(f));
    }
    return b;
}

void check_compatible(const Scene& scene, const SceneSpec& spec, const StudentState& state) {
    if (state.probs.size() != scene.cameras.size()) {
        throw std::domain_error("student state has a depth map count different from the camera count");
    }
    for (std::size_t i = 0; i < state.probs.size(); ++i) {
        if (state.probs[i].height != scene.cameras[i].height ||
            state.probs[i].width != scene.cameras[i].width) {
            throw std::domain_error("student depth map size differs from the camera image size");
        }
        if (state.probs[i].bins != spec.bins.bins) {
            throw std::domain_error("student depth map bin count differs from the bin spec");
        }
    }
    if (state.bev.channels != scene.teacher_bev.channels ||
        state.bev.spec.rows != scene.teacher_bev.spec.rows ||
        state.bev.spec.cols != scene.teacher_bev.spec.cols) {
        throw std::domain_error("student grid shape differs from the teacher grid");
    }
}

LossReport eval_losses(const Scene& scene, const SceneSpec& spec, const SceneBindings& bindings,
                       const StudentState& state, const LossWeights& weights) {
    check_compatible(scene, spec, state);
    const double ncam = static_cast<double>(scene.cameras.size());
    DepthLossTerms depth;
    for (std::size_t cam = 0; cam < scene.cameras.size(); ++cam) {
        depth.abs_depth +=
            absolute_depth_bce(state.probs[cam], scene.gt_depth[cam], spec.bins).loss / ncam;
        depth.inner_depth +=
            inner_depth_loss(bindings.targets[cam], state.probs[cam], spec.bins).loss / ncam;
    }
    const BevEval bev = eval_bev_forward(bindings, state);
    return total_loss(depth, bev.terms, 0.0, weights);
}

LossEval eval_losses_with_grads(const Scene& scene, const SceneSpec& spec,
                                const SceneBindings& bindings, const StudentState& state,
                                const LossWeights& weights) {
    return eval_with_grads_impl(scene, spec, bindings, state, weights, true);
}

DepthMetricReport target_depth_metrics(const SceneSpec& spec, const SceneBindings& bindings,
                                       const StudentState& state) {
    std::vector<double> pred, gt;
    for (std::size_t cam = 0; cam < bindings.targets.size(); ++cam) {
        for (const TargetPixelSet& t : bindings.targets[cam]) {
            const std::vector<double> p = expected_depth(state.probs[cam], spec.bins, t.pixels);
            pred.insert(pred.end(), p.begin(), p.end());
            gt.insert(gt.end(), t.gt_depth.begin(), t.gt_depth.end());
        }
    }
    if (pred.empty()) {
        throw std::domain_error("no target pixel is visible from any camera");
    }
    return depth_metrics(pred, gt);
}

std::vector<double> gram_mismatch(const SceneBindings& bindings, const StudentState& state) {
    std::vector<double> out;
    out.reserve(bindings.keypoints.size());
    for (std::size_t j = 0; j < bindings.keypoints.size(); ++j) {
        KeypointFeatures f = bilinear_sample(state.bev, bindings.keypoints[j]);
        if (bindings.normalize_keypoints) f = normalize_rows(f);
        const double da = (gram_inter_channel(f) - gram_inter_channel(bindings.teacher_features[j])).norm();
        const double db = (gram_inter_keypoint(f) - gram_inter_keypoint(bindings.teacher_features[j])).norm();
        out.push_back(da + db);
    }
    return out;
}

void FitConfig::validate() const {
    if (steps < 1) throw std::invalid_argument("fit needs at least one step");
    if (!std::isfinite(learning_rate) || learning_rate <= 0.0) {
        throw std::invalid_argument("learning rate must be positive");
    }
    weights.validate();
    if (record_every < 1) throw std::invalid_argument("record_every must be positive");
    if (simplex_projection != "renormalize" && simplex_projection != "none") {
        throw std::invalid_argument("simplex projection must be 'renormalize' or 'none'");
    }
    parse_init_mode(init_mode);
    if (!std::isfinite(init_noise_amplitude) || init_noise_amplitude < 0.0 ||
        !std::isfinite(grid_init_jitter) || grid_init_jitter < 0.0) {
        throw std::invalid_argument("init amplitudes must be finite and non-negative");
    }
}

FitTrace distill_fit(const Scene& scene, const SceneSpec& spec, const FitConfig& config) {
    config.validate();
    StudentState state =
        init_student_state(scene, spec, parse_init_mode(config.init_mode), config.init_noise_amplitude);
    if (config.grid_init_jitter > 0.0) {
        Rng rng(derive_seed(config.seed, kTagGridJitter));
        for (double& v : state.bev.values) v += config.grid_init_jitter * rng.normal();
    }
    return run_fit(scene, spec, config, std::move(state));
}

FitTrace distill_fit(const Scene& scene, const SceneSpec& spec, const FitConfig& config,
                     const StudentState& initial) {
    config.validate();
    check_compatible(scene, spec, initial);
    return run_fit(scene, spec, config, initial);
}

}  // namespace igd
