#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "igd/loss.hpp"
#include "igd/metrics.hpp"
#include "igd/synthetic.hpp"

namespace igd {

/// Scene-derived quantities that stay fixed while the student changes:
/// per-camera foreground pixel sets, per-box keypoint lattices and the
/// teacher keypoint features (row-normalized when requested).
struct SceneBindings {
    std::vector<std::vector<TargetPixelSet>> targets;  ///< [camera][visible target]
    std::vector<std::vector<BevPoint>> keypoints;      ///< [box][keypoint]
    std::vector<KeypointFeatures> teacher_features;    ///< [box], N x C
    bool normalize_keypoints = false;
};

SceneBindings bind_scene(const Scene& scene, const SceneSpec& spec, bool normalize_keypoints);

/// Throws std::domain_error unless the state's shapes match the scene.
void check_compatible(const Scene& scene, const SceneSpec& spec, const StudentState& state);

/// Depth terms are averaged over cameras; BEV terms run over all boxes.
LossReport eval_losses(const Scene& scene, const SceneSpec& spec, const SceneBindings& bindings,
                       const StudentState& state, const LossWeights& weights);

struct LossEval {
    LossReport report;
    TotalGrads grads;
};

LossEval eval_losses_with_grads(const Scene& scene, const SceneSpec& spec,
                                const SceneBindings& bindings, const StudentState& state,
                                const LossWeights& weights);

/// Metric suite over the union of all cameras' foreground pixels, predicted
/// depth taken as the categorical expectation. Throws std::domain_error when
/// no target pixel is visible anywhere.
DepthMetricReport target_depth_metrics(const SceneSpec& spec, const SceneBindings& bindings,
                                       const StudentState& state);

/// Per-box Frobenius distance between student and teacher Grams, channel and
/// keypoint parts summed.
std::vector<double> gram_mismatch(const SceneBindings& bindings, const StudentState& state);

struct FitConfig {
    int steps = 500;
    double learning_rate = 0.05;
    LossWeights weights;
    std::uint64_t seed = 7;
    int record_every = 25;
    std::string simplex_projection = "renormalize";  ///< or "none"
    std::string init_mode = "uniform";
    double init_noise_amplitude = 0.1;
    bool normalize_keypoints = false;
    /// Amplitude of the seeded perturbation added to the initial student grid.
    /// A zero grid is a stationary point of both Gram losses, so plain descent
    /// from the uniform init would never move it; the jitter breaks that.
    double grid_init_jitter = 0.02;

    void validate() const;
};

struct FitRecord {
    int step = 0;  ///< number of updates applied before this evaluation
    LossReport report;
};

struct FitTrace {
    std::vector<FitRecord> records;
    DepthMetricReport initial_metrics;
    DepthMetricReport final_metrics;
    std::vector<double> initial_gram_mismatch;  ///< per box
    std::vector<double> final_gram_mismatch;
    bool diverged = false;
    StudentState final_state;
};

/// Plain gradient descent on (depth probs, student grid) against the weighted
/// total with det = 0. Records the loss every record_every updates (and at
/// the start and end); after each update the probs are re-projected onto the
/// simplex unless projection is "none". A non-finite loss stops the run,
/// marks the trace diverged and rolls final_state back to the last state
/// whose loss was finite, so every traced value stays serializable. Throws
/// std::domain_error if already the initial state evaluates non-finite.
FitTrace distill_fit(const Scene& scene, const SceneSpec& spec, const FitConfig& config);

/// Same, but starting from a caller-supplied state instead of the config's
/// init mode; no jitter is applied.
FitTrace distill_fit(const Scene& scene, const SceneSpec& spec, const FitConfig& config,
                     const StudentState& initial);

}  // namespace igd
