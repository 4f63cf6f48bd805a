#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "igd/bev.hpp"
#include "igd/depth.hpp"
#include "igd/geometry.hpp"

namespace igd {

/// Closed interval used by the scene sampler.
struct ValueRange {
    double lo = 0.0, hi = 0.0;
};

/// Forward-facing pinhole rig: `count` identical cameras share one mount
/// position above the origin and fan out symmetrically over `yaw_spread_deg`.
struct CameraRigSpec {
    int count = 2;
    int width = 128, height = 96;   ///< pixels
    double hfov_deg = 70.0;
    double mount_height = 0.25;     ///< meters above the ground plane
    double yaw_spread_deg = 30.0;

    void validate() const;
};

/// Everything that determines a generated scene. The seed fixes all sampled
/// quantities; two specs with equal fields produce bitwise-identical scenes.
///
/// The default geometry is tabletop-scale on purpose: the curvature of the
/// depth objectives grows with the square of the metric depth values, and
/// gradient descent at the default learning rate is only stable when depths
/// stay within a few meters.
struct SceneSpec {
    std::uint64_t seed = 7;
    int num_targets = 4;
    ValueRange target_x{1.0, 2.2};  ///< box center, meters
    ValueRange target_y{-0.7, 0.7};
    ValueRange target_length{0.28, 0.42};
    ValueRange target_width{0.14, 0.20};
    ValueRange target_height{0.12, 0.18};
    int points_per_target = 120;
    int background_points = 400;
    CameraRigSpec rig;
    DepthBinSpec bins{32, 0.4, 2.8};
    BevSpec bev{-3.0, 3.0, -3.0, 3.0, 64, 64};
    int channels = 16;
    int grid_side = 4;     ///< keypoints per target = grid_side^2
    double enlarge = 1.25; ///< BEV box enlargement for keypoint placement
    double teacher_background_amplitude = 0.1;
    double teacher_signature_amplitude = 2.0;

    void validate() const;
};

struct Scene {
    std::vector<Box3D> boxes;
    PointCloud cloud;  ///< target surface points first (box order), then background
    std::vector<CameraModel> cameras;
    BevFeatureGrid teacher_bev;
    std::vector<GroundTruthDepthMap> gt_depth;  ///< one per camera

    void validate() const;
};

enum class InitMode { Uniform, NoisyTeacher, Random };

/// Accepts "uniform", "noisy-teacher" and "random"; anything else throws
/// std::domain_error.
InitMode parse_init_mode(const std::string& name);
std::string to_string(InitMode mode);

/// The optimized variables: one categorical depth map per camera plus the
/// student BEV feature grid.
struct StudentState {
    std::vector<CategoricalDepthMap> probs;
    BevFeatureGrid bev;

    void validate() const;
};

/// Samples boxes, surface and ground points, builds the camera rig,
/// rasterizes per-camera depth ground truth and attaches the teacher grid.
/// Boxes are placed with disjoint enlarged footprints inside the BEV extents
/// and with their centers visible from at least one camera; target points lie
/// on the box shell, biased toward camera-facing faces. Throws
/// std::domain_error when the ranges leave no room to place targets.
Scene gen_scene(const SceneSpec& spec);

/// Teacher features: a smooth low-frequency background field plus, per box, a
/// seeded channel signature windowed to the enlarged BEV footprint. The
/// signature has an along-length asymmetric part so keypoint Grams carry
/// orientation.
BevFeatureGrid gen_teacher_bev(const Scene& scene, const SceneSpec& spec);

/// Initial optimizer state. uniform: 1/K probs and a zero grid; noisy-teacher:
/// uniform probs and the teacher grid plus seeded normal noise of the given
/// amplitude; random: seeded random simplex per pixel and a normal grid scaled
/// by the amplitude.
StudentState init_student_state(const Scene& scene, const SceneSpec& spec, InitMode mode,
                                double noise_amplitude = 0.1);

}  // namespace igd
