#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "igd/geometry.hpp"

namespace igd {

/// Uniform discretization of [min_depth, max_depth] into `bins` bins.
struct DepthBinSpec {
    int bins = 64;
    double min_depth = 1.0;
    double max_depth = 60.0;

    double bin_width() const { return (max_depth - min_depth) / bins; }

    /// Depth value of the k-th bin center.
    double center(int k) const { return min_depth + (k + 0.5) * bin_width(); }

    /// Bin containing `depth` after clamping to [min_depth, max_depth].
    int bin_index(double depth) const;

    void validate() const;
};

/// Per-pixel probability vectors over depth bins. Layout is
/// (y * width + x) * bins + k.
struct CategoricalDepthMap {
    int height = 0, width = 0, bins = 0;
    std::vector<double> probs;

    double at(int x, int y, int k) const { return probs[(static_cast<std::size_t>(y) * width + x) * bins + k]; }
    double& at(int x, int y, int k) { return probs[(static_cast<std::size_t>(y) * width + x) * bins + k]; }

    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

    /// Checks shape, entry range [0,1] and per-pixel normalization within 1e-6.
    void validate() const;

    static CategoricalDepthMap uniform(int height, int width, int bins);
};

/// Sparse metric depth raster; `valid` marks pixels that received a value.
struct GroundTruthDepthMap {
    int height = 0, width = 0;
    std::vector<double> depth;          ///< meters, y * width + x
    std::vector<std::uint8_t> valid;

    double depth_at(int x, int y) const { return depth[static_cast<std::size_t>(y) * width + x]; }
    bool valid_at(int x, int y) const { return valid[static_cast<std::size_t>(y) * width + x] != 0; }

    void validate() const;
};

struct PixelCoord {
    int x = 0, y = 0;  ///< x is the column, y the row
};

inline bool operator==(const PixelCoord& a, const PixelCoord& b) { return a.x == b.x && a.y == b.y; }

/// Foreground pixels of one object target with their ground-truth depths.
struct TargetPixelSet {
    int target_id = 0;
    std::vector<PixelCoord> pixels;   ///< unique, row-major order
    std::vector<double> gt_depth;     ///< meters, aligned with pixels

    void validate() const;
};

/// Per-target outcome of the inner-depth chain. Residuals are relative to the
/// selected reference pixel and are exactly zero there.
struct InnerDepthResult {
    PixelCoord reference_pixel;
    std::vector<double> pred_residuals;
    std::vector<double> gt_residuals;
    double loss = 0.0;
};

struct InnerDepthLoss {
    double loss = 0.0;
    std::vector<InnerDepthResult> per_target;
};

/// Gradient tensor shaped like CategoricalDepthMap::probs.
struct DepthProbsGrad {
    int height = 0, width = 0, bins = 0;
    std::vector<double> values;

    double at(int x, int y, int k) const { return values[(static_cast<std::size_t>(y) * width + x) * bins + k]; }
    double& at(int x, int y, int k) { return values[(static_cast<std::size_t>(y) * width + x) * bins + k]; }

    static DepthProbsGrad zeros(int height, int width, int bins);
};

/// Projects the cloud onto the image and keeps, per pixel, the minimum depth
/// among the points landing in it (floor of u, v).
GroundTruthDepthMap rasterize_gt_depth(const CameraModel& camera, const PointCloud& cloud);

/// Foreground pixel sets: for each box, the distinct image pixels of its
/// in-box points with per-pixel minimum depth. Boxes with no on-image points
/// produce no entry; target_id keeps the original box index.
std::vector<TargetPixelSet> localize_foreground(const CameraModel& camera, const PointCloud& cloud,
                                                const std::vector<Box3D>& boxes);

/// Continuous depth per pixel: expectation of bin centers under the
/// categorical distribution. Throws std::domain_error on out-of-bounds pixels
/// or a bin-count mismatch.
std::vector<double> expected_depth(const CategoricalDepthMap& map, const DepthBinSpec& spec,
                                   const std::vector<PixelCoord>& pixels);

/// d(expected depth)/d(probs) per pixel; each row is the bin-center vector.
std::vector<std::vector<double>> expected_depth_grad(const CategoricalDepthMap& map, const DepthBinSpec& spec,
                                                     const std::vector<PixelCoord>& pixels);

/// Index minimizing |gt - pred|; ties break to the lowest index. Throws
/// std::domain_error on empty or mismatched inputs.
std::size_t select_reference(const std::vector<double>& pred, const std::vector<double>& gt);

/// Residuals relative to the entry at ref_index; exactly zero there.
std::pair<std::vector<double>, std::vector<double>> inner_depth_residuals(const std::vector<double>& pred,
                                                                          const std::vector<double>& gt,
                                                                          std::size_t ref_index);

/// Inner-depth supervision: per target, mean squared difference between
/// predicted and ground-truth residuals; total is the per-target mean.
InnerDepthLoss inner_depth_loss(const std::vector<TargetPixelSet>& targets, const CategoricalDepthMap& map,
                                const DepthBinSpec& spec);

/// Exact gradient of inner_depth_loss w.r.t. probs. The reference selection
/// is treated as a constant of the forward pass; gradient flows through both
/// the pixel and the reference predictions.
DepthProbsGrad inner_depth_loss_grad(const std::vector<TargetPixelSet>& targets, const CategoricalDepthMap& map,
                                     const DepthBinSpec& spec);

struct BceResult {
    double loss = 0.0;
    DepthProbsGrad grad;
};

/// Dense absolute-depth binary cross entropy against a one-hot target at the
/// bin containing the (clamped) ground-truth depth, averaged over valid
/// pixels and bins. Probabilities are clamped to [1e-7, 1 - 1e-7]; the
/// gradient is the exact derivative of the clamped expression.
BceResult absolute_depth_bce(const CategoricalDepthMap& map, const GroundTruthDepthMap& gt,
                             const DepthBinSpec& spec);

}  // namespace igd
