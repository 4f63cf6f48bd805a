#pragma once

#include <Eigen/Core>
#include <vector>

#include "igd/geometry.hpp"

namespace igd {

/// C-channel feature raster over metric BEV extents. Layout is
/// (c * rows + r) * cols + col. Also used as the container for grid-shaped
/// gradients.
struct BevFeatureGrid {
    int channels = 0;
    BevSpec spec;
    std::vector<double> values;

    double at(int c, int r, int col) const {
        return values[(static_cast<std::size_t>(c) * spec.rows + r) * spec.cols + col];
    }
    double& at(int c, int r, int col) {
        return values[(static_cast<std::size_t>(c) * spec.rows + r) * spec.cols + col];
    }

    void validate() const;

    static BevFeatureGrid zeros(int channels, const BevSpec& spec);
};

/// N x C matrix of per-target keypoint features: one row per keypoint, one
/// column per channel.
using KeypointFeatures = Eigen::MatrixXd;

struct GramPair {
    Eigen::MatrixXd channel_gram;   ///< C x C
    Eigen::MatrixXd keypoint_gram;  ///< N x N
};

struct BevPoint {
    double x = 0.0, y = 0.0;  ///< meters, world frame
};

struct BevDistillLoss {
    double total = 0.0;
    double inter_channel = 0.0;
    double inter_keypoint = 0.0;
};

/// Uniform grid_side^2 lattice at the cell centers of the enlarged box's BEV
/// footprint, rotated by yaw and translated to world coordinates. Row-major
/// in the box's local frame (local x outer, local y inner).
std::vector<BevPoint> sample_keypoint_coords(const Box3D& box, double enlarge, int grid_side);

/// Bilinear interpolation of the grid at world coordinates; continuous grid
/// coordinates are clamped to the raster (clamp-to-edge). Output row order
/// matches the input order.
KeypointFeatures bilinear_sample(const BevFeatureGrid& grid, const std::vector<BevPoint>& coords);

/// Adjoint of bilinear_sample: scatters `upstream` (N x C) into the four
/// neighbor cells per point. Gradient w.r.t. grid values only.
BevFeatureGrid bilinear_sample_grad(const BevFeatureGrid& grid, const std::vector<BevPoint>& coords,
                                    const Eigen::MatrixXd& upstream);

/// Inter-channel similarities f^T f (C x C).
Eigen::MatrixXd gram_inter_channel(const KeypointFeatures& f);

/// Inter-keypoint similarities f f^T (N x N).
Eigen::MatrixXd gram_inter_keypoint(const KeypointFeatures& f);

/// Squared Frobenius mismatch of inter-channel Grams, normalized by M * C^2.
double inter_channel_loss(const std::vector<KeypointFeatures>& student,
                          const std::vector<KeypointFeatures>& teacher);

/// Squared Frobenius mismatch of inter-keypoint Grams, normalized by M * N^2.
double inter_keypoint_loss(const std::vector<KeypointFeatures>& student,
                           const std::vector<KeypointFeatures>& teacher);

/// Sum of the two Gram losses.
BevDistillLoss bev_distill_loss(const std::vector<KeypointFeatures>& student,
                                const std::vector<KeypointFeatures>& teacher);

/// Gradient of inter_channel_loss w.r.t. each student feature matrix;
/// the teacher is a constant.
std::vector<Eigen::MatrixXd> inter_channel_loss_grad(const std::vector<KeypointFeatures>& student,
                                                     const std::vector<KeypointFeatures>& teacher);

/// Gradient of inter_keypoint_loss w.r.t. each student feature matrix.
std::vector<Eigen::MatrixXd> inter_keypoint_loss_grad(const std::vector<KeypointFeatures>& student,
                                                      const std::vector<KeypointFeatures>& teacher);

/// Exact gradient of bev_distill_loss w.r.t. each student feature matrix;
/// the teacher is a constant.
std::vector<Eigen::MatrixXd> bev_distill_loss_grad(const std::vector<KeypointFeatures>& student,
                                                   const std::vector<KeypointFeatures>& teacher);

/// Optional unit-norm rows before Gram computation (off by default in the
/// pipeline). Rows with norm below 1e-12 pass through unchanged.
KeypointFeatures normalize_rows(const KeypointFeatures& f);

/// Backward of normalize_rows w.r.t. the raw features.
Eigen::MatrixXd normalize_rows_grad(const KeypointFeatures& raw, const Eigen::MatrixXd& upstream);

}  // namespace igd
