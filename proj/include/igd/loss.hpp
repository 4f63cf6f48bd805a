#pragma once

#include <optional>
#include <vector>

#include "igd/bev.hpp"
#include "igd/depth.hpp"

namespace igd {

/// Per-term weights of the overall objective. Defaults of 1.0 reproduce the
/// plain unweighted sum.
struct LossWeights {
    double w_det = 1.0;
    double w_abs_depth = 1.0;
    double w_inner_depth = 1.0;
    double w_ic = 1.0;
    double w_ik = 1.0;

    void validate() const;
};

struct DepthLossTerms {
    double abs_depth = 0.0;
    double inner_depth = 0.0;
};

struct BevLossTerms {
    double inter_channel = 0.0;
    double inter_keypoint = 0.0;
};

/// Unweighted per-term values plus their weighted total.
struct LossReport {
    double total = 0.0;
    double det = 0.0;
    double abs_depth = 0.0;
    double inner_depth = 0.0;
    double inter_channel = 0.0;
    double inter_keypoint = 0.0;
};

/// Per-term gradients before weighting. Depth gradients are per camera and
/// shaped like the categorical depth probs; BEV gradients are shaped like the
/// student grid. The detection gradient is optional because the detection
/// loss is an externally supplied scalar.
struct TermGrads {
    std::vector<DepthProbsGrad> abs_depth;
    std::vector<DepthProbsGrad> inner_depth;
    BevFeatureGrid inter_channel;
    BevFeatureGrid inter_keypoint;
    std::optional<BevFeatureGrid> det;
};

/// Weighted sum of the per-term gradients.
struct TotalGrads {
    std::vector<DepthProbsGrad> probs;
    BevFeatureGrid grid;
};

/// total = w_det*det + w_abs*abs + w_inner*inner + w_ic*ic + w_ik*ik.
LossReport total_loss(const DepthLossTerms& depth_terms, const BevLossTerms& bev_terms,
                      double det_value, const LossWeights& weights);

TotalGrads total_grad(const TermGrads& grads, const LossWeights& weights);

}  // namespace igd
