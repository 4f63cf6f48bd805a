#include "igd/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace igd {

namespace {

void check_same_shape(const DepthProbsGrad& a, const DepthProbsGrad& b) {
    if (a.height != b.height || a.width != b.width || a.bins != b.bins) {
        throw std::domain_error("per-term depth gradients disagree in shape");
    }
}

void check_same_shape(const BevFeatureGrid& a, const BevFeatureGrid& b) {
    if (a.channels != b.channels || a.spec.rows != b.spec.rows || a.spec.cols != b.spec.cols) {
        throw std::domain_error("per-term grid gradients disagree in shape");
    }
}

void axpy(double w, const DepthProbsGrad& g, DepthProbsGrad& acc) {
    for (std::size_t i = 0; i < acc.values.size(); ++i) acc.values[i] += w * g.values[i];
}

void axpy(double w, const BevFeatureGrid& g, BevFeatureGrid& acc) {
    for (std::size_t i = 0; i < acc.values.size(); ++i) acc.values[i] += w * g.values[i];
}

}  // namespace

void LossWeights::validate() const {
    for (const double w : {w_det, w_abs_depth, w_inner_depth, w_ic, w_ik}) {
        if (!std::isfinite(w) || w < 0.0) {
            throw std::invalid_argument("loss weights must be finite and non-negative");
        }
    }
}

LossReport total_loss(const DepthLossTerms& depth_terms, const BevLossTerms& bev_terms,
                      double det_value, const LossWeights& weights) {
    weights.validate();
    for (const double v : {det_value, depth_terms.abs_depth, depth_terms.inner_depth,
                           bev_terms.inter_channel, bev_terms.inter_keypoint}) {
        if (!std::isfinite(v)) throw std::domain_error("loss terms must be finite");
    }
    LossReport r;
    r.det = det_value;
    r.abs_depth = depth_terms.abs_depth;
    r.inner_depth = depth_terms.inner_depth;
    r.inter_channel = bev_terms.inter_channel;
    r.inter_keypoint = bev_terms.inter_keypoint;
    r.total = weights.w_det * r.det + weights.w_abs_depth * r.abs_depth +
              weights.w_inner_depth * r.inner_depth + weights.w_ic * r.inter_channel +
              weights.w_ik * r.inter_keypoint;
    return r;
}

TotalGrads total_grad(const TermGrads& grads, const LossWeights& weights) {
    weights.validate();
    if (grads.abs_depth.size() != grads.inner_depth.size()) {
        throw std::domain_error("abs and inner depth gradients cover different camera counts");
    }
    check_same_shape(grads.inter_channel, grads.inter_keypoint);
    if (grads.det) check_same_shape(*grads.det, grads.inter_channel);

    TotalGrads out;
    out.probs.reserve(grads.abs_depth.size());
    for (std::size_t cam = 0; cam < grads.abs_depth.size(); ++cam) {
        check_same_shape(grads.abs_depth[cam], grads.inner_depth[cam]);
        DepthProbsGrad g = DepthProbsGrad::zeros(grads.abs_depth[cam].height,
                                                 grads.abs_depth[cam].width,
                                                 grads.abs_depth[cam].bins);
        axpy(weights.w_abs_depth, grads.abs_depth[cam], g);
        axpy(weights.w_inner_depth, grads.inner_depth[cam], g);
        out.probs.push_back(std::move(g));
    }
    out.grid = BevFeatureGrid::zeros(grads.inter_channel.channels, grads.inter_channel.spec);
    axpy(weights.w_ic, grads.inter_channel, out.grid);
    axpy(weights.w_ik, grads.inter_keypoint, out.grid);
    if (grads.det) axpy(weights.w_det, *grads.det, out.grid);
    return out;
}

}  // namespace igd
