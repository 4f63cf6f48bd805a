#pragma once

#include <vector>

namespace igd {

/// Depth-estimation error and accuracy summary over a pixel set.
struct DepthMetricReport {
    double rmse = 0.0;
    double rmse_log = 0.0;
    double abs_rel = 0.0;
    double sq_rel = 0.0;
    double log10 = 0.0;
    double silog = 0.0;
    double delta1 = 0.0;  ///< fraction with max(d/d*, d*/d) < 1.25
    double delta2 = 0.0;  ///< threshold 1.25^2
    double delta3 = 0.0;  ///< threshold 1.25^3
    int n = 0;            ///< evaluated pixel count
};

/// Computes the full metric suite over paired depth lists (meters).
/// Predictions are clamped to >= 1e-6 before log-based metrics and ratio
/// thresholds. Throws std::domain_error on empty input, length mismatch, or
/// non-positive ground truth.
DepthMetricReport depth_metrics(const std::vector<double>& pred, const std::vector<double>& gt);

}  // namespace igd
