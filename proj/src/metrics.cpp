#include "igd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace igd {

DepthMetricReport depth_metrics(const std::vector<double>& pred, const std::vector<double>& gt) {
    if (pred.empty()) throw std::domain_error("depth_metrics needs at least one pixel");
    if (pred.size() != gt.size()) throw std::domain_error("depth_metrics input lengths differ");

    const double n = static_cast<double>(pred.size());
    double se = 0.0, se_log = 0.0, abs_rel = 0.0, sq_rel = 0.0, l10 = 0.0;
    // Welford running variance of the log error; the textbook E[g^2]-E[g]^2
    // form cancels catastrophically when predictions are near a constant
    // multiple of the ground truth.
    double g_mean = 0.0, g_m2 = 0.0;
    int d1 = 0, d2 = 0, d3 = 0;
    const double t1 = 1.25, t2 = 1.25 * 1.25, t3 = 1.25 * 1.25 * 1.25;

    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double dstar = gt[i];
        if (!(dstar > 0.0) || !std::isfinite(dstar) || !std::isfinite(pred[i])) {
            throw std::domain_error("depth_metrics requires finite inputs and positive ground truth");
        }
        const double d = std::max(pred[i], 1e-6);
        const double err = pred[i] - dstar;
        se += err * err;
        abs_rel += std::abs(err) / dstar;
        sq_rel += err * err / dstar;
        const double g = std::log(d) - std::log(dstar);
        se_log += g * g;
        const double delta = g - g_mean;
        g_mean += delta / static_cast<double>(i + 1);
        g_m2 += delta * (g - g_mean);
        l10 += std::abs(std::log10(d) - std::log10(dstar));
        const double ratio = std::max(d / dstar, dstar / d);
        if (ratio < t1) ++d1;
        if (ratio < t2) ++d2;
        if (ratio < t3) ++d3;
    }

    DepthMetricReport r;
    r.rmse = std::sqrt(se / n);
    r.rmse_log = std::sqrt(se_log / n);
    r.abs_rel = abs_rel / n;
    r.sq_rel = sq_rel / n;
    r.log10 = l10 / n;
    r.silog = 100.0 * std::sqrt(std::max(0.0, g_m2 / n));
    r.delta1 = d1 / n;
    r.delta2 = d2 / n;
    r.delta3 = d3 / n;
    r.n = static_cast<int>(pred.size());
    return r;
}

}  // namespace igd
