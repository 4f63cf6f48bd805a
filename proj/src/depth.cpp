#include "igd/depth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace igd {

namespace {

constexpr double kProbClampLo = 1e-7;
constexpr double kProbClampHi = 1.0 - 1e-7;

void check_pixels_in_bounds(const CategoricalDepthMap& map, const std::vector<PixelCoord>& pixels) {
    for (const PixelCoord& p : pixels) {
        if (!map.in_bounds(p.x, p.y)) {
            throw std::domain_error("pixel outside categorical depth map bounds");
        }
    }
}

void check_bins_match(const CategoricalDepthMap& map, const DepthBinSpec& spec) {
    if (map.bins != spec.bins) {
        throw std::domain_error("categorical depth map and bin spec disagree on bin count");
    }
}

}  // namespace

int DepthBinSpec::bin_index(double depth) const {
    const double d = std::clamp(depth, min_depth, max_depth);
    const int k = static_cast<int>((d - min_depth) / bin_width());
    return std::clamp(k, 0, bins - 1);
}

void DepthBinSpec::validate() const {
    if (bins < 2) throw std::invalid_argument("depth bin spec needs at least 2 bins");
    if (!(min_depth > 0.0) || !(max_depth > min_depth)) {
        throw std::invalid_argument("depth bin spec requires 0 < min_depth < max_depth");
    }
}

void CategoricalDepthMap::validate() const {
    if (height < 1 || width < 1 || bins < 2) {
        throw std::invalid_argument("categorical depth map has degenerate shape");
    }
    if (probs.size() != static_cast<std::size_t>(height) * width * bins) {
        throw std::invalid_argument("categorical depth map storage does not match its shape");
    }
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double sum = 0.0;
            for (int k = 0; k < bins; ++k) {
                const double p = at(x, y, k);
                if (!(p >= 0.0 && p <= 1.0)) {
                    throw std::invalid_argument("categorical depth map entry outside [0, 1]");
                }
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-6) {
                throw std::invalid_argument("categorical depth map pixel does not sum to 1");
            }
        }
    }
}

CategoricalDepthMap CategoricalDepthMap::uniform(int height, int width, int bins) {
    CategoricalDepthMap m;
    m.height = height;
    m.width = width;
    m.bins = bins;
    m.probs.assign(static_cast<std::size_t>(height) * width * bins, 1.0 / bins);
    return m;
}

void GroundTruthDepthMap::validate() const {
    if (height < 1 || width < 1) throw std::invalid_argument("depth map has degenerate shape");
    const std::size_t n = static_cast<std::size_t>(height) * width;
    if (depth.size() != n || valid.size() != n) {
        throw std::invalid_argument("depth map storage does not match its shape");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (valid[i] && !(depth[i] > 0.0 && std::isfinite(depth[i]))) {
            throw std::invalid_argument("valid depth pixels must be positive and finite");
        }
    }
}

void TargetPixelSet::validate() const {
    if (pixels.empty()) throw std::invalid_argument("target pixel set is empty");
    if (gt_depth.size() != pixels.size()) {
        throw std::invalid_argument("target pixel set depth list misaligned with pixels");
    }
    for (const double d : gt_depth) {
        if (!(d > 0.0)) throw std::invalid_argument("target ground-truth depths must be positive");
    }
    std::set<std::pair<int, int>> seen;
    for (const PixelCoord& p : pixels) {
        if (!seen.insert({p.y, p.x}).second) {
            throw std::invalid_argument("target pixel set contains duplicate pixels");
        }
    }
}

DepthProbsGrad DepthProbsGrad::zeros(int height, int width, int bins) {
    DepthProbsGrad g;
    g.height = height;
    g.width = width;
    g.bins = bins;
    g.values.assign(static_cast<std::size_t>(height) * width * bins, 0.0);
    return g;
}

GroundTruthDepthMap rasterize_gt_depth(const CameraModel& camera, const PointCloud& cloud) {
    GroundTruthDepthMap map;
    map.height = camera.height;
    map.width = camera.width;
    const std::size_t n = static_cast<std::size_t>(camera.height) * camera.width;
    map.depth.assign(n, 0.0);
    map.valid.assign(n, 0);
    for (const ProjectedPoint& p : project_points(camera, cloud)) {
        const int x = static_cast<int>(std::floor(p.u));
        const int y = static_cast<int>(std::floor(p.v));
        const std::size_t idx = static_cast<std::size_t>(y) * camera.width + x;
        if (!map.valid[idx] || p.depth < map.depth[idx]) {
            map.depth[idx] = p.depth;
            map.valid[idx] = 1;
        }
    }
    return map;
}

std::vector<TargetPixelSet> localize_foreground(const CameraModel& camera, const PointCloud& cloud,
                                                const std::vector<Box3D>& boxes) {
    std::vector<TargetPixelSet> out;
    for (std::size_t j = 0; j < boxes.size(); ++j) {
        const std::vector<std::size_t> inside = points_in_box(cloud, boxes[j]);
        PointCloud sub;
        sub.points.reserve(inside.size());
        for (const std::size_t i : inside) sub.points.push_back(cloud.points[i]);

        // Row-major pixel order; per-pixel minimum depth (nearest surface).
        std::map<std::pair<int, int>, double> per_pixel;
        for (const ProjectedPoint& p : project_points(camera, sub)) {
            const std::pair<int, int> key{static_cast<int>(std::floor(p.v)),
                                          static_cast<int>(std::floor(p.u))};
            auto [it, fresh] = per_pixel.try_emplace(key, p.depth);
            if (!fresh && p.depth < it->second) it->second = p.depth;
        }
        if (per_pixel.empty()) continue;

        TargetPixelSet set;
        set.target_id = static_cast<int>(j);
        set.pixels.reserve(per_pixel.size());
        set.gt_depth.reserve(per_pixel.size());
        for (const auto& [key, d] : per_pixel) {
            set.pixels.push_back({key.second, key.first});
            set.gt_depth.push_back(d);
        }
        out.push_back(std::move(set));
    }
    return out;
}

std::vector<double> expected_depth(const CategoricalDepthMap& map, const DepthBinSpec& spec,
                                   const std::vector<PixelCoord>& pixels) {
    check_bins_match(map, spec);
    check_pixels_in_bounds(map, pixels);
    std::vector<double> out;
    out.reserve(pixels.size());
    for (const PixelCoord& p : pixels) {
        double d = 0.0;
        for (int k = 0; k < spec.bins; ++k) d += spec.center(k) * map.at(p.x, p.y, k);
        out.push_back(d);
    }
    return out;
}

std::vector<std::vector<double>> expected_depth_grad(const CategoricalDepthMap& map, const DepthBinSpec& spec,
                                                     const std::vector<PixelCoord>& pixels) {
    check_bins_match(map, spec);
    check_pixels_in_bounds(map, pixels);
    std::vector<double> centers(spec.bins);
    for (int k = 0; k < spec.bins; ++k) centers[k] = spec.center(k);
    return std::vector<std::vector<double>>(pixels.size(), centers);
}

std::size_t select_reference(const std::vector<double>& pred, const std::vector<double>& gt) {
    if (pred.empty() || pred.size() != gt.size()) {
        throw std::domain_error("select_reference needs nonempty lists of equal length");
    }
    std::size_t best = 0;
    double best_err = std::abs(gt[0] - pred[0]);
    for (std::size_t i = 1; i < pred.size(); ++i) {
        const double err = std::abs(gt[i] - pred[i]);
        if (err < best_err) {
            best = i;
            best_err = err;
        }
    }
    return best;
}

std::pair<std::vector<double>, std::vector<double>> inner_depth_residuals(const std::vector<double>& pred,
                                                                          const std::vector<double>& gt,
                                                                          std::size_t ref_index) {
    if (pred.size() != gt.size() || ref_index >= pred.size()) {
        throw std::domain_error("inner_depth_residuals got an invalid reference index");
    }
    std::vector<double> pr(pred.size()), gr(gt.size());
    const double p0 = pred[ref_index];
    const double g0 = gt[ref_index];
    for (std::size_t i = 0; i < pred.size(); ++i) {
        pr[i] = pred[i] - p0;
        gr[i] = gt[i] - g0;
    }
    return {std::move(pr), std::move(gr)};
}

InnerDepthLoss inner_depth_loss(const std::vector<TargetPixelSet>& targets, const CategoricalDepthMap& map,
                                const DepthBinSpec& spec) {
    InnerDepthLoss result;
    int active = 0;
    for (const TargetPixelSet& target : targets) {
        if (target.pixels.empty()) continue;
        const std::vector<double> pred = expected_depth(map, spec, target.pixels);
        const std::size_t ref = select_reference(pred, target.gt_depth);
        auto [pr, gr] = inner_depth_residuals(pred, target.gt_depth, ref);

        double sq = 0.0;
        for (std::size_t i = 0; i < pr.size(); ++i) {
            const double d = pr[i] - gr[i];
            sq += d * d;
        }
        InnerDepthResult r;
        r.reference_pixel = target.pixels[ref];
        r.loss = sq / static_cast<double>(pr.size());
        r.pred_residuals = std::move(pr);
        r.gt_residuals = std::move(gr);
        result.loss += r.loss;
        result.per_target.push_back(std::move(r));
        ++active;
    }
    result.loss = active > 0 ? result.loss / active : 0.0;
    return result;
}

DepthProbsGrad inner_depth_loss_grad(const std::vector<TargetPixelSet>& targets, const CategoricalDepthMap& map,
                                     const DepthBinSpec& spec) {
    check_bins_match(map, spec);
    DepthProbsGrad grad = DepthProbsGrad::zeros(map.height, map.width, map.bins);

    int active = 0;
    for (const TargetPixelSet& t : targets) {
        if (!t.pixels.empty()) ++active;
    }
    if (active == 0) return grad;
    const double inv_m = 1.0 / active;

    std::vector<double> centers(spec.bins);
    for (int k = 0; k < spec.bins; ++k) centers[k] = spec.center(k);

    for (const TargetPixelSet& target : targets) {
        if (target.pixels.empty()) continue;
        const std::vector<double> pred = expected_depth(map, spec, target.pixels);
        const std::size_t ref = select_reference(pred, target.gt_depth);
        const auto [pr, gr] = inner_depth_residuals(pred, target.gt_depth, ref);

        const double n = static_cast<double>(pr.size());
        // d loss_j / d pred[q] = (2/n) (r_q - [q == ref] * sum_p r_p),
        // with r the residual difference; the ref index is held fixed.
        double r_sum = 0.0;
        std::vector<double> r(pr.size());
        for (std::size_t i = 0; i < pr.size(); ++i) {
            r[i] = pr[i] - gr[i];
            r_sum += r[i];
        }
        for (std::size_t q = 0; q < pr.size(); ++q) {
            double d_pred = (2.0 / n) * r[q];
            if (q == ref) d_pred -= (2.0 / n) * r_sum;
            if (d_pred == 0.0) continue;
            const PixelCoord px = target.pixels[q];
            for (int k = 0; k < spec.bins; ++k) {
                grad.at(px.x, px.y, k) += inv_m * d_pred * centers[k];
            }
        }
    }
    return grad;
}

BceResult absolute_depth_bce(const CategoricalDepthMap& map, const GroundTruthDepthMap& gt,
                             const DepthBinSpec& spec) {
    check_bins_match(map, spec);
    if (map.height != gt.height || map.width != gt.width) {
        throw std::domain_error("categorical depth map and ground truth shapes disagree");
    }
    BceResult result;
    result.grad = DepthProbsGrad::zeros(map.height, map.width, map.bins);

    std::size_t valid_count = 0;
    for (int y = 0; y < gt.height; ++y) {
        for (int x = 0; x < gt.width; ++x) {
            if (gt.valid_at(x, y)) ++valid_count;
        }
    }
    if (valid_count == 0) return result;

    const double norm = 1.0 / (static_cast<double>(valid_count) * spec.bins);
    double loss = 0.0;
    for (int y = 0; y < gt.height; ++y) {
        for (int x = 0; x < gt.width; ++x) {
            if (!gt.valid_at(x, y)) continue;
            const int hot = spec.bin_index(gt.depth_at(x, y));
            for (int k = 0; k < spec.bins; ++k) {
                const double raw = map.at(x, y, k);
                const double p = std::clamp(raw, kProbClampLo, kProbClampHi);
                const double t = (k == hot) ? 1.0 : 0.0;
                loss -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
                // Clamp is part of the expression: flat outside its range.
                if (raw >= kProbClampLo && raw <= kProbClampHi) {
                    result.grad.at(x, y, k) = norm * (-t / p + (1.0 - t) / (1.0 - p));
                }
            }
        }
    }
    result.loss = loss * norm;
    return result;
}

}  // namespace igd
