#include "igd/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "igd/rng.hpp"

namespace igd {

namespace {

constexpr std::uint64_t kTagInstance = 11;
constexpr std::uint64_t kTagSuiteInstance = 20;
constexpr std::uint64_t kTagSuiteCoords = 40;

LossWeights kind_weights(LossKind kind, const LossWeights& total_weights) {
    LossWeights w;
    w.w_det = w.w_abs_depth = w.w_inner_depth = w.w_ic = w.w_ik = 0.0;
    switch (kind) {
        case LossKind::AbsDepthBce: w.w_abs_depth = 1.0; break;
        case LossKind::InnerDepth: w.w_inner_depth = 1.0; break;
        case LossKind::InterChannel: w.w_ic = 1.0; break;
        case LossKind::InterKeypoint: w.w_ik = 1.0; break;
        case LossKind::BevDistill: w.w_ic = w.w_ik = 1.0; break;
        case LossKind::Total: w = total_weights; break;
    }
    return w;
}

bool uses_probs(LossKind kind) {
    return kind == LossKind::AbsDepthBce || kind == LossKind::InnerDepth || kind == LossKind::Total;
}

bool uses_grid(LossKind kind) {
    return kind == LossKind::InterChannel || kind == LossKind::InterKeypoint ||
           kind == LossKind::BevDistill || kind == LossKind::Total;
}

// The reference pixel is picked by an argmin over |gt - pred|; a finite
// difference across a near-tie would step over the selection switch. Demand a
// clear gap between the two smallest distances.
bool reference_margins_ok(const GradCheckInstance& inst, double margin) {
    for (std::size_t cam = 0; cam < inst.bindings.targets.size(); ++cam) {
        for (const TargetPixelSet& t : inst.bindings.targets[cam]) {
            if (t.pixels.size() < 2) continue;
            const std::vector<double> pred =
                expected_depth(inst.state.probs[cam], inst.spec.bins, t.pixels);
            double best = 1e300, second = 1e300;
            for (std::size_t i = 0; i < pred.size(); ++i) {
                const double d = std::abs(t.gt_depth[i] - pred[i]);
                if (d < best) {
                    second = best;
                    best = d;
                } else if (d < second) {
                    second = d;
                }
            }
            if (second - best < margin) return false;
        }
    }
    return true;
}

struct CoordRef {
    bool grid = false;
    std::size_t cam = 0;
    std::size_t idx = 0;
};

}  // namespace

LossKind parse_loss_kind(const std::string& name) {
    if (name == "abs-depth-bce") return LossKind::AbsDepthBce;
    if (name == "inner-depth") return LossKind::InnerDepth;
    if (name == "inter-channel") return LossKind::InterChannel;
    if (name == "inter-keypoint") return LossKind::InterKeypoint;
    if (name == "bev-distill") return LossKind::BevDistill;
    if (name == "total") return LossKind::Total;
    throw std::domain_error("unknown loss kind: " + name);
}

std::string to_string(LossKind kind) {
    switch (kind) {
        case LossKind::AbsDepthBce: return "abs-depth-bce";
        case LossKind::InnerDepth: return "inner-depth";
        case LossKind::InterChannel: return "inter-channel";
        case LossKind::InterKeypoint: return "inter-keypoint";
        case LossKind::BevDistill: return "bev-distill";
        case LossKind::Total: return "total";
    }
    throw std::domain_error("unknown loss kind value");
}

GradCheckInstance make_gradcheck_instance(std::uint64_t seed) {
    for (int trial = 0; trial < 50; ++trial) {
        SceneSpec spec;
        spec.seed = derive_seed(seed, kTagInstance, trial);
        spec.num_targets = 2;
        spec.target_x = {5.0, 14.0};
        spec.target_y = {-5.0, 5.0};
        spec.target_length = {3.5, 5.0};
        spec.target_width = {1.6, 2.2};
        spec.target_height = {1.4, 1.9};
        spec.points_per_target = 60;
        spec.background_points = 80;
        spec.rig.count = 1;
        spec.rig.width = 32;
        spec.rig.height = 24;
        spec.rig.mount_height = 1.6;
        spec.bins = {8, 1.0, 30.0};
        spec.bev = {-20.0, 20.0, -20.0, 20.0, 24, 24};
        spec.channels = 4;
        spec.grid_side = 2;

        GradCheckInstance inst;
        inst.spec = spec;
        inst.scene = gen_scene(spec);
        inst.state = init_student_state(inst.scene, spec, InitMode::Random, 0.5);
        for (CategoricalDepthMap& map : inst.state.probs) {
            for (double& p : map.probs) p = 0.9 * p + 0.1 / map.bins;
        }
        inst.bindings = bind_scene(inst.scene, spec, false);
        if (reference_margins_ok(inst, 0.1)) return inst;
    }
    throw std::domain_error("could not build a gradcheck instance with stable reference selection");
}

double eval_loss_kind(LossKind kind, const GradCheckInstance& inst) {
    return eval_losses(inst.scene, inst.spec, inst.bindings, inst.state,
                       kind_weights(kind, inst.weights))
        .total;
}

double finite_diff_check(LossKind kind, const GradCheckInstance& inst, double epsilon, int coords,
                         std::uint64_t coord_seed) {
    if (!(epsilon > 0.0) || epsilon > 1e-3) {
        throw std::domain_error("finite difference epsilon must lie in (0, 1e-3]");
    }
    if (coords < 1) throw std::domain_error("finite_diff_check needs at least one coordinate");

    const LossWeights weights = kind_weights(kind, inst.weights);
    const LossEval ev =
        eval_losses_with_grads(inst.scene, inst.spec, inst.bindings, inst.state, weights);

    // Central differences resolve a derivative only down to roughly
    // loss * ulp / epsilon, so the support sample sticks to coordinates whose
    // gradient is within four decades of the largest one.
    double gmax = 0.0;
    std::size_t probs_total = 0;
    if (uses_probs(kind)) {
        for (const DepthProbsGrad& g : ev.grads.probs) {
            probs_total += g.values.size();
            for (const double v : g.values) gmax = std::max(gmax, std::abs(v));
        }
    }
    const std::size_t grid_total = uses_grid(kind) ? ev.grads.grid.values.size() : 0;
    for (std::size_t i = 0; i < grid_total; ++i) {
        gmax = std::max(gmax, std::abs(ev.grads.grid.values[i]));
    }
    const double cut = 1e-4 * gmax;

    std::vector<CoordRef> support;
    if (uses_probs(kind)) {
        for (std::size_t cam = 0; cam < ev.grads.probs.size(); ++cam) {
            for (std::size_t i = 0; i < ev.grads.probs[cam].values.size(); ++i) {
                if (std::abs(ev.grads.probs[cam].values[i]) > cut) {
                    support.push_back({false, cam, i});
                }
            }
        }
    }
    for (std::size_t i = 0; i < grid_total; ++i) {
        if (std::abs(ev.grads.grid.values[i]) > cut) support.push_back({true, 0, i});
    }

    GradCheckInstance work = inst;
    Rng rng(coord_seed);
    double worst = 0.0;
    for (int c = 0; c < coords; ++c) {
        CoordRef co;
        if (c % 2 == 0 && !support.empty()) {
            co = support[static_cast<std::size_t>(rng.uniform() * support.size()) % support.size()];
        } else {
            std::size_t flat =
                static_cast<std::size_t>(rng.uniform() * (probs_total + grid_total)) %
                (probs_total + grid_total);
            if (flat < probs_total) {
                co.grid = false;
                for (co.cam = 0; flat >= work.state.probs[co.cam].probs.size(); ++co.cam) {
                    flat -= work.state.probs[co.cam].probs.size();
                }
                co.idx = flat;
            } else {
                co = {true, 0, flat - probs_total};
            }
        }
        double& slot = co.grid ? work.state.bev.values[co.idx]
                               : work.state.probs[co.cam].probs[co.idx];
        const double analytic =
            co.grid ? ev.grads.grid.values[co.idx] : ev.grads.probs[co.cam].values[co.idx];
        const double orig = slot;
        slot = orig + epsilon;
        const double fp = eval_loss_kind(kind, work);
        slot = orig - epsilon;
        const double fm = eval_loss_kind(kind, work);
        slot = orig;
        const double numeric = (fp - fm) / (2.0 * epsilon);
        const double err =
            std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-12});
        worst = std::max(worst, err);
    }
    return worst;
}

std::vector<GradCheckRow> gradcheck_suite(std::uint64_t seed, int instances, int coords,
                                          double epsilon) {
    const LossKind kinds[] = {LossKind::AbsDepthBce,  LossKind::InnerDepth,
                              LossKind::InterChannel, LossKind::InterKeypoint,
                              LossKind::BevDistill,   LossKind::Total};
    std::vector<GradCheckRow> rows;
    for (std::size_t k = 0; k < 6; ++k) {
        GradCheckRow row;
        row.kind = kinds[k];
        row.instances = instances;
        row.coords_per_instance = coords;
        for (int i = 0; i < instances; ++i) {
            const GradCheckInstance inst =
                make_gradcheck_instance(derive_seed(seed, kTagSuiteInstance + k, i));
            const double err = finite_diff_check(kinds[k], inst, epsilon, coords,
                                                 derive_seed(seed, kTagSuiteCoords + k, i));
            row.max_rel_error = std::max(row.max_rel_error, err);
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace igd
