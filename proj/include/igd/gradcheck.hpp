#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "igd/fit.hpp"

namespace igd {

enum class LossKind {
    AbsDepthBce,
    InnerDepth,
    InterChannel,
    InterKeypoint,
    BevDistill,
    Total,
};

/// Accepts "abs-depth-bce", "inner-depth", "inter-channel", "inter-keypoint",
/// "bev-distill" and "total"; anything else throws std::domain_error.
LossKind parse_loss_kind(const std::string& name);
std::string to_string(LossKind kind);

/// A self-contained random test point: a small scene plus a random student
/// state kept away from BCE clamp boundaries and reference-selection ties, so
/// every sampled coordinate is differentiable.
struct GradCheckInstance {
    SceneSpec spec;
    Scene scene;
    SceneBindings bindings;
    StudentState state;
    LossWeights weights;
};

GradCheckInstance make_gradcheck_instance(std::uint64_t seed);

/// The selected loss term alone, on the instance.
double eval_loss_kind(LossKind kind, const GradCheckInstance& inst);

/// Compares the analytical gradient against central finite differences on
/// `coords` sampled coordinates (biased toward the gradient's support) and
/// returns the worst relative error, with denominator max(|a|, |n|, 1e-12).
/// epsilon must lie in (0, 1e-3].
double finite_diff_check(LossKind kind, const GradCheckInstance& inst, double epsilon, int coords,
                         std::uint64_t coord_seed);

struct GradCheckRow {
    LossKind kind = LossKind::Total;
    int instances = 0;
    int coords_per_instance = 0;
    double max_rel_error = 0.0;
};

/// Runs finite_diff_check for every loss kind over `instances` fresh random
/// instances each.
std::vector<GradCheckRow> gradcheck_suite(std::uint64_t seed, int instances, int coords,
                                          double epsilon);

}  // namespace igd
