#include "igd/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "igd/rng.hpp"

namespace igd {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSurfaceInset = 0.995;
constexpr int kMaxPlacementAttempts = 1000;

// Stream tags; each generation stage draws from its own derived seed so a
// change in one stage never shifts another.
constexpr std::uint64_t kTagBoxes = 1;
constexpr std::uint64_t kTagSurface = 2;
constexpr std::uint64_t kTagBackground = 3;
constexpr std::uint64_t kTagTeacher = 4;
constexpr std::uint64_t kTagInit = 5;

void check_range(const ValueRange& r, const char* what, bool positive) {
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi) {
        throw std::invalid_argument(std::string(what) + " range is not a valid interval");
    }
    if (positive && r.lo <= 0.0) {
        throw std::invalid_argument(std::string(what) + " range must be positive");
    }
}

Vec3 box_to_world(const Box3D& box, const Vec3& local) {
    const double c = std::cos(box.yaw);
    const double s = std::sin(box.yaw);
    return {box.center.x + c * local.x - s * local.y,
            box.center.y + s * local.x + c * local.y,
            box.center.z + local.z};
}

bool footprint_inside(const Box3D& box, double enlarge, const BevSpec& bev) {
    const Box3D big = enlarge_box_bev(box, enlarge);
    for (const double sx : {-0.5, 0.5}) {
        for (const double sy : {-0.5, 0.5}) {
            const Vec3 corner = box_to_world(big, {sx * big.length, sy * big.width, 0.0});
            if (corner.x < bev.x_min || corner.x > bev.x_max ||
                corner.y < bev.y_min || corner.y > bev.y_max) {
                return false;
            }
        }
    }
    return true;
}

bool footprints_apart(const Box3D& a, const Box3D& b, double enlarge) {
    const Box3D ea = enlarge_box_bev(a, enlarge);
    const Box3D eb = enlarge_box_bev(b, enlarge);
    const double dx = ea.center.x - eb.center.x;
    const double dy = ea.center.y - eb.center.y;
    const double reach_a = 0.5 * std::hypot(ea.length, ea.width);
    const double reach_b = 0.5 * std::hypot(eb.length, eb.width);
    return std::hypot(dx, dy) >= 1.1 * (reach_a + reach_b);
}

bool visible_from_any_camera(const std::vector<CameraModel>& cameras, const Vec3& p) {
    PointCloud single;
    single.points.push_back(p);
    for (const CameraModel& cam : cameras) {
        if (!project_points(cam, single).empty()) return true;
    }
    return false;
}

bool inside_any_box(const std::vector<Box3D>& boxes, const Vec3& p) {
    for (const Box3D& box : boxes) {
        const Vec3 q = to_box_frame(box, p);
        if (std::abs(q.x) <= 0.5 * box.length && std::abs(q.y) <= 0.5 * box.width &&
            std::abs(q.z) <= 0.5 * box.height) {
            return true;
        }
    }
    return false;
}

std::vector<CameraModel> build_rig(const CameraRigSpec& rig) {
    const double hfov = rig.hfov_deg * kPi / 180.0;
    const double fx = 0.5 * rig.width / std::tan(0.5 * hfov);
    const Vec3 pos{0.0, 0.0, rig.mount_height};
    std::vector<CameraModel> cams;
    cams.reserve(rig.count);
    for (int k = 0; k < rig.count; ++k) {
        const double spread = rig.yaw_spread_deg * kPi / 180.0;
        const double yaw = rig.count == 1 ? 0.0 : -0.5 * spread + k * spread / (rig.count - 1);
        const double c = std::cos(yaw);
        const double s = std::sin(yaw);
        CameraModel cam;
        cam.fx = fx;
        cam.fy = fx;
        cam.cx = 0.5 * rig.width;
        cam.cy = 0.5 * rig.height;
        cam.width = rig.width;
        cam.height = rig.height;
        // Rows are the camera axes in world coordinates: +x right, +y down,
        // +z forward along the yawed ground direction.
        cam.rotation = {{{s, -c, 0.0}, {0.0, 0.0, -1.0}, {c, s, 0.0}}};
        for (int i = 0; i < 3; ++i) {
            cam.translation[i] = -(cam.rotation[i][0] * pos.x + cam.rotation[i][1] * pos.y +
                                   cam.rotation[i][2] * pos.z);
        }
        cams.push_back(cam);
    }
    return cams;
}

// One box face: fixed local axis and sign, free extents on the other two.
struct Face {
    Vec3 normal;  ///< outward, box frame
    double area;
};

void sample_surface_points(const Box3D& box, const Vec3& bias_target, int count, Rng& rng,
                           std::vector<Vec3>& out) {
    const double hl = 0.5 * box.length;
    const double hw = 0.5 * box.width;
    const double hh = 0.5 * box.height;
    const Face faces[6] = {
        {{1.0, 0.0, 0.0}, box.width * box.height},  {{-1.0, 0.0, 0.0}, box.width * box.height},
        {{0.0, 1.0, 0.0}, box.length * box.height}, {{0.0, -1.0, 0.0}, box.length * box.height},
        {{0.0, 0.0, 1.0}, box.length * box.width},  {{0.0, 0.0, -1.0}, box.length * box.width}};

    Vec3 d = bias_target - box.center;
    const double dn = std::sqrt(dot(d, d));
    d = dn > 0.0 ? (1.0 / dn) * d : Vec3{1.0, 0.0, 0.0};

    double weights[6];
    double total = 0.0;
    for (int f = 0; f < 6; ++f) {
        const Vec3 n_world = box_to_world(box, faces[f].normal) - box.center;
        weights[f] = faces[f].area * (std::max(0.0, dot(n_world, d)) + 0.15);
        total += weights[f];
    }

    for (int i = 0; i < count; ++i) {
        double pick = rng.uniform() * total;
        int f = 0;
        while (f < 5 && pick >= weights[f]) pick -= weights[f], ++f;
        const double a = rng.uniform(-1.0, 1.0) * kSurfaceInset;
        const double b = rng.uniform(-1.0, 1.0) * kSurfaceInset;
        Vec3 local;
        if (faces[f].normal.x != 0.0) {
            local = {faces[f].normal.x * hl * kSurfaceInset, a * hw, b * hh};
        } else if (faces[f].normal.y != 0.0) {
            local = {a * hl, faces[f].normal.y * hw * kSurfaceInset, b * hh};
        } else {
            local = {a * hl, b * hw, faces[f].normal.z * hh * kSurfaceInset};
        }
        out.push_back(box_to_world(box, local));
    }
}

}  // namespace

void CameraRigSpec::validate() const {
    if (count < 1) throw std::invalid_argument("camera rig needs at least one camera");
    if (width < 1 || height < 1) throw std::invalid_argument("camera image must be at least 1x1");
    if (!(hfov_deg > 0.0) || hfov_deg >= 180.0) {
        throw std::invalid_argument("horizontal fov must lie in (0, 180) degrees");
    }
    if (!std::isfinite(mount_height)) throw std::invalid_argument("mount height must be finite");
    if (!std::isfinite(yaw_spread_deg) || yaw_spread_deg < 0.0) {
        throw std::invalid_argument("yaw spread must be finite and non-negative");
    }
}

void SceneSpec::validate() const {
    if (num_targets < 0) throw std::invalid_argument("num_targets must be non-negative");
    if (points_per_target < 1) throw std::invalid_argument("points_per_target must be positive");
    if (background_points < 0) throw std::invalid_argument("background_points must be non-negative");
    check_range(target_x, "target x", false);
    check_range(target_y, "target y", false);
    check_range(target_length, "target length", true);
    check_range(target_width, "target width", true);
    check_range(target_height, "target height", true);
    rig.validate();
    bins.validate();
    bev.validate();
    if (channels < 1) throw std::invalid_argument("channels must be positive");
    if (grid_side < 1) throw std::invalid_argument("grid_side must be positive");
    if (enlarge < 1.0) throw std::invalid_argument("enlarge factor must be >= 1");
    if (!std::isfinite(teacher_background_amplitude) || teacher_background_amplitude < 0.0 ||
        !std::isfinite(teacher_signature_amplitude) || teacher_signature_amplitude < 0.0) {
        throw std::invalid_argument("teacher amplitudes must be finite and non-negative");
    }
}

void Scene::validate() const {
    for (const Box3D& box : boxes) box.validate();
    cloud.validate();
    for (const CameraModel& cam : cameras) cam.validate();
    teacher_bev.validate();
    if (gt_depth.size() != cameras.size()) {
        throw std::invalid_argument("scene needs one ground-truth depth map per camera");
    }
    for (const GroundTruthDepthMap& m : gt_depth) m.validate();
}

void StudentState::validate() const {
    for (const CategoricalDepthMap& m : probs) m.validate();
    bev.validate();
}

InitMode parse_init_mode(const std::string& name) {
    if (name == "uniform") return InitMode::Uniform;
    if (name == "noisy-teacher") return InitMode::NoisyTeacher;
    if (name == "random") return InitMode::Random;
    throw std::domain_error("unknown init mode: " + name);
}

std::string to_string(InitMode mode) {
    switch (mode) {
        case InitMode::Uniform: return "uniform";
        case InitMode::NoisyTeacher: return "noisy-teacher";
        case InitMode::Random: return "random";
    }
    throw std::domain_error("unknown init mode value");
}

Scene gen_scene(const SceneSpec& spec) {
    spec.validate();

    Scene scene;
    scene.cameras = build_rig(spec.rig);

    Rng box_rng(derive_seed(spec.seed, kTagBoxes));
    for (int j = 0; j < spec.num_targets; ++j) {
        bool placed = false;
        for (int attempt = 0; attempt < kMaxPlacementAttempts && !placed; ++attempt) {
            Box3D box;
            box.length = box_rng.uniform(spec.target_length.lo, spec.target_length.hi);
            box.width = box_rng.uniform(spec.target_width.lo, spec.target_width.hi);
            box.height = box_rng.uniform(spec.target_height.lo, spec.target_height.hi);
            box.center = {box_rng.uniform(spec.target_x.lo, spec.target_x.hi),
                          box_rng.uniform(spec.target_y.lo, spec.target_y.hi), 0.5 * box.height};
            box.yaw = box_rng.uniform(-kPi, kPi);

            if (!footprint_inside(box, spec.enlarge, spec.bev)) continue;
            if (!visible_from_any_camera(scene.cameras, box.center)) continue;
            bool apart = true;
            for (const Box3D& other : scene.boxes) {
                if (!footprints_apart(box, other, spec.enlarge)) {
                    apart = false;
                    break;
                }
            }
            if (!apart) continue;
            scene.boxes.push_back(box);
            placed = true;
        }
        if (!placed) {
            throw std::domain_error("scene spec ranges leave no room to place targets");
        }
    }

    const Vec3 rig_pos{0.0, 0.0, spec.rig.mount_height};
    for (std::size_t j = 0; j < scene.boxes.size(); ++j) {
        Rng point_rng(derive_seed(spec.seed, kTagSurface, j));
        sample_surface_points(scene.boxes[j], rig_pos, spec.points_per_target, point_rng,
                              scene.cloud.points);
    }

    Rng bg_rng(derive_seed(spec.seed, kTagBackground));
    for (int i = 0; i < spec.background_points; ++i) {
        bool placed = false;
        for (int attempt = 0; attempt < kMaxPlacementAttempts && !placed; ++attempt) {
            const Vec3 p{bg_rng.uniform(spec.bev.x_min, spec.bev.x_max),
                         bg_rng.uniform(spec.bev.y_min, spec.bev.y_max), 0.0};
            if (inside_any_box(scene.boxes, p)) continue;
            scene.cloud.points.push_back(p);
            placed = true;
        }
        if (!placed) {
            throw std::domain_error("could not place background points outside the targets");
        }
    }

    scene.gt_depth.reserve(scene.cameras.size());
    for (const CameraModel& cam : scene.cameras) {
        scene.gt_depth.push_back(rasterize_gt_depth(cam, scene.cloud));
    }

    scene.teacher_bev = gen_teacher_bev(scene, spec);
    return scene;
}

BevFeatureGrid gen_teacher_bev(const Scene& scene, const SceneSpec& spec) {
    spec.validate();
    BevFeatureGrid grid = BevFeatureGrid::zeros(spec.channels, spec.bev);
    Rng rng(derive_seed(spec.seed, kTagTeacher));

    // Low-frequency background: three cosine waves per channel over the
    // metric extents.
    struct Wave {
        double amp, kx, ky, phase;
    };
    std::vector<Wave> waves(static_cast<std::size_t>(spec.channels) * 3);
    for (Wave& w : waves) {
        w.amp = spec.teacher_background_amplitude * rng.uniform(0.5, 1.0);
        w.kx = rng.uniform(-3.0, 3.0);
        w.ky = rng.uniform(-3.0, 3.0);
        w.phase = rng.uniform(0.0, 2.0 * kPi);
    }
    for (int c = 0; c < spec.channels; ++c) {
        for (int r = 0; r < spec.bev.rows; ++r) {
            for (int col = 0; col < spec.bev.cols; ++col) {
                double x, y;
                bev_grid_to_world(spec.bev, r, col, x, y);
                double v = 0.0;
                for (int w = 0; w < 3; ++w) {
                    const Wave& wv = waves[static_cast<std::size_t>(c) * 3 + w];
                    v += wv.amp * std::cos(wv.kx * x + wv.ky * y + wv.phase);
                }
                grid.at(c, r, col) = v;
            }
        }
    }

    // Per-box channel signature, windowed by a cosine bump over the enlarged
    // footprint. The odd along-length component makes the field asymmetric,
    // so keypoint Grams see the box orientation.
    for (const Box3D& box : scene.boxes) {
        const Box3D big = enlarge_box_bev(box, spec.enlarge);
        std::vector<double> even(spec.channels), odd(spec.channels);
        for (int c = 0; c < spec.channels; ++c) {
            even[c] = spec.teacher_signature_amplitude * rng.normal();
            odd[c] = 0.5 * spec.teacher_signature_amplitude * rng.normal();
        }
        for (int r = 0; r < spec.bev.rows; ++r) {
            for (int col = 0; col < spec.bev.cols; ++col) {
                double x, y;
                bev_grid_to_world(spec.bev, r, col, x, y);
                const Vec3 q = to_box_frame(big, {x, y, big.center.z});
                if (std::abs(q.x) > 0.5 * big.length || std::abs(q.y) > 0.5 * big.width) continue;
                const double bump =
                    std::cos(kPi * q.x / big.length) * std::cos(kPi * q.y / big.width);
                const double along = 2.0 * q.x / big.length;
                for (int c = 0; c < spec.channels; ++c) {
                    grid.at(c, r, col) += (even[c] + odd[c] * along) * bump;
                }
            }
        }
    }
    return grid;
}

StudentState init_student_state(const Scene& scene, const SceneSpec& spec, InitMode mode,
                                double noise_amplitude) {
    spec.validate();
    if (!std::isfinite(noise_amplitude) || noise_amplitude < 0.0) {
        throw std::domain_error("noise amplitude must be finite and non-negative");
    }
    const int k = spec.bins.bins;
    StudentState state;
    state.probs.reserve(scene.cameras.size());

    Rng rng(derive_seed(spec.seed, kTagInit));
    switch (mode) {
        case InitMode::Uniform: {
            for (const CameraModel& cam : scene.cameras) {
                state.probs.push_back(CategoricalDepthMap::uniform(cam.height, cam.width, k));
            }
            state.bev = BevFeatureGrid::zeros(spec.channels, spec.bev);
            break;
        }
        case InitMode::NoisyTeacher: {
            for (const CameraModel& cam : scene.cameras) {
                state.probs.push_back(CategoricalDepthMap::uniform(cam.height, cam.width, k));
            }
            state.bev = scene.teacher_bev;
            for (double& v : state.bev.values) v += noise_amplitude * rng.normal();
            break;
        }
        case InitMode::Random: {
            for (const CameraModel& cam : scene.cameras) {
                CategoricalDepthMap map = CategoricalDepthMap::uniform(cam.height, cam.width, k);
                for (int y = 0; y < map.height; ++y) {
                    for (int x = 0; x < map.width; ++x) {
                        double sum = 0.0;
                        for (int b = 0; b < k; ++b) {
                            double u = rng.uniform();
                            while (u <= 0.0) u = rng.uniform();
                            map.at(x, y, b) = -std::log(u);
                            sum += map.at(x, y, b);
                        }
                        for (int b = 0; b < k; ++b) map.at(x, y, b) /= sum;
                    }
                }
                state.probs.push_back(std::move(map));
            }
            state.bev = BevFeatureGrid::zeros(spec.channels, spec.bev);
            for (double& v : state.bev.values) v = noise_amplitude * rng.normal();
            break;
        }
        default:
            throw std::domain_error("unknown init mode value");
    }
    return state;
}

}  // namespace igd
