#pragma once

// Shared random builders for the unit tests. All draws go through igd::Rng so
// every test is reproducible from its literal seed.

#include <cmath>
#include <vector>

#include "igd/bev.hpp"
#include "igd/depth.hpp"
#include "igd/geometry.hpp"
#include "igd/rng.hpp"

#include <Eigen/Dense>

namespace testutil {

/// Camera at `pos` yawed about the vertical axis, looking along the ground.
inline igd::CameraModel make_camera(double yaw, const igd::Vec3& pos, double fx = 90.0,
                                    int width = 64, int height = 48) {
    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    igd::CameraModel cam;
    cam.fx = fx;
    cam.fy = fx;
    cam.cx = 0.5 * width;
    cam.cy = 0.5 * height;
    cam.width = width;
    cam.height = height;
    cam.rotation = {{{s, -c, 0.0}, {0.0, 0.0, -1.0}, {c, s, 0.0}}};
    for (int i = 0; i < 3; ++i) {
        cam.translation[i] = -(cam.rotation[i][0] * pos.x + cam.rotation[i][1] * pos.y +
                               cam.rotation[i][2] * pos.z);
    }
    return cam;
}

/// Camera with identity rotation and zero translation (camera frame == world).
inline igd::CameraModel identity_camera(double fx = 100.0, double cx = 50.0, double cy = 50.0,
                                        int width = 100, int height = 100) {
    igd::CameraModel cam;
    cam.fx = fx;
    cam.fy = fx;
    cam.cx = cx;
    cam.cy = cy;
    cam.width = width;
    cam.height = height;
    cam.rotation = {{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
    cam.translation = {0.0, 0.0, 0.0};
    return cam;
}

inline igd::Box3D random_box(igd::Rng& rng) {
    igd::Box3D box;
    box.center = {rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0), rng.uniform(-1.0, 1.0)};
    box.length = rng.uniform(0.5, 4.0);
    box.width = rng.uniform(0.5, 3.0);
    box.height = rng.uniform(0.5, 2.0);
    box.yaw = rng.uniform(-3.14159265358979323846, 3.14159265358979323846);
    return box;
}

inline std::vector<double> random_simplex(igd::Rng& rng, int k) {
    std::vector<double> p(k);
    double sum = 0.0;
    for (double& v : p) {
        double u = rng.uniform();
        while (u <= 0.0) u = rng.uniform();
        v = -std::log(u);
        sum += v;
    }
    for (double& v : p) v /= sum;
    return p;
}

inline igd::CategoricalDepthMap random_depth_map(igd::Rng& rng, int height, int width, int bins) {
    igd::CategoricalDepthMap map = igd::CategoricalDepthMap::uniform(height, width, bins);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const std::vector<double> p = random_simplex(rng, bins);
            for (int k = 0; k < bins; ++k) map.at(x, y, k) = p[k];
        }
    }
    return map;
}

inline igd::KeypointFeatures random_features(igd::Rng& rng, int n, int c, double scale = 1.0) {
    igd::KeypointFeatures f(n, c);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < c; ++j) f(i, j) = scale * rng.normal();
    }
    return f;
}

inline igd::BevFeatureGrid random_grid(igd::Rng& rng, int channels, const igd::BevSpec& spec,
                                       double scale = 1.0) {
    igd::BevFeatureGrid grid = igd::BevFeatureGrid::zeros(channels, spec);
    for (double& v : grid.values) v = scale * rng.normal();
    return grid;
}

/// Random orthogonal matrix via QR of a normal matrix.
inline Eigen::MatrixXd random_orthogonal(igd::Rng& rng, int n) {
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) m(i, j) = rng.normal();
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    Eigen::MatrixXd q = qr.householderQ();
    return q;
}

}  // namespace testutil
