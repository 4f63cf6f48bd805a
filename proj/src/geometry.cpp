#include "igd/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace igd {

void CameraModel::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) {
        throw std::invalid_argument("camera focal lengths must be positive");
    }
    if (width < 1 || height < 1) {
        throw std::invalid_argument("camera image size must be at least 1x1");
    }
    if (!std::isfinite(cx) || !std::isfinite(cy)) {
        throw std::invalid_argument("camera principal point must be finite");
    }
    for (const double t : translation) {
        if (!std::isfinite(t)) throw std::invalid_argument("camera translation must be finite");
    }
    // R^T R = I within 1e-9.
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += rotation[k][a] * rotation[k][b];
            const double expect = (a == b) ? 1.0 : 0.0;
            if (!(std::abs(s - expect) <= 1e-9)) {
                throw std::invalid_argument("camera rotation is not orthonormal");
            }
        }
    }
}

void PointCloud::validate() const {
    for (const Vec3& p : points) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
            throw std::invalid_argument("point cloud contains non-finite coordinates");
        }
    }
}

void Box3D::validate() const {
    if (!(length > 0.0) || !(width > 0.0) || !(height > 0.0)) {
        throw std::invalid_argument("box size components must be positive");
    }
    if (!std::isfinite(yaw)) throw std::invalid_argument("box yaw must be finite");
    if (!std::isfinite(center.x) || !std::isfinite(center.y) || !std::isfinite(center.z)) {
        throw std::invalid_argument("box center must be finite");
    }
}

void BevSpec::validate() const {
    if (!(x_max > x_min) || !(y_max > y_min)) {
        throw std::invalid_argument("bev extents must satisfy x_max > x_min and y_max > y_min");
    }
    if (rows < 2 || cols < 2) {
        throw std::invalid_argument("bev raster needs at least 2x2 cells");
    }
}

Vec3 world_to_camera(const CameraModel& camera, const Vec3& p) {
    const auto& r = camera.rotation;
    return {r[0][0] * p.x + r[0][1] * p.y + r[0][2] * p.z + camera.translation[0],
            r[1][0] * p.x + r[1][1] * p.y + r[1][2] * p.z + camera.translation[1],
            r[2][0] * p.x + r[2][1] * p.y + r[2][2] * p.z + camera.translation[2]};
}

Vec3 camera_to_world(const CameraModel& camera, const Vec3& p) {
    const auto& r = camera.rotation;
    const double dx = p.x - camera.translation[0];
    const double dy = p.y - camera.translation[1];
    const double dz = p.z - camera.translation[2];
    // R is orthonormal, so the inverse is the transpose.
    return {r[0][0] * dx + r[1][0] * dy + r[2][0] * dz,
            r[0][1] * dx + r[1][1] * dy + r[2][1] * dz,
            r[0][2] * dx + r[1][2] * dy + r[2][2] * dz};
}

Vec3 to_box_frame(const Box3D& box, const Vec3& p) {
    const double dx = p.x - box.center.x;
    const double dy = p.y - box.center.y;
    const double c = std::cos(box.yaw);
    const double s = std::sin(box.yaw);
    return {c * dx + s * dy, -s * dx + c * dy, p.z - box.center.z};
}

std::vector<ProjectedPoint> project_points(const CameraModel& camera, const PointCloud& cloud) {
    camera.validate();
    std::vector<ProjectedPoint> out;
    out.reserve(cloud.points.size());
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        const Vec3 pc = world_to_camera(camera, cloud.points[i]);
        if (!(pc.z > 0.0)) continue;
        const double u = camera.fx * pc.x / pc.z + camera.cx;
        const double v = camera.fy * pc.y / pc.z + camera.cy;
        if (u < 0.0 || u >= camera.width || v < 0.0 || v >= camera.height) continue;
        out.push_back({u, v, pc.z, i});
    }
    return out;
}

Vec3 backproject_pixel(const CameraModel& camera, double u, double v, double depth) {
    camera.validate();
    if (!(depth > 0.0)) throw std::domain_error("backproject_pixel requires depth > 0");
    const Vec3 pc{(u - camera.cx) / camera.fx * depth, (v - camera.cy) / camera.fy * depth, depth};
    return camera_to_world(camera, pc);
}

std::vector<std::size_t> points_in_box(const PointCloud& cloud, const Box3D& box) {
    box.validate();
    const double hx = 0.5 * box.length;
    const double hy = 0.5 * box.width;
    const double hz = 0.5 * box.height;
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        const Vec3 q = to_box_frame(box, cloud.points[i]);
        if (std::abs(q.x) <= hx && std::abs(q.y) <= hy && std::abs(q.z) <= hz) {
            out.push_back(i);
        }
    }
    return out;
}

Box3D enlarge_box_bev(const Box3D& box, double factor) {
    if (!(factor >= 1.0)) throw std::domain_error("enlarge_box_bev requires factor >= 1");
    Box3D e = box;
    e.length = box.length * factor;
    e.width = box.width * factor;
    return e;
}

GridCoord bev_world_to_grid(const BevSpec& spec, double x, double y) {
    const double row = (x - spec.x_min) / (spec.x_max - spec.x_min) * (spec.rows - 1);
    const double col = (y - spec.y_min) / (spec.y_max - spec.y_min) * (spec.cols - 1);
    return {row, col};
}

void bev_grid_to_world(const BevSpec& spec, double row, double col, double& x, double& y) {
    x = spec.x_min + row / (spec.rows - 1) * (spec.x_max - spec.x_min);
    y = spec.y_min + col / (spec.cols - 1) * (spec.y_max - spec.y_min);
}

}  // namespace igd
