#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace igd {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, const Vec3& v) { return {s * v.x, s * v.y, s * v.z}; }
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

/// Pinhole camera. `rotation` maps world to camera coordinates
/// (camera frame: +x right, +y down, +z forward); `translation` is the
/// world->camera offset so that p_cam = R * p_world + t.
struct CameraModel {
    double fx = 0.0, fy = 0.0;  ///< focal lengths, pixels
    double cx = 0.0, cy = 0.0;  ///< principal point, pixels
    std::array<std::array<double, 3>, 3> rotation{};
    std::array<double, 3> translation{};
    int width = 0, height = 0;  ///< image size, pixels

    /// Throws std::invalid_argument unless rotation is orthonormal within
    /// 1e-9, fx/fy are positive and the image is at least 1x1.
    void validate() const;
};

struct PointCloud {
    std::vector<Vec3> points;  ///< meters, world frame

    /// Throws std::invalid_argument if any coordinate is non-finite.
    void validate() const;
};

/// Upright 3D box: `length` along the local x axis, `width` along local y,
/// `height` along z, rotated by `yaw` about the vertical axis.
struct Box3D {
    Vec3 center;
    double length = 0.0, width = 0.0, height = 0.0;
    double yaw = 0.0;

    void validate() const;
};

/// Metric extents and cell counts of a BEV raster. Cell centers span the
/// extents exactly: (x_min, y_min) is the center of cell (0, 0) and
/// (x_max, y_max) the center of cell (rows-1, cols-1).
struct BevSpec {
    double x_min = 0.0, x_max = 0.0;
    double y_min = 0.0, y_max = 0.0;
    int rows = 0, cols = 0;

    void validate() const;
};

struct ProjectedPoint {
    double u = 0.0, v = 0.0;  ///< continuous pixel coordinates
    double depth = 0.0;       ///< camera-frame z, meters
    std::size_t point_index = 0;
};

struct GridCoord {
    double row = 0.0, col = 0.0;  ///< continuous cell coordinates
};

Vec3 world_to_camera(const CameraModel& camera, const Vec3& p);
Vec3 camera_to_world(const CameraModel& camera, const Vec3& p);

/// Expresses a world point in the box frame (translate by -center, rotate by
/// -yaw).
Vec3 to_box_frame(const Box3D& box, const Vec3& p);

/// Projects every cloud point with positive camera-frame depth onto the image
/// and keeps the ones landing inside [0, width) x [0, height).
std::vector<ProjectedPoint> project_points(const CameraModel& camera, const PointCloud& cloud);

/// Inverse of project_points for a single pixel. Throws std::domain_error if
/// depth <= 0.
Vec3 backproject_pixel(const CameraModel& camera, double u, double v, double depth);

/// Indices of cloud points inside the box, boundary inclusive.
std::vector<std::size_t> points_in_box(const PointCloud& cloud, const Box3D& box);

/// Scales length and width by `factor` (>= 1); height, center and yaw are
/// unchanged. Throws std::domain_error if factor < 1.
Box3D enlarge_box_bev(const Box3D& box, double factor);

/// Affine world->grid map; outputs may lie outside the raster.
GridCoord bev_world_to_grid(const BevSpec& spec, double x, double y);

/// Inverse of bev_world_to_grid at cell centers.
void bev_grid_to_world(const BevSpec& spec, double row, double col, double& x, double& y);

}  // namespace igd
