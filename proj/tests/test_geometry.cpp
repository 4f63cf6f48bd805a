#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "igd/geometry.hpp"
#include "igd/rng.hpp"
#include "oracles.hpp"

using namespace igd;

TEST_CASE("optical-axis point maps to the principal point") {
    const CameraModel cam = testutil::identity_camera();
    PointCloud cloud;
    cloud.points.push_back({0.0, 0.0, 10.0});
    const std::vector<ProjectedPoint> out = project_points(cam, cloud);
    REQUIRE(out.size() == 1);
    CHECK(out[0].u == doctest::Approx(50.0));
    CHECK(out[0].v == doctest::Approx(50.0));
    CHECK(out[0].depth == doctest::Approx(10.0));
}

TEST_CASE("points behind the camera are excluded") {
    const CameraModel cam = testutil::identity_camera();
    PointCloud cloud;
    cloud.points.push_back({0.0, 0.0, -1.0});
    CHECK(project_points(cam, cloud).empty());
}

TEST_CASE("projection matches the per-point oracle on random clouds") {
    Rng rng(101);
    for (int trial = 0; trial < 20; ++trial) {
        const CameraModel cam = testutil::make_camera(rng.uniform(-0.5, 0.5),
                                                      {rng.uniform(-1.0, 1.0), 0.0, 1.0});
        PointCloud cloud;
        for (int i = 0; i < 100; ++i) {
            cloud.points.push_back(
                {rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0), rng.uniform(-2.0, 4.0)});
        }
        const std::vector<ProjectedPoint> out = project_points(cam, cloud);
        std::size_t hits = 0;
        for (std::size_t i = 0; i < cloud.points.size(); ++i) {
            const auto expect = oracle::project_point(cam, cloud.points[i]);
            if (!expect) continue;
            REQUIRE(hits < out.size());
            CHECK(out[hits].point_index == i);
            CHECK(out[hits].u == expect->u);
            CHECK(out[hits].v == expect->v);
            CHECK(out[hits].depth == expect->depth);
            ++hits;
        }
        CHECK(hits == out.size());
    }
}

TEST_CASE("backprojection inverts projection") {
    const CameraModel cam = testutil::identity_camera();
    const Vec3 p = backproject_pixel(cam, cam.cx, cam.cy, 5.0);
    CHECK(p.x == doctest::Approx(0.0));
    CHECK(p.y == doctest::Approx(0.0));
    CHECK(p.z == doctest::Approx(5.0));

    CHECK_THROWS_AS(backproject_pixel(cam, 10.0, 10.0, 0.0), std::domain_error);

    Rng rng(102);
    const CameraModel yawed = testutil::make_camera(0.3, {0.5, -0.2, 1.1});
    for (int i = 0; i < 50; ++i) {
        const Vec3 world{rng.uniform(1.0, 8.0), rng.uniform(-3.0, 3.0), rng.uniform(-1.0, 2.0)};
        PointCloud cloud;
        cloud.points.push_back(world);
        const std::vector<ProjectedPoint> proj = project_points(yawed, cloud);
        if (proj.empty()) continue;
        const Vec3 back = backproject_pixel(yawed, proj[0].u, proj[0].v, proj[0].depth);
        CHECK(std::abs(back.x - world.x) < 1e-6);
        CHECK(std::abs(back.y - world.y) < 1e-6);
        CHECK(std::abs(back.z - world.z) < 1e-6);
    }
}

TEST_CASE("axis-aligned containment accepts inside and rejects outside") {
    Box3D box;
    box.center = {0.0, 0.0, 0.0};
    box.length = 2.0;
    box.width = 2.0;
    box.height = 2.0;
    box.yaw = 0.0;

    PointCloud cloud;
    cloud.points.push_back({0.9, 0.0, 0.0});
    cloud.points.push_back({1.1, 0.0, 0.0});
    cloud.points.push_back({1.0, 0.0, 0.0});  // face point, boundary inclusive
    const std::vector<std::size_t> in = points_in_box(cloud, box);
    CHECK(in == std::vector<std::size_t>{0, 2});
}

TEST_CASE("yaw rotates the box axes") {
    Box3D box;
    box.center = {0.0, 0.0, 0.0};
    box.length = 4.0;
    box.width = 1.0;
    box.height = 2.0;
    box.yaw = 0.5 * 3.14159265358979323846;

    // After a quarter turn the long axis points along world y.
    PointCloud cloud;
    cloud.points.push_back({0.0, 0.9 * 2.0, 0.0});
    CHECK(points_in_box(cloud, box) == std::vector<std::size_t>{0});
}

TEST_CASE("containment matches the half-space oracle on random points") {
    Rng rng(103);
    for (int trial = 0; trial < 20; ++trial) {
        const Box3D box = testutil::random_box(rng);
        PointCloud cloud;
        for (int i = 0; i < 1000; ++i) {
            cloud.points.push_back(
                {rng.uniform(-8.0, 8.0), rng.uniform(-8.0, 8.0), rng.uniform(-3.0, 3.0)});
        }
        const std::vector<std::size_t> got = points_in_box(cloud, box);
        std::vector<std::size_t> expect;
        for (std::size_t i = 0; i < cloud.points.size(); ++i) {
            if (oracle::point_in_box(box, cloud.points[i])) expect.push_back(i);
        }
        CHECK(got == expect);
    }
}

TEST_CASE("containment is invariant under joint rigid transforms") {
    Rng rng(104);
    for (int trial = 0; trial < 50; ++trial) {
        const Box3D box = testutil::random_box(rng);
        PointCloud cloud;
        for (int i = 0; i < 200; ++i) {
            cloud.points.push_back(
                {rng.uniform(-8.0, 8.0), rng.uniform(-8.0, 8.0), rng.uniform(-3.0, 3.0)});
        }
        const double theta = rng.uniform(-3.0, 3.0);
        const Vec3 shift{rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0), rng.uniform(-2.0, 2.0)};
        const double c = std::cos(theta);
        const double s = std::sin(theta);
        auto move = [&](const Vec3& p) {
            return Vec3{c * p.x - s * p.y + shift.x, s * p.x + c * p.y + shift.y, p.z + shift.z};
        };

        Box3D moved = box;
        moved.center = move(box.center);
        moved.yaw = box.yaw + theta;
        PointCloud moved_cloud;
        for (const Vec3& p : cloud.points) moved_cloud.points.push_back(move(p));

        CHECK(points_in_box(cloud, box) == points_in_box(moved_cloud, moved));
    }
}

TEST_CASE("enlarge scales the footprint only") {
    Box3D box;
    box.center = {1.0, -2.0, 0.5};
    box.length = 4.0;
    box.width = 2.0;
    box.height = 1.0;
    box.yaw = 0.7;

    const Box3D same = enlarge_box_bev(box, 1.0);
    CHECK(same.length == box.length);
    CHECK(same.width == box.width);
    CHECK(same.height == box.height);

    const Box3D big = enlarge_box_bev(box, 1.25);
    CHECK(big.length == doctest::Approx(5.0));
    CHECK(big.width == doctest::Approx(2.5));
    CHECK(big.height == doctest::Approx(1.0));
    CHECK(big.yaw == box.yaw);
    CHECK(big.center.x == box.center.x);

    CHECK_THROWS_AS(enlarge_box_bev(box, 0.9), std::domain_error);

    // The enlarged footprint contains the original corners.
    const double cy = std::cos(box.yaw), sy = std::sin(box.yaw);
    PointCloud corners;
    for (const double sx : {-0.5, 0.5}) {
        for (const double sw : {-0.5, 0.5}) {
            const double lx = sx * box.length, ly = sw * box.width;
            corners.points.push_back({box.center.x + cy * lx - sy * ly,
                                      box.center.y + sy * lx + cy * ly, box.center.z});
        }
    }
    CHECK(points_in_box(corners, big).size() == 4);
}

TEST_CASE("enlargement is monotone in the factor") {
    Rng rng(105);
    for (int trial = 0; trial < 50; ++trial) {
        const Box3D box = testutil::random_box(rng);
        PointCloud cloud;
        for (int i = 0; i < 300; ++i) {
            cloud.points.push_back({box.center.x + rng.uniform(-4.0, 4.0),
                                    box.center.y + rng.uniform(-4.0, 4.0), box.center.z});
        }
        const double a = rng.uniform(1.0, 1.5);
        const double b = a + rng.uniform(0.0, 0.5);
        const std::vector<std::size_t> small = points_in_box(cloud, enlarge_box_bev(box, a));
        const std::vector<std::size_t> large = points_in_box(cloud, enlarge_box_bev(box, b));
        CHECK(std::includes(large.begin(), large.end(), small.begin(), small.end()));
    }
}

TEST_CASE("world-to-grid anchors and affinity") {
    BevSpec spec{-3.0, 3.0, -2.0, 2.0, 17, 9};
    const GridCoord lo = bev_world_to_grid(spec, spec.x_min, spec.y_min);
    CHECK(lo.row == doctest::Approx(0.0));
    CHECK(lo.col == doctest::Approx(0.0));
    const GridCoord mid = bev_world_to_grid(spec, 0.0, 0.0);
    CHECK(mid.row == doctest::Approx((spec.rows - 1) / 2.0));
    CHECK(mid.col == doctest::Approx((spec.cols - 1) / 2.0));

    Rng rng(106);
    for (int i = 0; i < 20; ++i) {
        const double x = rng.uniform(-5.0, 5.0);
        const double y = rng.uniform(-5.0, 5.0);
        const GridCoord g = bev_world_to_grid(spec, x, y);
        double row, col;
        oracle::world_to_grid(spec, x, y, row, col);
        CHECK(std::abs(g.row - row) < 1e-12);
        CHECK(std::abs(g.col - col) < 1e-12);
    }

    for (int i = 0; i < 50; ++i) {
        const double alpha = rng.uniform();
        const Vec3 p{rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0), 0.0};
        const Vec3 q{rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0), 0.0};
        const GridCoord gp = bev_world_to_grid(spec, p.x, p.y);
        const GridCoord gq = bev_world_to_grid(spec, q.x, q.y);
        const GridCoord gm =
            bev_world_to_grid(spec, alpha * p.x + (1 - alpha) * q.x, alpha * p.y + (1 - alpha) * q.y);
        CHECK(std::abs(gm.row - (alpha * gp.row + (1 - alpha) * gq.row)) < 1e-12);
        CHECK(std::abs(gm.col - (alpha * gp.col + (1 - alpha) * gq.col)) < 1e-12);
    }
}

TEST_CASE("grid-to-world inverts world-to-grid at cell centers") {
    BevSpec spec{-3.0, 3.0, -2.0, 2.0, 7, 5};
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            double x, y;
            bev_grid_to_world(spec, r, c, x, y);
            const GridCoord g = bev_world_to_grid(spec, x, y);
            CHECK(std::abs(g.row - r) < 1e-12);
            CHECK(std::abs(g.col - c) < 1e-12);
        }
    }
}

TEST_CASE("camera validation rejects a non-orthonormal rotation") {
    CameraModel cam = testutil::identity_camera();
    cam.rotation[0][0] = 1.5;
    CHECK_THROWS_AS(cam.validate(), std::invalid_argument);
}
