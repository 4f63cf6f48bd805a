#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "igd/metrics.hpp"
#include "igd/rng.hpp"
#include "oracles.hpp"

using namespace igd;

namespace {

std::pair<std::vector<double>, std::vector<double>> random_pair(Rng& rng, int n,
                                                                double spread) {
    std::vector<double> pred(n), gt(n);
    for (int i = 0; i < n; ++i) {
        gt[i] = rng.uniform(0.3, 5.0);
        pred[i] = gt[i] * std::exp(rng.uniform(-spread, spread));
    }
    return {pred, gt};
}

}  // namespace

TEST_CASE("perfect predictions score zero error and full accuracy") {
    const std::vector<double> d{0.5, 1.0, 2.5, 4.0};
    const DepthMetricReport r = depth_metrics(d, d);
    CHECK(r.rmse == 0.0);
    CHECK(r.rmse_log == 0.0);
    CHECK(r.abs_rel == 0.0);
    CHECK(r.sq_rel == 0.0);
    CHECK(r.log10 == 0.0);
    CHECK(r.silog == doctest::Approx(0.0));
    CHECK(r.delta1 == 1.0);
    CHECK(r.delta2 == 1.0);
    CHECK(r.delta3 == 1.0);
    CHECK(r.n == 4);
}

TEST_CASE("doubling every depth gives unit relative error and zero silog") {
    const std::vector<double> gt{0.5, 1.0, 2.0, 3.5};
    std::vector<double> pred = gt;
    for (double& v : pred) v *= 2.0;
    const DepthMetricReport r = depth_metrics(pred, gt);
    CHECK(r.abs_rel == doctest::Approx(1.0));
    CHECK(r.sq_rel > 0.0);
    CHECK(r.silog < 1e-9);  // scale-invariant by construction
    CHECK(r.delta1 == 0.0);  // the ratio is 2, above every 1.25^k threshold
    CHECK(r.delta2 == 0.0);
    CHECK(r.delta3 == 0.0);
}

TEST_CASE("metrics match a single-pass oracle on random lists") {
    Rng rng(501);
    for (int trial = 0; trial < 30; ++trial) {
        const auto [pred, gt] = random_pair(rng, 40, 0.5);
        const DepthMetricReport r = depth_metrics(pred, gt);
        const oracle::Metrics o = oracle::depth_metrics(pred, gt);
        CHECK(std::abs(r.rmse - o.rmse) < 1e-12);
        CHECK(std::abs(r.rmse_log - o.rmse_log) < 1e-12);
        CHECK(std::abs(r.abs_rel - o.abs_rel) < 1e-12);
        CHECK(std::abs(r.sq_rel - o.sq_rel) < 1e-12);
        CHECK(std::abs(r.log10 - o.log10) < 1e-12);
        CHECK(std::abs(r.silog - o.silog) < 1e-12);
        CHECK(r.delta1 == o.delta1);
        CHECK(r.delta2 == o.delta2);
        CHECK(r.delta3 == o.delta3);
        CHECK(r.n == 40);
    }
}

TEST_CASE("silog is invariant under a global prediction scale") {
    Rng rng(502);
    for (int trial = 0; trial < 50; ++trial) {
        const auto [pred, gt] = random_pair(rng, 25, 0.6);
        const double base = depth_metrics(pred, gt).silog;
        std::vector<double> scaled = pred;
        const double alpha = rng.uniform(0.2, 5.0);
        for (double& v : scaled) v *= alpha;
        CHECK(std::abs(depth_metrics(scaled, gt).silog - base) < 1e-9);
    }
}

TEST_CASE("delta accuracies are monotone in the threshold") {
    Rng rng(503);
    for (int trial = 0; trial < 50; ++trial) {
        const auto [pred, gt] = random_pair(rng, 30, 1.0);
        const DepthMetricReport r = depth_metrics(pred, gt);
        CHECK(r.delta1 <= r.delta2);
        CHECK(r.delta2 <= r.delta3);
        CHECK(r.delta3 <= 1.0);
        CHECK(r.delta1 >= 0.0);
    }
}

TEST_CASE("rmse vanishes exactly when predictions equal ground truth") {
    Rng rng(504);
    for (int trial = 0; trial < 50; ++trial) {
        auto [pred, gt] = random_pair(rng, 10, 0.4);
        DepthMetricReport r = depth_metrics(pred, gt);
        bool equal = true;
        for (int i = 0; i < 10; ++i) equal = equal && pred[i] == gt[i];
        CHECK((r.rmse == 0.0) == equal);

        pred = gt;
        r = depth_metrics(pred, gt);
        CHECK(r.rmse == 0.0);
    }
}

TEST_CASE("non-positive predictions are clamped instead of breaking the logs") {
    const DepthMetricReport r = depth_metrics({0.0, 1.0}, {1.0, 1.0});
    CHECK(std::isfinite(r.rmse_log));
    CHECK(std::isfinite(r.silog));
    CHECK(r.delta3 == doctest::Approx(0.5));
}

TEST_CASE("invalid metric inputs are rejected") {
    CHECK_THROWS_AS(depth_metrics({}, {}), std::domain_error);
    CHECK_THROWS_AS(depth_metrics({1.0}, {1.0, 2.0}), std::domain_error);
    CHECK_THROWS_AS(depth_metrics({1.0}, {0.0}), std::domain_error);
    CHECK_THROWS_AS(depth_metrics({1.0}, {-2.0}), std::domain_error);
}
