#include "igd/bev.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace igd {

namespace {

struct CellWeights {
    int r0, r1, c0, c1;
    double w00, w01, w10, w11;
};

CellWeights bilinear_weights(const BevSpec& spec, const BevPoint& p) {
    GridCoord g = bev_world_to_grid(spec, p.x, p.y);
    const double row = std::clamp(g.row, 0.0, static_cast<double>(spec.rows - 1));
    const double col = std::clamp(g.col, 0.0, static_cast<double>(spec.cols - 1));
    CellWeights w;
    w.r0 = static_cast<int>(std::floor(row));
    w.c0 = static_cast<int>(std::floor(col));
    w.r0 = std::min(w.r0, spec.rows - 1);
    w.c0 = std::min(w.c0, spec.cols - 1);
    w.r1 = std::min(w.r0 + 1, spec.rows - 1);
    w.c1 = std::min(w.c0 + 1, spec.cols - 1);
    const double fr = row - w.r0;
    const double fc = col - w.c0;
    w.w00 = (1.0 - fr) * (1.0 - fc);
    w.w01 = (1.0 - fr) * fc;
    w.w10 = fr * (1.0 - fc);
    w.w11 = fr * fc;
    return w;
}

void check_pair_shapes(const std::vector<KeypointFeatures>& student,
                       const std::vector<KeypointFeatures>& teacher) {
    if (student.size() != teacher.size()) {
        throw std::domain_error("student and teacher keypoint lists differ in length");
    }
    for (std::size_t j = 0; j < student.size(); ++j) {
        if (student[j].rows() != teacher[j].rows() || student[j].cols() != teacher[j].cols()) {
            throw std::domain_error("student/teacher keypoint feature shapes disagree");
        }
        if (student[j].rows() < 1 || student[j].cols() < 1) {
            throw std::domain_error("keypoint feature matrices must be at least 1x1");
        }
    }
}

}  // namespace

void BevFeatureGrid::validate() const {
    spec.validate();
    if (channels < 1) throw std::invalid_argument("bev feature grid needs at least one channel");
    if (values.size() != static_cast<std::size_t>(channels) * spec.rows * spec.cols) {
        throw std::invalid_argument("bev feature grid storage does not match its shape");
    }
    for (const double v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument("bev feature grid contains non-finite values");
    }
}

BevFeatureGrid BevFeatureGrid::zeros(int channels, const BevSpec& spec) {
    BevFeatureGrid g;
    g.channels = channels;
    g.spec = spec;
    g.values.assign(static_cast<std::size_t>(channels) * spec.rows * spec.cols, 0.0);
    return g;
}

std::vector<BevPoint> sample_keypoint_coords(const Box3D& box, double enlarge, int grid_side) {
    if (grid_side < 1) throw std::domain_error("sample_keypoint_coords requires grid_side >= 1");
    const Box3D big = enlarge_box_bev(box, enlarge);
    const double c = std::cos(big.yaw);
    const double s = std::sin(big.yaw);
    std::vector<BevPoint> out;
    out.reserve(static_cast<std::size_t>(grid_side) * grid_side);
    for (int i = 0; i < grid_side; ++i) {
        const double lx = -0.5 * big.length + (i + 0.5) * big.length / grid_side;
        for (int j = 0; j < grid_side; ++j) {
            const double ly = -0.5 * big.width + (j + 0.5) * big.width / grid_side;
            out.push_back({big.center.x + c * lx - s * ly, big.center.y + s * lx + c * ly});
        }
    }
    return out;
}

KeypointFeatures bilinear_sample(const BevFeatureGrid& grid, const std::vector<BevPoint>& coords) {
    KeypointFeatures f(static_cast<Eigen::Index>(coords.size()), grid.channels);
    for (std::size_t n = 0; n < coords.size(); ++n) {
        const CellWeights w = bilinear_weights(grid.spec, coords[n]);
        for (int c = 0; c < grid.channels; ++c) {
            f(static_cast<Eigen::Index>(n), c) =
                w.w00 * grid.at(c, w.r0, w.c0) + w.w01 * grid.at(c, w.r0, w.c1) +
                w.w10 * grid.at(c, w.r1, w.c0) + w.w11 * grid.at(c, w.r1, w.c1);
        }
    }
    return f;
}

BevFeatureGrid bilinear_sample_grad(const BevFeatureGrid& grid, const std::vector<BevPoint>& coords,
                                    const Eigen::MatrixXd& upstream) {
    if (upstream.rows() != static_cast<Eigen::Index>(coords.size()) || upstream.cols() != grid.channels) {
        throw std::domain_error("bilinear_sample_grad upstream shape mismatch");
    }
    BevFeatureGrid g = BevFeatureGrid::zeros(grid.channels, grid.spec);
    for (std::size_t n = 0; n < coords.size(); ++n) {
        const CellWeights w = bilinear_weights(grid.spec, coords[n]);
        for (int c = 0; c < grid.channels; ++c) {
            const double up = upstream(static_cast<Eigen::Index>(n), c);
            g.at(c, w.r0, w.c0) += w.w00 * up;
            g.at(c, w.r0, w.c1) += w.w01 * up;
            g.at(c, w.r1, w.c0) += w.w10 * up;
            g.at(c, w.r1, w.c1) += w.w11 * up;
        }
    }
    return g;
}

Eigen::MatrixXd gram_inter_channel(const KeypointFeatures& f) {
    return f.transpose() * f;
}

Eigen::MatrixXd gram_inter_keypoint(const KeypointFeatures& f) {
    return f * f.transpose();
}

double inter_channel_loss(const std::vector<KeypointFeatures>& student,
                          const std::vector<KeypointFeatures>& teacher) {
    check_pair_shapes(student, teacher);
    if (student.empty()) return 0.0;
    double loss = 0.0;
    for (std::size_t j = 0; j < student.size(); ++j) {
        const Eigen::MatrixXd diff = gram_inter_channel(student[j]) - gram_inter_channel(teacher[j]);
        const double c = static_cast<double>(student[j].cols());
        loss += diff.squaredNorm() / (c * c);
    }
    return loss / static_cast<double>(student.size());
}

double inter_keypoint_loss(const std::vector<KeypointFeatures>& student,
                           const std::vector<KeypointFeatures>& teacher) {
    check_pair_shapes(student, teacher);
    if (student.empty()) return 0.0;
    double loss = 0.0;
    for (std::size_t j = 0; j < student.size(); ++j) {
        const Eigen::MatrixXd diff = gram_inter_keypoint(student[j]) - gram_inter_keypoint(teacher[j]);
        const double n = static_cast<double>(student[j].rows());
        loss += diff.squaredNorm() / (n * n);
    }
    return loss / static_cast<double>(student.size());
}

BevDistillLoss bev_distill_loss(const std::vector<KeypointFeatures>& student,
                                const std::vector<KeypointFeatures>& teacher) {
    BevDistillLoss l;
    l.inter_channel = inter_channel_loss(student, teacher);
    l.inter_keypoint = inter_keypoint_loss(student, teacher);
    l.total = l.inter_channel + l.inter_keypoint;
    return l;
}

std::vector<Eigen::MatrixXd> inter_channel_loss_grad(const std::vector<KeypointFeatures>& student,
                                                     const std::vector<KeypointFeatures>& teacher) {
    check_pair_shapes(student, teacher);
    std::vector<Eigen::MatrixXd> grads;
    grads.reserve(student.size());
    if (student.empty()) return grads;
    const double m = static_cast<double>(student.size());
    for (std::size_t j = 0; j < student.size(); ++j) {
        const KeypointFeatures& f = student[j];
        const double c = static_cast<double>(f.cols());
        const Eigen::MatrixXd da = gram_inter_channel(f) - gram_inter_channel(teacher[j]);
        grads.emplace_back((4.0 / (m * c * c)) * (f * da));
    }
    return grads;
}

std::vector<Eigen::MatrixXd> inter_keypoint_loss_grad(const std::vector<KeypointFeatures>& student,
                                                      const std::vector<KeypointFeatures>& teacher) {
    check_pair_shapes(student, teacher);
    std::vector<Eigen::MatrixXd> grads;
    grads.reserve(student.size());
    if (student.empty()) return grads;
    const double m = static_cast<double>(student.size());
    for (std::size_t j = 0; j < student.size(); ++j) {
        const KeypointFeatures& f = student[j];
        const double n = static_cast<double>(f.rows());
        const Eigen::MatrixXd db = gram_inter_keypoint(f) - gram_inter_keypoint(teacher[j]);
        grads.emplace_back((4.0 / (m * n * n)) * (db * f));
    }
    return grads;
}

std::vector<Eigen::MatrixXd> bev_distill_loss_grad(const std::vector<KeypointFeatures>& student,
                                                   const std::vector<KeypointFeatures>& teacher) {
    std::vector<Eigen::MatrixXd> grads = inter_channel_loss_grad(student, teacher);
    const std::vector<Eigen::MatrixXd> ik = inter_keypoint_loss_grad(student, teacher);
    for (std::size_t j = 0; j < grads.size(); ++j) grads[j] += ik[j];
    return grads;
}

KeypointFeatures normalize_rows(const KeypointFeatures& f) {
    KeypointFeatures out = f;
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
        const double norm = f.row(i).norm();
        if (norm >= 1e-12) out.row(i) /= norm;
    }
    return out;
}

Eigen::MatrixXd normalize_rows_grad(const KeypointFeatures& raw, const Eigen::MatrixXd& upstream) {
    if (raw.rows() != upstream.rows() || raw.cols() != upstream.cols()) {
        throw std::domain_error("normalize_rows_grad upstream shape mismatch");
    }
    Eigen::MatrixXd g(raw.rows(), raw.cols());
    for (Eigen::Index i = 0; i < raw.rows(); ++i) {
        const double norm = raw.row(i).norm();
        if (norm < 1e-12) {
            g.row(i) = upstream.row(i);
            continue;
        }
        const Eigen::RowVectorXd y = raw.row(i) / norm;
        g.row(i) = (upstream.row(i) - (upstream.row(i).dot(y)) * y) / norm;
    }
    return g;
}

}  // namespace igd
