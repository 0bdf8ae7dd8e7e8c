#include "subco/kalman.hpp"

#include <algorithm>
#include <stdexcept>

namespace subco {

namespace {
constexpr double kMinHeight = 1e-3;
}

BBox KalmanState::box() const {
    const double h = mean[3];
    const double w = mean[2] * h;
    return BBox::from_center(mean[0], mean[1], w, h);
}

Vec4 box_to_measurement(const BBox& box) {
    return {box.center_x(), box.center_y(), box.width / box.height, box.height};
}

Mat8 kalman_transition() {
    Mat8 f = Mat8::Identity();
    for (int i = 0; i < 4; ++i) f(i, i + 4) = 1.0;
    return f;
}

Mat48 kalman_observation() {
    Mat48 h = Mat48::Zero();
    for (int i = 0; i < 4; ++i) h(i, i) = 1.0;
    return h;
}

Mat8 kalman_process_noise(const KalmanState& state, const KalmanNoise& n) {
    const double h = state.mean[3];
    Vec8 std_dev;
    std_dev << n.weight_position * h, n.weight_position * h, n.aspect_position, n.weight_position * h,
        n.weight_velocity * h, n.weight_velocity * h, n.aspect_velocity, n.weight_velocity * h;
    return std_dev.array().square().matrix().asDiagonal();
}

Mat4 kalman_measurement_noise(const KalmanState& state, const KalmanNoise& n) {
    const double h = state.mean[3];
    Vec4 std_dev{n.weight_position * h, n.weight_position * h, n.aspect_measurement, n.weight_position * h};
    return std_dev.array().square().matrix().asDiagonal();
}

KalmanState kalman_initiate(const BBox& box, const KalmanNoise& n) {
    KalmanState s;
    s.mean.head<4>() = box_to_measurement(box);
    s.mean.tail<4>().setZero();
    const double h = box.height;
    Vec8 std_dev;
    std_dev << 2 * n.weight_position * h, 2 * n.weight_position * h, 1e-2, 2 * n.weight_position * h,
        10 * n.weight_velocity * h, 10 * n.weight_velocity * h, 1e-5, 10 * n.weight_velocity * h;
    s.covariance = std_dev.array().square().matrix().asDiagonal();
    return s;
}

KalmanState kalman_predict(const KalmanState& state, const KalmanNoise& noise) {
    const Mat8 f = kalman_transition();
    KalmanState out;
    out.mean = f * state.mean;
    out.covariance = f * state.covariance * f.transpose() + kalman_process_noise(state, noise);
    out.mean[3] = std::max(out.mean[3], kMinHeight);
    return out;
}

KalmanState kalman_update(const KalmanState& state, const BBox& measured, const KalmanNoise& noise) {
    if (!measured.valid()) throw std::invalid_argument("kalman_update: measurement box must have positive size");
    const Mat48 h = kalman_observation();
    const Mat4 r = kalman_measurement_noise(state, noise);
    const Mat4 s = h * state.covariance * h.transpose() + r;
    const Eigen::LLT<Mat4> llt(s);
    if (llt.info() != Eigen::Success) throw std::runtime_error("kalman_update: innovation covariance is singular");
    // K = P H^T S^-1  <=>  S K^T = H P
    const Eigen::Matrix<double, 8, 4> gain = llt.solve(h * state.covariance).transpose();
    const Vec4 innovation = box_to_measurement(measured) - h * state.mean;

    KalmanState out;
    out.mean = state.mean + gain * innovation;
    const Mat8 i_kh = Mat8::Identity() - gain * h;
    out.covariance = i_kh * state.covariance * i_kh.transpose() + gain * r * gain.transpose();
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
    out.mean[3] = std::max(out.mean[3], kMinHeight);
    return out;
}

}  // namespace subco
