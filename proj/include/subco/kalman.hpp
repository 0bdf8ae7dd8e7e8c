#pragma once

#include "subco/data.hpp"

#include <Eigen/Dense>

namespace subco {

using Vec4 = Eigen::Matrix<double, 4, 1>;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat4 = Eigen::Matrix<double, 4, 4>;
using Mat8 = Eigen::Matrix<double, 8, 8>;
using Mat48 = Eigen::Matrix<double, 4, 8>;

/// Constant-velocity state over (cx, cy, aspect, height) and their rates.
struct KalmanState {
    Vec8 mean = Vec8::Zero();
    Mat8 covariance = Mat8::Identity();

    BBox box() const;
};

/// Noise model: standard deviations proportional to the box height, with
/// fixed terms for the aspect ratio (DeepSORT / ByteTrack constants).
struct KalmanNoise {
    double weight_position = 1.0 / 20.0;
    double weight_velocity = 1.0 / 160.0;
    double aspect_position = 1e-2;
    double aspect_velocity = 1e-5;
    double aspect_measurement = 1e-1;

    static KalmanNoise none() { return {0.0, 0.0, 0.0, 0.0, 0.0}; }
};

/// (cx, cy, w/h, h)
Vec4 box_to_measurement(const BBox& box);

Mat8 kalman_transition();
Mat48 kalman_observation();
Mat8 kalman_process_noise(const KalmanState& state, const KalmanNoise& noise);
Mat4 kalman_measurement_noise(const KalmanState& state, const KalmanNoise& noise);

KalmanState kalman_initiate(const BBox& box, const KalmanNoise& noise = {});
/// mean <- F mean, covariance <- F P F^T + Q. Height is floored at a small positive value.
KalmanState kalman_predict(const KalmanState& state, const KalmanNoise& noise = {});
/// Kalman correction with a (cx, cy, aspect, height) measurement; covariance
/// updated in Joseph form. Throws std::runtime_error when the innovation
/// covariance is not positive definite.
KalmanState kalman_update(const KalmanState& state, const BBox& measured, const KalmanNoise& noise = {});

}  // namespace subco
