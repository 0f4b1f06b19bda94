#pragma once

#include <Eigen/Dense>
#include <utility>

#include "kempc/errors.hpp"
#include "kempc/ssmodel.hpp"

namespace kempc {

/// Kalman filter on the model state augmented with constant output
/// disturbances:
///   A_aug = [[A, 0], [0, I]],  B_aug = [B; 0],  C_aug = [C, I].
/// Operates entirely in scaled units. P is the posterior covariance,
/// symmetrized after each Joseph-form update.
struct AugmentedKalman {
    Eigen::MatrixXd A_aug, B_aug, C_aug;
    Eigen::MatrixXd Q, R;
    Eigen::MatrixXd P;
    Eigen::VectorXd xhat;  // (x; d)
    Eigen::Index n = 0;    // model-state dimension
    Eigen::Index p = 0;    // output dimension
};

/// Builds the augmented filter with the fixed tuning Q = 0.1 I, R = 0.5 I,
/// P0 = I. Throws Undetectable when the augmented pair fails the
/// observability rank test.
AugmentedKalman build_augmented(const StateSpaceModel& M, double q_scale = 0.1,
                                double r_scale = 0.5, double rank_tol = 1e-10);

/// Predict with the previously applied (scaled) input, then update with the
/// scaled measurement. Returns the (model state, disturbance) split.
std::pair<Eigen::VectorXd, Eigen::VectorXd> kf_step(AugmentedKalman& kf,
                                                    const Eigen::VectorXd& u_prev,
                                                    const Eigen::VectorXd& y_meas);

/// Fixed point of the posterior-covariance Riccati recursion.
Eigen::MatrixXd steady_state_covariance(const AugmentedKalman& kf, double tol,
                                        long max_iter = 100000);

}  // namespace kempc
