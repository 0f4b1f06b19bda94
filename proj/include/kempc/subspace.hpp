#pragma once

#include <Eigen/Dense>
#include <vector>

#include "kempc/dataset.hpp"
#include "kempc/ssmodel.hpp"

namespace kempc {

/// Impulse-response (Markov) parameters H_1..H_horizon, each p x m.
struct MarkovSequence {
    std::vector<Eigen::MatrixXd> H;

    int horizon() const { return static_cast<int>(H.size()); }
};

/// ARX least-squares fit y_k = sum_i H_i u_{k-i} on scaled signals, with
/// ridge regularization lambda = 1e-6 * trace(Gram) / rows.
MarkovSequence estimate_markov_parameters(const Eigen::MatrixXd& U_scaled,
                                          const Eigen::MatrixXd& Y_scaled, int horizon);

/// Ho-Kalman balanced realization of the given order from a block Hankel of
/// Markov parameters. Scalers and kind are left for the caller to attach.
StateSpaceModel ho_kalman(const MarkovSequence& markov, int order);

/// Full baseline pipeline on a physical-unit training dataset: fit scalers,
/// ARX Markov estimation (horizon 40), Ho-Kalman realization, then joint
/// (B, x0) refinement by simulation least squares.
StateSpaceModel identify_subspace(const Dataset& train, int order = 3);

}  // namespace kempc
