#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "kempc/errors.hpp"

namespace kempc {

enum class Activation { relu, elu, linear };

struct MlpLayer {
    Eigen::MatrixXd W;  // out x in
    Eigen::VectorXd b;
    Activation act = Activation::linear;
};

struct MlpParams {
    std::vector<MlpLayer> layers;

    Eigen::Index in_dim() const { return layers.empty() ? 0 : layers.front().W.cols(); }
    Eigen::Index out_dim() const { return layers.empty() ? 0 : layers.back().W.rows(); }
    void validate() const;
};

/// Forward pass caches: layer inputs and pre-activations, one entry per layer.
struct MlpCache {
    std::vector<Eigen::MatrixXd> inputs;
    std::vector<Eigen::MatrixXd> preact;
};

struct MlpGrads {
    std::vector<Eigen::MatrixXd> dW;
    std::vector<Eigen::VectorXd> db;

    static MlpGrads zeros_like(const MlpParams& p);
    void add_scaled(const MlpGrads& other, double s);
};

/// Batched forward pass; columns of X are samples.
Eigen::MatrixXd mlp_forward(const MlpParams& p, const Eigen::MatrixXd& X,
                            MlpCache* cache = nullptr);

/// Reverse-mode pass. `upstream` matches the forward output shape; gradients
/// are accumulated into `grads` (which must be zeros_like-initialized or
/// carry prior accumulation). Returns the gradient w.r.t. the input.
/// Derivative conventions: relu'(0) = 0, elu'(0) = 1.
Eigen::MatrixXd mlp_backward(const MlpParams& p, const MlpCache& cache,
                             const Eigen::MatrixXd& upstream, MlpGrads& grads);

/// Fan-in-scaled uniform initialization, deterministic for a given seed.
MlpParams make_mlp(const std::vector<Eigen::Index>& dims, Activation hidden_act,
                   std::uint64_t seed);

}  // namespace kempc
