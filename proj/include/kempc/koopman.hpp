#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "kempc/dataset.hpp"
#include "kempc/mlp.hpp"
#include "kempc/scaler.hpp"
#include "kempc/ssmodel.hpp"

namespace kempc {

enum class KoopmanVariant { linear_projection, nonlinear_projection };

/// Lifted linear predictor x+ = A x + B u with an MLP lifting function and
/// either a linear projection C or an MLP decoder back to the outputs.
struct KoopmanModel {
    MlpParams encoder;  // p -> n_lift
    Eigen::MatrixXd A;  // n_lift x n_lift
    Eigen::MatrixXd B;  // n_lift x m
    KoopmanVariant variant = KoopmanVariant::linear_projection;
    Eigen::MatrixXd C;  // p x n_lift (linear variant)
    MlpParams decoder;  // n_lift -> p (nonlinear variant)
    int n_lift = 0;
    double timestep = 1.0;
    Scaler u_scaler;
    Scaler y_scaler;
    double final_train_loss = 0.0;
    double final_val_loss = 0.0;

    void validate() const;
};

struct TrainConfig {
    int rollout_len = 20;  // K
    int epochs = 300;
    int batch = 64;
    double learning_rate = 1e-3;  // cosine-decayed to 0
    double lambda_pred = 1.0;
    double lambda_rec = 1.0;
    double lambda_lin = 0.1;
    std::uint64_t seed = 0;
    std::vector<Eigen::Index> encoder_hidden{60, 120, 180};
    std::vector<Eigen::Index> decoder_hidden{180, 120, 60};
    double val_fraction = 0.1;

    void validate() const;
};

/// A minibatch of scaled rollout windows: U[k] is m x W for k < K,
/// Y[k] is p x W for k <= K, columns are windows.
struct WindowBatch {
    std::vector<Eigen::MatrixXd> U;
    std::vector<Eigen::MatrixXd> Y;

    int rollout_len() const { return static_cast<int>(U.size()); }
    Eigen::Index width() const { return U.empty() ? 0 : U[0].cols(); }
};

struct KoopmanGrads {
    MlpGrads encoder;
    Eigen::MatrixXd dA, dB, dC;
    MlpGrads decoder;
};

/// Multi-step rollout loss
///   lambda_pred * mean_k |proj(x_k) - y_k|^2
/// + lambda_rec  * mean_k |proj(enc(y_k)) - y_k|^2
/// + lambda_lin  * mean_k |x_k - enc(y_k)|^2
/// with x_0 = enc(y_0), x_{k+1} = A x_k + B u_k, averaged over the batch.
/// Gradients for all parameters are written to `grads` when non-null.
double koopman_loss(const KoopmanModel& M, const WindowBatch& batch, double lambda_pred,
                    double lambda_rec, double lambda_lin, KoopmanGrads* grads);

struct TrainLogEntry {
    int epoch;
    double train_loss;
    double val_loss;
};

/// Adam-trained deep Koopman identification on a physical-unit dataset.
/// Deterministic for a given (dataset, config, seed).
KoopmanModel train_koopman(const Dataset& train, KoopmanVariant variant, int n_lift,
                           const TrainConfig& cfg, std::vector<TrainLogEntry>* log = nullptr);

/// Decrement-and-retrain until the lifted (A,B) is controllable and (A,C)
/// observable at full numerical rank. Linear-projection variant only.
KoopmanModel reduce_lifted_dimension(const Dataset& train, int start, double rank_tol,
                                     const TrainConfig& cfg);

/// Copy the (A,B,C) of a linear-projection model into a StateSpaceModel.
StateSpaceModel export_linear(const KoopmanModel& M);

/// Encoder applied to one scaled output sample.
Eigen::VectorXd lift(const KoopmanModel& M, const Eigen::VectorXd& y_scaled);

/// Projection of a lifted state back to scaled outputs.
Eigen::VectorXd koopman_project(const KoopmanModel& M, const Eigen::VectorXd& x);

/// Free-run MAE (physical units) of a Koopman model on a physical dataset,
/// starting from the encoded first output.
Eigen::VectorXd koopman_open_loop_mae(const KoopmanModel& M, const Dataset& d);

}  // namespace kempc
