#include "kempc/koopman.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace kempc {

void KoopmanModel::validate() const {
    encoder.validate();
    if (encoder.out_dim() != n_lift) throw DimensionMismatch("encoder output != n_lift");
    if (A.rows() != n_lift || A.cols() != n_lift) throw DimensionMismatch("A must be n_lift^2");
    if (B.rows() != n_lift) throw DimensionMismatch("B rows != n_lift");
    if (variant == KoopmanVariant::linear_projection) {
        if (C.cols() != n_lift) throw DimensionMismatch("C cols != n_lift");
    } else {
        decoder.validate();
        if (decoder.in_dim() != n_lift) throw DimensionMismatch("decoder input != n_lift");
    }
    if (n_lift < encoder.in_dim()) throw Error("n_lift must be >= output dimension");
}

void TrainConfig::validate() const {
    if (rollout_len < 1) throw ConfigError("rollout_len must be >= 1");
    if (epochs < 1 || batch < 1) throw ConfigError("epochs and batch must be >= 1");
    if (learning_rate <= 0) throw ConfigError("learning rate must be > 0");
    if (lambda_pred < 0 || lambda_rec < 0 || lambda_lin < 0) {
        throw ConfigError("loss weights must be >= 0");
    }
    if (val_fraction < 0 || val_fraction >= 1) throw ConfigError("val_fraction in [0,1)");
}

Eigen::VectorXd lift(const KoopmanModel& M, const Eigen::VectorXd& y_scaled) {
    return mlp_forward(M.encoder, y_scaled);
}

Eigen::VectorXd koopman_project(const KoopmanModel& M, const Eigen::VectorXd& x) {
    if (M.variant == KoopmanVariant::linear_projection) return M.C * x;
    return mlp_forward(M.decoder, x);
}

double koopman_loss(const KoopmanModel& M, const WindowBatch& batch, double lambda_pred,
                    double lambda_rec, double lambda_lin, KoopmanGrads* grads) {
    const int K = batch.rollout_len();
    if (static_cast<int>(batch.Y.size()) != K + 1) {
        throw DimensionMismatch("window batch needs K inputs and K+1 outputs");
    }
    const Eigen::Index W = batch.width();
    const Eigen::Index n = M.n_lift;
    const Eigen::Index p = M.encoder.in_dim();
    const bool linear = M.variant == KoopmanVariant::linear_projection;
    const double w = 1.0 / (static_cast<double>(K + 1) * static_cast<double>(W));

    // Stack all time points column-wise, block k at columns [k*W, (k+1)*W).
    Eigen::MatrixXd Yall(p, static_cast<Eigen::Index>(K + 1) * W);
    for (int k = 0; k <= K; ++k) Yall.middleCols(static_cast<Eigen::Index>(k) * W, W) = batch.Y[k];

    MlpCache enc_cache;
    const Eigen::MatrixXd G = mlp_forward(M.encoder, Yall, grads ? &enc_cache : nullptr);

    Eigen::MatrixXd Xall(n, static_cast<Eigen::Index>(K + 1) * W);
    Xall.middleCols(0, W) = G.middleCols(0, W);
    for (int k = 0; k < K; ++k) {
        Xall.middleCols(static_cast<Eigen::Index>(k + 1) * W, W) =
            M.A * Xall.middleCols(static_cast<Eigen::Index>(k) * W, W) + M.B * batch.U[k];
    }

    MlpCache dec_cache_x, dec_cache_g;
    Eigen::MatrixXd Yhat, Yrec;
    if (linear) {
        Yhat = M.C * Xall;
        Yrec = M.C * G;
    } else {
        Yhat = mlp_forward(M.decoder, Xall, grads ? &dec_cache_x : nullptr);
        Yrec = mlp_forward(M.decoder, G, grads ? &dec_cache_g : nullptr);
    }

    const Eigen::MatrixXd pred_res = Yhat - Yall;
    const Eigen::MatrixXd rec_res = Yrec - Yall;
    const Eigen::MatrixXd lin_res = Xall - G;

    const double loss = lambda_pred * w * pred_res.squaredNorm() +
                        lambda_rec * w * rec_res.squaredNorm() +
                        lambda_lin * w * lin_res.squaredNorm();
    if (!std::isfinite(loss)) throw NonFiniteLoss("non-finite rollout loss");
    if (!grads) return loss;

    grads->encoder = MlpGrads::zeros_like(M.encoder);
    grads->dA = Eigen::MatrixXd::Zero(n, n);
    grads->dB = Eigen::MatrixXd::Zero(n, M.B.cols());
    if (linear) {
        grads->dC = Eigen::MatrixXd::Zero(p, n);
    } else {
        grads->decoder = MlpGrads::zeros_like(M.decoder);
    }

    const Eigen::MatrixXd dYhat = 2.0 * lambda_pred * w * pred_res;
    const Eigen::MatrixXd dYrec = 2.0 * lambda_rec * w * rec_res;

    Eigen::MatrixXd dX_proj, dG_rec;
    if (linear) {
        grads->dC.noalias() += dYhat * Xall.transpose();
        grads->dC.noalias() += dYrec * G.transpose();
        dX_proj = M.C.transpose() * dYhat;
        dG_rec = M.C.transpose() * dYrec;
    } else {
        dX_proj = mlp_backward(M.decoder, dec_cache_x, dYhat, grads->decoder);
        dG_rec = mlp_backward(M.decoder, dec_cache_g, dYrec, grads->decoder);
    }

    const Eigen::MatrixXd dX_lin = 2.0 * lambda_lin * w * lin_res;

    // Backward through the rollout recursion.
    Eigen::MatrixXd dG = dG_rec - dX_lin;
    Eigen::MatrixXd carry = Eigen::MatrixXd::Zero(n, W);
    for (int k = K; k >= 1; --k) {
        const Eigen::MatrixXd dXk = dX_proj.middleCols(static_cast<Eigen::Index>(k) * W, W) +
                                    dX_lin.middleCols(static_cast<Eigen::Index>(k) * W, W) + carry;
        grads->dA.noalias() +=
            dXk * Xall.middleCols(static_cast<Eigen::Index>(k - 1) * W, W).transpose();
        grads->dB.noalias() += dXk * batch.U[k - 1].transpose();
        carry = M.A.transpose() * dXk;
    }
    dG.middleCols(0, W) += dX_proj.middleCols(0, W) + dX_lin.middleCols(0, W) + carry;

    mlp_backward(M.encoder, enc_cache, dG, grads->encoder);
    return loss;
}

namespace {

struct TensorRef {
    double* p;
    const double* g;
    Eigen::Index size;
};

// Flat-tensor Adam with cosine-decayed learning rate.
class Adam {
public:
    void step(const std::vector<TensorRef>& tensors, double lr) {
        if (m_.empty()) {
            for (const auto& t : tensors) {
                m_.emplace_back(Eigen::VectorXd::Zero(t.size));
                v_.emplace_back(Eigen::VectorXd::Zero(t.size));
            }
        }
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        for (size_t i = 0; i < tensors.size(); ++i) {
            Eigen::Map<Eigen::VectorXd> p(tensors[i].p, tensors[i].size);
            Eigen::Map<const Eigen::VectorXd> g(tensors[i].g, tensors[i].size);
            m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
            v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g.cwiseProduct(g);
            p.array() -= lr * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + eps_);
        }
    }

private:
    std::vector<Eigen::VectorXd> m_, v_;
    double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
    long t_ = 0;
};

std::vector<TensorRef> tensor_refs(KoopmanModel& M, KoopmanGrads& g) {
    std::vector<TensorRef> out;
    auto add_mlp = [&out](MlpParams& mlp, MlpGrads& grads) {
        for (size_t i = 0; i < mlp.layers.size(); ++i) {
            out.push_back({mlp.layers[i].W.data(), grads.dW[i].data(), mlp.layers[i].W.size()});
            out.push_back({mlp.layers[i].b.data(), grads.db[i].data(), mlp.layers[i].b.size()});
        }
    };
    add_mlp(M.encoder, g.encoder);
    out.push_back({M.A.data(), g.dA.data(), M.A.size()});
    out.push_back({M.B.data(), g.dB.data(), M.B.size()});
    if (M.variant == KoopmanVariant::linear_projection) {
        out.push_back({M.C.data(), g.dC.data(), M.C.size()});
    } else {
        add_mlp(M.decoder, g.decoder);
    }
    return out;
}

WindowBatch gather_batch(const Eigen::MatrixXd& Us, const Eigen::MatrixXd& Ys, int K,
                         const std::vector<int>& starts) {
    const Eigen::Index W = static_cast<Eigen::Index>(starts.size());
    WindowBatch b;
    b.U.assign(K, Eigen::MatrixXd(Us.cols(), W));
    b.Y.assign(K + 1, Eigen::MatrixXd(Ys.cols(), W));
    for (Eigen::Index w = 0; w < W; ++w) {
        const int t0 = starts[static_cast<size_t>(w)];
        for (int k = 0; k < K; ++k) b.U[k].col(w) = Us.row(t0 + k).transpose();
        for (int k = 0; k <= K; ++k) b.Y[k].col(w) = Ys.row(t0 + k).transpose();
    }
    return b;
}

}  // namespace

KoopmanModel train_koopman(const Dataset& train, KoopmanVariant variant, int n_lift,
                           const TrainConfig& cfg, std::vector<TrainLogEntry>* log) {
    cfg.validate();
    train.validate();
    const Eigen::Index p = train.Y.cols();
    if (n_lift < p) throw Error("n_lift must be >= output dimension");

    KoopmanModel M;
    M.variant = variant;
    M.n_lift = n_lift;
    M.timestep = train.timestep;
    M.u_scaler = fit_scaler(train.U);
    M.y_scaler = fit_scaler(train.Y);

    const Eigen::MatrixXd Us = M.u_scaler.transform_rows(train.U);
    const Eigen::MatrixXd Ys = M.y_scaler.transform_rows(train.Y);

    const int K = cfg.rollout_len;
    const int n_win = static_cast<int>(train.size()) - K;
    if (n_win < 2) throw EmptyData("dataset too short for rollout length");

    // Deterministic split: validation windows come from the tail.
    const int n_val = std::max(1, static_cast<int>(std::floor(cfg.val_fraction * n_win)));
    const int n_train = n_win - n_val;
    if (n_train < 1) throw EmptyData("no training windows left after validation split");
    std::vector<int> train_idx(n_train), val_idx(n_val);
    std::iota(train_idx.begin(), train_idx.end(), 0);
    std::iota(val_idx.begin(), val_idx.end(), n_train);

    std::vector<Eigen::Index> enc_dims{p};
    enc_dims.insert(enc_dims.end(), cfg.encoder_hidden.begin(), cfg.encoder_hidden.end());
    enc_dims.push_back(n_lift);
    M.encoder = make_mlp(enc_dims, Activation::relu, cfg.seed);
    M.A = 0.99 * Eigen::MatrixXd::Identity(n_lift, n_lift);
    {
        std::mt19937_64 gen(cfg.seed ^ 0xb5ad4eceda1ce2a9ULL);
        auto uniform = [&gen]() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
        M.B.resize(n_lift, train.U.cols());
        for (Eigen::Index r = 0; r < M.B.rows(); ++r) {
            for (Eigen::Index c = 0; c < M.B.cols(); ++c) M.B(r, c) = 0.01 * (2 * uniform() - 1);
        }
        if (variant == KoopmanVariant::linear_projection) {
            const double s = std::sqrt(6.0 / static_cast<double>(n_lift));
            M.C.resize(p, n_lift);
            for (Eigen::Index r = 0; r < p; ++r) {
                for (Eigen::Index c = 0; c < n_lift; ++c) M.C(r, c) = s * (2 * uniform() - 1);
            }
        }
    }
    if (variant == KoopmanVariant::nonlinear_projection) {
        std::vector<Eigen::Index> dec_dims{n_lift};
        dec_dims.insert(dec_dims.end(), cfg.decoder_hidden.begin(), cfg.decoder_hidden.end());
        dec_dims.push_back(p);
        M.decoder = make_mlp(dec_dims, Activation::elu, cfg.seed ^ 0x94d049bb133111ebULL);
    }

    Adam adam;
    const long total_steps =
        static_cast<long>(cfg.epochs) * ((n_train + cfg.batch - 1) / cfg.batch);
    long step_count = 0;

    std::mt19937_64 shuffle_gen(cfg.seed ^ 0x2545f4914f6cdd1dULL);
    double best_loss = std::numeric_limits<double>::infinity();
    int diverged_epochs = 0;
    double train_loss = 0.0, val_loss = 0.0;
    KoopmanGrads g;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Fisher-Yates with the raw generator for cross-platform determinism.
        for (int i = n_train - 1; i > 0; --i) {
            const int j = static_cast<int>(shuffle_gen() % static_cast<std::uint64_t>(i + 1));
            std::swap(train_idx[static_cast<size_t>(i)], train_idx[static_cast<size_t>(j)]);
        }

        double epoch_loss = 0.0;
        int batches = 0;
        for (int s = 0; s < n_train; s += cfg.batch) {
            const int e = std::min(n_train, s + cfg.batch);
            const std::vector<int> starts(train_idx.begin() + s, train_idx.begin() + e);
            const WindowBatch batch = gather_batch(Us, Ys, K, starts);
            double loss;
            try {
                loss = koopman_loss(M, batch, cfg.lambda_pred, cfg.lambda_rec, cfg.lambda_lin, &g);
            } catch (const NonFiniteLoss&) {
                throw NonFiniteLoss("non-finite loss at epoch " + std::to_string(epoch));
            }
            epoch_loss += loss;
            ++batches;

            const double progress =
                static_cast<double>(step_count) / static_cast<double>(std::max(1L, total_steps));
            const double lr = cfg.learning_rate * 0.5 * (1.0 + std::cos(M_PI * progress));
            ++step_count;
            adam.step(tensor_refs(M, g), lr);
        }
        train_loss = epoch_loss / std::max(1, batches);

        const WindowBatch val_batch = gather_batch(Us, Ys, K, val_idx);
        val_loss =
            koopman_loss(M, val_batch, cfg.lambda_pred, cfg.lambda_rec, cfg.lambda_lin, nullptr);
        if (log) log->push_back({epoch, train_loss, val_loss});

        if (train_loss < best_loss) best_loss = train_loss;
        if (train_loss > 10.0 * best_loss) {
            if (++diverged_epochs >= 20) {
                throw DivergedLoss("loss grew 10x from best for 20 consecutive epochs (epoch " +
                                   std::to_string(epoch) + ")");
            }
        } else {
            diverged_epochs = 0;
        }
    }

    M.final_train_loss = train_loss;
    M.final_val_loss = val_loss;
    return M;
}

KoopmanModel reduce_lifted_dimension(const Dataset& train, int start, double rank_tol,
                                     const TrainConfig& cfg) {
    const Eigen::Index p = train.Y.cols();
    if (start < p) throw Error("start dimension below output dimension");
    for (int n = start; n >= p; --n) {
        KoopmanModel M = train_koopman(train, KoopmanVariant::linear_projection, n, cfg);
        const int cr = controllability_rank(M.A, M.B, rank_tol);
        const int obr = observability_rank(M.A, M.C, rank_tol);
        if (cr == n && obr == n) return M;
    }
    throw NoAdmissibleDimension("no lifted dimension in [" + std::to_string(p) + ", " +
                                std::to_string(start) + "] passes the rank tests");
}

StateSpaceModel export_linear(const KoopmanModel& M) {
    if (M.variant != KoopmanVariant::linear_projection) {
        throw WrongVariant("export_linear requires the linear-projection variant");
    }
    StateSpaceModel out;
    out.A = M.A;
    out.B = M.B;
    out.C = M.C;
    out.timestep = M.timestep;
    out.u_scaler = M.u_scaler;
    out.y_scaler = M.y_scaler;
    out.kind = "koopman_linear";
    return out;
}

Eigen::VectorXd koopman_open_loop_mae(const KoopmanModel& M, const Dataset& d) {
    const Eigen::MatrixXd Us = M.u_scaler.transform_rows(d.U);
    const Eigen::MatrixXd Ys = M.y_scaler.transform_rows(d.Y);
    Eigen::VectorXd x = lift(M, Ys.row(0).transpose());
    Eigen::VectorXd err = Eigen::VectorXd::Zero(d.Y.cols());
    for (Eigen::Index k = 0; k < d.size(); ++k) {
        const Eigen::VectorXd y_hat = M.y_scaler.inverse_transform(koopman_project(M, x));
        err += (y_hat - d.Y.row(k).transpose()).cwiseAbs();
        x = M.A * x + M.B * Us.row(k).transpose();
    }
    return err / static_cast<double>(d.size());
}

}  // namespace kempc
