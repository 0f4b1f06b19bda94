#include "kempc/mlp.hpp"

#include <cmath>
#include <random>
#include <string>

namespace kempc {

void MlpParams::validate() const {
    for (size_t i = 0; i < layers.size(); ++i) {
        const auto& l = layers[i];
        if (l.W.rows() != l.b.size()) throw DimensionMismatch("layer bias size mismatch");
        if (i > 0 && l.W.cols() != layers[i - 1].W.rows()) {
            throw DimensionMismatch("layer " + std::to_string(i) + " input dim mismatch");
        }
        if (!l.W.allFinite() || !l.b.allFinite()) throw Error("non-finite MLP parameters");
    }
}

MlpGrads MlpGrads::zeros_like(const MlpParams& p) {
    MlpGrads g;
    g.dW.reserve(p.layers.size());
    g.db.reserve(p.layers.size());
    for (const auto& l : p.layers) {
        g.dW.push_back(Eigen::MatrixXd::Zero(l.W.rows(), l.W.cols()));
        g.db.push_back(Eigen::VectorXd::Zero(l.b.size()));
    }
    return g;
}

void MlpGrads::add_scaled(const MlpGrads& other, double s) {
    for (size_t i = 0; i < dW.size(); ++i) {
        dW[i] += s * other.dW[i];
        db[i] += s * other.db[i];
    }
}

namespace {

Eigen::MatrixXd apply_act(Activation act, const Eigen::MatrixXd& Z) {
    switch (act) {
        case Activation::relu:
            return Z.cwiseMax(0.0);
        case Activation::elu:
            return Z.unaryExpr([](double v) { return v >= 0.0 ? v : std::expm1(v); });
        case Activation::linear:
            return Z;
    }
    return Z;
}

// Elementwise activation derivative evaluated at the pre-activation.
Eigen::MatrixXd act_deriv(Activation act, const Eigen::MatrixXd& Z) {
    switch (act) {
        case Activation::relu:
            return Z.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
        case Activation::elu:
            return Z.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : std::exp(v); });
        case Activation::linear:
            return Eigen::MatrixXd::Ones(Z.rows(), Z.cols());
    }
    return Eigen::MatrixXd::Ones(Z.rows(), Z.cols());
}

}  // namespace

Eigen::MatrixXd mlp_forward(const MlpParams& p, const Eigen::MatrixXd& X, MlpCache* cache) {
    if (p.layers.empty()) throw Error("empty MLP");
    if (X.rows() != p.in_dim()) throw DimensionMismatch("MLP input dim mismatch");
    if (cache) {
        cache->inputs.clear();
        cache->preact.clear();
        cache->inputs.reserve(p.layers.size());
        cache->preact.reserve(p.layers.size());
    }
    Eigen::MatrixXd cur = X;
    for (const auto& l : p.layers) {
        if (cache) cache->inputs.push_back(cur);
        Eigen::MatrixXd Z = (l.W * cur).colwise() + l.b;
        if (cache) cache->preact.push_back(Z);
        cur = apply_act(l.act, Z);
    }
    return cur;
}

Eigen::MatrixXd mlp_backward(const MlpParams& p, const MlpCache& cache,
                             const Eigen::MatrixXd& upstream, MlpGrads& grads) {
    if (cache.inputs.size() != p.layers.size()) throw Error("MLP cache mismatch");
    Eigen::MatrixXd delta = upstream;
    for (int i = static_cast<int>(p.layers.size()) - 1; i >= 0; --i) {
        const auto& l = p.layers[i];
        delta = delta.cwiseProduct(act_deriv(l.act, cache.preact[i]));
        grads.dW[i].noalias() += delta * cache.inputs[i].transpose();
        grads.db[i] += delta.rowwise().sum();
        if (i > 0) delta = (l.W.transpose() * delta).eval();
    }
    return p.layers.front().W.transpose() * delta;
}

MlpParams make_mlp(const std::vector<Eigen::Index>& dims, Activation hidden_act,
                   std::uint64_t seed) {
    if (dims.size() < 2) throw Error("MLP needs at least one layer");
    std::mt19937_64 gen(seed);
    auto uniform = [&gen]() {
        // 53-bit mantissa draw in [0,1); bit-reproducible across platforms
        return static_cast<double>(gen() >> 11) * 0x1.0p-53;
    };
    MlpParams p;
    for (size_t i = 0; i + 1 < dims.size(); ++i) {
        MlpLayer l;
        const double s = std::sqrt(6.0 / static_cast<double>(dims[i]));
        l.W.resize(dims[i + 1], dims[i]);
        for (Eigen::Index r = 0; r < l.W.rows(); ++r) {
            for (Eigen::Index c = 0; c < l.W.cols(); ++c) l.W(r, c) = s * (2.0 * uniform() - 1.0);
        }
        l.b = Eigen::VectorXd::Zero(dims[i + 1]);
        l.act = (i + 2 < dims.size()) ? hidden_act : Activation::linear;
        p.layers.push_back(std::move(l));
    }
    return p;
}

}  // namespace kempc
