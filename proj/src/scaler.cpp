#include "kempc/scaler.hpp"

#include <cmath>
#include <string>

namespace kempc {

namespace {
void check_dim(const Scaler& s, Eigen::Index got) {
    if (got != s.channels()) {
        throw DimensionMismatch("scaler expects " + std::to_string(s.channels()) +
                                " channels, got " + std::to_string(got));
    }
}
}  // namespace

Eigen::VectorXd Scaler::transform(const Eigen::VectorXd& x) const {
    check_dim(*this, x.size());
    return (x - mean).cwiseQuotient(std);
}

Eigen::VectorXd Scaler::inverse_transform(const Eigen::VectorXd& z) const {
    check_dim(*this, z.size());
    return mean + z.cwiseProduct(std);
}

Eigen::MatrixXd Scaler::transform_rows(const Eigen::MatrixXd& X) const {
    check_dim(*this, X.cols());
    return (X.rowwise() - mean.transpose()).array().rowwise() / std.transpose().array();
}

Eigen::MatrixXd Scaler::inverse_transform_rows(const Eigen::MatrixXd& Z) const {
    check_dim(*this, Z.cols());
    return (Z.array().rowwise() * std.transpose().array()).matrix().rowwise() + mean.transpose();
}

Scaler fit_scaler(const Eigen::MatrixXd& X) {
    if (X.rows() < 2) {
        throw EmptyData("fit_scaler needs at least 2 samples, got " + std::to_string(X.rows()));
    }
    const auto n = static_cast<double>(X.rows());
    Scaler s;
    s.mean = X.colwise().mean();
    Eigen::MatrixXd centered = X.rowwise() - s.mean.transpose();
    s.std = (centered.array().square().colwise().sum() / n).sqrt();
    for (Eigen::Index j = 0; j < s.std.size(); ++j) {
        if (s.std[j] == 0.0) {
            throw ConstantChannel("channel " + std::to_string(j) + " is constant");
        }
    }
    return s;
}

}  // namespace kempc
