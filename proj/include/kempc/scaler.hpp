#pragma once

#include <Eigen/Dense>

#include "kempc/errors.hpp"

namespace kempc {

/// Per-channel standardization: z = (x - mean) / std.
/// Fitted with the population (divisor-n) standard deviation.
struct Scaler {
    Eigen::VectorXd mean;
    Eigen::VectorXd std;

    bool empty() const { return mean.size() == 0; }
    Eigen::Index channels() const { return mean.size(); }

    Eigen::VectorXd transform(const Eigen::VectorXd& x) const;
    Eigen::VectorXd inverse_transform(const Eigen::VectorXd& z) const;

    /// Row-wise variants: each row of X is one sample.
    Eigen::MatrixXd transform_rows(const Eigen::MatrixXd& X) const;
    Eigen::MatrixXd inverse_transform_rows(const Eigen::MatrixXd& Z) const;
};

/// Fit a Scaler on samples given as rows of X. Throws EmptyData for fewer
/// than two samples and ConstantChannel if any column has zero variance.
Scaler fit_scaler(const Eigen::MatrixXd& X);

}  // namespace kempc
