#pragma once

#include <Eigen/Dense>
#include <string>

#include "kempc/dataset.hpp"
#include "kempc/errors.hpp"
#include "kempc/scaler.hpp"

namespace kempc {

/// Discrete LTI model y = C x, x+ = A x + B u operating on standardized
/// signals. Scalers map between physical and model units.
struct StateSpaceModel {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    Eigen::MatrixXd C;
    double timestep = 1.0;  // seconds
    Scaler u_scaler;
    Scaler y_scaler;
    std::string kind;  // "subspace" | "koopman_linear"

    Eigen::Index n() const { return A.rows(); }
    Eigen::Index m() const { return B.cols(); }
    Eigen::Index p() const { return C.rows(); }

    void validate() const;
};

double spectral_radius(const Eigen::MatrixXd& A);

Eigen::VectorXd lti_step(const StateSpaceModel& M, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u);
Eigen::VectorXd lti_output(const StateSpaceModel& M, const Eigen::VectorXd& x);

/// Simulate in scaled units: row k of the result is C x_k; U_scaled rows are
/// inputs. The state is advanced |U| times.
Eigen::MatrixXd simulate_lti(const StateSpaceModel& M, Eigen::VectorXd x,
                             const Eigen::MatrixXd& U_scaled);

/// Exact zero-order-hold conversion to timestep k*Ts:
/// A' = A^k, B' = (sum_{i<k} A^i) B.
StateSpaceModel rescale_timestep(const StateSpaceModel& M, int k);

/// Numerical rank of the controllability / observability matrix: number of
/// singular values above tol * sigma_max.
int controllability_rank(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double tol = 1e-6);
int observability_rank(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C, double tol = 1e-6);

/// Least-squares initial state from the first n_samples of a scaled dataset.
Eigen::VectorXd estimate_initial_state(const StateSpaceModel& M, const Eigen::MatrixXd& U_scaled,
                                       const Eigen::MatrixXd& Y_scaled, int n_samples = 10);

/// Free-run mean absolute error per output in physical units. The dataset is
/// in physical units; x0 is a model-space initial state.
Eigen::VectorXd open_loop_mae(const StateSpaceModel& M, const Dataset& d,
                              const Eigen::VectorXd& x0);

}  // namespace kempc
