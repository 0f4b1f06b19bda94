#include "kempc/ssmodel.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <string>

namespace kempc {

void StateSpaceModel::validate() const {
    if (A.rows() != A.cols()) throw DimensionMismatch("A must be square");
    if (B.rows() != A.rows()) throw DimensionMismatch("B rows must match A");
    if (C.cols() != A.rows()) throw DimensionMismatch("C cols must match A");
    if (timestep <= 0.0) throw Error("model timestep must be > 0");
    const double rho = spectral_radius(A);
    if (rho >= 1.05) {
        throw Error("model spectral radius " + std::to_string(rho) + " exceeds 1.05");
    }
}

double spectral_radius(const Eigen::MatrixXd& A) {
    return A.eigenvalues().cwiseAbs().maxCoeff();
}

namespace {
void check_state_input(const StateSpaceModel& M, const Eigen::VectorXd& x,
                       const Eigen::VectorXd* u) {
    if (x.size() != M.n()) throw DimensionMismatch("state dimension mismatch");
    if (u && u->size() != M.m()) throw DimensionMismatch("input dimension mismatch");
}
}  // namespace

Eigen::VectorXd lti_step(const StateSpaceModel& M, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u) {
    check_state_input(M, x, &u);
    return M.A * x + M.B * u;
}

Eigen::VectorXd lti_output(const StateSpaceModel& M, const Eigen::VectorXd& x) {
    check_state_input(M, x, nullptr);
    return M.C * x;
}

Eigen::MatrixXd simulate_lti(const StateSpaceModel& M, Eigen::VectorXd x,
                             const Eigen::MatrixXd& U_scaled) {
    if (U_scaled.cols() != M.m()) throw DimensionMismatch("input dimension mismatch");
    check_state_input(M, x, nullptr);
    Eigen::MatrixXd Y(U_scaled.rows(), M.p());
    for (Eigen::Index k = 0; k < U_scaled.rows(); ++k) {
        Y.row(k) = (M.C * x).transpose();
        x = M.A * x + M.B * U_scaled.row(k).transpose();
    }
    return Y;
}

namespace {
// Returns (A^e, sum_{i<e} A^i) by binary decomposition.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> power_and_sum(const Eigen::MatrixXd& A, int e) {
    const Eigen::Index n = A.rows();
    if (e == 1) return {A, Eigen::MatrixXd::Identity(n, n)};
    if (e % 2 == 0) {
        auto [P, S] = power_and_sum(A, e / 2);
        return {P * P, S + P * S};
    }
    auto [P, S] = power_and_sum(A, e - 1);
    return {P * A, S + P};
}
}  // namespace

StateSpaceModel rescale_timestep(const StateSpaceModel& M, int k) {
    if (k < 1) throw Error("rescale factor must be >= 1");
    if (k == 1) return M;
    StateSpaceModel out = M;
    auto [Ak, Sk] = power_and_sum(M.A, k);
    out.A = Ak;
    out.B = Sk * M.B;
    out.timestep = M.timestep * k;
    return out;
}

namespace {
int numerical_rank(const Eigen::MatrixXd& M, double tol) {
    if (M.size() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s[0] == 0.0) return 0;
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s[i] > tol * s[0]) ++r;
    }
    return r;
}
}  // namespace

int controllability_rank(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double tol) {
    if (!(tol > 0.0 && tol < 1.0)) throw Error("rank tolerance must be in (0,1)");
    const Eigen::Index n = A.rows();
    Eigen::MatrixXd ctrb(n, n * B.cols());
    Eigen::MatrixXd blk = B;
    for (Eigen::Index i = 0; i < n; ++i) {
        ctrb.middleCols(i * B.cols(), B.cols()) = blk;
        blk = A * blk;
    }
    return numerical_rank(ctrb, tol);
}

int observability_rank(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C, double tol) {
    return controllability_rank(A.transpose(), C.transpose(), tol);
}

Eigen::VectorXd estimate_initial_state(const StateSpaceModel& M, const Eigen::MatrixXd& U_scaled,
                                       const Eigen::MatrixXd& Y_scaled, int n_samples) {
    const Eigen::Index n = M.n(), p = M.p();
    const Eigen::Index nfit = std::min<Eigen::Index>(n_samples, U_scaled.rows());
    Eigen::MatrixXd Phi(nfit * p, n);
    Eigen::VectorXd rhs(nfit * p);
    Eigen::MatrixXd Ak = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd x_forced = Eigen::VectorXd::Zero(n);
    for (Eigen::Index k = 0; k < nfit; ++k) {
        Phi.middleRows(k * p, p) = M.C * Ak;
        rhs.segment(k * p, p) = Y_scaled.row(k).transpose() - M.C * x_forced;
        x_forced = M.A * x_forced + M.B * U_scaled.row(k).transpose();
        Ak = M.A * Ak;
    }
    return Phi.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rhs);
}

Eigen::VectorXd open_loop_mae(const StateSpaceModel& M, const Dataset& d,
                              const Eigen::VectorXd& x0) {
    if (M.u_scaler.empty() || M.y_scaler.empty()) {
        throw ScalerMissing("open_loop_mae requires model scalers");
    }
    const Eigen::MatrixXd Us = M.u_scaler.transform_rows(d.U);
    const Eigen::MatrixXd Ys_hat = simulate_lti(M, x0, Us);
    const Eigen::MatrixXd Y_hat = M.y_scaler.inverse_transform_rows(Ys_hat);
    return (Y_hat - d.Y).cwiseAbs().colwise().mean();
}

}  // namespace kempc
