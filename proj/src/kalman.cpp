#include "kempc/kalman.hpp"

#include <string>

namespace kempc {

AugmentedKalman build_augmented(const StateSpaceModel& M, double q_scale, double r_scale,
                                double rank_tol) {
    const Eigen::Index n = M.n(), p = M.p(), m = M.m();
    AugmentedKalman kf;
    kf.n = n;
    kf.p = p;
    kf.A_aug = Eigen::MatrixXd::Zero(n + p, n + p);
    kf.A_aug.topLeftCorner(n, n) = M.A;
    kf.A_aug.bottomRightCorner(p, p) = Eigen::MatrixXd::Identity(p, p);
    kf.B_aug = Eigen::MatrixXd::Zero(n + p, m);
    kf.B_aug.topRows(n) = M.B;
    kf.C_aug = Eigen::MatrixXd::Zero(p, n + p);
    kf.C_aug.leftCols(n) = M.C;
    kf.C_aug.rightCols(p) = Eigen::MatrixXd::Identity(p, p);
    kf.Q = q_scale * Eigen::MatrixXd::Identity(n + p, n + p);
    kf.R = r_scale * Eigen::MatrixXd::Identity(p, p);
    kf.P = Eigen::MatrixXd::Identity(n + p, n + p);
    kf.xhat = Eigen::VectorXd::Zero(n + p);

    const int rank = observability_rank(kf.A_aug, kf.C_aug, rank_tol);
    if (rank < n + p) {
        throw Undetectable("augmented pair observability rank " + std::to_string(rank) + " < " +
                           std::to_string(n + p));
    }
    return kf;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> kf_step(AugmentedKalman& kf,
                                                    const Eigen::VectorXd& u_prev,
                                                    const Eigen::VectorXd& y_meas) {
    if (u_prev.size() != kf.B_aug.cols()) throw DimensionMismatch("kf input dimension");
    if (y_meas.size() != kf.p) throw DimensionMismatch("kf measurement dimension");

    // Predict.
    kf.xhat = kf.A_aug * kf.xhat + kf.B_aug * u_prev;
    kf.P = kf.A_aug * kf.P * kf.A_aug.transpose() + kf.Q;

    // Update with Joseph-form covariance.
    const Eigen::MatrixXd S = kf.C_aug * kf.P * kf.C_aug.transpose() + kf.R;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > 1e14) {
        throw SingularInnovation("innovation covariance condition exceeds 1e14");
    }
    const Eigen::MatrixXd K = S.ldlt().solve(kf.C_aug * kf.P).transpose();
    const Eigen::VectorXd innovation = y_meas - kf.C_aug * kf.xhat;
    kf.xhat += K * innovation;
    const Eigen::MatrixXd IKC =
        Eigen::MatrixXd::Identity(kf.n + kf.p, kf.n + kf.p) - K * kf.C_aug;
    kf.P = IKC * kf.P * IKC.transpose() + K * kf.R * K.transpose();
    kf.P = 0.5 * (kf.P + kf.P.transpose()).eval();

    return {kf.xhat.head(kf.n), kf.xhat.tail(kf.p)};
}

Eigen::MatrixXd steady_state_covariance(const AugmentedKalman& kf, double tol, long max_iter) {
    Eigen::MatrixXd P = kf.P;
    const Eigen::Index na = kf.n + kf.p;
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(na, na);
    for (long it = 0; it < max_iter; ++it) {
        const Eigen::MatrixXd Pp = kf.A_aug * P * kf.A_aug.transpose() + kf.Q;
        const Eigen::MatrixXd S = kf.C_aug * Pp * kf.C_aug.transpose() + kf.R;
        const Eigen::MatrixXd K = S.ldlt().solve(kf.C_aug * Pp).transpose();
        Eigen::MatrixXd Pn = (I - K * kf.C_aug) * Pp * (I - K * kf.C_aug).transpose() +
                             K * kf.R * K.transpose();
        Pn = 0.5 * (Pn + Pn.transpose()).eval();
        if ((Pn - P).norm() < tol) return Pn;
        P = Pn;
    }
    throw NoConvergence("Riccati recursion did not converge");
}

}  // namespace kempc
