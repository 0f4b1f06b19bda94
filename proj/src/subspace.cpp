#include "kempc/subspace.hpp"

#include <Eigen/SVD>
#include <string>

namespace kempc {

MarkovSequence estimate_markov_parameters(const Eigen::MatrixXd& U_scaled,
                                          const Eigen::MatrixXd& Y_scaled, int horizon) {
    const Eigen::Index N = U_scaled.rows();
    const Eigen::Index m = U_scaled.cols();
    const Eigen::Index p = Y_scaled.cols();
    if (Y_scaled.rows() != N) throw DimensionMismatch("U/Y length mismatch");
    if (horizon < 1) throw Error("ARX horizon must be >= 1");
    if (N < static_cast<Eigen::Index>(horizon) * (m + 1)) {
        throw EmptyData("dataset too short for ARX horizon " + std::to_string(horizon));
    }

    const Eigen::Index rows = N - horizon;
    const Eigen::Index cols = static_cast<Eigen::Index>(horizon) * m;
    Eigen::MatrixXd Phi(rows, cols);
    for (int i = 1; i <= horizon; ++i) {
        Phi.middleCols((i - 1) * m, m) = U_scaled.middleRows(horizon - i, rows);
    }
    const Eigen::MatrixXd Yt = Y_scaled.bottomRows(rows);

    Eigen::MatrixXd G = Phi.transpose() * Phi;
    const double lambda = 1e-6 * G.trace() / static_cast<double>(rows);
    G.diagonal().array() += lambda;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > 1e12) {
        throw IllConditioned("ARX regressor Gram condition " +
                             std::to_string(lo > 0 ? hi / lo : std::numeric_limits<double>::infinity()) +
                             " exceeds 1e12");
    }

    const Eigen::MatrixXd sol = G.ldlt().solve(Phi.transpose() * Yt);

    MarkovSequence out;
    out.H.reserve(horizon);
    for (int i = 0; i < horizon; ++i) {
        out.H.push_back(sol.middleRows(static_cast<Eigen::Index>(i) * m, m).transpose());
    }
    return out;
}

StateSpaceModel ho_kalman(const MarkovSequence& markov, int order) {
    if (order < 1) throw Error("ho_kalman order must be >= 1");
    const int horizon = markov.horizon();
    if (horizon < 2 * order + 1) throw Error("ho_kalman needs horizon >= 2*order + 1");
    const Eigen::Index p = markov.H[0].rows();
    const Eigen::Index m = markov.H[0].cols();

    const int rb = horizon / 2;
    const int cb = horizon - rb;  // Hankel uses H_1..H_{rb+cb-1}; shifted uses H_horizon
    Eigen::MatrixXd Hk(rb * p, cb * m), Hk2(rb * p, cb * m);
    for (int i = 0; i < rb; ++i) {
        for (int j = 0; j < cb; ++j) {
            Hk.block(i * p, j * m, p, m) = markov.H[i + j];
            Hk2.block(i * p, j * m, p, m) = markov.H[i + j + 1];
        }
    }

    Eigen::BDCSVD<Eigen::MatrixXd> svd(Hk, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    if (s[0] <= 0.0 || s[order - 1] / s[0] < 1e-10) {
        throw RankDeficient("Hankel singular value ratio below 1e-10 at order " +
                            std::to_string(order));
    }

    const Eigen::VectorXd sq = s.head(order).cwiseSqrt();
    const Eigen::MatrixXd Ur = svd.matrixU().leftCols(order);
    const Eigen::MatrixXd Vr = svd.matrixV().leftCols(order);

    StateSpaceModel M;
    M.A = sq.cwiseInverse().asDiagonal() * Ur.transpose() * Hk2 * Vr *
          sq.cwiseInverse().asDiagonal();
    const Eigen::MatrixXd ctrb = sq.asDiagonal() * Vr.transpose();
    const Eigen::MatrixXd obsv = Ur * sq.asDiagonal();
    M.B = ctrb.leftCols(m);
    M.C = obsv.topRows(p);
    M.kind = "subspace";
    return M;
}

namespace {

// Joint least squares for (x0, B) with A, C fixed:
// y_k = C A^k x0 + sum_j C A^{k-1-j} B u_j, linear in x0 and vec(B).
void refine_b_x0(StateSpaceModel& M, const Eigen::MatrixXd& U_scaled,
                 const Eigen::MatrixXd& Y_scaled) {
    const Eigen::Index n = M.n(), m = M.m(), p = M.p();
    const Eigen::Index N = U_scaled.rows();
    const Eigen::Index nb = n * m;

    // z^{(a,b)}_{k+1} = A z^{(a,b)}_k + e_a u_{k,b} tracks the response of
    // basis matrix E_ab; w_k = A^k tracks the x0 response.
    Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(n, nb);
    Eigen::MatrixXd W = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd Phi(N * p, n + nb);
    Eigen::VectorXd rhs(N * p);
    for (Eigen::Index k = 0; k < N; ++k) {
        Phi.block(k * p, 0, p, n) = M.C * W;
        Phi.block(k * p, n, p, nb) = M.C * Z;
        rhs.segment(k * p, p) = Y_scaled.row(k).transpose();
        Eigen::MatrixXd add = Eigen::MatrixXd::Zero(n, nb);
        for (Eigen::Index a = 0; a < n; ++a) {
            for (Eigen::Index b = 0; b < m; ++b) add(a, a * m + b) = U_scaled(k, b);
        }
        Z = M.A * Z + add;
        W = M.A * W;
    }
    const Eigen::VectorXd sol =
        Phi.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rhs);
    Eigen::MatrixXd Bnew(n, m);
    for (Eigen::Index a = 0; a < n; ++a) Bnew.row(a) = sol.segment(n + a * m, m).transpose();
    M.B = Bnew;
}

}  // namespace

StateSpaceModel identify_subspace(const Dataset& train, int order) {
    train.validate();
    const Scaler u_scaler = fit_scaler(train.U);
    const Scaler y_scaler = fit_scaler(train.Y);
    const Eigen::MatrixXd Us = u_scaler.transform_rows(train.U);
    const Eigen::MatrixXd Ys = y_scaler.transform_rows(train.Y);

    constexpr int kHorizon = 40;
    const MarkovSequence markov = estimate_markov_parameters(Us, Ys, kHorizon);
    StateSpaceModel M = ho_kalman(markov, order);
    if (spectral_radius(M.A) < 1.02) {
        refine_b_x0(M, Us, Ys);
    }
    M.timestep = train.timestep;
    M.u_scaler = u_scaler;
    M.y_scaler = y_scaler;
    M.kind = "subspace";
    return M;
}

}  // namespace kempc
