#pragma once

#include <Eigen/Dense>
#include <optional>

#include "kempc/errors.hpp"

namespace kempc {

/// Convex QP: min 1/2 x'Hx + f'x  s.t.  l <= Ax <= u.
/// Equality rows are encoded as l == u.
struct QpProblem {
    Eigen::MatrixXd H;
    Eigen::VectorXd f;
    Eigen::MatrixXd A;
    Eigen::VectorXd l, u;

    Eigen::Index vars() const { return H.rows(); }
    Eigen::Index rows() const { return A.rows(); }
    void validate() const;
};

enum class QpStatus { optimal, max_iterations, infeasible };

const char* to_string(QpStatus s);

struct KktResiduals {
    double stationarity = 0.0;
    double primal = 0.0;
    double complementarity = 0.0;
};

struct QpSolution {
    Eigen::VectorXd x;
    Eigen::VectorXd y;  // row multipliers, positive at upper bounds
    QpStatus status = QpStatus::max_iterations;
    int iterations = 0;
    double primal_res = 0.0;
    double dual_res = 0.0;
    bool polished = false;
};

struct AdmmOptions {
    double eps_abs = 1e-5;
    double eps_rel = 1e-5;
    int max_iter = 20000;
    double rho = 0.1;
    double sigma = 1e-6;
    double alpha = 1.6;  // over-relaxation
    double rho_eq_scale = 1e3;
    bool adaptive_rho = true;
    bool polish = true;
    int check_every = 25;
};

/// Operator-splitting solver with a cached factorization so that repeated
/// solves with the same (H, A) but changing (f, l, u) reuse the setup.
class AdmmSolver {
public:
    explicit AdmmSolver(AdmmOptions opts = {});

    void setup(const Eigen::MatrixXd& H, const Eigen::MatrixXd& A);
    bool is_setup() const { return setup_done_; }

    QpSolution solve(const Eigen::VectorXd& f, const Eigen::VectorXd& l,
                     const Eigen::VectorXd& u,
                     const Eigen::VectorXd* x_warm = nullptr,
                     const Eigen::VectorXd* y_warm = nullptr);

    const AdmmOptions& options() const { return opts_; }
    AdmmOptions& options() { return opts_; }

private:
    void factorize(const Eigen::VectorXd& rho_vec);

    AdmmOptions opts_;
    bool setup_done_ = false;
    Eigen::MatrixXd H_, A_;
    Eigen::VectorXd rho_vec_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
};

/// One-shot convenience wrapper.
QpSolution solve_qp(const QpProblem& qp, AdmmOptions opts = {});

/// KKT residual norms of a candidate primal/dual pair.
KktResiduals kkt_residuals(const QpProblem& qp, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& y);

/// Equality-KKT refinement on the active set identified from (x, y).
/// Returns the improved solution when it lowers the residuals.
std::optional<QpSolution> polish_solution(const QpProblem& qp, const QpSolution& sol);

}  // namespace kempc
