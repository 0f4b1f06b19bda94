#include "kempc/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace kempc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double inf_norm(const Eigen::VectorXd& v) {
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}
}  // namespace

void QpProblem::validate() const {
    if (H.rows() != H.cols()) throw DimensionMismatch("H must be square");
    if (f.size() != H.rows()) throw DimensionMismatch("f size mismatch");
    if (A.cols() != H.rows()) throw DimensionMismatch("A cols mismatch");
    if (l.size() != A.rows() || u.size() != A.rows()) throw DimensionMismatch("bounds mismatch");
    for (Eigen::Index i = 0; i < l.size(); ++i) {
        if (l[i] > u[i]) throw Error("bound l > u at row " + std::to_string(i));
    }
}

const char* to_string(QpStatus s) {
    switch (s) {
        case QpStatus::optimal: return "optimal";
        case QpStatus::max_iterations: return "max_iter";
        case QpStatus::infeasible: return "infeasible";
    }
    return "unknown";
}

AdmmSolver::AdmmSolver(AdmmOptions opts) : opts_(opts) {}

void AdmmSolver::setup(const Eigen::MatrixXd& H, const Eigen::MatrixXd& A) {
    H_ = H;
    A_ = A;
    rho_vec_.resize(0);
    setup_done_ = true;
}

void AdmmSolver::factorize(const Eigen::VectorXd& rho_vec) {
    rho_vec_ = rho_vec;
    Eigen::MatrixXd K = H_;
    K.diagonal().array() += opts_.sigma;
    K.noalias() += A_.transpose() * rho_vec.asDiagonal() * A_;
    llt_.compute(K);
    if (llt_.info() != Eigen::Success) throw NumericalFailure("ADMM KKT factorization failed");
}

QpSolution AdmmSolver::solve(const Eigen::VectorXd& f, const Eigen::VectorXd& l,
                             const Eigen::VectorXd& u, const Eigen::VectorXd* x_warm,
                             const Eigen::VectorXd* y_warm) {
    if (!setup_done_) throw Error("AdmmSolver::setup not called");
    const Eigen::Index n = H_.rows();
    const Eigen::Index m = A_.rows();

    // Per-row penalty: equality rows get a stiffer rho.
    double rho_base = opts_.rho;
    Eigen::VectorXd rho(m);
    auto fill_rho = [&]() {
        for (Eigen::Index i = 0; i < m; ++i) {
            rho[i] = (l[i] == u[i]) ? rho_base * opts_.rho_eq_scale : rho_base;
        }
    };
    fill_rho();
    if (rho_vec_.size() != m || rho != rho_vec_) factorize(rho);

    Eigen::VectorXd x = x_warm && x_warm->size() == n ? *x_warm : Eigen::VectorXd::Zero(n);
    Eigen::VectorXd y = y_warm && y_warm->size() == m ? *y_warm : Eigen::VectorXd::Zero(m);
    Eigen::VectorXd z = (A_ * x).cwiseMax(l).cwiseMin(u);

    QpSolution sol;
    sol.status = QpStatus::max_iterations;

    int it = 0;
    for (it = 1; it <= opts_.max_iter; ++it) {
        const Eigen::VectorXd rhs =
            opts_.sigma * x - f + A_.transpose() * (rho.cwiseProduct(z) - y);
        const Eigen::VectorXd x_tilde = llt_.solve(rhs);
        const Eigen::VectorXd z_tilde = A_ * x_tilde;

        const Eigen::VectorXd x_next = opts_.alpha * x_tilde + (1.0 - opts_.alpha) * x;
        const Eigen::VectorXd z_relax = opts_.alpha * z_tilde + (1.0 - opts_.alpha) * z;
        const Eigen::VectorXd z_next =
            (z_relax + y.cwiseQuotient(rho)).cwiseMax(l).cwiseMin(u);
        const Eigen::VectorXd y_next = y + rho.cwiseProduct(z_relax - z_next);

        const Eigen::VectorXd dy = y_next - y;
        x = x_next;
        z = z_next;
        y = y_next;

        if (it % opts_.check_every == 0 || it == opts_.max_iter) {
            const Eigen::VectorXd Ax = A_ * x;
            const Eigen::VectorXd Hx = H_ * x;
            const Eigen::VectorXd Aty = A_.transpose() * y;
            const double rp = inf_norm(Ax - z);
            const double rd = inf_norm(Hx + f + Aty);
            const double eps_p =
                opts_.eps_abs + opts_.eps_rel * std::max(inf_norm(Ax), inf_norm(z));
            const double eps_d =
                opts_.eps_abs +
                opts_.eps_rel * std::max({inf_norm(Hx), inf_norm(Aty), inf_norm(f)});
            sol.primal_res = rp;
            sol.dual_res = rd;
            if (rp <= eps_p && rd <= eps_d) {
                sol.status = QpStatus::optimal;
                break;
            }

            // Primal infeasibility certificate.
            const double dy_norm = inf_norm(dy);
            if (dy_norm > 1e-12) {
                const double aty_d = inf_norm(A_.transpose() * dy);
                double support = 0.0;
                bool bounded = true;
                for (Eigen::Index i = 0; i < m; ++i) {
                    if (dy[i] > 0) {
                        if (u[i] == kInf) { bounded = false; break; }
                        support += u[i] * dy[i];
                    } else if (dy[i] < 0) {
                        if (l[i] == -kInf) { bounded = false; break; }
                        support += l[i] * dy[i];
                    }
                }
                if (bounded && aty_d <= 1e-10 * dy_norm && support < -1e-10 * dy_norm) {
                    sol.status = QpStatus::infeasible;
                    break;
                }
            }

            // Residual-balancing penalty adaptation.
            if (opts_.adaptive_rho && rd > 0 && rp > 0) {
                const double scale_p = std::max({inf_norm(Ax), inf_norm(z), 1e-10});
                const double scale_d =
                    std::max({inf_norm(Hx), inf_norm(Aty), inf_norm(f), 1e-10});
                const double ratio = std::sqrt((rp / scale_p) / (rd / scale_d));
                if (ratio > 5.0 || ratio < 0.2) {
                    rho_base = std::clamp(rho_base * ratio, 1e-6, 1e6);
                    fill_rho();
                    factorize(rho);
                }
            }
        }
    }

    sol.x = x;
    sol.y = y;
    sol.iterations = std::min(it, opts_.max_iter);

    if (opts_.polish && sol.status == QpStatus::optimal) {
        QpProblem qp{H_, f, A_, l, u};
        if (auto refined = polish_solution(qp, sol)) {
            sol = *refined;
            sol.iterations = std::min(it, opts_.max_iter);
        }
    }
    return sol;
}

QpSolution solve_qp(const QpProblem& qp, AdmmOptions opts) {
    qp.validate();
    AdmmSolver solver(opts);
    solver.setup(qp.H, qp.A);
    return solver.solve(qp.f, qp.l, qp.u);
}

KktResiduals kkt_residuals(const QpProblem& qp, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& y) {
    KktResiduals r;
    r.stationarity = inf_norm(qp.H * x + qp.f + qp.A.transpose() * y);
    const Eigen::VectorXd Ax = qp.A * x;
    for (Eigen::Index i = 0; i < qp.rows(); ++i) {
        const double lo_viol = qp.l[i] == -kInf ? 0.0 : std::max(0.0, qp.l[i] - Ax[i]);
        const double hi_viol = qp.u[i] == kInf ? 0.0 : std::max(0.0, Ax[i] - qp.u[i]);
        r.primal = std::max({r.primal, lo_viol, hi_viol});
        // y > 0 pairs with the upper bound, y < 0 with the lower.
        if (y[i] > 0) {
            const double gap = qp.u[i] == kInf ? 1.0 : std::abs(qp.u[i] - Ax[i]);
            r.complementarity = std::max(r.complementarity, y[i] * std::min(gap, 1.0));
            if (qp.u[i] == kInf) r.complementarity = std::max(r.complementarity, y[i]);
        } else if (y[i] < 0) {
            const double gap = qp.l[i] == -kInf ? 1.0 : std::abs(Ax[i] - qp.l[i]);
            r.complementarity = std::max(r.complementarity, -y[i] * std::min(gap, 1.0));
            if (qp.l[i] == -kInf) r.complementarity = std::max(r.complementarity, -y[i]);
        }
    }
    return r;
}

std::optional<QpSolution> polish_solution(const QpProblem& qp, const QpSolution& sol) {
    const Eigen::Index n = qp.vars();
    const Eigen::Index m = qp.rows();
    const Eigen::VectorXd Ax = qp.A * sol.x;

    // Active rows: at a bound and pushed by the multiplier, or equalities.
    const double act_tol = 1e-6;
    std::vector<Eigen::Index> active;
    std::vector<double> target;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (qp.l[i] == qp.u[i]) {
            active.push_back(i);
            target.push_back(qp.l[i]);
        } else if (sol.y[i] < -act_tol && qp.l[i] != -kInf) {
            active.push_back(i);
            target.push_back(qp.l[i]);
        } else if (sol.y[i] > act_tol && qp.u[i] != kInf) {
            active.push_back(i);
            target.push_back(qp.u[i]);
        }
    }
    const Eigen::Index na = static_cast<Eigen::Index>(active.size());

    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + na, n + na);
    K.topLeftCorner(n, n) = qp.H;
    K.topLeftCorner(n, n).diagonal().array() += 1e-10;
    for (Eigen::Index a = 0; a < na; ++a) {
        K.block(0, n + a, n, 1) = qp.A.row(active[static_cast<size_t>(a)]).transpose();
        K.block(n + a, 0, 1, n) = qp.A.row(active[static_cast<size_t>(a)]);
        K(n + a, n + a) = -1e-10;
    }
    Eigen::VectorXd rhs(n + na);
    rhs.head(n) = -qp.f;
    for (Eigen::Index a = 0; a < na; ++a) rhs[n + a] = target[static_cast<size_t>(a)];

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);
    const Eigen::VectorXd xv = lu.solve(rhs);
    if (!xv.allFinite()) return std::nullopt;

    QpSolution refined = sol;
    refined.x = xv.head(n);
    refined.y = Eigen::VectorXd::Zero(m);
    for (Eigen::Index a = 0; a < na; ++a) {
        refined.y[active[static_cast<size_t>(a)]] = xv[n + a];
    }
    refined.polished = true;

    const KktResiduals before = kkt_residuals(qp, sol.x, sol.y);
    const KktResiduals after = kkt_residuals(qp, refined.x, refined.y);
    const double bmax = std::max({before.stationarity, before.primal, before.complementarity});
    const double amax = std::max({after.stationarity, after.primal, after.complementarity});
    if (amax <= bmax) return refined;
    return std::nullopt;
}

}  // namespace kempc
