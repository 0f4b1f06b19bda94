#include "kempc/plant.hpp"

#include <cmath>

namespace kempc {

void PlantParams::validate() const {
    const bool pos = T_in > 0 && T_amb > 0 && eps_r > 0 && beta > 0 && delta > 0 && V1 > 0 &&
                     V3 > 0 && k_amb > 0 && C2 > 0 && eta > 0 && c_rho > 0 && h_loss > 0;
    if (!pos) throw ConfigError("plant parameters must be positive");
    if (eps_r >= 1.0) throw ConfigError("eps_r must be < 1");
    if (eta > 1.0) throw ConfigError("eta must be <= 1");
}

Eigen::Vector3d plant_derivative(const PlantState& x, const Eigen::Vector3d& u,
                                 const PlantParams& p) {
    const double u1 = u[0], u2 = u[1], u3 = u[2];
    const double T_pre = p.T_in + p.eps_r * (x.T1 - p.T_in);
    const double eps_h = 1.0 - std::exp(-p.beta * u2 / std::max(u1, p.delta));
    const double T_h = T_pre + eps_h * (x.T2 - T_pre);

    Eigen::Vector3d dx;
    dx[0] = (x.T3 - x.T1) * u1 / p.V1 - p.k_amb * (x.T1 - p.T_amb);
    dx[1] = (p.eta * u3 - p.c_rho * u1 * (T_h - T_pre) - p.h_loss * (x.T2 - p.T_amb)) / p.C2;
    dx[2] = (T_h - x.T3) * u1 / p.V3;
    if (!dx.allFinite()) throw NonFiniteState("plant derivative is not finite");
    return dx;
}

PlantState plant_step(const PlantState& x, const Eigen::Vector3d& u, double dt,
                      const PlantParams& p) {
    if (!(dt > 0.0 && dt <= 1.0)) throw Error("plant_step requires 0 < dt <= 1 s");
    const Eigen::Vector3d x0 = x.vec();
    const Eigen::Vector3d k1 = plant_derivative(x, u, p);
    const Eigen::Vector3d k2 = plant_derivative(PlantState::from(x0 + 0.5 * dt * k1), u, p);
    const Eigen::Vector3d k3 = plant_derivative(PlantState::from(x0 + 0.5 * dt * k2), u, p);
    const Eigen::Vector3d k4 = plant_derivative(PlantState::from(x0 + dt * k3), u, p);
    const Eigen::Vector3d x1 = x0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x1.allFinite()) throw NonFiniteState("plant state is not finite");
    return PlantState::from(x1);
}

PlantState plant_advance(const PlantState& x, const Eigen::Vector3d& u, double dt,
                         const PlantParams& p) {
    const int nsub = std::max(1, static_cast<int>(std::ceil(dt / 0.1 - 1e-12)));
    const double h = dt / nsub;
    PlantState cur = x;
    for (int i = 0; i < nsub; ++i) cur = plant_step(cur, u, h, p);
    return cur;
}

Eigen::MatrixXd simulate_plant(PlantState x0, const Eigen::MatrixXd& U, double dt,
                               const PlantParams& p, PlantState* final_state) {
    Eigen::MatrixXd Y(U.rows(), 3);
    PlantState cur = x0;
    for (Eigen::Index k = 0; k < U.rows(); ++k) {
        Y.row(k) = cur.vec().transpose();
        cur = plant_advance(cur, U.row(k).transpose(), dt, p);
    }
    if (final_state) *final_state = cur;
    return Y;
}

Eigen::MatrixXd simulate_plant(PlantState x0, const Eigen::MatrixXd& U, double dt,
                               const PlantParams& p) {
    return simulate_plant(x0, U, dt, p, nullptr);
}

}  // namespace kempc
