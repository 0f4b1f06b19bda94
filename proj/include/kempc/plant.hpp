#pragma once

#include <Eigen/Dense>

#include "kempc/errors.hpp"

namespace kempc {

/// Pasteurization-unit temperatures in degrees C.
struct PlantState {
    double T1 = 20.0;  // holding-tube outlet
    double T2 = 20.0;  // heating tank
    double T3 = 20.0;  // heat-exchanger outlet

    Eigen::Vector3d vec() const { return {T1, T2, T3}; }
    static PlantState from(const Eigen::Vector3d& v) { return {v[0], v[1], v[2]}; }
};

/// Physical coefficients of the three-state surrogate. Flows in cm3/s,
/// heater power in kW, temperatures in degrees C.
struct PlantParams {
    double T_in = 18.0;      // feed temperature
    double T_amb = 20.0;     // ambient
    double eps_r = 0.55;     // recovery-section effectiveness
    double beta = 1.4;       // heating-effectiveness gain
    double delta = 0.1;      // flow floor, cm3/s
    double V1 = 70.0;        // holding-tube lag volume, cm3
    double V3 = 40.0;        // exchanger-outlet lag volume, cm3
    double k_amb = 0.002;    // holding-tube ambient loss, 1/s
    double C2 = 9.0;         // tank heat capacity, kJ/degC
    double eta = 0.95;       // heater efficiency
    double c_rho = 4.18e-3;  // volumetric heat capacity, kJ/(cm3 degC)
    double h_loss = 0.002;   // tank loss, kJ/(s degC)

    void validate() const;
};

/// Time derivative (degC/s) of the tank/tube temperatures.
Eigen::Vector3d plant_derivative(const PlantState& x, const Eigen::Vector3d& u,
                                 const PlantParams& p);

/// One classical RK4 step of size dt (dt <= 1 s).
PlantState plant_step(const PlantState& x, const Eigen::Vector3d& u, double dt,
                      const PlantParams& p);

/// Integrates over |U| steps of size dt each, splitting into internal RK4
/// substeps of at most 0.1 s. Row k of the result is the output at step k
/// (i.e. the state before applying U.row(k)).
Eigen::MatrixXd simulate_plant(PlantState x0, const Eigen::MatrixXd& U, double dt,
                               const PlantParams& p);

/// As simulate_plant but also returns the final state.
Eigen::MatrixXd simulate_plant(PlantState x0, const Eigen::MatrixXd& U, double dt,
                               const PlantParams& p, PlantState* final_state);

/// Advance a state by `dt` seconds under constant input, with internal
/// substeps of at most 0.1 s.
PlantState plant_advance(const PlantState& x, const Eigen::Vector3d& u, double dt,
                         const PlantParams& p);

}  // namespace kempc
