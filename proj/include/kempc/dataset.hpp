#pragma once

#include <Eigen/Dense>
#include <filesystem>

#include "kempc/errors.hpp"

namespace kempc {

/// Input/output records of one identification or simulation experiment.
/// Rows are samples; U columns are (u1 cm3/s, u2 cm3/s, u3 kW), Y columns
/// are (T1, T2, T3) in degrees C.
struct Dataset {
    double timestep = 1.0;  // seconds
    Eigen::MatrixXd U;      // N x 3
    Eigen::MatrixXd Y;      // N x 3

    Eigen::Index size() const { return U.rows(); }
    void validate() const;
};

/// CSV persistence with header `t,u1,u2,u3,y1,y2,y3`.
void write_dataset_csv(const Dataset& d, const std::filesystem::path& path);
Dataset read_dataset_csv(const std::filesystem::path& path);

}  // namespace kempc
