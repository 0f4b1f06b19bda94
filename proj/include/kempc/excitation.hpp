#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "kempc/errors.hpp"

namespace kempc {

/// Multi-level staircase excitation: each channel holds a randomly chosen
/// level for a random dwell time. Deterministic for a given seed.
struct ExcitationSpec {
    std::uint64_t seed = 0;
    int levels_per_input = 7;
    int dwell_min = 30;  // steps
    int dwell_max = 120;
    int duration = 1800;  // steps
    std::vector<std::pair<double, double>> bounds;  // per input (lo, hi)

    void validate() const;
};

/// Returns a duration x n_inputs matrix. The first three segments of each
/// channel cycle through distinct levels so every channel visits at least
/// min(3, levels) distinct values.
Eigen::MatrixXd generate_excitation(const ExcitationSpec& spec);

}  // namespace kempc
