#include "kempc/excitation.hpp"

#include <random>
#include <string>

namespace kempc {

void ExcitationSpec::validate() const {
    if (duration < 1) throw ConfigError("excitation duration must be >= 1");
    if (levels_per_input < 1) throw ConfigError("levels_per_input must be >= 1");
    if (dwell_min < 1 || dwell_max < dwell_min) {
        throw ConfigError("dwell range invalid: [" + std::to_string(dwell_min) + ", " +
                          std::to_string(dwell_max) + "]");
    }
    if (bounds.empty()) throw ConfigError("excitation bounds missing");
    for (const auto& [lo, hi] : bounds) {
        if (!(lo <= hi)) throw ConfigError("excitation bound lo > hi");
    }
}

namespace {
// mt19937_64 output is standardized, so avoiding std distributions keeps
// sequences bit-identical across implementations.
std::uint64_t draw(std::mt19937_64& g, std::uint64_t n) { return g() % n; }
}  // namespace

Eigen::MatrixXd generate_excitation(const ExcitationSpec& spec) {
    spec.validate();
    const int m = static_cast<int>(spec.bounds.size());
    Eigen::MatrixXd U(spec.duration, m);

    for (int j = 0; j < m; ++j) {
        std::mt19937_64 gen(spec.seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(j) + 1);
        const auto [lo, hi] = spec.bounds[j];
        const int L = spec.levels_per_input;
        Eigen::VectorXd grid(L);
        for (int l = 0; l < L; ++l) {
            grid[l] = L == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * l / (L - 1);
        }
        const std::uint64_t span = static_cast<std::uint64_t>(spec.dwell_max - spec.dwell_min) + 1;
        const std::uint64_t first = draw(gen, static_cast<std::uint64_t>(L));
        int t = 0;
        int segment = 0;
        while (t < spec.duration) {
            // The first three segments walk consecutive grid levels from a
            // random start, guaranteeing >= min(3, L) distinct values.
            const std::uint64_t idx =
                segment < 3 ? (first + static_cast<std::uint64_t>(segment)) %
                                  static_cast<std::uint64_t>(L)
                            : draw(gen, static_cast<std::uint64_t>(L));
            const int dwell = spec.dwell_min + static_cast<int>(draw(gen, span));
            const int stop = std::min(spec.duration, t + dwell);
            for (; t < stop; ++t) U(t, j) = grid[static_cast<int>(idx)];
            ++segment;
        }
    }
    return U;
}

}  // namespace kempc
