#pragma once

#include "lqgame/grid.hpp"

#include <cstdint>
#include <vector>

namespace lqgame {

// Counter-based generator: each increment is produced independently from the
// key (seed, path, step) by splitmix64 finalization, then mapped through the
// inverse normal CDF (Wichura's AS241). No sequential state, so generation
// is reproducible bit-for-bit and parallelizable across paths.
std::uint64_t mix_key(std::uint64_t seed, std::uint64_t path, std::uint64_t step);

// Uniform in (0,1) from the top 53 bits of a 64-bit word.
double to_unit_interval(std::uint64_t bits);

// Inverse standard normal CDF, AS241 (PPND16), |error| < 1e-15 over (0,1).
double inverse_normal_cdf(double p);

class BrownianBatch {
public:
    BrownianBatch(std::uint64_t seed, int paths, const TimeGrid& grid);

    std::uint64_t seed() const { return seed_; }
    int paths() const { return paths_; }
    const TimeGrid& grid() const { return grid_; }

    // increment of path j over step k, ~ Normal(0, h)
    double increment(int path, int step) const {
        return data_[static_cast<std::size_t>(step) * paths_ + path];
    }
    // contiguous lane view of all paths at one step (kernel-friendly layout)
    const double* step_lane(int step) const {
        return data_.data() + static_cast<std::size_t>(step) * paths_;
    }

private:
    std::uint64_t seed_;
    int paths_;
    TimeGrid grid_;
    std::vector<double> data_; // [steps][paths]
};

BrownianBatch gen_brownian(std::uint64_t seed, int paths, const TimeGrid& grid);

} // namespace lqgame
