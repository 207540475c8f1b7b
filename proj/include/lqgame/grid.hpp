#pragma once

#include "lqgame/matrix.hpp"

#include <stdexcept>
#include <vector>

namespace lqgame {

// Uniform grid t_k = k*T/N, k = 0..N.
struct TimeGrid {
    double t_end = 0.0;
    int steps = 0;

    TimeGrid() = default;
    TimeGrid(double T, int N) : t_end(T), steps(N) {
        if (!(T > 0.0)) throw std::invalid_argument("nonpositive horizon");
        if (N < 1) throw std::invalid_argument("grid needs at least one step");
    }

    double h() const { return t_end / steps; }
    double node(int k) const { return k * t_end / steps; }
    int nodes() const { return steps + 1; }

    bool operator==(const TimeGrid& o) const {
        return t_end == o.t_end && steps == o.steps;
    }
};

// A matrix-valued function sampled at every grid node. When derivative
// samples are present (all paths produced by the integrator carry them),
// eval() uses cubic Hermite interpolation between nodes, which keeps
// downstream RK4 solves at full order; otherwise it interpolates linearly.
class MatrixPath {
public:
    MatrixPath() = default;
    MatrixPath(TimeGrid grid, std::vector<Matrix> samples)
        : grid_(grid), samples_(std::move(samples)) {
        if (samples_.size() != static_cast<std::size_t>(grid_.nodes()))
            throw std::invalid_argument("sample count != grid nodes");
    }
    MatrixPath(TimeGrid grid, std::vector<Matrix> samples, std::vector<Matrix> derivs)
        : MatrixPath(grid, std::move(samples)) {
        if (derivs.size() != samples_.size())
            throw std::invalid_argument("derivative count != grid nodes");
        derivs_ = std::move(derivs);
    }

    static MatrixPath constant(TimeGrid grid, const Matrix& value);

    const TimeGrid& grid() const { return grid_; }
    std::size_t rows() const { return samples_.empty() ? 0 : samples_[0].rows(); }
    std::size_t cols() const { return samples_.empty() ? 0 : samples_[0].cols(); }

    const Matrix& at_node(int k) const { return samples_.at(static_cast<std::size_t>(k)); }
    Matrix& at_node(int k) { return samples_.at(static_cast<std::size_t>(k)); }
    const std::vector<Matrix>& samples() const { return samples_; }
    bool has_derivs() const { return !derivs_.empty(); }
    const Matrix& deriv_at_node(int k) const { return derivs_.at(static_cast<std::size_t>(k)); }

    // Evaluation clamps t into [0, T]; RK4 stage times can overshoot by
    // rounding.
    Matrix eval(double t) const;

    double max_asymmetry() const;
    double norm_inf() const;

private:
    TimeGrid grid_;
    std::vector<Matrix> samples_;
    std::vector<Matrix> derivs_;
};

} // namespace lqgame
