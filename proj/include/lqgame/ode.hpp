#pragma once

#include "lqgame/errors.hpp"
#include "lqgame/grid.hpp"

#include <functional>
#include <vector>

namespace lqgame {

enum class Direction { forward, backward };

using OdeRhs = std::function<Matrix(double, const Matrix&)>;
using PostStep = std::function<Matrix(const Matrix&)>;

// Classical fixed-step RK4 over the grid. Backward integrates from node N
// down to node 0. post_step (typically symmetrization) runs after every
// accepted step. The returned path carries derivative samples (the exact rhs
// at each node), so eval() between nodes is 4th-order Hermite.
//
// Throws SolveError(blow_up) when a stage or state goes non-finite; any
// exception thrown by rhs itself (gate monitors) propagates unchanged.
MatrixPath integrate_matrix_ode(const OdeRhs& rhs, const Matrix& boundary_value,
                                const TimeGrid& grid, Direction direction,
                                const PostStep& post_step = nullptr);

// Composite trapezoid over node samples; exact for affine integrands.
double quadrature(const std::vector<double>& samples, const TimeGrid& grid);

// Composite Simpson over node samples (trapezoid on a trailing odd interval).
// Used for the value integrals, where the 4th-order solves deserve better
// than O(h^2) quadrature.
double simpson(const std::vector<double>& samples, const TimeGrid& grid);

} // namespace lqgame
