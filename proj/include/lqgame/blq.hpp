#pragma once

#include "lqgame/riccati.hpp"

#include <cstdint>

namespace lqgame {

// Backward stochastic LQ problem with deterministic nonhomogeneous data.
// With deterministic xi and sigma the martingale part of the adjoint BSDE
// vanishes and everything reduces to ODEs.
struct BlqSpec {
    LeaderData data;      // the nine coefficient paths plus dense evaluator
    Coefficient sigma;    // inhomogeneity, n x 1, deterministic
    Matrix G_cal;         // terminal-in-Y(0) weight (symmetric n x n)
    Matrix g;             // linear-in-Y(0) weight, n x 1
    Matrix xi;            // terminal state, n x 1

    static BlqSpec from_leader(const GameSpec& spec, const MatrixPath& P1,
                               const Matrix& x0);
};

struct BlqSolution {
    RegularRiccatiSolution riccati; // Sigma or Sigma^H
    MatrixPath H;                   // H-route only (empty otherwise)
    MatrixPath phi;                 // n x 1, phi(T) = -xi
    double value = 0.0;
    // Optimal control as u2 = feedback_x(t) X + feedback_phi(t) phi(t).
    MatrixPath feedback_x;
    MatrixPath feedback_phi;
};

// H-shifted route (general G_cal).
BlqSolution solve_blq_H(const BlqSpec& bspec, const TimeGrid& grid, double delta = 1e-8);

// H-free route; requires G_cal = 0.
BlqSolution solve_blq_sigma(const BlqSpec& bspec, const TimeGrid& grid, double delta = 1e-8);

// Utility of a fixed deterministic control: solves the Y ODE backward from
// Y(T) = xi (Z vanishes) and integrates the running terms.
double blq_utility_deterministic(const BlqSpec& bspec, const Coefficient& u2,
                                 const TimeGrid& grid);

// Monte Carlo probe of the uniform concavity condition: max over random
// unit-energy deterministic controls of U0(0;u2)/||u2||^2. A heuristic
// witness, not a certificate.
double check_concavity_condition(const BlqSpec& bspec, int trials, std::uint64_t seed,
                                 const TimeGrid& grid);

} // namespace lqgame
