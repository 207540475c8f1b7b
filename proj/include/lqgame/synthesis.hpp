#pragma once

#include "lqgame/riccati.hpp"

#include <string>
#include <utility>
#include <vector>

namespace lqgame {

enum class GainOrigin { stackelberg, nash, follower_only };

struct GainPair {
    MatrixPath theta1; // m1 x n
    MatrixPath theta2; // m2 x n
    GainOrigin origin = GainOrigin::stackelberg;
};

struct IdentityReport {
    std::string name;
    double sup_residual = 0.0;
    int node_of_max = 0;
    double tolerance = 0.0;
    bool pass = false;
};

// Follower feedback Theta = -(R1 + D1'P1D1)^{-1}(B1'P1 + D1'P1C).
MatrixPath follower_gain(const GameSpec& spec, const MatrixPath& P1);

// Dense single-time evaluations, for callers that need gains between nodes
// (exact Lyapunov cost, adjoint simulation).
std::pair<Matrix, Matrix> stackelberg_gains_at(const GameSpec& spec, const Matrix& P1,
                                               const Matrix& Sigma, const LeaderCoeffs& lc,
                                               double t);
std::pair<Matrix, Matrix> nash_gains_at(const GameSpec& spec, const Matrix& P, double t);

// Drift and diffusion coefficient matrices of the leader's adjoint SDE;
// algebraically equal to A + B1 Th1 + B2 Th2 and C + D1 Th1 + D2 Th2.
std::pair<Matrix, Matrix> leader_adjoint_coefficients(const GameSpec& spec,
                                                      const Matrix& P1, const Matrix& Sigma,
                                                      const LeaderCoeffs& lc, double t);

// Closed-loop Stackelberg gains (Theta1_hat, Theta2_hat), node-wise.
GainPair stackelberg_gains(const GameSpec& spec, const MatrixPath& P1,
                           const MatrixPath& Sigma, const LeaderData& ld);

// Nash gains from the stacked formula, split into the m1 and m2 row blocks.
GainPair nash_gains(const GameSpec& spec, const MatrixPath& P);

struct PhiPair {
    MatrixPath phi;     // m2 x m2
    MatrixPath phi_hat; // m2 x m2
    IdentityReport report; // sup-node |Phi PhiHat - I|
};

PhiPair phi_pair(const GameSpec& spec, const MatrixPath& P1, const MatrixPath& Sigma,
                 const LeaderData& ld, double tol = 1e-8);

struct BlockInverse {
    MatrixPath m11, m12, m21, m22;
    IdentityReport report; // assembled block times (R + D'(P1-Sigma)D) vs I
};

BlockInverse block_inverse_M(const GameSpec& spec, const MatrixPath& P1,
                             const MatrixPath& Sigma, const LeaderData& ld,
                             double tol = 1e-8);

// sup-node max over both players of |Theta_hat_i - Theta_i*|.
IdentityReport gain_identity(const GainPair& stackelberg, const GainPair& nash,
                             double tol = 1e-6);

// The two algebraic reductions that turn the leader's closed-loop SDE into
// the game's closed-loop system: drift and diffusion brackets versus
// A + B1 Th1 + B2 Th2 and C + D1 Th1 + D2 Th2.
std::pair<IdentityReport, IdentityReport> closed_loop_coefficient_identity(
    const GameSpec& spec, const MatrixPath& P1, const MatrixPath& Sigma,
    const LeaderData& ld, const GainPair& gains, double tol = 1e-7);

// Node-wise residuals of the identities (a), (f3)_1, (f3)_2, (f1)_2, (f1)_3,
// (f7)_5 and the master combination F; all must vanish.
std::vector<IdentityReport> appendix_identity_suite(const GameSpec& spec,
                                                    const MatrixPath& P1,
                                                    const MatrixPath& Sigma,
                                                    const LeaderData& ld,
                                                    double tol = 1e-7);

} // namespace lqgame
