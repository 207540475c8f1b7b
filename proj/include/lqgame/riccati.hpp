#pragma once

#include "lqgame/errors.hpp"
#include "lqgame/grid.hpp"
#include "lqgame/ode.hpp"
#include "lqgame/spec.hpp"

#include <functional>
#include <vector>

namespace lqgame {

// A Riccati solution together with the definiteness record of its gate.
struct RegularRiccatiSolution {
    MatrixPath P;                                // symmetric, Hermite-dense
    std::vector<DefinitenessMargin> margin_path; // gate margins per node
    double min_margin = 0.0;                     // extremal margin over nodes
};

// The transformed coefficients of the leader's backward LQ problem,
// evaluated at one time.
struct LeaderCoeffs {
    Matrix R1hat; // R1 + D1' P1 D1
    Matrix A, B, C;
    Matrix R, Q, N, S1, S2, S3;
};

LeaderCoeffs leader_coeffs_at(const GameSpec& spec, const Matrix& P1_at_t, double t);

// Node-sampled transformed coefficients plus a dense evaluator (needed by the
// RK4 half-steps of every downstream solve). leader_data() wires the
// evaluator to the spec and the Hermite-dense P1 path; from_constant() builds
// a standalone time-invariant problem.
class LeaderData {
public:
    MatrixPath A, B, C, Q, N, R, S1, S2, S3, R1hat;

    LeaderCoeffs at(double t) const { return eval_(t); }
    int n() const { return n_; }
    int m2() const { return m2_; }

    static LeaderData from_evaluator(std::function<LeaderCoeffs(double)> eval,
                                     const TimeGrid& grid);
    static LeaderData from_constant(const Matrix& A, const Matrix& B, const Matrix& C,
                                    const Matrix& R, const Matrix& Q, const Matrix& N,
                                    const Matrix& S1, const Matrix& S2, const Matrix& S3,
                                    const TimeGrid& grid);

private:
    std::function<LeaderCoeffs(double)> eval_;
    int n_ = 0, m2_ = 0;
};

// Follower Riccati: backward from P1(T) = G with the gate
// R1 + D1' P1 D1 kept uniformly positive (checked at every RK4 stage).
RegularRiccatiSolution solve_follower(const GameSpec& spec, const TimeGrid& grid,
                                      double delta = 1e-8);

LeaderData leader_data(const GameSpec& spec, const MatrixPath& P1);

// H-free leader Riccati (Sigma), backward from Sigma(T) = 0. Monitors
// lambda_max(R) <= -delta, smallest singular value of
// Shat = I + Sigma N - Sigma S2' R^{-1} S2 >= delta, and Sigma <= 0.
RegularRiccatiSolution solve_leader_sigma(const LeaderData& ld, const TimeGrid& grid,
                                          double delta = 1e-8);

// Auxiliary H: H' + H A + A' H + Q = 0 forward from H(0) = -G_cal.
MatrixPath solve_aux_H(const LeaderData& ld, const Matrix& G_cal, const TimeGrid& grid);

// H-shifted leader Riccati (Sigma^H), backward from Sigma^H(T) = 0 with the
// gate ShatH = I + Sigma^H N^H monitored.
RegularRiccatiSolution solve_leader_sigma_H(const LeaderData& ld, const MatrixPath& H,
                                            const TimeGrid& grid, double delta = 1e-8);

// Riccati equation of the Nash game with stacked B = (B1 B2), D = (D1 D2),
// R = blockdiag(R1, R2); only invertibility of R + D' P D is required.
RegularRiccatiSolution solve_nash(const GameSpec& spec, const TimeGrid& grid,
                                  double delta = 1e-8);

enum class RiccatiEquation { follower, sigma, sigma_h, nash };

// Sup over interior nodes of the Frobenius norm of the declared equation's
// left-hand side, with the time derivative from centered differences. Used
// to certify candidate solutions such as P1 - Sigma.
double riccati_residual(const MatrixPath& P, RiccatiEquation equation,
                        const GameSpec& spec, const LeaderData* ld = nullptr,
                        const MatrixPath* H = nullptr);

} // namespace lqgame
