#include "lqgame/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lqgame {

namespace {

Matrix sym_hook(const Matrix& m) { return symmetrize(m); }

// dP/dt for the follower equation; gate check optional (residual evaluation
// reuses the same code without a threshold).
Matrix follower_rhs(const GameSpec& spec, double t, const Matrix& P, double delta,
                    bool monitor) {
    const Matrix A = spec.A.eval(t);
    const Matrix C = spec.C.eval(t);
    const Matrix B1 = spec.B1.eval(t);
    const Matrix D1 = spec.D1.eval(t);
    const Matrix gate = symmetrize(spec.R1.eval(t) + D1.transpose() * P * D1);
    if (monitor) {
        const auto m = eig_margin(gate);
        if (m.lambda_min < delta)
            throw SolveError(SolveError::Kind::regularity_lost, t,
                             "lambda_min(R1 + D1'P1D1) = " + std::to_string(m.lambda_min));
    }
    const Matrix L = P * B1 + C.transpose() * P * D1;
    const Matrix Rt = B1.transpose() * P + D1.transpose() * P * C;
    return -(P * A + A.transpose() * P + C.transpose() * P * C + spec.Q.eval(t)
             - L * invert(gate) * Rt);
}

Matrix sigma_rhs(const LeaderData& ld, double t, const Matrix& S, double delta,
                 bool monitor) {
    const LeaderCoeffs c = ld.at(t);
    const int n = static_cast<int>(S.rows());
    if (monitor) {
        const auto mR = eig_margin(c.R);
        if (mR.lambda_max > -delta)
            throw SolveError(SolveError::Kind::regularity_lost, t,
                             "lambda_max(R) = " + std::to_string(mR.lambda_max));
        const auto mS = eig_margin(symmetrize(S));
        if (mS.lambda_max > 1e-8)
            throw SolveError(SolveError::Kind::positivity_violated, t,
                             "lambda_max(Sigma) = " + std::to_string(mS.lambda_max));
    }
    const Matrix Ri = invert(c.R);
    const Matrix Shat = Matrix::identity(static_cast<std::size_t>(n)) + S * c.N
                        - S * c.S2.transpose() * Ri * c.S2;
    if (monitor && smallest_singular_value(Shat) < delta)
        throw SolveError(SolveError::Kind::gate_singular, t, "Shat nearly singular");
    const Matrix left = c.C - c.B * Ri * c.S2 - S * c.S1.transpose() * Ri * c.S2
                        + S * c.S3.transpose();
    const Matrix right = c.C.transpose() - c.S2.transpose() * Ri * c.B.transpose()
                         - c.S2.transpose() * Ri * c.S1 * S + c.S3 * S;
    return S * c.A.transpose() + c.A * S - S * c.S1.transpose() * Ri * c.B.transpose()
           - c.B * Ri * c.S1 * S - S * c.S1.transpose() * Ri * c.S1 * S + S * c.Q * S
           - c.B * Ri * c.B.transpose() - left * invert(Shat) * S * right;
}

struct SigmaHParts {
    Matrix Ri, L, NH, S1H, S3H;
};

SigmaHParts sigma_h_parts(const LeaderCoeffs& c, const Matrix& H) {
    SigmaHParts p;
    p.Ri = invert(c.R);
    p.L = c.C - c.B * p.Ri * c.S2;
    p.NH = c.N - c.S2.transpose() * p.Ri * c.S2 + H;
    p.S1H = c.S1 + c.B.transpose() * H;
    p.S3H = c.S3 - c.S2.transpose() * p.Ri * c.S1 + p.L.transpose() * H;
    return p;
}

Matrix sigma_h_rhs(const LeaderData& ld, const MatrixPath& Hpath, double t, const Matrix& S,
                   double delta, bool monitor) {
    const LeaderCoeffs c = ld.at(t);
    const Matrix H = Hpath.eval(t);
    if (monitor) {
        const auto mR = eig_margin(c.R);
        if (mR.lambda_max > -delta)
            throw SolveError(SolveError::Kind::regularity_lost, t,
                             "lambda_max(R) = " + std::to_string(mR.lambda_max));
    }
    const SigmaHParts p = sigma_h_parts(c, H);
    const Matrix ShatH = Matrix::identity(S.rows()) + S * p.NH;
    if (monitor && smallest_singular_value(ShatH) < delta)
        throw SolveError(SolveError::Kind::gate_singular, t, "ShatH nearly singular");
    return S * c.A.transpose() + c.A * S
           - (c.B + S * p.S1H.transpose()) * p.Ri * (c.B.transpose() + p.S1H * S)
           - (p.L + S * p.S3H.transpose()) * invert(ShatH) * S
                 * (p.L.transpose() + p.S3H * S);
}

Matrix nash_rhs(const GameSpec& spec, double t, const Matrix& P, double delta,
                bool monitor) {
    const Matrix A = spec.A.eval(t);
    const Matrix C = spec.C.eval(t);
    const Matrix B = hcat(spec.B1.eval(t), spec.B2.eval(t));
    const Matrix D = hcat(spec.D1.eval(t), spec.D2.eval(t));
    const Matrix R = block_diag(spec.R1.eval(t), spec.R2.eval(t));
    const Matrix gate = symmetrize(R + D.transpose() * P * D);
    if (monitor && smallest_singular_value(gate) < delta)
        throw SolveError(SolveError::Kind::gate_singular, t, "R + D'PD nearly singular");
    const Matrix L = P * B + C.transpose() * P * D;
    const Matrix Rt = B.transpose() * P + D.transpose() * P * C;
    return -(P * A + A.transpose() * P + C.transpose() * P * C + spec.Q.eval(t)
             - L * invert(gate) * Rt);
}

} // namespace

LeaderCoeffs leader_coeffs_at(const GameSpec& spec, const Matrix& P1, double t) {
    const Matrix A = spec.A.eval(t);
    const Matrix C = spec.C.eval(t);
    const Matrix B1 = spec.B1.eval(t);
    const Matrix B2 = spec.B2.eval(t);
    const Matrix D1 = spec.D1.eval(t);
    const Matrix D2 = spec.D2.eval(t);

    LeaderCoeffs c;
    c.R1hat = symmetrize(spec.R1.eval(t) + D1.transpose() * P1 * D1);
    const Matrix Ri = invert(c.R1hat);
    const Matrix L = P1 * B1 + C.transpose() * P1 * D1; // P1 B1 + C' P1 D1
    c.A = L * Ri * B1.transpose() - A.transpose();
    c.C = L * Ri * D1.transpose() - C.transpose();
    c.B = c.C * P1 * D2 - P1 * B2;
    c.R = symmetrize(D2.transpose() * P1 * D2
                     - D2.transpose() * P1 * D1 * Ri * D1.transpose() * P1 * D2
                     + spec.R2.eval(t));
    c.Q = symmetrize(-(B1 * Ri * B1.transpose()));
    c.N = symmetrize(-(D1 * Ri * D1.transpose()));
    c.S3 = -(D1 * Ri * B1.transpose());
    c.S2 = D2.transpose() - D2.transpose() * P1 * D1 * Ri * D1.transpose();
    c.S1 = B2.transpose() - D2.transpose() * P1 * D1 * Ri * B1.transpose();
    return c;
}

LeaderData LeaderData::from_evaluator(std::function<LeaderCoeffs(double)> eval,
                                      const TimeGrid& grid) {
    LeaderData ld;
    ld.eval_ = std::move(eval);
    const int N = grid.steps;
    std::vector<Matrix> a(N + 1), b(N + 1), cc(N + 1), q(N + 1), nn(N + 1), r(N + 1),
        s1(N + 1), s2(N + 1), s3(N + 1), r1h(N + 1);
    for (int k = 0; k <= N; ++k) {
        const LeaderCoeffs c = ld.eval_(grid.node(k));
        a[k] = c.A; b[k] = c.B; cc[k] = c.C; q[k] = c.Q; nn[k] = c.N;
        r[k] = c.R; s1[k] = c.S1; s2[k] = c.S2; s3[k] = c.S3; r1h[k] = c.R1hat;
    }
    ld.n_ = static_cast<int>(a[0].rows());
    ld.m2_ = static_cast<int>(r[0].rows());
    ld.A = MatrixPath(grid, std::move(a));
    ld.B = MatrixPath(grid, std::move(b));
    ld.C = MatrixPath(grid, std::move(cc));
    ld.Q = MatrixPath(grid, std::move(q));
    ld.N = MatrixPath(grid, std::move(nn));
    ld.R = MatrixPath(grid, std::move(r));
    ld.S1 = MatrixPath(grid, std::move(s1));
    ld.S2 = MatrixPath(grid, std::move(s2));
    ld.S3 = MatrixPath(grid, std::move(s3));
    ld.R1hat = MatrixPath(grid, std::move(r1h));
    return ld;
}

LeaderData LeaderData::from_constant(const Matrix& A, const Matrix& B, const Matrix& C,
                                     const Matrix& R, const Matrix& Q, const Matrix& N,
                                     const Matrix& S1, const Matrix& S2, const Matrix& S3,
                                     const TimeGrid& grid) {
    LeaderCoeffs c;
    c.A = A; c.B = B; c.C = C; c.R = R; c.Q = Q; c.N = N;
    c.S1 = S1; c.S2 = S2; c.S3 = S3;
    c.R1hat = Matrix::identity(R.rows()); // unused placeholder for standalone problems
    return from_evaluator([c](double) { return c; }, grid);
}

RegularRiccatiSolution solve_follower(const GameSpec& spec, const TimeGrid& grid,
                                      double delta) {
    RegularRiccatiSolution sol;
    sol.P = integrate_matrix_ode(
        [&](double t, const Matrix& P) { return follower_rhs(spec, t, P, delta, true); },
        spec.G, grid, Direction::backward, sym_hook);
    sol.margin_path.reserve(static_cast<std::size_t>(grid.nodes()));
    sol.min_margin = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= grid.steps; ++k) {
        const double t = grid.node(k);
        const Matrix D1 = spec.D1.eval(t);
        const Matrix gate =
            symmetrize(spec.R1.eval(t) + D1.transpose() * sol.P.at_node(k) * D1);
        sol.margin_path.push_back(eig_margin(gate));
        sol.min_margin = std::min(sol.min_margin, sol.margin_path.back().lambda_min);
    }
    return sol;
}

LeaderData leader_data(const GameSpec& spec, const MatrixPath& P1) {
    MatrixPath p1 = P1;
    return LeaderData::from_evaluator(
        [spec, p1](double t) { return leader_coeffs_at(spec, p1.eval(t), t); }, P1.grid());
}

RegularRiccatiSolution solve_leader_sigma(const LeaderData& ld, const TimeGrid& grid,
                                          double delta) {
    const auto n = static_cast<std::size_t>(ld.n());
    RegularRiccatiSolution sol;
    sol.P = integrate_matrix_ode(
        [&](double t, const Matrix& S) { return sigma_rhs(ld, t, S, delta, true); },
        Matrix::zeros(n, n), grid, Direction::backward, sym_hook);
    sol.min_margin = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= grid.steps; ++k) {
        const LeaderCoeffs c = ld.at(grid.node(k));
        const Matrix& S = sol.P.at_node(k);
        const Matrix Ri = invert(c.R);
        const Matrix Shat = Matrix::identity(n) + S * c.N - S * c.S2.transpose() * Ri * c.S2;
        sol.margin_path.push_back(eig_margin(c.R));
        sol.min_margin = std::min({sol.min_margin, -sol.margin_path.back().lambda_max,
                                   smallest_singular_value(Shat)});
    }
    return sol;
}

MatrixPath solve_aux_H(const LeaderData& ld, const Matrix& G_cal, const TimeGrid& grid) {
    return integrate_matrix_ode(
        [&](double t, const Matrix& H) {
            const LeaderCoeffs c = ld.at(t);
            return -(H * c.A + c.A.transpose() * H + c.Q);
        },
        -G_cal, grid, Direction::forward, sym_hook);
}

RegularRiccatiSolution solve_leader_sigma_H(const LeaderData& ld, const MatrixPath& H,
                                            const TimeGrid& grid, double delta) {
    const auto n = static_cast<std::size_t>(ld.n());
    RegularRiccatiSolution sol;
    sol.P = integrate_matrix_ode(
        [&](double t, const Matrix& S) { return sigma_h_rhs(ld, H, t, S, delta, true); },
        Matrix::zeros(n, n), grid, Direction::backward, sym_hook);
    sol.min_margin = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= grid.steps; ++k) {
        const LeaderCoeffs c = ld.at(grid.node(k));
        const SigmaHParts p = sigma_h_parts(c, H.at_node(k));
        const Matrix ShatH = Matrix::identity(n) + sol.P.at_node(k) * p.NH;
        sol.margin_path.push_back(eig_margin(c.R));
        sol.min_margin = std::min({sol.min_margin, -sol.margin_path.back().lambda_max,
                                   smallest_singular_value(ShatH)});
    }
    return sol;
}

RegularRiccatiSolution solve_nash(const GameSpec& spec, const TimeGrid& grid, double delta) {
    RegularRiccatiSolution sol;
    sol.P = integrate_matrix_ode(
        [&](double t, const Matrix& P) { return nash_rhs(spec, t, P, delta, true); },
        spec.G, grid, Direction::backward, sym_hook);
    sol.min_margin = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= grid.steps; ++k) {
        const double t = grid.node(k);
        const Matrix D = hcat(spec.D1.eval(t), spec.D2.eval(t));
        const Matrix R = block_diag(spec.R1.eval(t), spec.R2.eval(t));
        const Matrix gate = symmetrize(R + D.transpose() * sol.P.at_node(k) * D);
        sol.margin_path.push_back(eig_margin(gate));
        const auto& m = sol.margin_path.back();
        sol.min_margin = std::min(sol.min_margin,
                                  std::min(std::abs(m.lambda_min), std::abs(m.lambda_max)));
    }
    return sol;
}

double riccati_residual(const MatrixPath& P, RiccatiEquation equation, const GameSpec& spec,
                        const LeaderData* ld, const MatrixPath* H) {
    const TimeGrid& grid = P.grid();
    const double h = grid.h();
    if ((equation == RiccatiEquation::sigma || equation == RiccatiEquation::sigma_h) && !ld)
        throw std::invalid_argument("riccati_residual: leader data required");
    if (equation == RiccatiEquation::sigma_h && !H)
        throw std::invalid_argument("riccati_residual: H path required");

    double worst = 0.0;
    for (int k = 1; k < grid.steps; ++k) {
        const double t = grid.node(k);
        const Matrix dPdt = (1.0 / (2.0 * h)) * (P.at_node(k + 1) - P.at_node(k - 1));
        Matrix f;
        switch (equation) {
            case RiccatiEquation::follower: f = follower_rhs(spec, t, P.at_node(k), 0, false); break;
            case RiccatiEquation::sigma: f = sigma_rhs(*ld, t, P.at_node(k), 0, false); break;
            case RiccatiEquation::sigma_h: f = sigma_h_rhs(*ld, *H, t, P.at_node(k), 0, false); break;
            case RiccatiEquation::nash: f = nash_rhs(spec, t, P.at_node(k), 0, false); break;
        }
        worst = std::max(worst, (dPdt - f).norm_fro());
    }
    return worst;
}

} // namespace lqgame
