#include "lqgame/evaluate.hpp"

#include "lqgame/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lqgame {

namespace {

std::vector<double> per_path_costs(const GameSpec& spec, const TrajectoryBundle& b) {
    const TimeGrid& grid = b.grid;
    const int N = grid.steps;
    const int M = b.paths;
    const double h = grid.h();
    std::vector<double> acc(static_cast<std::size_t>(M), 0.0);

    const auto quad_x = kernels::select_quad_accum(b.n);
    const auto quad_u1 = kernels::select_quad_accum(b.m1);
    const auto quad_u2 = kernels::select_quad_accum(b.m2);

    for (int k = 0; k <= N; ++k) {
        const double w = (k == 0 || k == N) ? 0.5 * h : h;
        const Matrix Q = spec.Q.eval(grid.node(k));
        quad_x(b.n, Q.data(), w, M, 0, M, b.x_lane(k), acc.data());
    }
    for (int k = 0; k < N; ++k) {
        const double t = grid.node(k);
        const Matrix R1 = spec.R1.eval(t);
        const Matrix R2 = spec.R2.eval(t);
        if (b.m1 > 0)
            quad_u1(b.m1, R1.data(), h, M, 0, M,
                    b.u1.data() + static_cast<std::size_t>(k) * b.m1 * M, acc.data());
        if (b.m2 > 0)
            quad_u2(b.m2, R2.data(), h, M, 0, M,
                    b.u2.data() + static_cast<std::size_t>(k) * b.m2 * M, acc.data());
    }
    quad_x(b.n, spec.G.data(), 1.0, M, 0, M, b.x_lane(N), acc.data());
    return acc;
}

CostEstimate summarize(const std::vector<double>& costs) {
    CostEstimate e;
    e.paths = static_cast<int>(costs.size());
    double mean = 0.0;
    for (double c : costs) mean += c;
    mean /= e.paths;
    double var = 0.0;
    for (double c : costs) var += (c - mean) * (c - mean);
    var = e.paths > 1 ? var / (e.paths - 1) : 0.0;
    e.mean = mean;
    e.std_error = std::sqrt(var / e.paths);
    return e;
}

MatrixPath ones_direction(const TimeGrid& grid, int m) {
    Matrix ones(static_cast<std::size_t>(m), 1);
    for (int i = 0; i < m; ++i) ones(static_cast<std::size_t>(i), 0) = 1.0;
    return MatrixPath::constant(grid, ones);
}

double control_l2_norm(const TrajectoryBundle& b, int player) {
    // sqrt of the path-averaged control energy
    const int m = player == 1 ? b.m1 : b.m2;
    const auto& u = player == 1 ? b.u1 : b.u2;
    if (m == 0 || u.empty()) return 0.0;
    double total = 0.0;
    for (double v : u) total += v * v;
    return std::sqrt(total * b.grid.h() / b.paths);
}

struct ParabolaFit {
    double j0 = 0.0, slope = 0.0, curvature = 0.0, residual = 0.0;
};

ParabolaFit fit_parabola(const std::vector<double>& eps, const std::vector<double>& J) {
    // least squares for J ~ c0 + c1 e + c2 e^2 via normal equations
    double s[5] = {0, 0, 0, 0, 0};
    double b0 = 0, b1 = 0, b2 = 0;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        const double e = eps[i];
        const double e2 = e * e;
        s[0] += 1; s[1] += e; s[2] += e2; s[3] += e * e2; s[4] += e2 * e2;
        b0 += J[i]; b1 += J[i] * e; b2 += J[i] * e2;
    }
    Matrix A{{s[0], s[1], s[2]}, {s[1], s[2], s[3]}, {s[2], s[3], s[4]}};
    Matrix rhs{{b0}, {b1}, {b2}};
    const Matrix c = invert(A) * rhs;
    ParabolaFit f;
    f.j0 = c(0, 0);
    f.slope = c(1, 0);
    f.curvature = c(2, 0);
    double resid = 0.0;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        const double fit = c(0, 0) + c(1, 0) * eps[i] + c(2, 0) * eps[i] * eps[i];
        resid = std::max(resid, std::abs(fit - J[i]));
    }
    f.residual = resid;
    return f;
}

} // namespace

CostEstimate cost_mc(const GameSpec& spec, TrajectoryBundle& bundle) {
    bundle.per_path_cost = per_path_costs(spec, bundle);
    return summarize(bundle.per_path_cost);
}

double cost_feedback(const GameSpec& spec, const GainFn& K1, const GainFn& K2,
                     const Matrix& x0, const TimeGrid& grid) {
    const auto n = static_cast<std::size_t>(spec.n);
    Matrix S0(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) S0(i, j) = x0(i, 0) * x0(j, 0);

    const MatrixPath S = integrate_matrix_ode(
        [&](double t, const Matrix& S_t) {
            const Matrix k1 = K1(t);
            const Matrix k2 = K2(t);
            const Matrix Ab = spec.A.eval(t) + spec.B1.eval(t) * k1 + spec.B2.eval(t) * k2;
            const Matrix Cb = spec.C.eval(t) + spec.D1.eval(t) * k1 + spec.D2.eval(t) * k2;
            return Ab * S_t + S_t * Ab.transpose() + Cb * S_t * Cb.transpose();
        },
        S0, grid, Direction::forward, [](const Matrix& m) { return symmetrize(m); });

    std::vector<double> running(static_cast<std::size_t>(grid.nodes()));
    for (int k = 0; k <= grid.steps; ++k) {
        const double t = grid.node(k);
        const Matrix k1 = K1(t);
        const Matrix k2 = K2(t);
        const Matrix W = spec.Q.eval(t) + k1.transpose() * spec.R1.eval(t) * k1
                         + k2.transpose() * spec.R2.eval(t) * k2;
        running[static_cast<std::size_t>(k)] = dot_fro(W, S.at_node(k));
    }
    return simpson(running, grid) + dot_fro(spec.G, S.at_node(grid.steps));
}

double cost_feedback(const GameSpec& spec, const MatrixPath& K1, const MatrixPath& K2,
                     const Matrix& x0, const TimeGrid& grid) {
    return cost_feedback(
        spec, [&](double t) { return K1.eval(t); }, [&](double t) { return K2.eval(t); },
        x0, grid);
}

double cost_openloop_exact(const GameSpec& spec, const Coefficient& u1,
                           const Coefficient& u2, const Matrix& x0, const TimeGrid& grid) {
    const auto n = static_cast<std::size_t>(spec.n);
    // pack [S | m] into an n x (n+1) state
    Matrix Y0(n, n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) Y0(i, j) = x0(i, 0) * x0(j, 0);
        Y0(i, n) = x0(i, 0);
    }
    auto unpack_S = [n](const Matrix& Y) {
        Matrix S(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) S(i, j) = Y(i, j);
        return S;
    };
    auto unpack_m = [n](const Matrix& Y) {
        Matrix m(n, 1);
        for (std::size_t i = 0; i < n; ++i) m(i, 0) = Y(i, n);
        return m;
    };

    const MatrixPath Y = integrate_matrix_ode(
        [&](double t, const Matrix& Yt) {
            const Matrix S = unpack_S(Yt);
            const Matrix mean = unpack_m(Yt);
            const Matrix A = spec.A.eval(t);
            const Matrix C = spec.C.eval(t);
            const Matrix bu = spec.B1.eval(t) * u1.eval(t) + spec.B2.eval(t) * u2.eval(t);
            const Matrix du = spec.D1.eval(t) * u1.eval(t) + spec.D2.eval(t) * u2.eval(t);
            const Matrix dS = A * S + S * A.transpose() + bu * mean.transpose()
                              + mean * bu.transpose() + C * S * C.transpose()
                              + C * mean * du.transpose() + du * mean.transpose() * C.transpose()
                              + du * du.transpose();
            const Matrix dm = A * mean + bu;
            Matrix out(n, n + 1);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) out(i, j) = dS(i, j);
                out(i, n) = dm(i, 0);
            }
            return out;
        },
        Y0, grid, Direction::forward,
        [&](const Matrix& Yt) {
            const Matrix S = symmetrize(unpack_S(Yt));
            Matrix out = Yt;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) out(i, j) = S(i, j);
            return out;
        });

    std::vector<double> running(static_cast<std::size_t>(grid.nodes()));
    for (int k = 0; k <= grid.steps; ++k) {
        const double t = grid.node(k);
        const Matrix S = unpack_S(Y.at_node(k));
        const Matrix v1 = u1.eval(t);
        const Matrix v2 = u2.eval(t);
        running[static_cast<std::size_t>(k)] = dot_fro(spec.Q.eval(t), S)
                                               + dot_fro(v1, spec.R1.eval(t) * v1)
                                               + dot_fro(v2, spec.R2.eval(t) * v2);
    }
    return simpson(running, grid) + dot_fro(spec.G, unpack_S(Y.at_node(grid.steps)));
}

double euler_expected_cost(const GameSpec& spec, const MatrixPath& K1, const MatrixPath& K2,
                           const Matrix& x0, const TimeGrid& grid) {
    const auto n = static_cast<std::size_t>(spec.n);
    const double h = grid.h();
    Matrix S(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) S(i, j) = x0(i, 0) * x0(j, 0);

    const Matrix I = Matrix::identity(n);
    double cost = 0.0;
    for (int k = 0; k < grid.steps; ++k) {
        const double t = grid.node(k);
        const Matrix k1 = K1.at_node(k);
        const Matrix k2 = K2.at_node(k);
        const Matrix Ab = spec.A.eval(t) + spec.B1.eval(t) * k1 + spec.B2.eval(t) * k2;
        const Matrix Cb = spec.C.eval(t) + spec.D1.eval(t) * k1 + spec.D2.eval(t) * k2;
        // the cost_mc rule: trapezoid in the states, left rectangle in controls
        cost += h * (0.5 * dot_fro(spec.Q.eval(t), S)
                     + dot_fro(k1.transpose() * spec.R1.eval(t) * k1, S)
                     + dot_fro(k2.transpose() * spec.R2.eval(t) * k2, S));
        const Matrix Mstep = I + h * Ab;
        S = symmetrize(Mstep * S * Mstep.transpose() + h * (Cb * S * Cb.transpose()));
        cost += h * 0.5 * dot_fro(spec.Q.eval(grid.node(k + 1)), S);
    }
    return cost + dot_fro(spec.G, S);
}

SaddleReport deviation_parabola(const GameSpec& spec, const TrajectoryBundle& recorded,
                                int player, const MatrixPath& delta_dir,
                                const std::vector<double>& eps_grid,
                                const BrownianBatch& batch, int want_curvature_sign) {
    SaddleReport rep;
    rep.player = player;
    rep.eps_grid = eps_grid;

    std::vector<double> means(eps_grid.size());
    std::vector<std::vector<double>> extremes(2);
    const double eps_max = *std::max_element(eps_grid.begin(), eps_grid.end());
    const double eps_min = *std::min_element(eps_grid.begin(), eps_grid.end());

    for (std::size_t i = 0; i < eps_grid.size(); ++i) {
        std::vector<double> costs;
        if (eps_grid[i] == 0.0) {
            costs = per_path_costs(spec, recorded);
        } else {
            TrajectoryBundle dev =
                deviation_run(spec, recorded, player, delta_dir, eps_grid[i], batch);
            costs = per_path_costs(spec, dev);
        }
        means[i] = summarize(costs).mean;
        if (eps_grid[i] == eps_min) extremes[0] = costs;
        if (eps_grid[i] == eps_max) extremes[1] = std::move(costs);
    }

    const ParabolaFit fit = fit_parabola(eps_grid, means);
    rep.slope = fit.slope;
    rep.curvature = fit.curvature;
    rep.fit_residual = fit.residual / (1.0 + std::abs(fit.j0));

    // CRN standard error of the central slope estimate
    double se = 0.0;
    if (!extremes[0].empty() && !extremes[1].empty() && eps_max > eps_min) {
        std::vector<double> diff(extremes[0].size());
        for (std::size_t j = 0; j < diff.size(); ++j)
            diff[j] = (extremes[1][j] - extremes[0][j]) / (eps_max - eps_min);
        se = summarize(diff).std_error;
    }
    rep.slope_std_error = se;
    // allowance for the O(h) weak bias of the Euler discretization
    const double bias_floor = 20.0 * batch.grid().h() * (1.0 + std::abs(fit.j0));
    rep.slope_tol = 3.0 * se + bias_floor;

    bool sign_ok = true;
    if (want_curvature_sign > 0) sign_ok = rep.curvature > 0.0;
    if (want_curvature_sign < 0) sign_ok = rep.curvature < 0.0;
    rep.verdict = sign_ok && std::abs(rep.slope) <= rep.slope_tol;
    return rep;
}

AssumptionCheck check_h3(const GameSpec& spec, const TimeGrid& grid, double delta) {
    AssumptionCheck c;
    try {
        const auto sol = solve_follower(spec, grid, delta);
        c.holds = sol.min_margin >= delta;
        c.margin = sol.min_margin;
        c.diagnostic = "strongly regular follower gate";
    } catch (const SolveError& e) {
        c.holds = false;
        c.margin = -std::numeric_limits<double>::infinity();
        c.diagnostic = e.what();
    }
    return c;
}

AssumptionCheck check_h5(const GameSpec& spec, const TimeGrid& grid, double delta) {
    AssumptionCheck c;
    try {
        // auxiliary Riccati of the u2-only problem, gate uniformly negative
        const MatrixPath P = integrate_matrix_ode(
            [&](double t, const Matrix& Pt) {
                const Matrix A = spec.A.eval(t);
                const Matrix Cm = spec.C.eval(t);
                const Matrix B2 = spec.B2.eval(t);
                const Matrix D2 = spec.D2.eval(t);
                const Matrix gate = symmetrize(spec.R2.eval(t) + D2.transpose() * Pt * D2);
                const auto m = eig_margin(gate);
                if (m.lambda_max > -delta)
                    throw SolveError(SolveError::Kind::regularity_lost, t,
                                     "lambda_max(R2 + D2'PD2) = "
                                         + std::to_string(m.lambda_max));
                const Matrix L = Pt * B2 + Cm.transpose() * Pt * D2;
                return -(Pt * A + A.transpose() * Pt + Cm.transpose() * Pt * Cm
                         + spec.Q.eval(t)
                         - L * invert(gate)
                               * (B2.transpose() * Pt + D2.transpose() * Pt * Cm));
            },
            spec.G, grid, Direction::backward,
            [](const Matrix& m) { return symmetrize(m); });
        double margin = std::numeric_limits<double>::infinity();
        for (int k = 0; k <= grid.steps; ++k) {
            const double t = grid.node(k);
            const Matrix D2 = spec.D2.eval(t);
            const Matrix gate =
                symmetrize(spec.R2.eval(t) + D2.transpose() * P.at_node(k) * D2);
            margin = std::min(margin, -eig_margin(gate).lambda_max);
        }
        c.holds = margin >= delta;
        c.margin = margin;
        c.diagnostic = "u2-only Riccati gate uniformly negative";
    } catch (const SolveError& e) {
        c.holds = false;
        c.margin = -std::numeric_limits<double>::infinity();
        c.diagnostic = e.what();
    }
    return c;
}

AssumptionCheck check_leader_concavity(const GameSpec& spec, const TimeGrid& grid,
                                       double delta) {
    AssumptionCheck c;
    try {
        const auto p1 = solve_follower(spec, grid, delta);
        const LeaderData ld = leader_data(spec, p1.P);
        const auto sg = solve_leader_sigma(ld, grid, delta);
        c.holds = true;
        c.margin = sg.min_margin;
        c.diagnostic = "R uniformly negative, Shat regular, Sigma <= 0";
    } catch (const SolveError& e) {
        c.holds = false;
        c.margin = -std::numeric_limits<double>::infinity();
        c.diagnostic = e.what();
    }
    return c;
}

StackelbergVerification verify_stackelberg(const GameSpec& spec,
                                           const RegularRiccatiSolution& P1,
                                           const RegularRiccatiSolution& Sigma,
                                           const LeaderData& ld, const Matrix& x0,
                                           const BrownianBatch& batch,
                                           const std::vector<double>& eps_grid_in,
                                           double tol) {
    StackelbergVerification v;
    const Matrix V0 = P1.P.at_node(0) - Sigma.P.at_node(0);
    v.value_formula = dot_fro(x0, V0 * x0);

    const GainFn k1 = [&](double t) {
        return stackelberg_gains_at(spec, P1.P.eval(t), Sigma.P.eval(t), ld.at(t), t).first;
    };
    const GainFn k2 = [&](double t) {
        return stackelberg_gains_at(spec, P1.P.eval(t), Sigma.P.eval(t), ld.at(t), t).second;
    };
    v.value_feedback = cost_feedback(spec, k1, k2, x0, batch.grid());
    v.value_match =
        std::abs(v.value_feedback - v.value_formula) <= tol * (1.0 + std::abs(v.value_formula));

    const GainPair gains = stackelberg_gains(spec, P1.P, Sigma.P, ld);
    TrajectoryBundle recorded = record_equilibrium(spec, gains, x0, batch);

    std::vector<double> eps_grid = eps_grid_in;
    if (eps_grid.empty()) {
        // scale-aware default: eps0 = 0.1 |recorded u1| / |delta| in L2
        const double rec_norm = control_l2_norm(recorded, 1);
        const double dnorm = std::sqrt(static_cast<double>(spec.m1) * batch.grid().t_end);
        const double e0 = rec_norm > 1e-8 ? 0.1 * rec_norm / dnorm : 0.1;
        eps_grid = {-e0, -0.5 * e0, 0.0, 0.5 * e0, e0};
    }
    v.follower = deviation_parabola(spec, recorded, 1, ones_direction(batch.grid(), spec.m1),
                                    eps_grid, batch, +1);

    // leader optimality over the deterministic subclass
    BlqSpec bspec = BlqSpec::from_leader(spec, P1.P, x0);
    const BlqSolution sol = solve_blq_sigma(bspec, batch.grid());
    v.leader_value = sol.value;
    double best = -std::numeric_limits<double>::infinity();
    const TimeGrid& grid = batch.grid();
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> times(static_cast<std::size_t>(grid.nodes()));
        std::vector<Matrix> vals(static_cast<std::size_t>(grid.nodes()));
        for (int k = 0; k <= grid.steps; ++k) {
            times[static_cast<std::size_t>(k)] = grid.node(k);
            Matrix u(static_cast<std::size_t>(spec.m2), 1);
            for (int i = 0; i < spec.m2; ++i)
                u(static_cast<std::size_t>(i), 0) = inverse_normal_cdf(to_unit_interval(
                    mix_key(batch.seed() ^ 0x5ca1ab1eull,
                            static_cast<std::uint64_t>(trial) * spec.m2 + i,
                            static_cast<std::uint64_t>(k))));
            vals[static_cast<std::size_t>(k)] = u;
        }
        const auto u2 = Coefficient::sampled(times, vals, Coefficient::Interp::linear);
        best = std::max(best, blq_utility_deterministic(bspec, u2, grid));
    }
    v.leader_best_utility = best;
    v.leader_dominates = best <= v.leader_value + tol * (1.0 + std::abs(v.leader_value));

    v.pass = v.value_match && v.follower.verdict && v.leader_dominates;
    return v;
}

std::pair<SaddleReport, SaddleReport> verify_nash(const GameSpec& spec, const GainPair& gains,
                                                  const Matrix& x0,
                                                  const BrownianBatch& batch,
                                                  const std::vector<double>& eps_grid_in) {
    TrajectoryBundle recorded = record_equilibrium(spec, gains, x0, batch);
    auto eps_for = [&](int player) {
        if (!eps_grid_in.empty()) return eps_grid_in;
        const double rec_norm = control_l2_norm(recorded, player);
        const int m = player == 1 ? spec.m1 : spec.m2;
        const double dnorm = std::sqrt(static_cast<double>(m) * batch.grid().t_end);
        const double e0 = rec_norm > 1e-8 ? 0.1 * rec_norm / dnorm : 0.1;
        return std::vector<double>{-e0, -0.5 * e0, 0.0, 0.5 * e0, e0};
    };
    SaddleReport p1 = deviation_parabola(spec, recorded, 1,
                                         ones_direction(batch.grid(), spec.m1), eps_for(1),
                                         batch, +1);
    SaddleReport p2 = deviation_parabola(spec, recorded, 2,
                                         ones_direction(batch.grid(), spec.m2), eps_for(2),
                                         batch, -1);
    return {p1, p2};
}

} // namespace lqgame
