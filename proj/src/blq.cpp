#include "lqgame/blq.hpp"

#include "lqgame/brownian.hpp"

#include <cmath>
#include <limits>

namespace lqgame {

namespace {

struct SigmaHCoeffs {
    Matrix Ri, L, NH, S1H, S3H, ShatH, ShatHi;
};

SigmaHCoeffs sigma_h_coeffs(const LeaderCoeffs& c, const Matrix& H, const Matrix& S) {
    SigmaHCoeffs p;
    p.Ri = invert(c.R);
    p.L = c.C - c.B * p.Ri * c.S2;
    p.NH = c.N - c.S2.transpose() * p.Ri * c.S2 + H;
    p.S1H = c.S1 + c.B.transpose() * H;
    p.S3H = c.S3 - c.S2.transpose() * p.Ri * c.S1 + p.L.transpose() * H;
    p.ShatH = Matrix::identity(S.rows()) + S * p.NH;
    p.ShatHi = invert(p.ShatH);
    return p;
}

struct SigmaCoeffs {
    Matrix Ri, Shat, Shati;
};

SigmaCoeffs sigma_coeffs(const LeaderCoeffs& c, const Matrix& S) {
    SigmaCoeffs p;
    p.Ri = invert(c.R);
    p.Shat = Matrix::identity(S.rows()) + S * c.N - S * c.S2.transpose() * p.Ri * c.S2;
    p.Shati = invert(p.Shat);
    return p;
}

} // namespace

BlqSpec BlqSpec::from_leader(const GameSpec& spec, const MatrixPath& P1, const Matrix& x0) {
    BlqSpec b;
    b.data = leader_data(spec, P1);
    const auto n = static_cast<std::size_t>(spec.n);
    b.sigma = Coefficient::constant(Matrix::zeros(n, 1));
    b.G_cal = Matrix::zeros(n, n);
    b.g = x0;
    b.xi = Matrix::zeros(n, 1);
    return b;
}

BlqSolution solve_blq_H(const BlqSpec& bspec, const TimeGrid& grid, double delta) {
    const LeaderData& ld = bspec.data;
    const auto n = static_cast<std::size_t>(ld.n());

    BlqSolution sol;
    sol.H = solve_aux_H(ld, bspec.G_cal, grid);
    sol.riccati = solve_leader_sigma_H(ld, sol.H, grid, delta);
    const MatrixPath& SgH = sol.riccati.P;

    // phi ODE backward from phi(T) = -xi. The inhomogeneity couples through
    // H: the drift carries -(I + Sigma^H H) sigma.
    sol.phi = integrate_matrix_ode(
        [&](double t, const Matrix& phi) {
            const LeaderCoeffs c = ld.at(t);
            const Matrix H = sol.H.eval(t);
            const Matrix S = SgH.eval(t);
            const SigmaHCoeffs p = sigma_h_coeffs(c, H, S);
            return (c.A - S * p.S1H.transpose() * p.Ri * p.S1H - c.B * p.Ri * p.S1H) * phi
                   - (p.L + S * p.S3H.transpose()) * p.ShatHi * (S * p.S3H * phi)
                   - (Matrix::identity(n) + S * H) * bspec.sigma.eval(t);
        },
        -bspec.xi, grid, Direction::backward);

    // value and feedback coefficients
    std::vector<double> quad(static_cast<std::size_t>(grid.nodes()));
    std::vector<double> cross(static_cast<std::size_t>(grid.nodes()));
    std::vector<Matrix> fx(static_cast<std::size_t>(grid.nodes()));
    std::vector<Matrix> fphi(static_cast<std::size_t>(grid.nodes()));
    for (int k = 0; k <= grid.steps; ++k) {
        const double t = grid.node(k);
        const LeaderCoeffs c = ld.at(t);
        const Matrix& H = sol.H.at_node(k);
        const Matrix& S = SgH.at_node(k);
        const SigmaHCoeffs p = sigma_h_coeffs(c, H, S);
        const Matrix& phi = sol.phi.at_node(k);
        const Matrix M = p.S3H.transpose() * p.ShatHi * S * p.S3H
                         + p.S1H.transpose() * p.Ri * p.S1H;
        quad[static_cast<std::size_t>(k)] = dot_fro(phi, M * phi);
        cross[static_cast<std::size_t>(k)] = dot_fro(H * bspec.sigma.eval(t), phi);
        fx[static_cast<std::size_t>(k)] =
            p.Ri * (c.B.transpose() + p.S1H * S)
            - p.Ri * c.S2 * p.ShatHi * (S * p.L.transpose() + S * p.S3H * S);
        fphi[static_cast<std::size_t>(k)] =
            p.Ri * p.S1H - p.Ri * c.S2 * p.ShatHi * S * p.S3H;
    }
    sol.value = -dot_fro(bspec.g, SgH.at_node(0) * bspec.g)
                - 2.0 * dot_fro(bspec.g, sol.phi.at_node(0))
                - dot_fro(bspec.xi, sol.H.at_node(grid.steps) * bspec.xi)
                - simpson(quad, grid) - 2.0 * simpson(cross, grid);
    sol.feedback_x = MatrixPath(grid, std::move(fx));
    sol.feedback_phi = MatrixPath(grid, std::move(fphi));
    return sol;
}

BlqSolution solve_blq_sigma(const BlqSpec& bspec, const TimeGrid& grid, double delta) {
    if (bspec.G_cal.norm_inf() != 0.0)
        throw std::invalid_argument("solve_blq_sigma requires G_cal = 0");
    const LeaderData& ld = bspec.data;

    BlqSolution sol;
    sol.riccati = solve_leader_sigma(ld, grid, delta);
    const MatrixPath& Sg = sol.riccati.P;

    sol.phi = integrate_matrix_ode(
        [&](double t, const Matrix& phi) {
            const LeaderCoeffs c = ld.at(t);
            const Matrix S = Sg.eval(t);
            const SigmaCoeffs p = sigma_coeffs(c, S);
            return (c.A + S * c.Q - S * c.S1.transpose() * p.Ri * c.S1 - c.B * p.Ri * c.S1)
                       * phi
                   + (c.B * p.Ri * c.S2 + S * c.S1.transpose() * p.Ri * c.S2 - c.C
                      - S * c.S3.transpose())
                         * p.Shati
                         * ((S * c.S3 - S * c.S2.transpose() * p.Ri * c.S1) * phi)
                   - bspec.sigma.eval(t);
        },
        -bspec.xi, grid, Direction::backward);

    std::vector<double> quad(static_cast<std::size_t>(grid.nodes()));
    std::vector<Matrix> fx(static_cast<std::size_t>(grid.nodes()));
    std::vector<Matrix> fphi(static_cast<std::size_t>(grid.nodes()));
    for (int k = 0; k <= grid.steps; ++k) {
        const double t = grid.node(k);
        const LeaderCoeffs c = ld.at(t);
        const Matrix& S = Sg.at_node(k);
        const SigmaCoeffs p = sigma_coeffs(c, S);
        const Matrix& phi = sol.phi.at_node(k);
        const Matrix M = c.Q
                         - (c.S3.transpose() - c.S1.transpose() * p.Ri * c.S2) * p.Shati * S
                               * (c.S3 - c.S2.transpose() * p.Ri * c.S1)
                         - c.S1.transpose() * p.Ri * c.S1;
        quad[static_cast<std::size_t>(k)] = dot_fro(phi, M * phi);
        const Matrix KB = S * c.C.transpose()
                          - S * c.S2.transpose() * p.Ri * c.B.transpose()
                          - S * c.S2.transpose() * p.Ri * c.S1 * S + S * c.S3 * S;
        fx[static_cast<std::size_t>(k)] =
            p.Ri * (c.B.transpose() + c.S1 * S - c.S2 * p.Shati * KB);
        fphi[static_cast<std::size_t>(k)] =
            p.Ri * c.S1
            - p.Ri * c.S2 * p.Shati * (S * c.S3 - S * c.S2.transpose() * p.Ri * c.S1);
    }
    sol.value = -dot_fro(bspec.g, Sg.at_node(0) * bspec.g)
                - 2.0 * dot_fro(bspec.g, sol.phi.at_node(0)) + simpson(quad, grid);
    sol.feedback_x = MatrixPath(grid, std::move(fx));
    sol.feedback_phi = MatrixPath(grid, std::move(fphi));
    return sol;
}

double blq_utility_deterministic(const BlqSpec& bspec, const Coefficient& u2,
                                 const TimeGrid& grid) {
    const LeaderData& ld = bspec.data;
    // deterministic data: Z = 0, Y solves a plain backward ODE
    const MatrixPath Y = integrate_matrix_ode(
        [&](double t, const Matrix& y) {
            const LeaderCoeffs c = ld.at(t);
            return c.A * y + c.B * u2.eval(t) + bspec.sigma.eval(t);
        },
        bspec.xi, grid, Direction::backward);

    std::vector<double> runn(static_cast<std::size_t>(grid.nodes()));
    for (int k = 0; k <= grid.steps; ++k) {
        const double t = grid.node(k);
        const LeaderCoeffs c = ld.at(t);
        const Matrix u = u2.eval(t);
        const Matrix& y = Y.at_node(k);
        runn[static_cast<std::size_t>(k)] =
            dot_fro(u, c.R * u) + dot_fro(y, c.Q * y) + 2.0 * dot_fro(u, c.S1 * y);
    }
    const Matrix& y0 = Y.at_node(0);
    return quadrature(runn, grid) + dot_fro(y0, bspec.G_cal * y0)
           + 2.0 * dot_fro(y0, bspec.g);
}

double check_concavity_condition(const BlqSpec& bspec, int trials, std::uint64_t seed,
                                 const TimeGrid& grid) {
    BlqSpec probe = bspec; // U0: sigma = 0, g = 0, xi = 0, G_cal = 0
    const auto n = static_cast<std::size_t>(bspec.data.n());
    const auto m2 = static_cast<std::size_t>(bspec.data.m2());
    probe.sigma = Coefficient::constant(Matrix::zeros(n, 1));
    probe.g = Matrix::zeros(n, 1);
    probe.xi = Matrix::zeros(n, 1);
    probe.G_cal = Matrix::zeros(n, n);

    double worst = -std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < trials; ++trial) {
        // random piecewise-linear control with unit L2 energy
        std::vector<double> times(static_cast<std::size_t>(grid.nodes()));
        std::vector<Matrix> vals(static_cast<std::size_t>(grid.nodes()));
        std::vector<double> energy(static_cast<std::size_t>(grid.nodes()));
        for (int k = 0; k <= grid.steps; ++k) {
            times[static_cast<std::size_t>(k)] = grid.node(k);
            Matrix u(m2, 1);
            for (std::size_t i = 0; i < m2; ++i) {
                const auto key = mix_key(seed, static_cast<std::uint64_t>(trial) * m2 + i,
                                         static_cast<std::uint64_t>(k));
                u(i, 0) = inverse_normal_cdf(to_unit_interval(key));
            }
            vals[static_cast<std::size_t>(k)] = u;
            energy[static_cast<std::size_t>(k)] = dot_fro(u, u);
        }
        const double norm2 = quadrature(energy, grid);
        if (norm2 <= 0.0) continue;
        const double scale = 1.0 / std::sqrt(norm2);
        for (auto& v : vals) v *= scale;
        const Coefficient u2 =
            Coefficient::sampled(times, vals, Coefficient::Interp::linear);

        // recompute the actual L2 norm of the interpolated control
        std::vector<double> e2(static_cast<std::size_t>(grid.nodes()));
        for (int k = 0; k <= grid.steps; ++k) {
            const Matrix u = u2.eval(grid.node(k));
            e2[static_cast<std::size_t>(k)] = dot_fro(u, u);
        }
        const double u_norm2 = quadrature(e2, grid);
        const double util = blq_utility_deterministic(probe, u2, grid);
        worst = std::max(worst, util / u_norm2);
    }
    return worst;
}

} // namespace lqgame
