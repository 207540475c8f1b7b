#include "lqgame/synthesis.hpp"

#include <algorithm>
#include <cmath>

namespace lqgame {

namespace {

// Everything the node-wise identities need at one grid node.
struct NodeAlgebra {
    Matrix A, C, B1, B2, D1, D2, R1, R2;
    Matrix P1, Sg, P;
    LeaderCoeffs lc;
    Matrix R1hi;   // (R1 + D1'P1D1)^{-1}
    Matrix cRi;    // R^{-1}
    Matrix Shat, Shati, W; // W = Shati * Sg
    Matrix Kgate, K;       // R1 + D1'(P1-Sg)D1 and its inverse
    Matrix Phi, Phih;
    Matrix M11, M12, M21, M22;
    Matrix KB; // Sg C' - Sg S2' Ri B' - Sg S2' Ri S1 Sg + Sg S3 Sg
};

NodeAlgebra node_algebra(const GameSpec& spec, const Matrix& P1, const Matrix& Sg,
                         const LeaderCoeffs& lc, double t) {
    NodeAlgebra na;
    na.A = spec.A.eval(t);
    na.C = spec.C.eval(t);
    na.B1 = spec.B1.eval(t);
    na.B2 = spec.B2.eval(t);
    na.D1 = spec.D1.eval(t);
    na.D2 = spec.D2.eval(t);
    na.R1 = spec.R1.eval(t);
    na.R2 = spec.R2.eval(t);
    na.P1 = P1;
    na.Sg = Sg;
    na.P = P1 - Sg;
    na.lc = lc;
    na.R1hi = invert(lc.R1hat);
    na.cRi = invert(lc.R);
    na.Shat = Matrix::identity(Sg.rows()) + Sg * lc.N
              - Sg * lc.S2.transpose() * na.cRi * lc.S2;
    na.Shati = invert(na.Shat);
    na.W = na.Shati * Sg;
    na.Kgate = symmetrize(na.R1 + na.D1.transpose() * na.P * na.D1);
    na.K = invert(na.Kgate);
    na.Phi = symmetrize(na.R2 + na.D2.transpose() * na.P * na.D2
                        - na.D2.transpose() * na.P * na.D1 * na.K * na.D1.transpose()
                              * na.P * na.D2);
    na.Phih = na.cRi + na.cRi * lc.S2 * na.W * lc.S2.transpose() * na.cRi;
    na.M11 = na.K + na.K * na.D1.transpose() * na.P * na.D2 * na.Phih
                        * na.D2.transpose() * na.P * na.D1 * na.K;
    na.M12 = -(na.K * na.D1.transpose() * na.P * na.D2 * na.Phih);
    na.M21 = na.M12.transpose();
    na.M22 = na.Phih;
    na.KB = Sg * lc.C.transpose() - Sg * lc.S2.transpose() * na.cRi * lc.B.transpose()
            - Sg * lc.S2.transpose() * na.cRi * lc.S1 * Sg + Sg * lc.S3 * Sg;
    return na;
}

Matrix theta2_at(const NodeAlgebra& na) {
    return na.cRi * (na.lc.B.transpose() + na.lc.S1 * na.Sg
                     - na.lc.S2 * na.Shati * na.KB);
}

Matrix theta1_at(const NodeAlgebra& na, const Matrix& th2) {
    return na.R1hi * (na.B1.transpose() * na.Sg - na.B1.transpose() * na.P1
                      - na.D1.transpose() * na.P1 * na.C
                      - na.D1.transpose() * na.Shati * na.KB
                      - na.D1.transpose() * na.P1 * na.D2 * th2);
}

double input_scale(const GameSpec& spec, const MatrixPath& P1, const MatrixPath& Sigma) {
    double s = std::max(P1.norm_inf(), Sigma.norm_inf());
    const TimeGrid& grid = P1.grid();
    for (int k = 0; k <= grid.steps; k += std::max(1, grid.steps / 64)) {
        const double t = grid.node(k);
        for (const Coefficient* c : {&spec.A, &spec.C, &spec.B1, &spec.B2, &spec.D1,
                                     &spec.D2, &spec.Q, &spec.R1, &spec.R2})
            s = std::max(s, c->eval(t).norm_inf());
    }
    return 1.0 + s;
}

IdentityReport make_report(std::string name, double sup, int node, double tol_scaled) {
    IdentityReport r;
    r.name = std::move(name);
    r.sup_residual = sup;
    r.node_of_max = node;
    r.tolerance = tol_scaled;
    r.pass = sup <= tol_scaled;
    return r;
}

} // namespace

std::pair<Matrix, Matrix> stackelberg_gains_at(const GameSpec& spec, const Matrix& P1,
                                               const Matrix& Sigma, const LeaderCoeffs& lc,
                                               double t) {
    const NodeAlgebra na = node_algebra(spec, P1, Sigma, lc, t);
    const Matrix th2 = theta2_at(na);
    return {theta1_at(na, th2), th2};
}

std::pair<Matrix, Matrix> nash_gains_at(const GameSpec& spec, const Matrix& P, double t) {
    const Matrix C = spec.C.eval(t);
    const Matrix B = hcat(spec.B1.eval(t), spec.B2.eval(t));
    const Matrix D = hcat(spec.D1.eval(t), spec.D2.eval(t));
    const Matrix R = block_diag(spec.R1.eval(t), spec.R2.eval(t));
    const Matrix gate = symmetrize(R + D.transpose() * P * D);
    const Matrix stacked = -(invert(gate) * (B.transpose() * P + D.transpose() * P * C));
    return {slice_rows(stacked, 0, static_cast<std::size_t>(spec.m1)),
            slice_rows(stacked, static_cast<std::size_t>(spec.m1),
                       static_cast<std::size_t>(spec.m2))};
}

std::pair<Matrix, Matrix> leader_adjoint_coefficients(const GameSpec& spec,
                                                      const Matrix& P1, const Matrix& Sigma,
                                                      const LeaderCoeffs& lc, double t) {
    const NodeAlgebra na = node_algebra(spec, P1, Sigma, lc, t);
    const LeaderCoeffs& c = na.lc;
    const Matrix drift_bracket =
        c.A.transpose() + c.Q * na.Sg - c.S1.transpose() * na.cRi * c.B.transpose()
        - c.S1.transpose() * na.cRi * c.S1 * na.Sg
        - (c.S3.transpose() - c.S1.transpose() * na.cRi * c.S2) * na.Shati * na.KB;
    const Matrix diff_bracket =
        c.C.transpose() - c.S2.transpose() * na.cRi * c.B.transpose()
        + (c.S3 - c.S2.transpose() * na.cRi * c.S1) * na.Sg
        - (c.N - c.S2.transpose() * na.cRi * c.S2) * na.Shati * na.KB;
    return {-drift_bracket, -diff_bracket};
}

MatrixPath follower_gain(const GameSpec& spec, const MatrixPath& P1) {
    const TimeGrid& grid = P1.grid();
    std::vector<Matrix> th(static_cast<std::size_t>(grid.nodes()));
    for (int k = 0; k <= grid.steps; ++k) {
        const double t = grid.node(k);
        const Matrix C = spec.C.eval(t);
        const Matrix B1 = spec.B1.eval(t);
        const Matrix D1 = spec.D1.eval(t);
        const Matrix& P = P1.at_node(k);
        const Matrix gate = symmetrize(spec.R1.eval(t) + D1.transpose() * P * D1);
        th[static_cast<std::size_t>(k)] =
            -(invert(gate) * (B1.transpose() * P + D1.transpose() * P * C));
    }
    return MatrixPath(grid, std::move(th));
}

GainPair stackelberg_gains(const GameSpec& spec, const MatrixPath& P1,
                           const MatrixPath& Sigma, const LeaderData& ld) {
    const TimeGrid& grid = P1.grid();
    std::vector<Matrix> th1(static_cast<std::size_t>(grid.nodes()));
    std::vector<Matrix> th2(static_cast<std::size_t>(grid.nodes()));
    for (int k = 0; k <= grid.steps; ++k) {
        const double t = grid.node(k);
        const NodeAlgebra na =
            node_algebra(spec, P1.at_node(k), Sigma.at_node(k), ld.at(t), t);
        th2[static_cast<std::size_t>(k)] = theta2_at(na);
        th1[static_cast<std::size_t>(k)] = theta1_at(na, th2[static_cast<std::size_t>(k)]);
    }
    GainPair g;
    g.theta1 = MatrixPath(grid, std::move(th1));
    g.theta2 = MatrixPath(grid, std::move(th2));
    g.origin = GainOrigin::stackelberg;
    return g;
}

GainPair nash_gains(const GameSpec& spec, const MatrixPath& P) {
    const TimeGrid& grid = P.grid();
    const auto m1 = static_cast<std::size_t>(spec.m1);
    const auto m2 = static_cast<std::size_t>(spec.m2);
    std::vector<Matrix> th1(static_cast<std::size_t>(grid.nodes()));
    std::vector<Matrix> th2(static_cast<std::size_t>(grid.nodes()));
    for (int k = 0; k <= grid.steps; ++k) {
        const double t = grid.node(k);
        const Matrix C = spec.C.eval(t);
        const Matrix B = hcat(spec.B1.eval(t), spec.B2.eval(t));
        const Matrix D = hcat(spec.D1.eval(t), spec.D2.eval(t));
        const Matrix R = block_diag(spec.R1.eval(t), spec.R2.eval(t));
        const Matrix& Pk = P.at_node(k);
        const Matrix gate = symmetrize(R + D.transpose() * Pk * D);
        const Matrix stacked =
            -(invert(gate) * (B.transpose() * Pk + D.transpose() * Pk * C));
        th1[static_cast<std::size_t>(k)] = slice_rows(stacked, 0, m1);
        th2[static_cast<std::size_t>(k)] = slice_rows(stacked, m1, m2);
    }
    GainPair g;
    g.theta1 = MatrixPath(grid, std::move(th1));
    g.theta2 = MatrixPath(grid, std::move(th2));
    g.origin = GainOrigin::nash;
    return g;
}

PhiPair phi_pair(const GameSpec& spec, const MatrixPath& P1, const MatrixPath& Sigma,
                 const LeaderData& ld, double tol) {
    const TimeGrid& grid = P1.grid();
    const Matrix I2 = Matrix::identity(static_cast<std::size_t>(spec.m2));
    std::vector<Matrix> phi(static_cast<std::size_t>(grid.nodes()));
    std::vector<Matrix> phih(static_cast<std::size_t>(grid.nodes()));
    double sup = 0.0;
    int node = 0;
    for (int k = 0; k <= grid.steps; ++k) {
        const double t = grid.node(k);
        const NodeAlgebra na =
            node_algebra(spec, P1.at_node(k), Sigma.at_node(k), ld.at(t), t);
        phi[static_cast<std::size_t>(k)] = na.Phi;
        phih[static_cast<std::size_t>(k)] = na.Phih;
        const double r = (na.Phi * na.Phih - I2).norm_inf();
        if (r > sup) { sup = r; node = k; }
    }
    PhiPair out;
    out.phi = MatrixPath(grid, std::move(phi));
    out.phi_hat = MatrixPath(grid, std::move(phih));
    out.report = make_report("phi_inverse", sup, node,
                             tol * input_scale(spec, P1, Sigma));
    return out;
}

BlockInverse block_inverse_M(const GameSpec& spec, const MatrixPath& P1,
                             const MatrixPath& Sigma, const LeaderData& ld, double tol) {
    const TimeGrid& grid = P1.grid();
    const auto m = static_cast<std::size_t>(spec.m1 + spec.m2);
    std::vector<Matrix> m11(static_cast<std::size_t>(grid.nodes()));
    std::vector<Matrix> m12(static_cast<std::size_t>(grid.nodes()));
    std::vector<Matrix> m21(static_cast<std::size_t>(grid.nodes()));
    std::vector<Matrix> m22(static_cast<std::size_t>(grid.nodes()));
    double sup = 0.0;
    int node = 0;
    for (int k = 0; k <= grid.steps; ++k) {
        const double t = grid.node(k);
        const NodeAlgebra na =
            node_algebra(spec, P1.at_node(k), Sigma.at_node(k), ld.at(t), t);
        m11[static_cast<std::size_t>(k)] = na.M11;
        m12[static_cast<std::size_t>(k)] = na.M12;
        m21[static_cast<std::size_t>(k)] = na.M21;
        m22[static_cast<std::size_t>(k)] = na.M22;

        Matrix assembled(m, m);
        for (std::size_t i = 0; i < static_cast<std::size_t>(spec.m1); ++i) {
            for (std::size_t j = 0; j < static_cast<std::size_t>(spec.m1); ++j)
                assembled(i, j) = na.M11(i, j);
            for (std::size_t j = 0; j < static_cast<std::size_t>(spec.m2); ++j)
                assembled(i, spec.m1 + j) = na.M12(i, j);
        }
        for (std::size_t i = 0; i < static_cast<std::size_t>(spec.m2); ++i) {
            for (std::size_t j = 0; j < static_cast<std::size_t>(spec.m1); ++j)
                assembled(spec.m1 + i, j) = na.M21(i, j);
            for (std::size_t j = 0; j < static_cast<std::size_t>(spec.m2); ++j)
                assembled(spec.m1 + i, spec.m1 + j) = na.M22(i, j);
        }
        const Matrix D = hcat(na.D1, na.D2);
        const Matrix R = block_diag(na.R1, na.R2);
        const Matrix gate = R + D.transpose() * na.P * D;
        const double r = (assembled * gate - Matrix::identity(m)).norm_inf();
        if (r > sup) { sup = r; node = k; }
    }
    BlockInverse out;
    out.m11 = MatrixPath(grid, std::move(m11));
    out.m12 = MatrixPath(grid, std::move(m12));
    out.m21 = MatrixPath(grid, std::move(m21));
    out.m22 = MatrixPath(grid, std::move(m22));
    out.report = make_report("block_inverse", sup, node,
                             tol * input_scale(spec, P1, Sigma));
    return out;
}

IdentityReport gain_identity(const GainPair& stackelberg, const GainPair& nash, double tol) {
    if (!(stackelberg.theta1.grid() == nash.theta1.grid()))
        throw std::invalid_argument("gain_identity: grids differ");
    double sup = 0.0;
    int node = 0;
    double scale = 0.0;
    const int N = stackelberg.theta1.grid().steps;
    for (int k = 0; k <= N; ++k) {
        const double r1 = (stackelberg.theta1.at_node(k) - nash.theta1.at_node(k)).norm_inf();
        const double r2 = (stackelberg.theta2.at_node(k) - nash.theta2.at_node(k)).norm_inf();
        const double r = std::max(r1, r2);
        if (r > sup) { sup = r; node = k; }
        scale = std::max({scale, stackelberg.theta1.at_node(k).norm_inf(),
                          stackelberg.theta2.at_node(k).norm_inf()});
    }
    return make_report("gain_identity", sup, node, tol * (1.0 + scale));
}

std::pair<IdentityReport, IdentityReport> closed_loop_coefficient_identity(
    const GameSpec& spec, const MatrixPath& P1, const MatrixPath& Sigma,
    const LeaderData& ld, const GainPair& gains, double tol) {
    const TimeGrid& grid = P1.grid();
    double sup_d = 0.0, sup_s = 0.0;
    int node_d = 0, node_s = 0;
    for (int k = 0; k <= grid.steps; ++k) {
        const double t = grid.node(k);
        const auto [adj_drift, adj_diff] =
            leader_adjoint_coefficients(spec, P1.at_node(k), Sigma.at_node(k), ld.at(t), t);
        const Matrix closed_drift = spec.A.eval(t) + spec.B1.eval(t) * gains.theta1.at_node(k)
                                    + spec.B2.eval(t) * gains.theta2.at_node(k);
        const Matrix closed_diff = spec.C.eval(t) + spec.D1.eval(t) * gains.theta1.at_node(k)
                                   + spec.D2.eval(t) * gains.theta2.at_node(k);
        const double rd = (adj_drift - closed_drift).norm_inf();
        const double rs = (adj_diff - closed_diff).norm_inf();
        if (rd > sup_d) { sup_d = rd; node_d = k; }
        if (rs > sup_s) { sup_s = rs; node_s = k; }
    }
    const double scaled = tol * input_scale(spec, P1, Sigma);
    return {make_report("closed_loop_drift", sup_d, node_d, scaled),
            make_report("closed_loop_diffusion", sup_s, node_s, scaled)};
}

std::vector<IdentityReport> appendix_identity_suite(const GameSpec& spec,
                                                    const MatrixPath& P1,
                                                    const MatrixPath& Sigma,
                                                    const LeaderData& ld, double tol) {
    const TimeGrid& grid = P1.grid();
    struct Acc {
        double sup = 0.0;
        int node = 0;
        void update(double r, int k) {
            if (r > sup) { sup = r; node = k; }
        }
    };
    Acc a_acc, f31_acc, f32_acc, f12_acc, f13_acc, f75_acc, F_acc;

    for (int k = 0; k <= grid.steps; ++k) {
        const double t = grid.node(k);
        const NodeAlgebra na =
            node_algebra(spec, P1.at_node(k), Sigma.at_node(k), ld.at(t), t);
        const LeaderCoeffs& c = na.lc;
        const Matrix& P1k = na.P1;
        const Matrix& Sg = na.Sg;
        const Matrix& D1 = na.D1;
        const Matrix& D2 = na.D2;
        const Matrix& C = na.C;
        const Matrix D1t = D1.transpose();
        const Matrix D2t = D2.transpose();
        const Matrix S2t = c.S2.transpose();

        // (a): the expanded form of Phi*PhiHat - I times R.
        const Matrix a_left = c.S2 + D2t * P1k * D1 * na.K * D1t
                              - D2t * P1k * D1 * na.K * D1t * Sg * D1 * na.R1hi * D1t;
        const Matrix a_mid = D2t * Sg * D1 * na.K * D1t * P1k * D2 - D2t * Sg * D2
                             - D2t * Sg * D1 * na.K * D1t * Sg * D2;
        const Matrix a = a_left * na.W * S2t + a_mid + a_mid * na.cRi * c.S2 * na.W * S2t;
        a_acc.update(a.norm_inf(), k);

        // (f3)_1
        const Matrix f31 = na.Phih * D2t * na.P * D1 * na.K
                           - na.Phih * D2t * P1k * D1 * na.R1hi
                           + na.cRi * c.S2 * na.W * D1 * na.R1hi;
        f31_acc.update(f31.norm_inf(), k);

        // (f3)_2
        const Matrix f32 = na.Phih * D2t * na.P * D1 * na.K * D1t * na.P
                           + na.Phih * D2t * Sg - na.cRi * c.S2 * na.W
                           - na.Phih * D2t * P1k * D1 * na.R1hi * D1t * P1k
                           + na.cRi * c.S2 * na.W * D1 * na.R1hi * D1t * P1k;
        f32_acc.update(f32.norm_inf(), k);

        // (f1)_2
        const Matrix f12 = na.M11 - na.R1hi
                           + na.R1hi * D1t * P1k * D2 * na.cRi * c.S2 * na.W * D1 * na.R1hi
                           - na.R1hi * D1t * na.W * D1 * na.R1hi
                           + na.R1hi * D1t * na.W * S2t * na.cRi * D2t * P1k * D1 * na.R1hi
                           - na.R1hi * D1t * P1k * D2 * na.Phih * D2t * P1k * D1 * na.R1hi;
        f12_acc.update(f12.norm_inf(), k);

        // (f1)_3
        const Matrix f13 = -(na.M11 * D1t * Sg * C) - na.M12 * D2t * Sg * C
                           - na.R1hi * D1t * P1k * D2 * na.cRi * c.S2 * na.W * C
                           + na.R1hi * D1t * na.W * C;
        f13_acc.update(f13.norm_inf(), k);

        // (f7)_5
        const Matrix Ct = C.transpose();
        const Matrix f75 =
            Ct * Sg * D1 * na.M11 * D1t * na.P * C + Ct * Sg * D1 * na.M12 * D2t * na.P * C
            + Ct * Sg * D2 * na.M21 * D1t * na.P * C
            + Ct * Sg * D2 * na.M22 * D2t * na.P * C - Ct * Sg * C
            - Ct * na.W * (D1 * na.R1hi * D1t * P1k * C - C)
            + Ct * na.W * S2t * na.cRi
                  * (D2t * P1k * D1 * na.R1hi * D1t * P1k * C - D2t * P1k * C);
        f75_acc.update(f75.norm_inf(), k);

        // master F, from its definition: (I)-term minus the gate quadratic
        const Matrix PBCD = P1k * na.B1 + Ct * P1k * D1;
        const Matrix right_full = c.C.transpose() - S2t * na.cRi * c.B.transpose()
                                  - S2t * na.cRi * c.S1 * Sg + c.S3 * Sg;
        const Matrix I_term =
            PBCD * na.R1hi * (na.B1.transpose() * P1k + D1t * P1k * C)
            - Sg * na.B1 * na.R1hi * (D1t * P1k * C + na.B1.transpose() * P1k)
            - PBCD * na.R1hi * na.B1.transpose() * Sg - Ct * Sg * C - Sg * c.Q * Sg
            + (c.C + Sg * c.S3.transpose()) * na.Shati * Sg * right_full
            - (c.B * na.cRi * c.S2 + Sg * c.S1.transpose() * na.cRi * c.S2) * na.Shati * Sg
                  * (c.C.transpose() + c.S3 * Sg)
            + c.B * na.Phih * c.B.transpose()
            + Sg * c.S1.transpose() * na.Phih * c.B.transpose()
            + c.B * na.Phih * c.S1 * Sg
            + Sg * c.S1.transpose() * na.Phih * c.S1 * Sg;
        const Matrix L1 = na.P * na.B1 + Ct * na.P * D1;
        const Matrix L2 = na.P * na.B2 + Ct * na.P * D2;
        const Matrix Rt1 = na.B1.transpose() * na.P + D1t * na.P * C;
        const Matrix Rt2 = na.B2.transpose() * na.P + D2t * na.P * C;
        const Matrix F = I_term - L1 * na.M11 * Rt1 - L1 * na.M12 * Rt2
                         - L2 * na.M21 * Rt1 - L2 * na.M22 * Rt2;
        F_acc.update(F.norm_inf(), k);
    }

    const double scaled = tol * input_scale(spec, P1, Sigma);
    return {make_report("appendix_a", a_acc.sup, a_acc.node, scaled),
            make_report("appendix_f3_1", f31_acc.sup, f31_acc.node, scaled),
            make_report("appendix_f3_2", f32_acc.sup, f32_acc.node, scaled),
            make_report("appendix_f1_2", f12_acc.sup, f12_acc.node, scaled),
            make_report("appendix_f1_3", f13_acc.sup, f13_acc.node, scaled),
            make_report("appendix_f7_5", f75_acc.sup, f75_acc.node, scaled),
            make_report("appendix_master_F", F_acc.sup, F_acc.node, scaled)};
}

} // namespace lqgame
