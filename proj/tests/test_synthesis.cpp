#include "lqgame/synthesis.hpp"
#include "lqgame/spec.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdint>

using namespace lqgame;

namespace {

struct Solved {
    RegularRiccatiSolution p1, sigma, nash;
    LeaderData ld;
};

Solved solve_all(const GameSpec& spec, int N) {
    Solved s;
    const TimeGrid grid = spec.make_grid(N);
    s.p1 = solve_follower(spec, grid);
    s.ld = leader_data(spec, s.p1.P);
    s.sigma = solve_leader_sigma(s.ld, grid);
    s.nash = solve_nash(spec, grid);
    return s;
}

double ex2_p(double t) { return std::sqrt(2.0) * std::tanh((4.0 - t) / std::sqrt(2.0)); }

struct Lcg {
    std::uint64_t s;
    explicit Lcg(std::uint64_t seed) : s(seed) {}
    double next() {
        s = s * 6364136223846793005ull + 1442695040888963407ull;
        return static_cast<double>(s >> 11) / 9007199254740992.0 * 2.0 - 1.0;
    }
    Matrix matrix(std::size_t r, std::size_t c, double scale = 1.0) {
        Matrix m(r, c);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) m(i, j) = scale * next();
        return m;
    }
};

} // namespace

TEST_SUITE_BEGIN("synthesis");

TEST_CASE("EX2 follower gain equals -P1") {
    const GameSpec spec = gallery("EX2");
    const Solved s = solve_all(spec, 4000);
    const MatrixPath theta = follower_gain(spec, s.p1.P);
    CHECK(std::abs(theta.at_node(0)(0, 0) + std::tanh(4.0)) <= 1e-7);
    for (double t : {1.0, 2.5})
        CHECK(std::abs(theta.eval(t)(0, 0) + std::tanh(4.0 - t)) <= 1e-7);
    CHECK(theta.at_node(4000)(0, 0) == 0.0); // G = 0 makes Theta(T) = 0
}

TEST_CASE("EX1 gains all vanish") {
    const GameSpec spec = gallery("EX1");
    const Solved s = solve_all(spec, 400);
    CHECK(follower_gain(spec, s.p1.P).norm_inf() == 0.0);
    const GainPair hat = stackelberg_gains(spec, s.p1.P, s.sigma.P, s.ld);
    CHECK(hat.theta1.norm_inf() == 0.0);
    CHECK(hat.theta2.norm_inf() == 0.0);
    const GainPair star = nash_gains(spec, s.nash.P);
    CHECK(star.theta1.norm_inf() == 0.0);
    CHECK(star.theta2.norm_inf() == 0.0);
    CHECK(gain_identity(hat, star).sup_residual == 0.0);
}

TEST_CASE("EX2 closed-loop gains match the scalar reductions") {
    const GameSpec spec = gallery("EX2");
    const Solved s = solve_all(spec, 4000);
    const GainPair hat = stackelberg_gains(spec, s.p1.P, s.sigma.P, s.ld);
    // Theta1 = Sigma - P1 = -P and Theta2 = -(P1 - Sigma)/2 = -P/2
    CHECK(std::abs(hat.theta1.at_node(0)(0, 0) + ex2_p(0.0)) <= 1e-5);
    CHECK(std::abs(hat.theta2.at_node(0)(0, 0) + 0.5 * ex2_p(0.0)) <= 1e-5);
    for (int k = 0; k <= 4000; k += 500) {
        const double expected = s.sigma.P.at_node(k)(0, 0) - s.p1.P.at_node(k)(0, 0);
        CHECK(hat.theta1.at_node(k)(0, 0) == doctest::Approx(expected).epsilon(1e-10));
    }

    const GainPair star = nash_gains(spec, s.nash.P);
    CHECK(std::abs(star.theta1.at_node(0)(0, 0) + ex2_p(0.0)) <= 1e-6);
    CHECK(std::abs(star.theta2.at_node(0)(0, 0) + 0.5 * ex2_p(0.0)) <= 1e-6);

    CHECK(gain_identity(hat, star).sup_residual <= 1e-6);
}

TEST_CASE("nash gain at the terminal node is the G-substitution") {
    const GameSpec spec = gallery("RAND2");
    const Solved s = solve_all(spec, 200);
    const GainPair star = nash_gains(spec, s.nash.P);
    const double T = spec.T;
    const Matrix B = hcat(spec.B1.eval(T), spec.B2.eval(T));
    const Matrix D = hcat(spec.D1.eval(T), spec.D2.eval(T));
    const Matrix R = block_diag(spec.R1.eval(T), spec.R2.eval(T));
    const Matrix expect = -(invert(R + D.transpose() * spec.G * D)
                            * (B.transpose() * spec.G + D.transpose() * spec.G * spec.C.eval(T)));
    CHECK((star.theta1.at_node(200) - slice_rows(expect, 0, 1)).norm_inf() <= 1e-12);
    CHECK((star.theta2.at_node(200) - slice_rows(expect, 1, 1)).norm_inf() <= 1e-12);
}

TEST_CASE("phi pair on the worked examples") {
    {
        const GameSpec spec = gallery("EX2");
        const Solved s = solve_all(spec, 1000);
        const PhiPair pp = phi_pair(spec, s.p1.P, s.sigma.P, s.ld);
        CHECK(pp.report.pass);
        CHECK(pp.report.sup_residual == 0.0); // D = 0 collapse is exact
        CHECK(pp.phi.at_node(0)(0, 0) == doctest::Approx(-2.0));
        CHECK(pp.phi_hat.at_node(500)(0, 0) == doctest::Approx(-0.5));
    }
    {
        const GameSpec spec = gallery("EX1");
        const Solved s = solve_all(spec, 200);
        const PhiPair pp = phi_pair(spec, s.p1.P, s.sigma.P, s.ld);
        CHECK(pp.phi.at_node(0)(0, 0) == doctest::Approx(-1.0));
        CHECK(pp.phi_hat.at_node(0)(0, 0) == doctest::Approx(-1.0));
    }
}

TEST_CASE("RAND2 phi inverse against direct inversion") {
    const GameSpec spec = gallery("RAND2");
    const Solved s = solve_all(spec, 500);
    const PhiPair pp = phi_pair(spec, s.p1.P, s.sigma.P, s.ld);
    CHECK(pp.report.pass);
    CHECK(pp.report.sup_residual <= 1e-8);
    for (int k = 0; k <= 500; k += 50)
        CHECK((pp.phi_hat.at_node(k) - invert(pp.phi.at_node(k))).norm_inf() <= 1e-8);
}

TEST_CASE("block inverse of the stacked gate") {
    const GameSpec ex2 = gallery("EX2");
    const Solved s2 = solve_all(ex2, 500);
    const BlockInverse bi = block_inverse_M(ex2, s2.p1.P, s2.sigma.P, s2.ld);
    CHECK(bi.report.pass);
    for (int k = 0; k <= 500; k += 100) {
        CHECK(bi.m11.at_node(k)(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(bi.m12.at_node(k).norm_inf() == 0.0);
        CHECK(bi.m22.at_node(k)(0, 0) == doctest::Approx(-0.5).epsilon(1e-12));
    }

    const GameSpec r2 = gallery("RAND2");
    const Solved sr = solve_all(r2, 500);
    const BlockInverse br = block_inverse_M(r2, sr.p1.P, sr.sigma.P, sr.ld);
    CHECK(br.report.sup_residual <= 1e-8);
    for (int k = 0; k <= 500; k += 50)
        CHECK((br.m12.at_node(k) - br.m21.at_node(k).transpose()).norm_inf() <= 1e-14);
}

TEST_CASE("gain identity on RAND2") {
    const GameSpec spec = gallery("RAND2");
    const Solved s = solve_all(spec, 2000);
    const GainPair hat = stackelberg_gains(spec, s.p1.P, s.sigma.P, s.ld);
    const GainPair star = nash_gains(spec, s.nash.P);
    const IdentityReport r = gain_identity(hat, star);
    CHECK(r.pass);
    CHECK(r.sup_residual <= 1e-6);
}

TEST_CASE("closed-loop coefficient identities") {
    for (const char* name : {"EX1", "EX2", "RAND2"}) {
        const GameSpec spec = gallery(name);
        const Solved s = solve_all(spec, 500);
        const GainPair hat = stackelberg_gains(spec, s.p1.P, s.sigma.P, s.ld);
        const auto [drift, diff] =
            closed_loop_coefficient_identity(spec, s.p1.P, s.sigma.P, s.ld, hat);
        CHECK(drift.pass);
        CHECK(diff.pass);
        CHECK(drift.sup_residual <= 1e-7 * 10.0);
        CHECK(diff.sup_residual <= 1e-7 * 10.0);
    }
}

TEST_CASE("appendix identities vanish along solution paths") {
    {
        const GameSpec spec = gallery("EX1");
        const Solved s = solve_all(spec, 200);
        for (const auto& r : appendix_identity_suite(spec, s.p1.P, s.sigma.P, s.ld)) {
            CHECK(r.pass);
            CHECK(r.sup_residual == 0.0); // every building block is zero
        }
    }
    for (const char* name : {"EX2", "RAND2"}) {
        const GameSpec spec = gallery(name);
        const Solved s = solve_all(spec, 1000);
        for (const auto& r : appendix_identity_suite(spec, s.p1.P, s.sigma.P, s.ld)) {
            INFO(r.name);
            CHECK(r.pass);
            CHECK(r.sup_residual <= 1e-7);
        }
    }
}

TEST_CASE("identity suite holds with time-varying coefficients") {
    // sampled-kind coefficients exercise the dense evaluation path end to end
    GameSpec spec = gallery("RAND2");
    spec.A = Coefficient::sampled(
        {0.0, 0.5, 1.0},
        {Matrix{{0.2, 0.1}, {-0.1, 0.1}}, Matrix{{0.0, 0.3}, {-0.2, 0.2}},
         Matrix{{0.1, 0.0}, {0.0, -0.1}}},
        Coefficient::Interp::linear);
    spec.Q = Coefficient::sampled(
        {0.0, 1.0}, {Matrix{{1.0, 0.2}, {0.2, 0.8}}, Matrix{{1.4, 0.0}, {0.0, 1.0}}},
        Coefficient::Interp::linear);
    REQUIRE(validate(spec).empty());

    const Solved s = solve_all(spec, 1000);
    CHECK(phi_pair(spec, s.p1.P, s.sigma.P, s.ld).report.sup_residual <= 1e-8);
    CHECK(block_inverse_M(spec, s.p1.P, s.sigma.P, s.ld).report.sup_residual <= 1e-8);
    const GainPair hat = stackelberg_gains(spec, s.p1.P, s.sigma.P, s.ld);
    const GainPair star = nash_gains(spec, s.nash.P);
    CHECK(gain_identity(hat, star).sup_residual <= 1e-6);
    for (const auto& r : appendix_identity_suite(spec, s.p1.P, s.sigma.P, s.ld)) {
        INFO(r.name);
        CHECK(r.sup_residual <= 1e-7);
    }
    double sup = 0.0;
    for (int k = 0; k <= 1000; ++k)
        sup = std::max(sup, (s.nash.P.at_node(k)
                             - (s.p1.P.at_node(k) - s.sigma.P.at_node(k))).norm_inf());
    CHECK(sup <= 1e-5 * (1.0 + s.nash.P.norm_inf()));
}

TEST_CASE("identities are nodewise algebra: random data property") {
    // The appendix identities hold for arbitrary symmetric P1 and Sigma <= 0
    // with well-conditioned gates, independent of any ODE. Fabricated
    // constant paths exercise exactly that.
    Lcg rng(2024);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 1 + static_cast<int>(std::abs(rng.next()) * 2.999);
        GameSpec spec;
        spec.n = n;
        spec.m1 = 1 + static_cast<int>(std::abs(rng.next()) * 1.999);
        spec.m2 = 1 + static_cast<int>(std::abs(rng.next()) * 1.999);
        spec.T = 1.0;
        const auto un = static_cast<std::size_t>(n);
        const auto um1 = static_cast<std::size_t>(spec.m1);
        const auto um2 = static_cast<std::size_t>(spec.m2);
        spec.A = Coefficient::constant(rng.matrix(un, un, 0.5));
        spec.C = Coefficient::constant(rng.matrix(un, un, 0.5));
        spec.B1 = Coefficient::constant(rng.matrix(un, um1));
        spec.B2 = Coefficient::constant(rng.matrix(un, um2));
        spec.D1 = Coefficient::constant(rng.matrix(un, um1, 0.5));
        spec.D2 = Coefficient::constant(rng.matrix(un, um2, 0.5));
        spec.Q = Coefficient::constant(symmetrize(rng.matrix(un, un)));
        spec.R1 = Coefficient::constant(
            Matrix::identity(um1) + 0.1 * symmetrize(rng.matrix(um1, um1)));
        spec.R2 = Coefficient::constant(
            -2.0 * Matrix::identity(um2) + 0.1 * symmetrize(rng.matrix(um2, um2)));
        spec.G = Matrix::zeros(un, un);

        const Matrix P1 = symmetrize(rng.matrix(un, un, 0.3)) + 0.5 * Matrix::identity(un);
        const Matrix S = rng.matrix(un, un, 0.2);
        const Matrix Sigma = -(S * S.transpose()) - 0.05 * Matrix::identity(un);

        const TimeGrid grid(1.0, 1);
        const MatrixPath p1 = MatrixPath::constant(grid, P1);
        const MatrixPath sg = MatrixPath::constant(grid, Sigma);
        const LeaderData ld = leader_data(spec, p1);

        for (const auto& r : appendix_identity_suite(spec, p1, sg, ld)) {
            INFO(r.name << " trial " << trial);
            CHECK(r.sup_residual <= 1e-9 * (1.0 + P1.norm_inf() + Sigma.norm_inf()) * 100.0);
        }
        CHECK(phi_pair(spec, p1, sg, ld).report.sup_residual <= 1e-10);
        CHECK(block_inverse_M(spec, p1, sg, ld).report.sup_residual <= 1e-10);

        // the gain identity is algebraic too, via P = P1 - Sigma
        const GainPair hat = stackelberg_gains(spec, p1, sg, ld);
        const GainPair star = nash_gains(spec, MatrixPath::constant(grid, P1 - Sigma));
        CHECK(gain_identity(hat, star).sup_residual <= 1e-10);
        const auto cl = closed_loop_coefficient_identity(spec, p1, sg, ld, hat);
        CHECK(cl.first.sup_residual <= 1e-10);
        CHECK(cl.second.sup_residual <= 1e-10);
    }
}

TEST_SUITE_END();
