#include "lqgame/ode.hpp"

#include <doctest.h>

#include <cmath>

using namespace lqgame;

TEST_SUITE_BEGIN("ode");

TEST_CASE("zero rhs keeps the terminal value") {
    const Matrix G{{1.0, 0.5}, {0.5, -2.0}};
    const TimeGrid grid(2.0, 20);
    const auto path = integrate_matrix_ode(
        [](double, const Matrix& m) { return Matrix::zeros(m.rows(), m.cols()); }, G, grid,
        Direction::backward);
    for (int k = 0; k <= grid.steps; ++k) CHECK((path.at_node(k) - G).norm_inf() == 0.0);
}

TEST_CASE("backward scalar riccati reproduces tanh") {
    // P' = P^2 - 1 backward from P(4) = 0 has P(t) = tanh(4 - t)
    const TimeGrid grid(4.0, 4000);
    const auto path = integrate_matrix_ode(
        [](double, const Matrix& p) {
            Matrix d(1, 1);
            d(0, 0) = p(0, 0) * p(0, 0) - 1.0;
            return d;
        },
        Matrix{{0.0}}, grid, Direction::backward);
    CHECK(std::abs(path.at_node(0)(0, 0) - std::tanh(4.0)) <= 1e-8);

    SUBCASE("dense output is 4th order between nodes") {
        for (double t : {0.3141, 1.077, 2.5, 3.9991}) {
            const double exact = std::tanh(4.0 - t);
            CHECK(std::abs(path.eval(t)(0, 0) - exact) <= 1e-11);
        }
    }
}

TEST_CASE("forward exponential growth") {
    const TimeGrid grid(1.0, 1000);
    const auto path = integrate_matrix_ode(
        [](double, const Matrix& m) { return m; }, Matrix{{1.0}}, grid, Direction::forward);
    CHECK(std::abs(path.at_node(grid.steps)(0, 0) - std::exp(1.0)) <= 1e-10);
}

TEST_CASE("rk4 convergence order on the tanh problem") {
    auto terminal_error = [](int N) {
        const TimeGrid grid(4.0, N);
        const auto path = integrate_matrix_ode(
            [](double, const Matrix& p) {
                Matrix d(1, 1);
                d(0, 0) = p(0, 0) * p(0, 0) - 1.0;
                return d;
            },
            Matrix{{0.0}}, grid, Direction::backward);
        return std::abs(path.at_node(0)(0, 0) - std::tanh(4.0));
    };
    const double e1 = terminal_error(100);
    const double e2 = terminal_error(200);
    CHECK(e1 / e2 >= 8.0); // order >= 3 observed; 4 expected
}

TEST_CASE("symmetrization hook keeps paths symmetric") {
    const Matrix A{{0.0, 1.0}, {-0.3, 0.1}}; // asymmetric drift
    const TimeGrid grid(1.0, 200);
    const auto path = integrate_matrix_ode(
        [&](double, const Matrix& p) { return A * p + p * A.transpose() + Matrix::identity(2); },
        Matrix::identity(2), grid, Direction::backward,
        [](const Matrix& m) { return symmetrize(m); });
    for (int k = 0; k <= grid.steps; ++k) {
        const Matrix& m = path.at_node(k);
        CHECK(m.asymmetry() <= 1e-12 * (1.0 + m.norm_inf()));
    }
}

TEST_CASE("blow-up reports the failing time") {
    // m' = m^2 from m(0) = 1 blows up at t = 1
    const TimeGrid grid(2.0, 2000);
    try {
        integrate_matrix_ode(
            [](double, const Matrix& m) {
                Matrix d(1, 1);
                d(0, 0) = m(0, 0) * m(0, 0);
                return d;
            },
            Matrix{{1.0}}, grid, Direction::forward);
        FAIL("expected blow-up");
    } catch (const SolveError& e) {
        CHECK(e.kind == SolveError::Kind::blow_up);
        CHECK(e.time >= 0.9);
        CHECK(e.time <= 1.3);
    }
}

TEST_CASE("trapezoid quadrature") {
    const TimeGrid g1(4.0, 16);
    std::vector<double> ones(static_cast<std::size_t>(g1.nodes()), 1.0);
    CHECK(quadrature(ones, g1) == doctest::Approx(4.0).epsilon(1e-15));

    for (int N : {7, 10, 333}) {
        const TimeGrid g2(1.0, N);
        std::vector<double> lin(static_cast<std::size_t>(g2.nodes()));
        for (int k = 0; k <= N; ++k) lin[static_cast<std::size_t>(k)] = g2.node(k);
        CHECK(quadrature(lin, g2) == doctest::Approx(0.5).epsilon(1e-14));
    }

    const TimeGrid g3(1.0, 1000);
    std::vector<double> sq(static_cast<std::size_t>(g3.nodes()));
    for (int k = 0; k <= 1000; ++k) sq[static_cast<std::size_t>(k)] = g3.node(k) * g3.node(k);
    CHECK(std::abs(quadrature(sq, g3) - 1.0 / 3.0) <= 1e-6);
}

TEST_CASE("simpson is exact on cubics") {
    const TimeGrid g(1.0, 100);
    std::vector<double> cub(static_cast<std::size_t>(g.nodes()));
    for (int k = 0; k <= g.steps; ++k) {
        const double t = g.node(k);
        cub[static_cast<std::size_t>(k)] = t * t * t - 2.0 * t * t + 0.5;
    }
    CHECK(simpson(cub, g) == doctest::Approx(0.25 - 2.0 / 3.0 + 0.5).epsilon(1e-14));
}

TEST_CASE("grid construction guards") {
    CHECK_THROWS_AS(TimeGrid(0.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid(1.0, 0), std::invalid_argument);
    const TimeGrid g(2.0, 4);
    CHECK(g.node(0) == 0.0);
    CHECK(g.node(4) == 2.0);
    CHECK(g.h() == doctest::Approx(0.5));
}

TEST_SUITE_END();
