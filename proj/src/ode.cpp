#include "lqgame/ode.hpp"

namespace lqgame {

namespace {

Matrix checked(const Matrix& m, double t) {
    if (!m.all_finite())
        throw SolveError(SolveError::Kind::blow_up, t, "non-finite value");
    return m;
}

} // namespace

MatrixPath integrate_matrix_ode(const OdeRhs& rhs, const Matrix& boundary_value,
                                const TimeGrid& grid, Direction direction,
                                const PostStep& post_step) {
    const int N = grid.steps;
    const double h = grid.h();
    std::vector<Matrix> samples(static_cast<std::size_t>(N) + 1);
    std::vector<Matrix> derivs(static_cast<std::size_t>(N) + 1);

    Matrix y = boundary_value;
    if (direction == Direction::backward) {
        samples[static_cast<std::size_t>(N)] = y;
        for (int k = N; k > 0; --k) {
            const double t = grid.node(k);
            const Matrix k1 = checked(rhs(t, y), t);
            derivs[static_cast<std::size_t>(k)] = k1;
            const Matrix k2 = checked(rhs(t - 0.5 * h, y - (0.5 * h) * k1), t - 0.5 * h);
            const Matrix k3 = checked(rhs(t - 0.5 * h, y - (0.5 * h) * k2), t - 0.5 * h);
            const Matrix k4 = checked(rhs(t - h, y - h * k3), t - h);
            y -= (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (post_step) y = post_step(y);
            checked(y, t - h);
            samples[static_cast<std::size_t>(k) - 1] = y;
        }
        derivs[0] = checked(rhs(0.0, y), 0.0);
    } else {
        samples[0] = y;
        for (int k = 0; k < N; ++k) {
            const double t = grid.node(k);
            const Matrix k1 = checked(rhs(t, y), t);
            derivs[static_cast<std::size_t>(k)] = k1;
            const Matrix k2 = checked(rhs(t + 0.5 * h, y + (0.5 * h) * k1), t + 0.5 * h);
            const Matrix k3 = checked(rhs(t + 0.5 * h, y + (0.5 * h) * k2), t + 0.5 * h);
            const Matrix k4 = checked(rhs(t + h, y + h * k3), t + h);
            y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (post_step) y = post_step(y);
            checked(y, t + h);
            samples[static_cast<std::size_t>(k) + 1] = y;
        }
        derivs[static_cast<std::size_t>(N)] = checked(rhs(grid.t_end, y), grid.t_end);
    }
    return MatrixPath(grid, std::move(samples), std::move(derivs));
}

double quadrature(const std::vector<double>& samples, const TimeGrid& grid) {
    if (samples.size() != static_cast<std::size_t>(grid.nodes()))
        throw std::invalid_argument("quadrature: sample count != grid nodes");
    const double h = grid.h();
    double s = 0.5 * (samples.front() + samples.back());
    for (std::size_t k = 1; k + 1 < samples.size(); ++k) s += samples[k];
    return s * h;
}

double simpson(const std::vector<double>& samples, const TimeGrid& grid) {
    if (samples.size() != static_cast<std::size_t>(grid.nodes()))
        throw std::invalid_argument("simpson: sample count != grid nodes");
    const double h = grid.h();
    const int N = grid.steps;
    double s = 0.0;
    int k = 0;
    for (; k + 2 <= N; k += 2)
        s += (h / 3.0) * (samples[static_cast<std::size_t>(k)]
                          + 4.0 * samples[static_cast<std::size_t>(k) + 1]
                          + samples[static_cast<std::size_t>(k) + 2]);
    if (k < N)
        s += (h / 2.0) * (samples[static_cast<std::size_t>(k)]
                          + samples[static_cast<std::size_t>(k) + 1]);
    return s;
}

} // namespace lqgame
