#include "lqgame/grid.hpp"

#include <algorithm>
#include <cmath>

namespace lqgame {

MatrixPath MatrixPath::constant(TimeGrid grid, const Matrix& value) {
    std::vector<Matrix> s(static_cast<std::size_t>(grid.nodes()), value);
    return MatrixPath(grid, std::move(s));
}

Matrix MatrixPath::eval(double t) const {
    const double h = grid_.h();
    t = std::clamp(t, 0.0, grid_.t_end);
    int k = std::min(static_cast<int>(t / h), grid_.steps - 1);
    double s = (t - k * h) / h;
    // snap to nodes so node queries are exact
    if (s < 1e-12) return samples_[static_cast<std::size_t>(k)];
    if (s > 1.0 - 1e-12) return samples_[static_cast<std::size_t>(k) + 1];

    const Matrix& y0 = samples_[static_cast<std::size_t>(k)];
    const Matrix& y1 = samples_[static_cast<std::size_t>(k) + 1];
    if (!has_derivs())
        return (1.0 - s) * y0 + s * y1;

    const Matrix& d0 = derivs_[static_cast<std::size_t>(k)];
    const Matrix& d1 = derivs_[static_cast<std::size_t>(k) + 1];
    const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    const double h10 = s * (1.0 - s) * (1.0 - s);
    const double h01 = s * s * (3.0 - 2.0 * s);
    const double h11 = s * s * (s - 1.0);
    return h00 * y0 + (h10 * h) * d0 + h01 * y1 + (h11 * h) * d1;
}

double MatrixPath::max_asymmetry() const {
    double m = 0.0;
    for (const auto& s : samples_) m = std::max(m, s.asymmetry());
    return m;
}

double MatrixPath::norm_inf() const {
    double m = 0.0;
    for (const auto& s : samples_) m = std::max(m, s.norm_inf());
    return m;
}

} // namespace lqgame
