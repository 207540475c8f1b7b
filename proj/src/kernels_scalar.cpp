#include "lqgame/kernels.hpp"

namespace lqgame::kernels {

void euler_step_scalar(const StepCoeffs& c, double h, int M, int path_begin, int path_end,
                       const double* x_in, const double* dw, const LawSlice& law1,
                       const LawSlice& law2, double* x_out, double* u1_out, double* u2_out) {
    const int n = c.n, m1 = c.m1, m2 = c.m2;
    double u1[max_dim], u2[max_dim], x[max_dim];
    for (int j = path_begin; j < path_end; ++j) {
        for (int d = 0; d < n; ++d) x[d] = x_in[static_cast<std::size_t>(d) * M + j];

        for (int i = 0; i < m1; ++i) {
            double u = law1.add ? law1.add[i] : 0.0;
            if (law1.gain) {
                for (int d = 0; d < n; ++d) u += law1.gain[i * n + d] * x[d];
            } else if (law1.preset) {
                u += law1.preset[static_cast<std::size_t>(i) * M + j];
            }
            u1[i] = u;
            if (u1_out) u1_out[static_cast<std::size_t>(i) * M + j] = u;
        }
        for (int i = 0; i < m2; ++i) {
            double u = law2.add ? law2.add[i] : 0.0;
            if (law2.gain) {
                for (int d = 0; d < n; ++d) u += law2.gain[i * n + d] * x[d];
            } else if (law2.preset) {
                u += law2.preset[static_cast<std::size_t>(i) * M + j];
            }
            u2[i] = u;
            if (u2_out) u2_out[static_cast<std::size_t>(i) * M + j] = u;
        }

        const double w = dw[j];
        for (int d = 0; d < n; ++d) {
            double drift = 0.0, diff = 0.0;
            for (int k = 0; k < n; ++k) drift += c.A[d * n + k] * x[k];
            for (int k = 0; k < m1; ++k) drift += c.B1[d * m1 + k] * u1[k];
            for (int k = 0; k < m2; ++k) drift += c.B2[d * m2 + k] * u2[k];
            for (int k = 0; k < n; ++k) diff += c.C[d * n + k] * x[k];
            for (int k = 0; k < m1; ++k) diff += c.D1[d * m1 + k] * u1[k];
            for (int k = 0; k < m2; ++k) diff += c.D2[d * m2 + k] * u2[k];
            x_out[static_cast<std::size_t>(d) * M + j] = x[d] + h * drift + w * diff;
        }
    }
}

void quad_accum_scalar(int dim, const double* W, double w, int M, int path_begin,
                       int path_end, const double* x_lanes, double* acc) {
    for (int j = path_begin; j < path_end; ++j) {
        double q = 0.0;
        for (int a = 0; a < dim; ++a) {
            double row = 0.0;
            for (int b = 0; b < dim; ++b)
                row += W[a * dim + b] * x_lanes[static_cast<std::size_t>(b) * M + j];
            q += x_lanes[static_cast<std::size_t>(a) * M + j] * row;
        }
        acc[j] += w * q;
    }
}

} // namespace lqgame::kernels
