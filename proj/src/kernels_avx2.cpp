#if defined(__x86_64__)

#include "lqgame/kernels.hpp"

#include <immintrin.h>

// Four paths per register. Per-lane operation order matches the scalar
// kernel exactly (sequential adds, no FMA), so lanes are bit-identical to
// the scalar reference; the remainder group falls back to the scalar kernel.

namespace lqgame::kernels {

void euler_step_avx2(const StepCoeffs& c, double h, int M, int path_begin, int path_end,
                     const double* x_in, const double* dw, const LawSlice& law1,
                     const LawSlice& law2, double* x_out, double* u1_out, double* u2_out) {
    const int n = c.n, m1 = c.m1, m2 = c.m2;
    const __m256d hv = _mm256_set1_pd(h);
    __m256d x[max_dim], u1[max_dim], u2[max_dim];

    int j = path_begin;
    for (; j + 4 <= path_end; j += 4) {
        for (int d = 0; d < n; ++d)
            x[d] = _mm256_loadu_pd(x_in + static_cast<std::size_t>(d) * M + j);

        for (int i = 0; i < m1; ++i) {
            __m256d u = law1.add ? _mm256_set1_pd(law1.add[i]) : _mm256_setzero_pd();
            if (law1.gain) {
                for (int d = 0; d < n; ++d)
                    u = _mm256_add_pd(u, _mm256_mul_pd(_mm256_set1_pd(law1.gain[i * n + d]), x[d]));
            } else if (law1.preset) {
                u = _mm256_add_pd(u, _mm256_loadu_pd(law1.preset + static_cast<std::size_t>(i) * M + j));
            }
            u1[i] = u;
            if (u1_out) _mm256_storeu_pd(u1_out + static_cast<std::size_t>(i) * M + j, u);
        }
        for (int i = 0; i < m2; ++i) {
            __m256d u = law2.add ? _mm256_set1_pd(law2.add[i]) : _mm256_setzero_pd();
            if (law2.gain) {
                for (int d = 0; d < n; ++d)
                    u = _mm256_add_pd(u, _mm256_mul_pd(_mm256_set1_pd(law2.gain[i * n + d]), x[d]));
            } else if (law2.preset) {
                u = _mm256_add_pd(u, _mm256_loadu_pd(law2.preset + static_cast<std::size_t>(i) * M + j));
            }
            u2[i] = u;
            if (u2_out) _mm256_storeu_pd(u2_out + static_cast<std::size_t>(i) * M + j, u);
        }

        const __m256d w = _mm256_loadu_pd(dw + j);
        for (int d = 0; d < n; ++d) {
            __m256d drift = _mm256_setzero_pd();
            __m256d diff = _mm256_setzero_pd();
            for (int k = 0; k < n; ++k)
                drift = _mm256_add_pd(drift, _mm256_mul_pd(_mm256_set1_pd(c.A[d * n + k]), x[k]));
            for (int k = 0; k < m1; ++k)
                drift = _mm256_add_pd(drift, _mm256_mul_pd(_mm256_set1_pd(c.B1[d * m1 + k]), u1[k]));
            for (int k = 0; k < m2; ++k)
                drift = _mm256_add_pd(drift, _mm256_mul_pd(_mm256_set1_pd(c.B2[d * m2 + k]), u2[k]));
            for (int k = 0; k < n; ++k)
                diff = _mm256_add_pd(diff, _mm256_mul_pd(_mm256_set1_pd(c.C[d * n + k]), x[k]));
            for (int k = 0; k < m1; ++k)
                diff = _mm256_add_pd(diff, _mm256_mul_pd(_mm256_set1_pd(c.D1[d * m1 + k]), u1[k]));
            for (int k = 0; k < m2; ++k)
                diff = _mm256_add_pd(diff, _mm256_mul_pd(_mm256_set1_pd(c.D2[d * m2 + k]), u2[k]));
            const __m256d out =
                _mm256_add_pd(_mm256_add_pd(x[d], _mm256_mul_pd(hv, drift)),
                              _mm256_mul_pd(w, diff));
            _mm256_storeu_pd(x_out + static_cast<std::size_t>(d) * M + j, out);
        }
    }
    if (j < path_end)
        euler_step_scalar(c, h, M, j, path_end, x_in, dw, law1, law2, x_out, u1_out, u2_out);
}

void quad_accum_avx2(int dim, const double* W, double w, int M, int path_begin,
                     int path_end, const double* x_lanes, double* acc) {
    const __m256d wv = _mm256_set1_pd(w);
    int j = path_begin;
    for (; j + 4 <= path_end; j += 4) {
        __m256d q = _mm256_setzero_pd();
        for (int a = 0; a < dim; ++a) {
            __m256d row = _mm256_setzero_pd();
            for (int b = 0; b < dim; ++b) {
                const __m256d xb =
                    _mm256_loadu_pd(x_lanes + static_cast<std::size_t>(b) * M + j);
                row = _mm256_add_pd(row, _mm256_mul_pd(_mm256_set1_pd(W[a * dim + b]), xb));
            }
            const __m256d xa = _mm256_loadu_pd(x_lanes + static_cast<std::size_t>(a) * M + j);
            q = _mm256_add_pd(q, _mm256_mul_pd(xa, row));
        }
        const __m256d prev = _mm256_loadu_pd(acc + j);
        _mm256_storeu_pd(acc + j, _mm256_add_pd(prev, _mm256_mul_pd(wv, q)));
    }
    if (j < path_end)
        quad_accum_scalar(dim, W, w, M, j, path_end, x_lanes, acc);
}

} // namespace lqgame::kernels

#endif // __x86_64__
