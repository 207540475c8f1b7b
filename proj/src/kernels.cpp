#include "lqgame/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace lqgame::kernels {

namespace {

Backend detect_backend() {
    if (const char* env = std::getenv("LQGAME_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
        if (std::strcmp(env, "avx2") == 0) return Backend::avx2;
    }
#if defined(__x86_64__)
    if (__builtin_cpu_supports("avx2")) return Backend::avx2;
#endif
    return Backend::scalar;
}

} // namespace

Backend active_backend() {
    static const Backend b = detect_backend();
    return b;
}

std::string backend_name(Backend b) {
    return b == Backend::avx2 ? "avx2" : "scalar";
}

EulerStepFn select_euler_step(const StepCoeffs& c) {
#if defined(__x86_64__)
    if (active_backend() == Backend::avx2 && c.n <= max_dim && c.m1 <= max_dim
        && c.m2 <= max_dim)
        return &euler_step_avx2;
#endif
    (void)c;
    return &euler_step_scalar;
}

QuadAccumFn select_quad_accum(int dim) {
#if defined(__x86_64__)
    if (active_backend() == Backend::avx2 && dim <= max_dim) return &quad_accum_avx2;
#endif
    (void)dim;
    return &quad_accum_scalar;
}

} // namespace lqgame::kernels
