#pragma once

#include <cstddef>
#include <string>

namespace lqgame::kernels {

// Data-parallel inner loops of the Monte Carlo subsystem. State and controls
// are stored lane-major: lane i holds the value of component i for all paths
// contiguously, so paths map onto SIMD lanes. The scalar kernels are the
// reference; the AVX2 variants must produce bit-identical lanes (same
// per-path operation order, no FMA contraction) and are equivalence-tested.
//
// Dimension cap for the vector variants; larger problems fall back to scalar.
inline constexpr int max_dim = 16;

struct StepCoeffs {
    int n = 0, m1 = 0, m2 = 0;
    // row-major coefficient blocks at the step's left endpoint
    const double* A = nullptr;  // n x n
    const double* B1 = nullptr; // n x m1
    const double* B2 = nullptr; // n x m2
    const double* C = nullptr;  // n x n
    const double* D1 = nullptr; // n x m1
    const double* D2 = nullptr; // n x m2
};

// Per-step control source: u_j = K X_j + add, or preset lanes + add.
struct LawSlice {
    const double* gain = nullptr;   // m x n row-major, or nullptr
    const double* preset = nullptr; // m lanes of M (frozen/deterministic), or nullptr
    const double* add = nullptr;    // m broadcast additive offset, or nullptr
};

// One Euler-Maruyama step for paths [path_begin, path_end):
//   u_i     = law_i(X_k)
//   X_{k+1} = X_k + h (A X_k + B1 u1 + B2 u2) + dW (C X_k + D1 u1 + D2 u2)
// x_in/x_out are n lanes of M doubles; u1_out/u2_out are m lanes (may be
// null when the caller does not record controls).
using EulerStepFn = void (*)(const StepCoeffs& c, double h, int M, int path_begin,
                             int path_end, const double* x_in, const double* dw,
                             const LawSlice& law1, const LawSlice& law2, double* x_out,
                             double* u1_out, double* u2_out);

// acc_j += w * x_j' W x_j over the given path range (W is dim x dim).
using QuadAccumFn = void (*)(int dim, const double* W, double w, int M, int path_begin,
                             int path_end, const double* x_lanes, double* acc);

void euler_step_scalar(const StepCoeffs& c, double h, int M, int path_begin, int path_end,
                       const double* x_in, const double* dw, const LawSlice& law1,
                       const LawSlice& law2, double* x_out, double* u1_out, double* u2_out);
void quad_accum_scalar(int dim, const double* W, double w, int M, int path_begin,
                       int path_end, const double* x_lanes, double* acc);

#if defined(__x86_64__)
void euler_step_avx2(const StepCoeffs& c, double h, int M, int path_begin, int path_end,
                     const double* x_in, const double* dw, const LawSlice& law1,
                     const LawSlice& law2, double* x_out, double* u1_out, double* u2_out);
void quad_accum_avx2(int dim, const double* W, double w, int M, int path_begin,
                     int path_end, const double* x_lanes, double* acc);
#endif

enum class Backend { scalar, avx2 };

// Runtime selection: LQGAME_KERNELS=scalar|avx2 overrides CPU detection.
Backend active_backend();
std::string backend_name(Backend b);

EulerStepFn select_euler_step(const StepCoeffs& c);
QuadAccumFn select_quad_accum(int dim);

} // namespace lqgame::kernels
