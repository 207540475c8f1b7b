#include "lqgame/simulate.hpp"

#include "lqgame/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <thread>

namespace lqgame {

namespace {

int worker_count(int paths) {
    if (paths < 4096) return 1;
    if (const char* env = std::getenv("LQGAME_THREADS")) {
        const int t = std::atoi(env);
        if (t >= 1) return t;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(hw ? std::min(hw, 4u) : 1u);
}

// Per-step control descriptors with stable storage for the kernel pointers.
struct PreparedLaw {
    int m = 0;
    std::vector<const double*> gain_ptrs; // per step, or empty
    const double* preset_base = nullptr;  // frozen lanes
    std::size_t preset_stride = 0;        // per-step stride in doubles
    std::vector<double> add;              // [steps][m], or empty

    kernels::LawSlice slice(int step) const {
        kernels::LawSlice s;
        if (!gain_ptrs.empty()) s.gain = gain_ptrs[static_cast<std::size_t>(step)];
        if (preset_base) s.preset = preset_base + preset_stride * static_cast<std::size_t>(step);
        if (!add.empty()) s.add = add.data() + static_cast<std::size_t>(step) * m;
        return s;
    }
};

PreparedLaw prepare_law(const ControlLaw& law, int m, const TimeGrid& grid, int paths) {
    PreparedLaw p;
    p.m = m;
    const int N = grid.steps;
    switch (law.kind()) {
        case ControlLaw::Kind::feedback: {
            if (static_cast<int>(law.gain().rows()) != m)
                throw std::invalid_argument("feedback gain has wrong control dimension");
            p.gain_ptrs.resize(static_cast<std::size_t>(N));
            for (int k = 0; k < N; ++k)
                p.gain_ptrs[static_cast<std::size_t>(k)] = law.gain().at_node(k).data();
            break;
        }
        case ControlLaw::Kind::deterministic: {
            p.add.resize(static_cast<std::size_t>(N) * m);
            for (int k = 0; k < N; ++k) {
                const Matrix u = law.det_path().eval(grid.node(k));
                for (int i = 0; i < m; ++i)
                    p.add[static_cast<std::size_t>(k) * m + i] = u(static_cast<std::size_t>(i), 0);
            }
            break;
        }
        case ControlLaw::Kind::frozen: {
            const auto& rec = law.record();
            if (!rec || !(rec->grid == grid) || rec->paths != paths || rec->m != m)
                throw std::invalid_argument("frozen law grid/path mismatch");
            p.preset_base = rec->lanes.data();
            p.preset_stride = static_cast<std::size_t>(m) * paths;
            break;
        }
        case ControlLaw::Kind::perturbed: {
            const auto& rec = law.record();
            p.add.resize(static_cast<std::size_t>(N) * m);
            if (rec) {
                if (!(rec->grid == grid) || rec->paths != paths || rec->m != m)
                    throw std::invalid_argument("frozen law grid/path mismatch");
                p.preset_base = rec->lanes.data();
                p.preset_stride = static_cast<std::size_t>(m) * paths;
                for (int k = 0; k < N; ++k) {
                    const Matrix d = law.delta().eval(grid.node(k));
                    for (int i = 0; i < m; ++i)
                        p.add[static_cast<std::size_t>(k) * m + i] =
                            law.eps() * d(static_cast<std::size_t>(i), 0);
                }
            } else {
                for (int k = 0; k < N; ++k) {
                    const Matrix u = law.det_path().eval(grid.node(k));
                    const Matrix d = law.delta().eval(grid.node(k));
                    for (int i = 0; i < m; ++i)
                        p.add[static_cast<std::size_t>(k) * m + i] =
                            u(static_cast<std::size_t>(i), 0)
                            + law.eps() * d(static_cast<std::size_t>(i), 0);
                }
            }
            break;
        }
    }
    return p;
}

struct StepMatrices {
    std::vector<Matrix> A, B1, B2, C, D1, D2;
};

StepMatrices eval_step_matrices(const GameSpec& spec, const TimeGrid& grid) {
    StepMatrices sm;
    const int N = grid.steps;
    sm.A.reserve(N); sm.B1.reserve(N); sm.B2.reserve(N);
    sm.C.reserve(N); sm.D1.reserve(N); sm.D2.reserve(N);
    for (int k = 0; k < N; ++k) {
        const double t = grid.node(k);
        sm.A.push_back(spec.A.eval(t));
        sm.B1.push_back(spec.B1.eval(t));
        sm.B2.push_back(spec.B2.eval(t));
        sm.C.push_back(spec.C.eval(t));
        sm.D1.push_back(spec.D1.eval(t));
        sm.D2.push_back(spec.D2.eval(t));
    }
    return sm;
}

void run_chunks(int paths, const std::function<void(int, int)>& body) {
    const int workers = worker_count(paths);
    if (workers <= 1) {
        body(0, paths);
        return;
    }
    std::vector<std::thread> pool;
    const int chunk = (paths + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const int a = w * chunk;
        const int b = std::min(paths, a + chunk);
        if (a >= b) break;
        pool.emplace_back(body, a, b);
    }
    for (auto& t : pool) t.join();
}

void check_finite(const TrajectoryBundle& b) {
    const int M = b.paths;
    for (int k = 0; k <= b.grid.steps; ++k) {
        const double* lane = b.x_lane(k);
        for (std::size_t i = 0; i < static_cast<std::size_t>(b.n) * M; ++i) {
            if (!std::isfinite(lane[i]))
                throw SolveError(SolveError::Kind::blow_up, b.grid.node(k),
                                 "non-finite state in simulation");
        }
    }
}

TrajectoryBundle run_euler(const GameSpec& spec, const PreparedLaw& l1,
                           const PreparedLaw& l2, const Matrix& x0,
                           const BrownianBatch& batch) {
    const TimeGrid& grid = batch.grid();
    const int N = grid.steps;
    const int M = batch.paths();
    const double h = grid.h();

    if (spec.n > kernels::max_dim || l1.m > kernels::max_dim || l2.m > kernels::max_dim)
        throw std::invalid_argument("dimensions exceed the kernel capacity");
    TrajectoryBundle b;
    b.grid = grid;
    b.paths = M;
    b.n = spec.n;
    b.m1 = l1.m;
    b.m2 = l2.m;
    b.seed = batch.seed();
    b.X.resize(static_cast<std::size_t>(N + 1) * spec.n * M);
    b.u1.resize(static_cast<std::size_t>(N) * l1.m * M);
    b.u2.resize(static_cast<std::size_t>(N) * l2.m * M);

    if (static_cast<int>(x0.rows()) != spec.n || x0.cols() != 1)
        throw std::invalid_argument("x0 has wrong dimension");
    for (int d = 0; d < spec.n; ++d) {
        double* lane = b.X.data() + static_cast<std::size_t>(d) * M;
        const double v = x0(static_cast<std::size_t>(d), 0);
        for (int j = 0; j < M; ++j) lane[j] = v;
    }

    const StepMatrices sm = eval_step_matrices(spec, grid);
    kernels::StepCoeffs c0;
    c0.n = spec.n; c0.m1 = l1.m; c0.m2 = l2.m;
    const kernels::EulerStepFn step_fn = kernels::select_euler_step(c0);

    run_chunks(M, [&](int a, int bnd) {
        for (int k = 0; k < N; ++k) {
            kernels::StepCoeffs c = c0;
            c.A = sm.A[static_cast<std::size_t>(k)].data();
            c.B1 = sm.B1[static_cast<std::size_t>(k)].data();
            c.B2 = sm.B2[static_cast<std::size_t>(k)].data();
            c.C = sm.C[static_cast<std::size_t>(k)].data();
            c.D1 = sm.D1[static_cast<std::size_t>(k)].data();
            c.D2 = sm.D2[static_cast<std::size_t>(k)].data();
            const double* x_in = b.X.data() + static_cast<std::size_t>(k) * spec.n * M;
            double* x_out = b.X.data() + static_cast<std::size_t>(k + 1) * spec.n * M;
            double* u1_out =
                b.u1.empty() ? nullptr : b.u1.data() + static_cast<std::size_t>(k) * l1.m * M;
            double* u2_out =
                b.u2.empty() ? nullptr : b.u2.data() + static_cast<std::size_t>(k) * l2.m * M;
            step_fn(c, h, M, a, bnd, x_in, batch.step_lane(k), l1.slice(k), l2.slice(k),
                    x_out, u1_out, u2_out);
        }
    });
    check_finite(b);
    return b;
}

std::shared_ptr<const ControlRecord> make_record(const TrajectoryBundle& b, int player) {
    auto rec = std::make_shared<ControlRecord>();
    rec->grid = b.grid;
    rec->paths = b.paths;
    rec->m = player == 1 ? b.m1 : b.m2;
    rec->seed = b.seed;
    rec->lanes = player == 1 ? b.u1 : b.u2;
    return rec;
}

} // namespace

ControlLaw ControlLaw::feedback(MatrixPath gain) {
    ControlLaw l;
    l.kind_ = Kind::feedback;
    l.path_ = std::move(gain);
    return l;
}

ControlLaw ControlLaw::deterministic(MatrixPath u) {
    ControlLaw l;
    l.kind_ = Kind::deterministic;
    l.path_ = std::move(u);
    return l;
}

ControlLaw ControlLaw::frozen(std::shared_ptr<const ControlRecord> record) {
    ControlLaw l;
    l.kind_ = Kind::frozen;
    l.record_ = std::move(record);
    return l;
}

ControlLaw ControlLaw::perturbed(ControlLaw base, MatrixPath delta, double eps) {
    if (base.kind_ == Kind::feedback || base.kind_ == Kind::perturbed)
        throw std::invalid_argument("perturbed law needs a frozen or deterministic base");
    ControlLaw l = std::move(base);
    l.kind_ = Kind::perturbed;
    l.delta_ = std::move(delta);
    l.eps_ = eps;
    return l;
}

int ControlLaw::control_dim() const {
    switch (kind_) {
        case Kind::feedback: return static_cast<int>(path_.rows());
        case Kind::deterministic: return static_cast<int>(path_.rows());
        case Kind::frozen: return record_ ? record_->m : 0;
        case Kind::perturbed: return record_ ? record_->m : static_cast<int>(path_.rows());
    }
    return 0;
}

std::shared_ptr<const ControlRecord> TrajectoryBundle::record_u1() const {
    return make_record(*this, 1);
}

std::shared_ptr<const ControlRecord> TrajectoryBundle::record_u2() const {
    return make_record(*this, 2);
}

TrajectoryBundle simulate(const GameSpec& spec, const ControlLaw& law1,
                          const ControlLaw& law2, const Matrix& x0,
                          const BrownianBatch& batch) {
    const PreparedLaw l1 = prepare_law(law1, spec.m1, batch.grid(), batch.paths());
    const PreparedLaw l2 = prepare_law(law2, spec.m2, batch.grid(), batch.paths());
    return run_euler(spec, l1, l2, x0, batch);
}

TrajectoryBundle record_equilibrium(const GameSpec& spec, const GainPair& gains,
                                    const Matrix& x0, const BrownianBatch& batch) {
    if (!(gains.theta1.grid() == batch.grid()))
        throw std::invalid_argument("gains not on the batch grid");
    return simulate(spec, ControlLaw::feedback(gains.theta1),
                    ControlLaw::feedback(gains.theta2), x0, batch);
}

TrajectoryBundle deviation_run(const GameSpec& spec, const TrajectoryBundle& recorded,
                               int player, const MatrixPath& delta_dir, double eps,
                               const BrownianBatch& batch) {
    if (player != 1 && player != 2)
        throw std::invalid_argument("player must be 1 or 2");
    if (batch.seed() != recorded.seed || !(batch.grid() == recorded.grid)
        || batch.paths() != recorded.paths)
        throw std::invalid_argument(
            "deviation_run: batch differs from the recording (breaks common random numbers)");
    const auto base1 = ControlLaw::frozen(recorded.record_u1());
    const auto base2 = ControlLaw::frozen(recorded.record_u2());
    const ControlLaw law1 =
        player == 1 ? ControlLaw::perturbed(base1, delta_dir, eps) : base1;
    const ControlLaw law2 =
        player == 2 ? ControlLaw::perturbed(base2, delta_dir, eps) : base2;
    Matrix x0(static_cast<std::size_t>(recorded.n), 1);
    for (int d = 0; d < recorded.n; ++d) x0(static_cast<std::size_t>(d), 0) = recorded.x(0, 0, d);
    return simulate(spec, law1, law2, x0, batch);
}

TrajectoryBundle simulate_adjoint(const GameSpec& spec, const MatrixPath& P1,
                                  const MatrixPath& Sigma, const LeaderData& ld,
                                  const Matrix& x0, const BrownianBatch& batch) {
    const TimeGrid& grid = batch.grid();
    const int N = grid.steps;
    const int M = batch.paths();
    const double h = grid.h();
    const int n = spec.n;

    TrajectoryBundle b;
    b.grid = grid;
    b.paths = M;
    b.n = n;
    b.m1 = 0;
    b.m2 = 0;
    b.seed = batch.seed();
    b.X.resize(static_cast<std::size_t>(N + 1) * n * M);
    for (int d = 0; d < n; ++d) {
        double* lane = b.X.data() + static_cast<std::size_t>(d) * M;
        const double v = x0(static_cast<std::size_t>(d), 0);
        for (int j = 0; j < M; ++j) lane[j] = v;
    }

    // adjoint SDE coefficients at left endpoints
    std::vector<Matrix> F(static_cast<std::size_t>(N)), Gm(static_cast<std::size_t>(N));
    for (int k = 0; k < N; ++k) {
        const double t = grid.node(k);
        auto [drift, diff] =
            leader_adjoint_coefficients(spec, P1.at_node(k), Sigma.at_node(k), ld.at(t), t);
        F[static_cast<std::size_t>(k)] = std::move(drift);
        Gm[static_cast<std::size_t>(k)] = std::move(diff);
    }

    const Matrix zero_b(static_cast<std::size_t>(n), 1);
    kernels::StepCoeffs c0;
    c0.n = n; c0.m1 = 1; c0.m2 = 1;
    const kernels::EulerStepFn step_fn = kernels::select_euler_step(c0);
    const kernels::LawSlice empty_law{}; // zero control
    run_chunks(M, [&](int a, int bnd) {
        for (int k = 0; k < N; ++k) {
            kernels::StepCoeffs c = c0;
            c.A = F[static_cast<std::size_t>(k)].data();
            c.C = Gm[static_cast<std::size_t>(k)].data();
            c.B1 = zero_b.data();
            c.B2 = zero_b.data();
            c.D1 = zero_b.data();
            c.D2 = zero_b.data();
            const double* x_in = b.X.data() + static_cast<std::size_t>(k) * n * M;
            double* x_out = b.X.data() + static_cast<std::size_t>(k + 1) * n * M;
            step_fn(c, h, M, a, bnd, x_in, batch.step_lane(k), empty_law, empty_law, x_out,
                    nullptr, nullptr);
        }
    });
    check_finite(b);
    return b;
}

} // namespace lqgame
