#pragma once

#include "lqgame/brownian.hpp"
#include "lqgame/riccati.hpp"
#include "lqgame/synthesis.hpp"

#include <memory>
#include <vector>

namespace lqgame {

// A recorded per-path control process (for frozen replay under common
// random numbers).
struct ControlRecord {
    TimeGrid grid;
    int paths = 0;
    int m = 0;
    std::uint64_t seed = 0;
    std::vector<double> lanes; // [steps][m][paths]

    double at(int path, int step, int i) const {
        return lanes[(static_cast<std::size_t>(step) * m + i) * paths + path];
    }
    const double* step_lane(int step, int i) const {
        return lanes.data() + (static_cast<std::size_t>(step) * m + i) * paths;
    }
};

class ControlLaw {
public:
    enum class Kind { feedback, deterministic, frozen, perturbed };

    static ControlLaw feedback(MatrixPath gain); // m x n path
    static ControlLaw deterministic(MatrixPath u); // m x 1 path
    static ControlLaw frozen(std::shared_ptr<const ControlRecord> record);
    // base (frozen or deterministic) plus eps * delta(t)
    static ControlLaw perturbed(ControlLaw base, MatrixPath delta, double eps);

    Kind kind() const { return kind_; }
    int control_dim() const;
    const MatrixPath& gain() const { return path_; }
    const MatrixPath& det_path() const { return path_; }
    const std::shared_ptr<const ControlRecord>& record() const { return record_; }
    const MatrixPath& delta() const { return delta_; }
    double eps() const { return eps_; }

private:
    Kind kind_ = Kind::deterministic;
    MatrixPath path_;  // gain or deterministic control
    std::shared_ptr<const ControlRecord> record_;
    MatrixPath delta_;
    double eps_ = 0.0;
};

struct TrajectoryBundle {
    TimeGrid grid;
    int paths = 0, n = 0, m1 = 0, m2 = 0;
    std::uint64_t seed = 0;
    std::vector<double> X;  // [(steps+1)][n][paths]
    std::vector<double> u1; // [steps][m1][paths]
    std::vector<double> u2; // [steps][m2][paths]
    std::vector<double> per_path_cost; // filled by evaluate::cost_mc

    double x(int path, int node, int dim) const {
        return X[(static_cast<std::size_t>(node) * n + dim) * paths + path];
    }
    double u1_at(int path, int step, int i) const {
        return u1[(static_cast<std::size_t>(step) * m1 + i) * paths + path];
    }
    double u2_at(int path, int step, int i) const {
        return u2[(static_cast<std::size_t>(step) * m2 + i) * paths + path];
    }
    const double* x_lane(int node) const {
        return X.data() + static_cast<std::size_t>(node) * n * paths;
    }

    std::shared_ptr<const ControlRecord> record_u1() const;
    std::shared_ptr<const ControlRecord> record_u2() const;
};

// Explicit Euler-Maruyama with left-endpoint controls and coefficients.
// Deterministic given (spec, laws, x0, batch) regardless of worker count.
TrajectoryBundle simulate(const GameSpec& spec, const ControlLaw& law1,
                          const ControlLaw& law2, const Matrix& x0,
                          const BrownianBatch& batch);

// Runs the closed loop under both feedback gains; the realized control
// processes are stored in the bundle for later frozen replay.
TrajectoryBundle record_equilibrium(const GameSpec& spec, const GainPair& gains,
                                    const Matrix& x0, const BrownianBatch& batch);

// Re-simulates with player `player`'s control = recorded + eps*delta(t) and
// the opponent frozen at its recorded process, on identical increments.
TrajectoryBundle deviation_run(const GameSpec& spec, const TrajectoryBundle& recorded,
                               int player, const MatrixPath& delta_dir, double eps,
                               const BrownianBatch& batch);

// Euler-Maruyama on the leader's adjoint SDE; its drift/diffusion brackets
// equal the closed-loop coefficients, so paths should match simulate() with
// the Stackelberg gains.
TrajectoryBundle simulate_adjoint(const GameSpec& spec, const MatrixPath& P1,
                                  const MatrixPath& Sigma, const LeaderData& ld,
                                  const Matrix& x0, const BrownianBatch& batch);

} // namespace lqgame
