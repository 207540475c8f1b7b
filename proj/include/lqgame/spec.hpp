#pragma once

#include "lqgame/grid.hpp"
#include "lqgame/matrix.hpp"

#include <string>
#include <vector>

namespace lqgame {

// Time-varying coefficient: a constant matrix or samples interpolated on
// [0, T]. Evaluation clamps t to the sampled range.
class Coefficient {
public:
    enum class Interp { linear, previous };

    Coefficient() = default;
    static Coefficient constant(Matrix value);
    static Coefficient sampled(std::vector<double> times, std::vector<Matrix> values,
                               Interp interp);

    bool is_constant() const { return times_.empty(); }
    std::size_t rows() const { return values_.empty() ? 0 : values_[0].rows(); }
    std::size_t cols() const { return values_.empty() ? 0 : values_[0].cols(); }
    const std::vector<double>& times() const { return times_; }
    const std::vector<Matrix>& values() const { return values_; }
    Interp interp() const { return interp_; }

    Matrix eval(double t) const;

    void symmetrize_samples();
    bool all_finite() const;

private:
    std::vector<double> times_;   // empty for constant kind
    std::vector<Matrix> values_;  // one entry for constant kind
    Interp interp_ = Interp::linear;
};

// Dimensions, horizon and the ten coefficient/weight matrices of the game.
struct GameSpec {
    int n = 0, m1 = 0, m2 = 0;
    double T = 0.0;
    Coefficient A, C, B1, B2, D1, D2; // state equation
    Coefficient Q, R1, R2;            // running weights
    Matrix G;                          // terminal weight

    TimeGrid make_grid(int steps) const { return TimeGrid(T, steps); }
};

// Every violation found; empty result means the spec is valid.
std::vector<std::string> validate(const GameSpec& spec);

// Parse/serialization errors carry a message naming the offending field.
struct SpecParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SpecValidationError : std::runtime_error {
    explicit SpecValidationError(const std::vector<std::string>& violations);
    std::vector<std::string> violations;
};

GameSpec load_spec(const std::string& path);
GameSpec parse_spec(const std::string& json_text);
std::string spec_to_json(const GameSpec& spec);
void write_spec(const GameSpec& spec, const std::string& path);

// Built-in specs: EX1, EX2 (the paper's two worked examples) and RAND2,
// a committed 2-dimensional stochastic fixture.
GameSpec gallery(const std::string& name);

} // namespace lqgame
