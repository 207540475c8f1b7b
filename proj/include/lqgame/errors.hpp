#pragma once

#include <stdexcept>
#include <string>

namespace lqgame {

// Numerical failure of a solve, carrying the time of the failing step.
struct SolveError : std::runtime_error {
    enum class Kind {
        blow_up,            // non-finite values produced
        regularity_lost,    // a definiteness margin dropped below delta
        gate_singular,      // smallest singular value of a gate below delta
        positivity_violated // lambda_max(Sigma) above tolerance
    };

    SolveError(Kind k, double t, std::string detail)
        : std::runtime_error(describe(k) + " at t=" + std::to_string(t)
                             + (detail.empty() ? "" : ": " + detail)),
          kind(k), time(t) {}

    static std::string describe(Kind k) {
        switch (k) {
            case Kind::blow_up: return "blow-up";
            case Kind::regularity_lost: return "regularity lost";
            case Kind::gate_singular: return "gate singular";
            case Kind::positivity_violated: return "positivity violated";
        }
        return "solve error";
    }

    Kind kind;
    double time;
};

} // namespace lqgame
