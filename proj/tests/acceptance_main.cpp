// Acceptance suite: every criterion the toolkit must meet, one line each.
// Oracles are the scalar closed forms of the two worked examples, the
// paper's hand-computed constants, direct inversion, exact discrete-chain
// expectations, and cross-route agreement.

#include "lqgame/blq.hpp"
#include "lqgame/evaluate.hpp"
#include "lqgame/riccati.hpp"
#include "lqgame/simulate.hpp"
#include "lqgame/spec.hpp"
#include "lqgame/synthesis.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace lqgame;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void criterion(int number, bool pass, const std::string& text) {
    std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", number, text.c_str());
    if (!pass) ++failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

struct Solved {
    RegularRiccatiSolution p1, sigma, nash;
    LeaderData ld;
    GainPair hat, star;
    TimeGrid grid{1.0, 1};
};

Solved solve_all(const GameSpec& spec, int N) {
    Solved s;
    s.grid = spec.make_grid(N);
    s.p1 = solve_follower(spec, s.grid);
    s.ld = leader_data(spec, s.p1.P);
    s.sigma = solve_leader_sigma(s.ld, s.grid);
    s.nash = solve_nash(spec, s.grid);
    s.hat = stackelberg_gains(spec, s.p1.P, s.sigma.P, s.ld);
    s.star = nash_gains(spec, s.nash.P);
    return s;
}

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(LQGAME_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

} // namespace

int main() {
    const double tanh4 = std::tanh(4.0);                             // P1(0) on EX2
    const double nash0 = std::sqrt(2.0) * std::tanh(2.0 * std::sqrt(2.0)); // P(0) on EX2
    const double sigma0 = tanh4 - nash0;                             // Sigma(0) on EX2

    const GameSpec ex1 = gallery("EX1");
    const GameSpec ex2 = gallery("EX2");
    const GameSpec rand2 = gallery("RAND2");

    // ---- criterion 1: EX2 closed forms at N = 4000, under one second ----
    {
        const double t0 = now_seconds();
        const Solved s = solve_all(ex2, 4000);
        const double dt = now_seconds() - t0;
        const double e1 = std::abs(s.p1.P.at_node(0)(0, 0) - tanh4);
        const double e2 = std::abs(s.nash.P.at_node(0)(0, 0) - nash0);
        const double e3 = std::abs(s.sigma.P.at_node(0)(0, 0) - sigma0);
        criterion(1, e1 <= 1e-6 && e2 <= 1e-6 && e3 <= 2e-6 && dt < 1.0,
                  "EX2 closed forms: |P1(0)-tanh4|=" + fmt(e1) + ", |P(0)-sqrt2*tanh(2sqrt2)|="
                      + fmt(e2) + ", |Sigma(0)-(P1-P)(0)|=" + fmt(e3) + ", runtime "
                      + fmt(dt) + "s");
    }

    // ---- criteria 2, 3, 4, 9 across the three specs ----
    bool c2 = true, c3 = true, c9 = true;
    std::string c2_detail, c3_detail, c9_detail;
    bool c4 = true;
    std::string c4_detail;
    for (const auto* spec : {&ex1, &ex2, &rand2}) {
        const std::string name = spec == &ex1 ? "EX1" : (spec == &ex2 ? "EX2" : "RAND2");
        const Solved s = solve_all(*spec, 4000);

        double sup = 0.0;
        std::vector<Matrix> diff(static_cast<std::size_t>(s.grid.nodes()));
        for (int k = 0; k <= s.grid.steps; ++k) {
            diff[static_cast<std::size_t>(k)] = s.p1.P.at_node(k) - s.sigma.P.at_node(k);
            sup = std::max(sup, (s.nash.P.at_node(k) - diff[static_cast<std::size_t>(k)]).norm_inf());
        }
        const double resid = riccati_residual(MatrixPath(s.grid, std::move(diff)),
                                              RiccatiEquation::nash, *spec);
        c2 = c2 && sup <= 1e-5 * (1.0 + s.nash.P.norm_inf()) && resid <= 1e-4;
        c2_detail += name + ": sup=" + fmt(sup) + " resid=" + fmt(resid) + "  ";

        const PhiPair pp = phi_pair(*spec, s.p1.P, s.sigma.P, s.ld);
        const BlockInverse bi = block_inverse_M(*spec, s.p1.P, s.sigma.P, s.ld);
        c3 = c3 && pp.report.sup_residual <= 1e-8 && bi.report.sup_residual <= 1e-8;
        c3_detail += name + ": phi=" + fmt(pp.report.sup_residual) + " block="
                     + fmt(bi.report.sup_residual) + "  ";

        if (spec != &ex1) { // gain identity asserted where the checkers pass
            const IdentityReport gid = gain_identity(s.hat, s.star);
            c4 = c4 && gid.sup_residual <= 1e-6;
            c4_detail += name + ": gains=" + fmt(gid.sup_residual) + "  ";
        }

        double worst_appendix = 0.0;
        for (const auto& r : appendix_identity_suite(*spec, s.p1.P, s.sigma.P, s.ld))
            worst_appendix = std::max(worst_appendix, r.sup_residual);
        c9 = c9 && worst_appendix <= 1e-7;
        c9_detail += name + ": " + fmt(worst_appendix) + "  ";
    }
    criterion(2, c2, "P = P1 - Sigma (sup norm and nash-equation residual): " + c2_detail);
    criterion(3, c3, "Phi inverse and block inverse: " + c3_detail);

    // EX2 gain values against the closed forms
    {
        const Solved s = solve_all(ex2, 4000);
        const double g1 = std::abs(s.hat.theta1.at_node(0)(0, 0) + nash0);
        const double g2 = std::abs(s.hat.theta2.at_node(0)(0, 0) + 0.5 * nash0);
        c4 = c4 && g1 <= 1e-5 && g2 <= 1e-5;
        c4_detail += "EX2 gain values: |Th1(0)+P(0)|=" + fmt(g1) + " |Th2(0)+P(0)/2|="
                     + fmt(g2);
        criterion(4, c4, "gain identity Theta_hat = Theta_star: " + c4_detail);
    }

    // ---- criterion 5: value formulas through the exact Lyapunov cost ----
    {
        const Solved s2 = solve_all(ex2, 4000);
        const double v2 = cost_feedback(ex2, s2.hat.theta1, s2.hat.theta2, Matrix{{1.0}},
                                        s2.grid);
        const double e2v = std::abs(v2 - nash0);

        const Solved sr = solve_all(rand2, 4000);
        const Matrix x0{{1.0}, {-0.5}};
        const double v_st = cost_feedback(rand2, sr.hat.theta1, sr.hat.theta2, x0, sr.grid);
        const double f_st = dot_fro(x0, (sr.p1.P.at_node(0) - sr.sigma.P.at_node(0)) * x0);
        const double v_ng = cost_feedback(rand2, sr.star.theta1, sr.star.theta2, x0, sr.grid);
        const double f_ng = dot_fro(x0, sr.nash.P.at_node(0) * x0);
        const bool ok = e2v <= 1e-5
                        && std::abs(v_st - f_st) <= 1e-6 * (1.0 + std::abs(f_st))
                        && std::abs(v_ng - f_ng) <= 1e-6 * (1.0 + std::abs(f_ng));
        criterion(5, ok,
                  "feedback cost equals value formulas: EX2 |J-1.40437|=" + fmt(e2v)
                      + ", RAND2 stackelberg err=" + fmt(std::abs(v_st - f_st))
                      + ", nash err=" + fmt(std::abs(v_ng - f_ng)));
    }

    // ---- criterion 6: Monte Carlo corroboration with bias halving ----
    {
        const double t0 = now_seconds();
        const Matrix x0{{1.0}, {-0.5}};
        double bias[2];
        double mc_gap = 0.0, se3 = 0.0;
        bool mc_ok = true;
        for (int i = 0; i < 2; ++i) {
            const int N = i == 0 ? 1000 : 2000;
            const Solved s = solve_all(rand2, N);
            const double exact = cost_feedback(rand2, s.star.theta1, s.star.theta2, x0, s.grid);
            const double discrete =
                euler_expected_cost(rand2, s.star.theta1, s.star.theta2, x0, s.grid);
            bias[i] = std::abs(discrete - exact);
            if (i == 0) {
                const BrownianBatch batch = gen_brownian(42, 10000, s.grid);
                auto b = record_equilibrium(rand2, s.star, x0, batch);
                const CostEstimate est = cost_mc(rand2, b);
                mc_gap = std::abs(est.mean - exact);
                se3 = 3.0 * est.std_error;
                mc_ok = mc_gap <= se3 + bias[0];
            }
        }
        const double ratio = bias[1] / bias[0];
        const double dt = now_seconds() - t0;
        criterion(6,
                  mc_ok && ratio >= 0.35 && ratio <= 0.65 && dt < 30.0,
                  "RAND2 MC (M=10^4, N=1000, seed 42): |mean-exact|=" + fmt(mc_gap)
                      + " <= 3se+bias=" + fmt(se3 + bias[0]) + ", bias ratio N1000->N2000 = "
                      + fmt(ratio) + ", runtime " + fmt(dt) + "s");
    }

    // ---- criterion 7: saddle-point deviation parabolas ----
    {
        const Solved sr = solve_all(rand2, 1000);
        const BrownianBatch batch = gen_brownian(42, 10000, sr.grid);
        const auto [p1, p2] = verify_nash(rand2, sr.star, Matrix{{1.0}, {-0.5}}, batch);

        const Solved s2 = solve_all(ex2, 2000);
        const BrownianBatch b2 = gen_brownian(7, 4, s2.grid); // noiseless: tiny batch
        TrajectoryBundle rec = record_equilibrium(ex2, s2.hat, Matrix{{1.0}}, b2);
        const MatrixPath ones = MatrixPath::constant(s2.grid, Matrix{{1.0}});
        const SaddleReport fol = deviation_parabola(
            ex2, rec, 1, ones, {-0.2, -0.1, 0.0, 0.1, 0.2}, b2, +1);

        const bool strict_slopes = std::abs(p1.slope) <= 3.0 * p1.slope_std_error
                                   && std::abs(p2.slope) <= 3.0 * p2.slope_std_error;
        const bool ok = p1.verdict && p2.verdict && strict_slopes && p1.curvature > 0.0
                        && p2.curvature < 0.0 && fol.curvature > 0.0
                        && fol.fit_residual <= 1e-8;
        criterion(7, ok,
                  "saddle deviations: RAND2 curvatures (" + fmt(p1.curvature) + ", "
                      + fmt(p2.curvature) + "), |slopes| (" + fmt(std::abs(p1.slope)) + ", "
                      + fmt(std::abs(p2.slope)) + ") within 3se (" + fmt(3.0 * p1.slope_std_error)
                      + ", " + fmt(3.0 * p2.slope_std_error)
                      + "); EX2 noiseless fit residual " + fmt(fol.fit_residual));
    }

    // ---- criterion 8: the paper's Example 4.4 facts ----
    {
        const TimeGrid grid = ex2.make_grid(4000);
        const AssumptionCheck h3 = check_h3(ex2, grid);
        const AssumptionCheck h5 = check_h5(ex2, grid);
        const AssumptionCheck lc = check_leader_concavity(ex2, grid);
        bool open_ok = true;
        double worst_rel = 0.0;
        const auto zero = Coefficient::constant(Matrix{{0.0}});
        for (double lambda : {1.0, 2.0}) {
            const auto lam = Coefficient::constant(Matrix{{lambda}});
            const double j = cost_openloop_exact(ex2, zero, lam, Matrix{{0.0}}, grid);
            const double expect = 40.0 / 3.0 * lambda * lambda;
            worst_rel = std::max(worst_rel, std::abs(j - expect) / expect);
            open_ok = open_ok && std::abs(j - expect) <= 1e-8 * expect;
        }
        criterion(8, h3.holds && !h5.holds && lc.holds && open_ok,
                  "EX2 facts: H3 holds, H5 fails, leader concavity holds; J(0;0,lambda) "
                  "= 40/3 lambda^2 (rel err " + fmt(worst_rel) + ")");
    }

    // criterion 9 (appendix) accumulated above
    criterion(9, c9, "appendix identities (a),(f3)1,(f3)2,(f1)2,(f1)3,(f7)5,F: sup "
                     + c9_detail);

    // ---- criterion 10: BLQ cross-formulation and dominance ----
    {
        const TimeGrid grid = ex2.make_grid(4000);
        const auto p1 = solve_follower(ex2, grid);
        BlqSpec b = BlqSpec::from_leader(ex2, p1.P, Matrix{{1.0}});
        const BlqSolution sh = solve_blq_H(b, grid);
        const BlqSolution ss = solve_blq_sigma(b, grid);
        const double vdiff = std::abs(sh.value - ss.value);
        const double sdiff =
            (sh.riccati.P.at_node(0) - ss.riccati.P.at_node(0)).norm_inf();

        bool dominated = true;
        double best = -1e300;
        std::uint64_t state = 2718;
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> times{0.0, 1.0, 2.0, 3.0, 4.0};
            std::vector<Matrix> vals;
            for (int i = 0; i < 5; ++i) {
                state = state * 6364136223846793005ull + 1442695040888963407ull;
                vals.push_back(
                    Matrix{{2.0 * (static_cast<double>(state >> 11) / 9007199254740992.0)
                            - 1.0}});
            }
            const auto u2 = Coefficient::sampled(times, vals, Coefficient::Interp::linear);
            const double u = blq_utility_deterministic(b, u2, grid);
            best = std::max(best, u);
            dominated = dominated && u <= ss.value + 1e-9;
        }
        criterion(10, vdiff <= 1e-6 && sdiff <= 1e-6 && dominated,
                  "BLQ routes agree: |value_H-value_Sigma|=" + fmt(vdiff)
                      + ", |SigmaH(0)-Sigma(0)|=" + fmt(sdiff)
                      + "; dominance over 100 deterministic controls (best gap "
                      + fmt(ss.value - best) + ")");
    }

    // ---- criterion 11: byte-identical CLI reruns ----
    {
        const fs::path root = fs::temp_directory_path() / "lqgame_acceptance";
        fs::remove_all(root);
        fs::create_directories(root);
        const std::string a = (root / "a").string();
        const std::string b = (root / "b").string();
        bool ok = run_cli("verify --spec EX2 --steps 1000 --out " + a) == 0;
        ok = ok && run_cli("verify --spec EX2 --steps 1000 --out " + b) == 0;
        ok = ok && slurp(fs::path(a) / "report.json") == slurp(fs::path(b) / "report.json");
        ok = ok && run_cli("simulate --spec RAND2 --steps 200 --paths 100 --seed 42 --x0 1,0 --out " + a) == 0;
        ok = ok && run_cli("simulate --spec RAND2 --steps 200 --paths 100 --seed 42 --x0 1,0 --out " + b) == 0;
        ok = ok && slurp(fs::path(a) / "cost.json") == slurp(fs::path(b) / "cost.json");
        ok = ok
             && slurp(fs::path(a) / "trajectories.csv")
                    == slurp(fs::path(b) / "trajectories.csv");
        criterion(11, ok, "repeated verify/simulate invocations are byte-identical");
    }

    if (failures == 0) {
        std::printf("ACCEPTANCE: all criteria passed\n");
        return 0;
    }
    std::printf("ACCEPTANCE: %d criteria FAILED\n", failures);
    return 1;
}
