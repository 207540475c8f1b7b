// lqgame: solves the game's Riccati systems, synthesizes equilibrium
// feedback, simulates the closed loop, and verifies the theory-level
// identities numerically.

#include "lqgame/blq.hpp"
#include "lqgame/evaluate.hpp"
#include "lqgame/report.hpp"
#include "lqgame/riccati.hpp"
#include "lqgame/simulate.hpp"
#include "lqgame/spec.hpp"
#include "lqgame/synthesis.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using namespace lqgame;

struct RunConfig {
    std::string spec_path;
    int steps = 4000;
    int paths = 10000;
    std::uint64_t seed = 42;
    double tol = 1e-6;
    std::string x0_text;
    std::string law = "stackelberg";
    std::string out_dir = ".";
    std::string format = "csv";
};

GameSpec resolve_spec(const std::string& path) {
    if (path == "EX1" || path == "EX2" || path == "RAND2") return gallery(path);
    return load_spec(path);
}

Matrix parse_x0(const std::string& text, int n) {
    Matrix x0(static_cast<std::size_t>(n), 1);
    if (text.empty()) {
        for (int i = 0; i < n; ++i) x0(static_cast<std::size_t>(i), 0) = 1.0;
        return x0;
    }
    std::size_t start = 0;
    int idx = 0;
    while (start <= text.size() && idx < n) {
        const std::size_t comma = text.find(',', start);
        const std::string tok = text.substr(start, comma == std::string::npos
                                                       ? std::string::npos
                                                       : comma - start);
        try {
            x0(static_cast<std::size_t>(idx), 0) = std::stod(tok);
        } catch (...) {
            throw SpecParseError("bad --x0 component: '" + tok + "'");
        }
        ++idx;
        if (comma == std::string::npos) { start = text.size() + 1; break; }
        start = comma + 1;
    }
    if (idx != n || start <= text.size())
        throw SpecParseError("--x0 must have exactly n components");
    return x0;
}

std::string out_file(const RunConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.out_dir);
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}


void write_path(const RunConfig& cfg, const std::string& base, const MatrixPath& path) {
    if (cfg.format == "json")
        write_path_json(out_file(cfg, base + ".json"), path);
    else
        write_path_csv(out_file(cfg, base + ".csv"), path);
}

struct Solves {
    RegularRiccatiSolution P1, Sigma, P;
    LeaderData ld;
};

Solves run_solves(const GameSpec& spec, const TimeGrid& grid) {
    Solves s;
    s.P1 = solve_follower(spec, grid);
    s.ld = leader_data(spec, s.P1.P);
    s.Sigma = solve_leader_sigma(s.ld, grid);
    s.P = solve_nash(spec, grid);
    return s;
}

int cmd_solve(const RunConfig& cfg) {
    const GameSpec spec = resolve_spec(cfg.spec_path);
    const TimeGrid grid = spec.make_grid(cfg.steps);
    const Solves s = run_solves(spec, grid);
    write_path(cfg, "P1", s.P1.P);
    write_path(cfg, "Sigma", s.Sigma.P);
    write_path(cfg, "P", s.P.P);
    return 0;
}

int cmd_equilibrium(const RunConfig& cfg) {
    const GameSpec spec = resolve_spec(cfg.spec_path);
    const TimeGrid grid = spec.make_grid(cfg.steps);
    const Matrix x0 = parse_x0(cfg.x0_text, spec.n);
    const Solves s = run_solves(spec, grid);
    const GainPair hat = stackelberg_gains(spec, s.P1.P, s.Sigma.P, s.ld);
    const GainPair star = nash_gains(spec, s.P.P);
    const GainPair& chosen = cfg.law == "nash" ? star : hat;
    write_path(cfg, "Theta1", chosen.theta1);
    write_path(cfg, "Theta2", chosen.theta2);

    const IdentityReport gid = gain_identity(hat, star);
    const double v_st = dot_fro(x0, (s.P1.P.at_node(0) - s.Sigma.P.at_node(0)) * x0);
    const double v_ng = dot_fro(x0, s.P.P.at_node(0) * x0);
    JsonWriter w;
    w.begin_object();
    w.key("values").begin_object();
    w.key("stackelberg").value(v_st);
    w.key("nash").value(v_ng);
    w.end_object();
    w.key("gain_sup_difference").value(gid.sup_residual);
    w.key("law").value(cfg.law);
    w.end_object();
    write_text(out_file(cfg, "values.json"), w.str() + "\n");
    return 0;
}

void json_check(JsonWriter& w, const IdentityReport& r) {
    w.begin_object();
    w.key("name").value(r.name);
    w.key("sup_residual").value(r.sup_residual);
    w.key("node_of_max").value(r.node_of_max);
    w.key("tolerance").value(r.tolerance);
    w.key("pass").value(r.pass);
    w.end_object();
}

void json_assumption(JsonWriter& w, const std::string& name, const AssumptionCheck& c) {
    w.key(name).begin_object();
    w.key("holds").value(c.holds);
    w.key("margin").value(c.margin);
    w.key("diagnostic").value(c.diagnostic);
    w.end_object();
}

int cmd_verify(const RunConfig& cfg) {
    const GameSpec spec = resolve_spec(cfg.spec_path);
    const TimeGrid grid = spec.make_grid(cfg.steps);
    const Matrix x0 = parse_x0(cfg.x0_text, spec.n);
    const Solves s = run_solves(spec, grid);

    std::vector<IdentityReport> checks;
    const PhiPair pp = phi_pair(spec, s.P1.P, s.Sigma.P, s.ld);
    checks.push_back(pp.report);
    checks.push_back(block_inverse_M(spec, s.P1.P, s.Sigma.P, s.ld).report);
    const GainPair hat = stackelberg_gains(spec, s.P1.P, s.Sigma.P, s.ld);
    const GainPair star = nash_gains(spec, s.P.P);
    checks.push_back(gain_identity(hat, star));
    const auto cl = closed_loop_coefficient_identity(spec, s.P1.P, s.Sigma.P, s.ld, hat);
    checks.push_back(cl.first);
    checks.push_back(cl.second);
    for (auto& r : appendix_identity_suite(spec, s.P1.P, s.Sigma.P, s.ld))
        checks.push_back(std::move(r));

    // Nash Riccati vs P1 - Sigma
    {
        IdentityReport r;
        r.name = "p_equals_p1_minus_sigma";
        double sup = 0.0;
        int node = 0;
        for (int k = 0; k <= grid.steps; ++k) {
            const double d =
                (s.P.P.at_node(k) - (s.P1.P.at_node(k) - s.Sigma.P.at_node(k))).norm_inf();
            if (d > sup) { sup = d; node = k; }
        }
        r.sup_residual = sup;
        r.node_of_max = node;
        r.tolerance = 1e-5 * (1.0 + s.P.P.norm_inf());
        r.pass = sup <= r.tolerance;
        checks.push_back(r);
    }
    {
        IdentityReport r;
        r.name = "nash_residual_of_p1_minus_sigma";
        std::vector<Matrix> diff(static_cast<std::size_t>(grid.nodes()));
        for (int k = 0; k <= grid.steps; ++k)
            diff[static_cast<std::size_t>(k)] = s.P1.P.at_node(k) - s.Sigma.P.at_node(k);
        r.sup_residual =
            riccati_residual(MatrixPath(grid, std::move(diff)), RiccatiEquation::nash, spec);
        r.tolerance = 1e-4 * (1.0 + s.P.P.norm_inf());
        r.pass = r.sup_residual <= r.tolerance;
        checks.push_back(r);
    }
    // value consistency through the exact Lyapunov cost
    {
        const auto dense1 = [&](double t) {
            return stackelberg_gains_at(spec, s.P1.P.eval(t), s.Sigma.P.eval(t), s.ld.at(t), t)
                .first;
        };
        const auto dense2 = [&](double t) {
            return stackelberg_gains_at(spec, s.P1.P.eval(t), s.Sigma.P.eval(t), s.ld.at(t), t)
                .second;
        };
        const double v_formula =
            dot_fro(x0, (s.P1.P.at_node(0) - s.Sigma.P.at_node(0)) * x0);
        const double v_fb = cost_feedback(spec, dense1, dense2, x0, grid);
        IdentityReport r;
        r.name = "stackelberg_value_consistency";
        r.sup_residual = std::abs(v_fb - v_formula);
        r.tolerance = cfg.tol * (1.0 + std::abs(v_formula));
        r.pass = r.sup_residual <= r.tolerance;
        checks.push_back(r);

        const auto nash1 = [&](double t) {
            return nash_gains_at(spec, s.P.P.eval(t), t).first;
        };
        const auto nash2 = [&](double t) {
            return nash_gains_at(spec, s.P.P.eval(t), t).second;
        };
        const double v_nash_formula = dot_fro(x0, s.P.P.at_node(0) * x0);
        const double v_nash_fb = cost_feedback(spec, nash1, nash2, x0, grid);
        IdentityReport r2;
        r2.name = "nash_value_consistency";
        r2.sup_residual = std::abs(v_nash_fb - v_nash_formula);
        r2.tolerance = cfg.tol * (1.0 + std::abs(v_nash_formula));
        r2.pass = r2.sup_residual <= r2.tolerance;
        checks.push_back(r2);
    }

    const AssumptionCheck h3 = check_h3(spec, grid);
    const AssumptionCheck h5 = check_h5(spec, grid);
    const AssumptionCheck lc = check_leader_concavity(spec, grid);

    bool all_pass = true;
    for (const auto& c : checks) all_pass = all_pass && c.pass;

    JsonWriter w;
    w.begin_object();
    w.key("checks").begin_array();
    for (const auto& c : checks) json_check(w, c);
    w.end_array();
    w.key("values").begin_object();
    w.key("stackelberg")
        .value(dot_fro(x0, (s.P1.P.at_node(0) - s.Sigma.P.at_node(0)) * x0));
    w.key("nash").value(dot_fro(x0, s.P.P.at_node(0) * x0));
    w.end_object();
    w.key("assumptions").begin_object();
    json_assumption(w, "H3", h3);
    json_assumption(w, "H5", h5);
    json_assumption(w, "leader_concavity", lc);
    w.end_object();
    w.key("all_pass").value(all_pass);
    w.end_object();
    write_text(out_file(cfg, "report.json"), w.str() + "\n");
    return all_pass ? 0 : 1;
}

int cmd_simulate(const RunConfig& cfg) {
    const GameSpec spec = resolve_spec(cfg.spec_path);
    const TimeGrid grid = spec.make_grid(cfg.steps);
    const Matrix x0 = parse_x0(cfg.x0_text, spec.n);
    const Solves s = run_solves(spec, grid);
    const GainPair gains = cfg.law == "nash"
                               ? nash_gains(spec, s.P.P)
                               : stackelberg_gains(spec, s.P1.P, s.Sigma.P, s.ld);
    const BrownianBatch batch = gen_brownian(cfg.seed, cfg.paths, grid);
    TrajectoryBundle bundle = record_equilibrium(spec, gains, x0, batch);
    const CostEstimate est = cost_mc(spec, bundle);
    const double exact = cost_feedback(spec, gains.theta1, gains.theta2, x0, grid);

    if (cfg.format == "json") {
        JsonWriter tw;
        tw.begin_object();
        tw.key("paths").value(bundle.paths);
        tw.key("rows").begin_array();
        for (int j = 0; j < bundle.paths; ++j) {
            for (int k = 0; k <= grid.steps; ++k) {
                const int step = std::min(k, grid.steps - 1);
                tw.begin_array();
                tw.value(j).value(grid.node(k));
                for (int d = 0; d < spec.n; ++d) tw.value(bundle.x(j, k, d));
                for (int i = 0; i < spec.m1; ++i) tw.value(bundle.u1_at(j, step, i));
                for (int i = 0; i < spec.m2; ++i) tw.value(bundle.u2_at(j, step, i));
                tw.end_array();
            }
        }
        tw.end_array();
        tw.end_object();
        write_text(out_file(cfg, "trajectories.json"), tw.str() + "\n");
    } else {
        std::ofstream out(out_file(cfg, "trajectories.csv"), std::ios::binary);
        if (!out) throw std::runtime_error("cannot write trajectories.csv");
        out << "path,t";
        for (int d = 0; d < spec.n; ++d) out << ",X_" << d;
        for (int i = 0; i < spec.m1; ++i) out << ",u1_" << i;
        for (int i = 0; i < spec.m2; ++i) out << ",u2_" << i;
        out << "\n";
        for (int j = 0; j < bundle.paths; ++j) {
            for (int k = 0; k <= grid.steps; ++k) {
                const int step = std::min(k, grid.steps - 1); // controls live on steps
                out << j << "," << format_csv_number(grid.node(k));
                for (int d = 0; d < spec.n; ++d)
                    out << "," << format_csv_number(bundle.x(j, k, d));
                for (int i = 0; i < spec.m1; ++i)
                    out << "," << format_csv_number(bundle.u1_at(j, step, i));
                for (int i = 0; i < spec.m2; ++i)
                    out << "," << format_csv_number(bundle.u2_at(j, step, i));
                out << "\n";
            }
        }
    }

    JsonWriter w;
    w.begin_object();
    w.key("mean").value(est.mean);
    w.key("std_error").value(est.std_error);
    w.key("paths").value(est.paths);
    w.key("law").value(cfg.law);
    w.key("exact_feedback_cost").value(exact);
    w.key("seed").value(static_cast<long long>(cfg.seed));
    w.end_object();
    write_text(out_file(cfg, "cost.json"), w.str() + "\n");
    return 0;
}

int cmd_check(const RunConfig& cfg) {
    const GameSpec spec = resolve_spec(cfg.spec_path);
    const TimeGrid grid = spec.make_grid(cfg.steps);
    JsonWriter w;
    w.begin_object();
    json_assumption(w, "H3", check_h3(spec, grid));
    json_assumption(w, "H5", check_h5(spec, grid));
    json_assumption(w, "leader_concavity", check_leader_concavity(spec, grid));
    w.end_object();
    write_text(out_file(cfg, "assumptions.json"), w.str() + "\n");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"zero-sum Stackelberg/Nash stochastic LQ game solver and verifier"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string command;
    for (const char* name : {"solve", "equilibrium", "verify", "simulate", "check"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--spec", cfg.spec_path, "spec file (or EX1/EX2/RAND2)")->required();
        sub->add_option("--steps", cfg.steps)->check(CLI::Range(10, 100000000));
        sub->add_option("--paths", cfg.paths)->check(CLI::Range(1, 100000000));
        sub->add_option("--seed", cfg.seed);
        sub->add_option("--tol", cfg.tol)->check(CLI::PositiveNumber);
        sub->add_option("--x0", cfg.x0_text, "initial state, comma separated");
        sub->add_option("--law", cfg.law)->check(CLI::IsMember({"stackelberg", "nash"}));
        sub->add_option("--out", cfg.out_dir);
        sub->add_option("--format", cfg.format)->check(CLI::IsMember({"csv", "json"}));
        sub->callback([&command, name] { command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (command == "solve") return cmd_solve(cfg);
        if (command == "equilibrium") return cmd_equilibrium(cfg);
        if (command == "verify") return cmd_verify(cfg);
        if (command == "simulate") return cmd_simulate(cfg);
        if (command == "check") return cmd_check(cfg);
        std::cerr << "input error: unknown command\n";
        return 2;
    } catch (const SpecParseError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const SpecValidationError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const SolveError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
