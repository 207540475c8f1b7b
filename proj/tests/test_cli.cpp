// End-to-end checks of the lqgame binary: exit codes, file outputs, and
// byte-for-byte reproducibility of reports.

#include "lqgame/spec.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int failures = 0;

void check(bool ok, const std::string& what) {
    if (ok) {
        std::cout << "[ok] " << what << "\n";
    } else {
        std::cout << "[FAILED] " << what << "\n";
        ++failures;
    }
}

int run(const std::string& args) {
    const std::string cmd = std::string(LQGAME_CLI_PATH) + " " + args + " 2>/dev/null";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

int main() {
    const fs::path root = fs::temp_directory_path() / "lqgame_cli_tests";
    fs::remove_all(root);
    fs::create_directories(root);
    const std::string out1 = (root / "a").string();
    const std::string out2 = (root / "b").string();

    // verify on EX2 passes and produces the expected artifacts
    check(run("verify --spec EX2 --steps 2000 --tol 1e-6 --out " + out1) == 0,
          "verify EX2 exits 0");
    check(fs::exists(fs::path(out1) / "report.json"), "report.json written");
    {
        const std::string report = slurp(fs::path(out1) / "report.json");
        check(report.find("\"phi_inverse\"") != std::string::npos, "report lists checks");
        check(report.find("\"H5\":{\"holds\":false") != std::string::npos,
              "report records that (H5) fails on EX2");
        check(report.find("\"all_pass\":true") != std::string::npos, "all checks pass");
    }

    // byte-identical reruns
    check(run("verify --spec EX2 --steps 2000 --tol 1e-6 --out " + out2) == 0,
          "verify rerun exits 0");
    check(slurp(fs::path(out1) / "report.json") == slurp(fs::path(out2) / "report.json"),
          "verify reports are byte-identical");

    // check subcommand
    check(run("check --spec EX2 --steps 2000 --out " + out1) == 0, "check EX2 exits 0");
    {
        const std::string a = slurp(fs::path(out1) / "assumptions.json");
        check(a.find("\"H3\":{\"holds\":true") != std::string::npos, "H3 holds");
        check(a.find("\"H5\":{\"holds\":false") != std::string::npos, "H5 fails");
        check(a.find("\"leader_concavity\":{\"holds\":true") != std::string::npos,
              "leader concavity holds");
    }

    // solve artifacts
    check(run("solve --spec EX2 --steps 200 --out " + out1) == 0, "solve exits 0");
    for (const char* f : {"P1.csv", "Sigma.csv", "P.csv"})
        check(fs::exists(fs::path(out1) / f), std::string(f) + " written");

    // equilibrium artifacts
    check(run("equilibrium --spec EX2 --steps 400 --x0 1 --out " + out1) == 0,
          "equilibrium exits 0");
    {
        const std::string v = slurp(fs::path(out1) / "values.json");
        check(v.find("\"stackelberg\":1.404") != std::string::npos,
              "stackelberg value near 1.4044");
        check(v.find("\"nash\":1.404") != std::string::npos, "nash value near 1.4044");
    }

    // simulate determinism
    check(run("simulate --spec RAND2 --steps 100 --paths 40 --seed 11 --x0 1,-0.5 --out "
              + out1) == 0,
          "simulate exits 0");
    check(run("simulate --spec RAND2 --steps 100 --paths 40 --seed 11 --x0 1,-0.5 --out "
              + out2) == 0,
          "simulate rerun exits 0");
    check(slurp(fs::path(out1) / "cost.json") == slurp(fs::path(out2) / "cost.json"),
          "cost.json byte-identical");
    check(slurp(fs::path(out1) / "trajectories.csv")
              == slurp(fs::path(out2) / "trajectories.csv"),
          "trajectories.csv byte-identical");

    // the scalar and SIMD kernel backends produce identical artifacts
    {
        const std::string base =
            "simulate --spec RAND2 --steps 100 --paths 40 --seed 11 --x0 1,-0.5 --out ";
        const int rs = std::system(("LQGAME_KERNELS=scalar " + std::string(LQGAME_CLI_PATH)
                                    + " " + base + out1 + " 2>/dev/null")
                                       .c_str());
        const int rv = std::system(("LQGAME_KERNELS=avx2 " + std::string(LQGAME_CLI_PATH)
                                    + " " + base + out2 + " 2>/dev/null")
                                       .c_str());
        check(WIFEXITED(rs) && WEXITSTATUS(rs) == 0 && WIFEXITED(rv)
                  && WEXITSTATUS(rv) == 0,
              "both kernel backends run");
        check(slurp(fs::path(out1) / "trajectories.csv")
                  == slurp(fs::path(out2) / "trajectories.csv"),
              "scalar and avx2 backends produce identical trajectories");
        check(slurp(fs::path(out1) / "cost.json") == slurp(fs::path(out2) / "cost.json"),
              "scalar and avx2 backends produce identical costs");
    }

    // a spec file (not a gallery name) through the whole verify pipeline
    {
        lqgame::write_spec(lqgame::gallery("EX2"), (root / "ex2.json").string());
        check(run("verify --spec " + (root / "ex2.json").string()
                  + " --steps 1000 --tol 1e-6 --out " + out1) == 0,
              "verify on a spec file exits 0");
    }

    // input errors -> exit 2
    check(run("solve --spec " + (root / "missing.json").string() + " --out " + out1) == 2,
          "missing spec file exits 2");
    {
        std::ofstream bad(root / "bad.json");
        bad << R"({"n":1,"m1":1,"m2":1,"T":0.0,"A":[[0.0]],"C":[[0.0]],"B1":[[1.0]],
                   "B2":[[-1.0]],"D1":[[0.0]],"D2":[[0.0]],"Q":[[1.0]],"R1":[[1.0]],
                   "R2":[[-2.0]],"G":[[0.0]]})";
    }
    check(run("solve --spec " + (root / "bad.json").string() + " --out " + out1) == 2,
          "nonpositive horizon exits 2");
    check(run("frobnicate --spec EX2") == 2, "unknown subcommand exits 2");

    // numerical failure -> exit 3
    {
        lqgame::GameSpec broken = lqgame::gallery("EX2");
        broken.R1 = lqgame::Coefficient::constant(lqgame::Matrix{{-1.0}});
        lqgame::write_spec(broken, (root / "broken.json").string());
    }
    check(run("solve --spec " + (root / "broken.json").string() + " --steps 100 --out "
              + out1) == 3,
          "lost regularity exits 3");

    std::cout << (failures == 0 ? "ALL CLI CHECKS PASSED\n" : "CLI CHECKS FAILED\n");
    return failures == 0 ? 0 : 1;
}
