#include "pscur/scenario.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

using namespace pscur;

void print_result(const RunResult& rr) {
    std::printf("scenario  %s  (kind %s, hash %s)%s\n", rr.name.c_str(), rr.kind.c_str(),
                rr.hash.c_str(), rr.from_cache ? "  [cached]" : "");
    if (!rr.cohom_checks.empty()) {
        for (const auto& c : rr.cohom_checks)
            std::printf("  %-44s %s\n", c.name.c_str(), c.pass ? "pass" : "FAIL");
    }
    std::printf("  value     %.12g %+.12gi\n", rr.value.real(), rr.value.imag());
    std::printf("  estimate  %.3g   cells %ld%s%s\n", rr.estimate, rr.cells,
                rr.flagged ? "  [budget flagged]" : "", rr.converged ? "" : "  [NOT CONVERGED]");
    if (rr.has_routes) {
        std::printf("  lhs       %.12g %+.12gi   (est %.3g)\n", rr.lhs.real(), rr.lhs.imag(),
                    rr.lhs_est);
        std::printf("  rhs       %.12g %+.12gi   (est %.3g)\n", rr.rhs.real(), rr.rhs.imag(),
                    rr.rhs_est);
        std::printf("  defect    %.12g %+.12gi   (est %.3g)\n", rr.defect.real(),
                    rr.defect.imag(), rr.defect_est);
    }
    for (const auto& eo : rr.expect_results) {
        std::printf("  expect %-7s %s: want %.9g%+.9gi tol %.3g -> got %.9g%+.9gi  %s\n",
                    eo.e.target.c_str(), eo.e.mode.c_str(), eo.e.want.real(), eo.e.want.imag(),
                    eo.e.tol, eo.got.real(), eo.got.imag(), eo.pass ? "pass" : "FAIL");
    }
    std::printf("  overall   %s\n", rr.pass ? "pass" : "FAIL");
}

int run_one(const Scenario& sc, const RunOptions& opt, const std::string& expect_kind) {
    if (!expect_kind.empty() && sc.kind != expect_kind) {
        std::fprintf(stderr, "error: scenario kind is '%s', expected '%s'\n", sc.kind.c_str(),
                     expect_kind.c_str());
        return 2;
    }
    RunResult rr = run_scenario(sc, opt);
    print_result(rr);
    return rr.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pscur: generalized Monge-Ampere products and pullbacks of pseudosmooth currents"};
    app.require_subcommand(0, 1);

    std::string scenario_path, oracle;
    RunOptions opt;
    bool list_examples = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--scenario", scenario_path, "scenario file to run");
        cmd->add_option("--oracle", oracle, "run a shipped oracle by name");
        cmd->add_flag("--list-examples", list_examples, "list the shipped oracle suite");
        cmd->add_option("--out", opt.out_dir, "report/cache directory");
        cmd->add_option("--workers", opt.workers, "quadrature worker threads");
        cmd->add_flag("--no-cache", opt.no_cache, "ignore cached records");
    };

    CLI::App* run = app.add_subcommand("run", "run a scenario or oracle");
    add_common(run);
    CLI::App* pb = app.add_subcommand("pullback", "run a pullback scenario");
    add_common(pb);
    CLI::App* cd = app.add_subcommand("compose-defect", "run a compose-defect scenario");
    add_common(cd);
    CLI::App* corr = app.add_subcommand("correspondence", "run a correspondence scenario");
    add_common(corr);
    CLI::App* cv = app.add_subcommand("cohom-verify", "verify the shipped cohomology identities");
    cv->add_option("--out", opt.out_dir, "report/cache directory");
    cv->add_flag("--no-cache", opt.no_cache, "ignore cached records");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cv->parsed()) {
            Scenario sc = make_oracle("cohom_identities");
            return run_one(sc, opt, "cohom-verify");
        }
        std::string expect_kind;
        if (pb->parsed()) expect_kind = "pullback";
        if (cd->parsed()) expect_kind = "compose-defect";
        if (corr->parsed()) expect_kind = "correspondence";

        if (list_examples) {
            for (const std::string& n : oracle_names()) std::printf("%s\n", n.c_str());
            return 0;
        }
        if (!oracle.empty()) {
            return run_one(make_oracle(oracle), opt, expect_kind);
        }
        if (!scenario_path.empty()) {
            Scenario sc;
            try {
                sc = parse_scenario_file(scenario_path);
            } catch (const std::exception& e) {
                std::fprintf(stderr, "parse error: %s\n", e.what());
                return 2;
            }
            return run_one(sc, opt, expect_kind);
        }
        std::fprintf(stderr, "nothing to do: pass --scenario, --oracle, or --list-examples\n");
        return 0;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
