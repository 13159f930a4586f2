#pragma once

#include "pscur/cohom.hpp"
#include "pscur/pullback.hpp"

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pscur {

struct Expectation {
    std::string target = "value";  // value | lhs | rhs | defect
    std::complex<double> want{0.0, 0.0};
    double tol = 0.01;
    std::string mode = "rel";  // rel | abs | nonzero
};

/// A fully resolved desk experiment: named objects plus one run request.
/// Built either from a scenario file or programmatically (the oracle suite).
struct Scenario {
    std::string name;
    std::string kind;  // pair | m-limit | m-iterated | pullback | compose-defect |
                       // correspondence | cohom-verify
    int ambient = 0;
    std::vector<std::string> vars;  // ambient variable names (default z1..zN)

    std::map<std::string, PolySection> sections;
    std::map<std::string, PolyMap> maps;
    std::map<std::string, Current> currents;
    std::map<std::string, TestForm> testforms;
    std::vector<ChartSpec> charts;       // pullback atlas / compose-defect charts
    std::vector<CorrComponent> gamma;    // correspondence components
    Schedule schedule;
    Schedule schedule_inner;
    QuadSpec quad;
    std::map<std::string, std::string> run;  // kind-specific references
    std::vector<Expectation> expects;

    std::string canonical() const;
    std::uint64_t hash() const;
    std::string hash_hex() const;
};

/// Parse the line-oriented scenario text format (see docs/scenario-format.md).
Scenario parse_scenario_text(const std::string& text);
Scenario parse_scenario_file(const std::string& path);

struct RunOptions {
    std::string out_dir = ".pscur-out";
    int workers = 1;
    bool no_cache = false;
    bool quiet = false;
};

struct ExpectOutcome {
    Expectation e;
    std::complex<double> got{0.0, 0.0};
    double err = 0.0;
    bool pass = false;
};

struct RunResult {
    std::string name, kind, hash;
    std::complex<double> value{0.0, 0.0};
    double estimate = 0.0;
    bool converged = true;
    bool flagged = false;
    long cells = 0;

    bool has_routes = false;  // compose-defect extras
    std::complex<double> lhs{0.0, 0.0}, rhs{0.0, 0.0}, defect{0.0, 0.0};
    double lhs_est = 0.0, rhs_est = 0.0, defect_est = 0.0;

    std::vector<cohom::CheckResult> cohom_checks;
    std::vector<GroupTable> tables;
    std::vector<ExpectOutcome> expect_results;
    bool pass = true;
    double wall_ms = 0.0;   // never serialized into the record
    bool from_cache = false;

    int exit_code() const;                // 0 ok, 1 expectation, 3 non-convergence
    std::string record_text() const;      // deterministic, excludes wall time
    std::string convergence_csv() const;
};

/// Run a scenario; reads/writes <out>/<hash>.record and .convergence.csv,
/// appends a line to <out>/summary.csv.
RunResult run_scenario(const Scenario& sc, const RunOptions& opt);

/// The shipped paper-oracle suite (built-in scenarios).
std::vector<std::string> oracle_names();
Scenario make_oracle(const std::string& name);

/// Shared helpers for oracle construction and tests.
TestForm scalar_bump_test(int dim, std::vector<std::complex<double>> center, double radius,
                          double box_r);
FormExpr area_form(int dim, int var);  // (i/2) dz_var ^ dzbar_var

std::uint64_t fnv1a64(const std::string& s);

}  // namespace pscur
