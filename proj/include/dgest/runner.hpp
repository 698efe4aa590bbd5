// Batch drivers behind the CLI: single solves, convergence/effectivity
// studies and the verification suite. Kept in the library so the test
// binaries exercise the same code paths as the executable.
#pragma once

#include "dgest/estimator.hpp"
#include "dgest/report.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dgest {

struct StudyConfig {
    std::string preset = "heat_decay";
    std::vector<int> degrees{1};
    int levels = 1;
    int theta = 0;
    double c_sigma = 10.0;
    double dt = 0.0;        // explicit step; 0 selects dt_scale * h^{p+1}
    double dt_scale = 0.5;
    double t_final = -1.0;  // negative: preset default
    std::string out_dir = "out";
    unsigned long long seed = 20240817ULL;
    int base_nx = 4;
    bool dump_snapshots = false;

    void validate() const;  // throws std::invalid_argument on bad fields
};

struct StudyRow {
    std::string preset;
    int theta = 0;
    double c_sigma = 0.0;
    int p = 0;
    int level = 0;
    int nx = 0, ny = 0;
    double h_max = 0.0;
    int dofs = 0;
    double dt = 0.0;
    int steps = 0;
    double err_energy = 0.0;
    double estimator = 0.0;   // bound total (parabolic) or sqrt(E) (steady)
    double effectivity = 0.0;
    double term_elliptic = 0.0;
    double term_init_l2 = 0.0;
    double term_init_jump = 0.0;
    double term_sigma_jump = 0.0;
    double term_ut_jump = 0.0;
    double osc_total = 0.0;
    double rate_err = 0.0;    // least-squares slope of the (p)-series
    double rate_est = 0.0;
};

struct StudyResult {
    std::vector<StudyRow> rows;
    double measured_c3 = 0.0;
};

StudyResult run_study(const StudyConfig& config);
CsvTable study_to_csv(const StudyResult& result);
std::string study_to_svg(const StudyResult& result, const std::string& title);

struct SolveResult {
    StudyRow row;
    std::vector<std::pair<double, DgFunction>> snapshots;  // only when dumping
};

// One run at degrees.front() and level levels-1.
SolveResult run_solve(const StudyConfig& config);

// ---- verification ----

struct SuiteResult {
    std::string name;
    bool pass = false;
    std::string details;
};

struct OswaldConfigResult {
    int p = 0;
    int nx = 0;
    double c0 = 0.0;  // worst ratio in the L2 inequality
    double c1 = 0.0;  // worst ratio in the H1 inequality
};

struct OswaldMeasurement {
    std::vector<OswaldConfigResult> table;
    double c0_spread = 0.0;  // max/min across the whole grid
    double c1_spread = 0.0;
    double c0_growth = 0.0;  // grid max relative to the p = 1 values
    double c1_growth = 0.0;
    double c0_level_spread = 0.0;  // worst max/min across levels at fixed p
    double c1_level_spread = 0.0;
    double measured_c3 = 0.0;  // 2x the overall worst ratio
};

// Converged worst-case constants of the two averaging inequalities, computed
// as top generalized eigenvalues by seeded spectral ascent; `iterations`
// bounds the ascent length per restart.
OswaldMeasurement measure_oswald_constants(const std::vector<int>& degrees,
                                           const std::vector<int>& mesh_sizes, int iterations,
                                           unsigned long long seed);

struct VerifyReport {
    std::vector<SuiteResult> suites;
    OswaldMeasurement oswald;
    double measured_c3 = 0.0;
    bool all_pass = false;

    std::string to_text() const;
};

VerifyReport run_verify(const StudyConfig& config);

// least-squares slope of log(y) against log(x)
double fit_rate(const std::vector<double>& x, const std::vector<double>& y);

} // namespace dgest
