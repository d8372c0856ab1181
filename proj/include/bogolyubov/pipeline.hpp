// Scenario runner: executes the experiment stages in order and writes one CSV
// per stage plus a plain-text summary.
//
// Stages and artifacts:
//   certificates.csv  sampled M/L certificate check
//   averaging.csv     decay moduli of the averaged coefficients
//   stability.csv     dichotomy fits, uniform constants, contraction report
//   gap_table.csv     rescaled-gap constants N(eps)
//   l2_sweep.csv      coupled mean-square deviation and boundedness check
//   beta_sweep.csv    law convergence grid
//   comparability.csv shift-comparability probe
//   summary.txt       rendered by report() from the CSVs alone
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bogolyubov/config.hpp"
#include "bogolyubov/metrics.hpp"

namespace bogolyubov {

inline const std::vector<std::string>& artifact_names() {
    static const std::vector<std::string> names{"certificates.csv", "averaging.csv",   "stability.csv",
                                                "gap_table.csv",    "l2_sweep.csv",    "beta_sweep.csv",
                                                "comparability.csv"};
    return names;
}

struct Verdict {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct RunResult {
    std::string out_dir;
    std::vector<Verdict> verdicts;
    bool all_pass() const;
};

/// Validates the config and runs every stage into `out_dir` (created if
/// missing). Validation problems throw before any simulation starts; a failing
/// contraction inequality throws ContractionRefused.
RunResult run_scenario(const ScenarioConfig& config, const std::string& out_dir);

struct ConvergenceRow {
    double eps = 0.0;
    double sup_l2 = 0.0;
    double sup_l2_se = 0.0;
    double sup_beta = 0.0;
    double noise_floor = 0.0;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;  // decreasing eps
    std::optional<bool> l2_decreasing;    // absent for a single row
    std::optional<bool> beta_decreasing;
};

/// Coupled L2 and beta sweeps over `eps_list` (overriding the config list).
ConvergenceTable sweep_epsilon(const ScenarioConfig& config, const std::vector<double>& eps_list);

void write_convergence_csv(std::ostream& os, const ConvergenceTable& table);

/// The comparability probe stage alone, with shifts chosen as in
/// run_scenario (explicit probe_shifts, or near-periods found on the
/// coefficients).
ProbeReport recurrence_probe(const ScenarioConfig& config);

/// Reads the stage CSVs in `dir` and renders verdicts, constants, and
/// convergence tables. Throws ValidationError naming the first missing or
/// malformed artifact. Output depends only on the CSV contents.
std::string report(const std::string& dir);

/// Verdicts computed by report(), without the rendering.
std::vector<Verdict> artifact_verdicts(const std::string& dir);

}  // namespace bogolyubov
