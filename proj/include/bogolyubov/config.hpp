// Scenario files, schema "bogolyubov/1".
//
// Line-oriented key = value text with [section] headers and '#' comments.
// Top level:  schema, name, dimension, recurrence, period, frequencies, eps0
// [operator]  base = MATRIX; harmonic = FREQ | MATRIX | MATRIX;
//             decay = RATE | MATRIX
// [drift], [diffusion]
//             constant = FACTOR | VECTOR; linear = FACTOR | MATRIX;
//             nonlinear = FACTOR | tanh|sin|bounded_quadratic | MATRIX;
//             certified_M = NUMBER; certified_L = NUMBER
// [experiment] see ExperimentConfig.
// MATRIX rows are separated by ';' and entries by ','. FACTOR is one of 1,
// cos(w), sin(w), decay(r), levitan_sin(w1, w2). Numbers accept pi, sqrt(x),
// and products such as 2*pi. Unknown keys are errors.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bogolyubov/recurrent.hpp"

namespace bogolyubov {

struct ExperimentConfig {
    std::vector<double> eps{0.2, 0.1, 0.05};
    std::vector<double> gap_eps{0.2, 0.1, 0.05, 0.02};
    double t_start = 0.0;
    double t_end = 5.0;
    double t_step = 0.1;
    double l2_dt_factor = 0.01;    // dt = factor * eps in the coupled L2 sweep
    double beta_dt_factor = 0.05;  // dt = factor * eps in the law sweep and probe
    std::size_t n_paths = 2000;
    std::size_t n_paths_beta = 10000;
    double burn_in = 0.0;  // 0 selects ln(100 N) / nu
    std::uint64_t seed = 20240601;
    double gamma0 = 0.0;  // 0 selects half the averaged decay rate
    double t_max = 20.0;
    std::size_t n_base = 64;
    std::size_t certificate_samples = 10000;
    double probe_eps = 0.1;
    std::vector<double> probe_shifts;  // empty: near-periods found automatically
    double probe_accuracy = 0.1;
    double probe_search_lo = 1.0;
    double probe_search_hi = 1500.0;
    double probe_search_step = 0.01;
    double probe_ap_window = 100.0;
    std::size_t probe_count = 3;
    double probe_window = 2.0;
    std::size_t probe_n_paths = 10000;
    double probe_threshold = 0.1;
    double probe_c_cap = 10.0;
    unsigned threads = 1;
};

struct ScenarioConfig {
    std::string name;
    CoefficientSystem system;
    ExperimentConfig experiment;
};

/// Parses a scenario; `origin` names the source in error messages.
ScenarioConfig parse_config(std::istream& in, const std::string& origin = "<config>");
ScenarioConfig load_config(const std::string& path);

/// Checks eps range, dt rule, grid alignment, and the declared certificates
/// (sampled). Throws ValidationError naming the first violated invariant.
void validate_config(const ScenarioConfig& config);

/// Number syntax used by scenario files.
double parse_number(const std::string& text);
std::vector<double> parse_list(const std::string& text);

}  // namespace bogolyubov
