// Bounded-Lipschitz distance between empirical laws, law convergence sweeps,
// and the shift-comparability probe.
//
// beta(mu, nu) = sup { |int f dmu - int f dnu| : Lip(f) + sup|f| <= 1 }.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bogolyubov/linalg.hpp"
#include "bogolyubov/recurrent.hpp"
#include "bogolyubov/sde.hpp"

namespace bogolyubov {

// =============================================================================
// beta distance
// =============================================================================

struct EmpiricalLaw {
    std::vector<Vector> samples;
    std::string source;

    EmpiricalLaw() = default;
    explicit EmpiricalLaw(std::vector<Vector> s, std::string src = {});
    /// Scalar samples as a one-dimensional law.
    static EmpiricalLaw scalar(const std::vector<double>& x, std::string src = {});

    int dim() const { return samples.empty() ? 0 : static_cast<int>(samples.front().size()); }
    std::size_t size() const { return samples.size(); }
};

enum class BetaMethod { exact_1d, randomized_lower_bound };

std::string to_string(BetaMethod m);

struct BetaEstimate {
    double value = 0.0;
    BetaMethod method = BetaMethod::exact_1d;
    std::size_t family_size = 0;  // test functions tried (lower-bound mode)
    double lipschitz = 0.0;       // Lipschitz share of the optimal split (exact mode)
};

struct BetaOptions {
    std::size_t directions = 32;  // random projections, each solved exactly in 1-D
    std::size_t bumps = 256;      // tent functions around sample points
    std::size_t hinges = 256;     // clipped ramps along random directions
    bool projections = true;
    std::uint64_t seed = 1;
};

/// Exact beta between two weighted point sets on the line. For a fixed
/// Lipschitz share l the sup is a linear program over the values at the
/// pooled support; it is solved by a concave piecewise-linear dynamic
/// program, and the concave dependence on l is maximized by golden section.
BetaEstimate beta_exact_1d(std::vector<double> x, std::vector<double> y);

/// Lower bound from an explicit family of test functions with
/// Lip(f) + sup|f| <= 1.
BetaEstimate beta_lower_bound(const EmpiricalLaw& mu, const EmpiricalLaw& nu, const BetaOptions& options = {});

/// Exact in d = 1, lower bound otherwise.
BetaEstimate beta_distance(const EmpiricalLaw& mu, const EmpiricalLaw& nu, const BetaOptions& options = {});

/// Split-half self distance averaged over `shuffles` random splits.
double noise_floor(const EmpiricalLaw& law, std::size_t shuffles = 5, std::uint64_t seed = 11,
                   const BetaOptions& options = {});

// =============================================================================
// Law convergence
// =============================================================================

struct BetaCell {
    double eps = 0.0;
    double t = 0.0;
    double beta = 0.0;
    double noise_floor = 0.0;
    std::size_t n_samples = 0;
};

struct BetaRow {
    double eps = 0.0;
    double sup_beta = 0.0;
    double argmax_t = 0.0;
    double noise_floor = 0.0;  // split-half floor of the sup statistic (SplitHalfFloor::sup)
};

struct LawSweep {
    std::vector<BetaCell> cells;
    std::vector<BetaRow> rows;  // one per eps, in input order
};

struct LawSweepOptions {
    double burn_in = 10.0;
    double dt_factor = 0.05;  // dt = dt_factor * eps for the rescaled equation
    double averaged_dt = 0.0; // 0 selects the smallest rescaled dt
    std::size_t floor_shuffles = 5;
    SimulationOptions simulation;
    BetaOptions beta;
};

/// For each eps: beta(L(phi_eps(t)), L(phi_bar(t))) over the grid, where
/// phi_eps solves the rescaled equation (the law of the original solution at
/// t / eps) and phi_bar the averaged one, with independent Brownian motions.
LawSweep law_convergence_sweep(const Model& model, const std::vector<double>& eps_list, const TimeGrid& grid,
                               std::size_t n_paths, std::uint64_t seed, const LawSweepOptions& options = {});

/// Split-half self distance of an ensemble, splitting whole paths: for each
/// of `shuffles` random splits, beta between the halves at every grid time.
/// per_time averages over splits; sup averages the per-split maximum over the
/// grid, the floor matching a sup-over-grid distance.
struct SplitHalfFloor {
    std::vector<double> per_time;
    double sup = 0.0;
};

SplitHalfFloor split_half_floor(const PathEnsemble& ensemble, std::size_t shuffles = 5, std::uint64_t seed = 11,
                                const BetaOptions& options = {});

/// Per-time beta between two ensembles on grids of equal length and the
/// split-half floor of the first; returns cells with eps = 0.
std::vector<BetaCell> ensemble_beta(const PathEnsemble& a, const PathEnsemble& b,
                                    std::size_t floor_shuffles = 5, const BetaOptions& options = {});

// =============================================================================
// Comparability probe
// =============================================================================

/// Produces an ensemble of the solution on the requested grid; distinct
/// seeds must give independent ensembles.
using EnsembleProvider = std::function<PathEnsemble(const TimeGrid& grid, std::uint64_t seed)>;

struct ProbeRow {
    double shift = 0.0;
    double coefficient_distance = 0.0;  // d_n
    double law_distance = 0.0;          // s_n
    bool in_hypothesis = false;         // d_n <= hypothesis_threshold
};

struct ProbeReport {
    std::vector<ProbeRow> rows;
    double noise_floor = 0.0;
    double fitted_c = 0.0;
    bool pass = false;
    std::string message;
};

struct ProbeOptions {
    double window = 2.0;       // compact window [0, window] for the laws
    double grid_step = 0.1;
    int k_max = 10;            // Bebutov truncation
    double bebutov_step = 0.01;
    double state_radius = 1.0;
    double shift_lattice = 0.0;  // shifts are rounded to multiples of this (0 = as given)
    double hypothesis_threshold = 0.1;  // shifts with larger d_n are reported only
    double c_cap = 10.0;
    std::size_t floor_shuffles = 5;
    std::uint64_t seed = 3;
    BetaOptions beta;
};

/// For each shift t_n: d_n = Bebutov distance between the system and its
/// shift, s_n = max over the window grid of beta(L(xi(t + t_n)), L(xi(t))).
/// Fitted c = max over hypothesis rows of (s_n - floor)_+ / d_n; the probe
/// passes when c <= c_cap (a hypothesis row with d_n = 0 needs s_n <= floor).
ProbeReport comparability_probe(const CoefficientSystem& system, const EnsembleProvider& provider,
                                const std::vector<double>& shifts, const ProbeOptions& options = {});

}  // namespace bogolyubov
