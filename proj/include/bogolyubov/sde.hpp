// Euler-Maruyama simulation of the original, rescaled, and averaged
// equations, bounded solutions by burn-in, exact stationary sampling of the
// averaged linear equation, and coupled deviation statistics.
//
// Equations for a coefficient system (A, F, G) and scale eps:
//   original:  dX = eps (A(t) X + F(t, X)) dt + sqrt(eps) G(t, X) dW
//   rescaled:  dX = (A(t/eps) X + F(t/eps, X)) dt + G(t/eps, X) dW
//   averaged:  dX = (A_bar X + F_bar(X)) dt + G_bar(X) dW
// W is a one-dimensional Brownian motion. Increments live on the lattice
// t_n = origin + n dt (origin 0 unless SimulationOptions says otherwise) and
// are keyed by (seed, path, n), so two ensembles with the same seed, dt, and
// origin share their Brownian draws wherever their time ranges overlap.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bogolyubov/averaging.hpp"
#include "bogolyubov/linalg.hpp"
#include "bogolyubov/recurrent.hpp"

namespace bogolyubov {

// =============================================================================
// Models and ensembles
// =============================================================================

enum class EquationKind { original, rescaled, averaged };

struct EquationTag {
    EquationKind kind = EquationKind::averaged;
    double eps = 1.0;  // unused for the averaged equation

    static EquationTag original(double eps) { return {EquationKind::original, eps}; }
    static EquationTag rescaled(double eps) { return {EquationKind::rescaled, eps}; }
    static EquationTag averaged() { return {EquationKind::averaged, 1.0}; }
    std::string describe() const;
};

/// A coefficient system together with its averaged system.
struct Model {
    CoefficientSystem system;
    AveragedSystem averaged;

    int dim() const { return system.dim(); }
};

Model make_model(const CoefficientSystem& system, const ModulusSampling& sampling = {});

/// Coefficients and scale factors of one equation.
struct Dynamics {
    CoefficientSystem system;
    double drift_scale = 1.0;
    double noise_scale = 1.0;
    EquationTag tag;
};

Dynamics make_dynamics(const Model& model, EquationTag tag);

struct TimeGrid {
    double start = 0.0;
    double step = 1.0;
    std::size_t count = 1;

    double at(std::size_t k) const { return start + step * static_cast<double>(k); }
    double end() const { return at(count - 1); }
};

struct PathEnsemble {
    std::vector<double> times;
    std::size_t n_paths = 0;
    int dim = 0;
    std::vector<double> values;  // [(path * times.size() + k) * dim + i]
    std::uint64_t seed = 0;
    EquationTag equation;
    bool shared_brownian = false;
    std::uint64_t brownian_id = 0;
    double bias_bound = 0.0;  // certified burn-in truncation bias (0 if none)

    std::size_t n_times() const { return times.size(); }
    double at(std::size_t path, std::size_t k, int i = 0) const {
        return values[(path * times.size() + k) * static_cast<std::size_t>(dim) + static_cast<std::size_t>(i)];
    }
    double& at(std::size_t path, std::size_t k, int i = 0) {
        return values[(path * times.size() + k) * static_cast<std::size_t>(dim) + static_cast<std::size_t>(i)];
    }
    Vector state(std::size_t path, std::size_t k) const;
    /// All samples at time index k.
    std::vector<Vector> snapshot(std::size_t k) const;
    /// Component i across paths at time index k.
    std::vector<double> component(std::size_t k, int i = 0) const;
};

struct SimulationOptions {
    unsigned threads = 1;
    std::size_t block_size = 256;  // paths advanced together per worker task
    double lattice_origin = 0.0;   // lattice is t_n = lattice_origin + n dt
};

// =============================================================================
// Simulation
// =============================================================================

/// Euler-Maruyama paths from x0 at t0 to t1, recording every `record_stride`
/// lattice steps (t0 must lie on the dt lattice). Rescaled equations require
/// dt <= 0.1 eps.
PathEnsemble simulate_em(const Model& model, EquationTag tag, const Vector& x0, double t0, double t1,
                         double dt, std::size_t n_paths, std::uint64_t seed,
                         std::size_t record_stride = 1, const SimulationOptions& options = {});

/// Smallest burn-in with memory N exp(-nu T_b) <= 1%.
double default_burn_in(double N, double nu);

/// Bounded solution on `grid`: Euler-Maruyama from 0 at the lattice point
/// floor((grid.start - burn_in) / dt). The contraction constants must refer
/// to the equation being simulated. Refuses to run (ContractionRefused) when
/// the existence inequality fails; burn_in below ln(100 N)/nu is a
/// precondition error. bias_bound = N exp(-nu burn_in) r.
PathEnsemble bounded_solution(const Model& model, EquationTag tag, const TimeGrid& grid, double burn_in,
                              double dt, std::size_t n_paths, std::uint64_t seed,
                              const ContractionReport& contraction,
                              const SimulationOptions& options = {});

/// Same burn-in protocol without the contraction gate (bias_bound = 0).
PathEnsemble burn_in_solution(const Model& model, EquationTag tag, const TimeGrid& grid, double burn_in,
                              double dt, std::size_t n_paths, std::uint64_t seed,
                              const SimulationOptions& options = {});

/// Solution of dX = (A(t) X + f(t)) dt + g(t) dW as the discretized
/// variation-of-constants sum
///   X(t) = sum_k G_A(t, s_k) (f(s_k) dt + g(s_k) dW_k)
/// started at the same lattice point as burn_in_solution and evaluated by
/// the recursion Y_{k+1} = G_A(s_{k+1}, s_k)(Y_k + f_k dt + g_k dW_k) with RK4
/// propagators. f and g must be state independent.
PathEnsemble stochastic_convolution_linear(const TimeVaryingOperator& a, const StateField& f,
                                           const StateField& g, const TimeGrid& grid, double burn_in,
                                           double dt, std::size_t n_paths, std::uint64_t seed,
                                           const SimulationOptions& options = {});

enum class StationaryMode { exact_gaussian, long_run };

struct StationaryOptions {
    double burn_in = 20.0;  // long_run only
    double dt = 1e-3;       // long_run only
    SimulationOptions simulation;
};

/// Stationary solution of the averaged equation on `grid`. exact_gaussian
/// draws X_0 ~ N(mu, P) and X_{k+1} = mu + E (X_k - mu) + eta_k with
/// E = exp(A_bar step), cov(eta) = P - E P E^T; it requires a linear averaged
/// system with Hurwitz A_bar.
PathEnsemble sample_averaged_stationary(const AveragedSystem& avg, const TimeGrid& grid,
                                        std::size_t n_paths, std::uint64_t seed, StationaryMode mode,
                                        const StationaryOptions& options = {});

// =============================================================================
// Statistics
// =============================================================================

/// Fixed-order pairwise summation.
double pairwise_sum(const double* x, std::size_t n);

struct SolutionStatistics {
    std::vector<double> times;
    std::vector<Vector> mean;
    std::vector<double> second_moment;     // E|X(t)|^2
    std::vector<double> second_moment_se;
    std::vector<double> deviation;         // E|X1(t) - X2(t)|^2 (coupled only)
    std::vector<double> deviation_se;
    double sup_deviation = 0.0;
    double sup_deviation_se = 0.0;
    std::size_t sup_index = 0;
    std::size_t n_paths = 0;
};

SolutionStatistics summarize(const PathEnsemble& ensemble);

/// Per-time E|X1 - X2|^2 for two ensembles driven by the same Brownian
/// increments path by path. Grids, path counts, seeds must agree.
SolutionStatistics coupled_deviation(const PathEnsemble& first, const PathEnsemble& second);

/// Rescaled(eps) and averaged bounded solutions on one Brownian motion, both
/// started from 0 at the same lattice point, and their deviation statistics.
/// Requires dt <= 0.1 eps.
SolutionStatistics coupled_deviation(const Model& model, double eps, const TimeGrid& grid, double dt,
                                     std::size_t n_paths, std::uint64_t seed, double burn_in,
                                     const SimulationOptions& options = {});

/// rescaled(eps) -> original(eps): times t -> t / eps, values unchanged.
PathEnsemble rescale_time(const PathEnsemble& ensemble);
/// original(eps) -> rescaled(eps): times t -> eps t.
PathEnsemble inverse_rescale_time(const PathEnsemble& ensemble);

struct ModulusRow {
    double h = 0.0;
    double value = 0.0;  // E|X(t+h) - X(t)|^2 averaged over t
    double se = 0.0;
};

struct ContinuityModulus {
    std::vector<ModulusRow> rows;
    double slope = 0.0;      // least squares through the origin
    double r_squared = 1.0;  // 1 - SS_res / SS_tot about the mean
};

/// Empirical increment modulus for lags 1..max_lag grid steps (>= 4 lags).
ContinuityModulus continuity_modulus(const PathEnsemble& ensemble, std::size_t max_lag = 10);

}  // namespace bogolyubov
