// Averaged coefficients, decay moduli of the averaging error, and the
// contraction conditions for the bounded solution.
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bogolyubov/linear_flow.hpp"
#include "bogolyubov/recurrent.hpp"

namespace bogolyubov {

// =============================================================================
// Decay moduli
// =============================================================================

/// Smallest non-increasing step majorant of sampled averaging errors.
struct DecayModulus {
    std::vector<std::pair<double, double>> samples;  // (T, value), T increasing
    std::vector<double> envelope;                    // envelope[i] valid on [T_i, T_{i+1})
    bool limit = false;                              // last < 0.01 * first

    /// Envelope value at T (first value for T below the first sample).
    double operator()(double T) const;
    /// Vanishing within the sampled range, or identically negligible.
    bool vanishes() const;
};

DecayModulus fit_decay_modulus(std::vector<std::pair<double, double>> samples);

// =============================================================================
// Averages
// =============================================================================

/// (1/T) int_t^{t+T} A(s) ds.
Matrix average_operator(const TimeVaryingOperator& a, double T, double t);

/// (1/T) int_t^{t+T} F(s, x) ds.
Vector average_drift(const StateField& f, const Vector& x, double T, double t);

/// (1/T) int_t^{t+T} |G(s, x) - G_bar(x)|^2 ds by composite Gauss-Legendre
/// quadrature resolving the fastest time factor.
double average_diffusion_gap(const StateField& g, const StateField& g_bar, const Vector& x, double T,
                             double t);

struct ModulusSampling {
    std::vector<double> windows{1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1000.0};
    std::size_t time_samples = 16;
    double time_range = 1000.0;
    double state_radius = 2.0;
    std::uint64_t seed = 7;
};

struct AveragedSystem {
    Matrix a_bar;
    StateField f_bar;
    StateField g_bar;
    DecayModulus omega;   // operator averaging error
    DecayModulus omega1;  // drift error / (1 + |x|)
    DecayModulus omega2;  // quadratic diffusion gap / (1 + |x|^2)

    int dim() const { return static_cast<int>(a_bar.rows()); }
    /// Linear averaged equation: state-independent drift and diffusion.
    bool is_linear() const { return f_bar.is_state_independent() && g_bar.is_state_independent(); }
    /// Constant-coefficient averaged system viewed as a CoefficientSystem.
    CoefficientSystem as_system(double eps0 = 1.0) const;
};

/// Builds (A_bar, F_bar, G_bar) and samples the three decay moduli. Throws
/// ValidationError naming the failing averaging condition when a modulus
/// does not vanish over the sampled windows (for the diffusion this is the
/// quadratic-mean condition: persistent oscillation is inadmissible).
AveragedSystem average_system(const CoefficientSystem& system, const ModulusSampling& sampling = {});

// =============================================================================
// Contraction
// =============================================================================

struct ContractionReport {
    double N = 1.0;
    double nu = 0.0;
    double M = 0.0;
    double L = 0.0;
    /// L < nu / (N sqrt(2 + nu)): existence and uniqueness of the bounded solution.
    bool existence = false;
    /// L < nu / (2 N sqrt(1 + nu)): mean-square stability of the bounded solution.
    bool stability = false;
    /// L < nu / (sqrt(3) N sqrt(2 + nu)): averaging condition.
    bool averaging = false;
    double existence_bound = 0.0;
    double stability_bound = 0.0;
    double averaging_bound = 0.0;
    /// N M sqrt(2 + nu) / (nu - N L sqrt(2 + nu)) when the first inequality holds.
    std::optional<double> r;
};

ContractionReport verify_contraction(const DichotomyCertificate& cert, double M, double L);
ContractionReport verify_contraction(double N, double nu, double M, double L);

/// sup over tau in [0, l] of tau * psi(tau / eps), by grid scan and local
/// refinement.
double scaled_modulus_sup(const std::function<double(double)>& psi, double l, double eps);

}  // namespace bogolyubov
