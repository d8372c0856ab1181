// Cauchy operators of x' = A(t) x, exponential stability constants, and the
// gap between the fast-oscillating flow and the averaged flow.
#pragma once

#include <cstddef>
#include <vector>

#include "bogolyubov/linalg.hpp"
#include "bogolyubov/recurrent.hpp"

namespace bogolyubov {

// =============================================================================
// Propagators
// =============================================================================

/// Default integration step for A(t / eps): min(1e-2, 0.1 eps).
double default_flow_step(double eps);

/// One classical Runge-Kutta step of U' = A(s) U. Work matrices are reused
/// across calls.
class FlowStepper {
public:
    explicit FlowStepper(const TimeVaryingOperator& a);
    /// Advances u from s to s + h in place.
    void step(double s, double h, Matrix& u);

private:
    const TimeVaryingOperator& a_;
    Matrix a0_, a1_, a2_, k1_, k2_, k3_, k4_, tmp_;
};

/// Throws StepSizeError when the RK4 local error proxy
/// (h (sup||A|| + rate))^5 / 120 exceeds 1e-6.
void check_flow_step(const TimeVaryingOperator& a, double step);

/// G_A(t, tau) = U(t) U(tau)^{-1}, integrated from tau to t.
Matrix cauchy_operator(const TimeVaryingOperator& a, double t, double tau, double step);

// =============================================================================
// Exponential stability fit
// =============================================================================

/// Base points tau and separations t - tau in [0, t_max] on a lattice of
/// spacing `step`; every lattice separation is recorded.
struct SamplingPlan {
    std::vector<double> base_points;
    double t_max = 20.0;
    double step = 1e-2;
};

/// Evenly spaced base points over one recurrence window of `a` (the period of
/// its slowest nonzero harmonic, or [0, 1] for constant operators).
SamplingPlan make_sampling_plan(const TimeVaryingOperator& a, double t_max, std::size_t n_base,
                                double step);

struct DichotomyCertificate {
    double N = 1.0;
    double nu = 0.0;
    /// max over samples of log||G|| - (log N - nu (t - tau)); <= 0.
    double residual = 0.0;
    double t_max = 0.0;
    double base_lo = 0.0;
    double base_hi = 0.0;
    std::size_t samples = 0;
};

/// Envelope y(Delta) = max over base points of log||G_A(tau + Delta, tau)||
/// on the plan's lattice.
std::vector<double> log_norm_envelope(const TimeVaryingOperator& a, const SamplingPlan& plan);

/// Fits ||G_A(t, tau)|| <= N exp(-nu (t - tau)). For each nu the smallest
/// dominating N is exp(max(y + nu Delta)); the returned nu is the largest one
/// whose binding separation stays within the first half of [0, t_max], so the
/// decay rate is supported by the data rather than by the end of the window.
/// Throws NotUniformlyStable when no nu > 1e-8 qualifies.
DichotomyCertificate fit_dichotomy(const TimeVaryingOperator& a, const SamplingPlan& plan);

/// Same fit applied to a precomputed envelope sampled every `step`.
DichotomyCertificate fit_dichotomy_envelope(const std::vector<double>& envelope, double step);

// =============================================================================
// Rescaled gap
// =============================================================================

struct GapRow {
    double eps = 0.0;
    double N_eps = 0.0;
    double witness_t = 0.0;
    double witness_tau = 0.0;
};

struct RescaledGapTable {
    double gamma0 = 0.0;
    std::vector<GapRow> rows;  // decreasing eps
};

struct GapOptions {
    double t_max = 20.0;
    std::size_t n_base = 64;
    double step = 0.0;  // 0 selects default_flow_step(eps)
    unsigned threads = 1;
};

/// N(eps) = max over sampled t >= tau of
/// exp(gamma0 (t - tau)) ||G_{A_eps}(t, tau) - exp(A_bar (t - tau))||
/// with A_eps(t) = A(t / eps). `nu_bar` is the decay rate fitted for the
/// averaged flow; gamma0 >= nu_bar is rejected.
RescaledGapTable rescaled_gap(const TimeVaryingOperator& a, const Matrix& a_bar,
                              std::vector<double> eps_list, double gamma0, double nu_bar,
                              const GapOptions& options = {});

// =============================================================================
// Damped convolution of a fast oscillation
// =============================================================================

struct DampedConvolution {
    double sup = 0.0;
    double argmax_t = 0.0;
    double tail_bound = 0.0;
};

/// sup over t of |int_{-inf}^t exp(-nu (t - s)) phi(s / eps) ds| for a
/// trigonometric factor phi. The integral is truncated where the remaining
/// tail is below 1e-12, evaluated by composite Gauss-Legendre quadrature, and
/// maximized over one period of phi(t / eps) by a grid scan followed by
/// Brent refinement.
DampedConvolution damped_convolution_sup(const TimeFactor& phi, double nu, double eps);

}  // namespace bogolyubov
