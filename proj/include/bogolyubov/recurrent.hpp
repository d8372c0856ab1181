// Recurrent-in-time coefficient families.
//
// Coefficients are closed-form sums of (time factor) x (state term). Time
// factors are trigonometric, exponentially decaying, or the Levitan-modulated
// factor sin(1/(2 + cos w1 u + cos w2 u)); state terms are constant, linear, or
// a saturating nonlinearity. Each object carries a clock u = speed * t + offset
// so that shifts and time rescalings are exact phase bookkeeping.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bogolyubov/linalg.hpp"

namespace bogolyubov {

// =============================================================================
// Clock and time factors
// =============================================================================

struct Clock {
    double speed = 1.0;
    double offset = 0.0;

    double at(double t) const { return speed * t + offset; }
    /// phi^tau(t) = phi(t + tau)
    Clock shifted(double tau) const { return {speed, offset + speed * tau}; }
    /// t -> phi(t / eps)
    Clock rescaled(double eps) const { return {speed / eps, offset}; }
};

enum class FactorKind { constant, cosine, sine, decay, levitan_sin };

/// Scalar time profile with |value| <= 1.
struct TimeFactor {
    FactorKind kind = FactorKind::constant;
    double frequency = 0.0;   // cosine/sine frequency, decay rate, or first Levitan frequency
    double frequency2 = 0.0;  // second Levitan frequency

    static TimeFactor constant() { return {}; }
    static TimeFactor cosine(double w) { return {FactorKind::cosine, w, 0.0}; }
    static TimeFactor sine(double w) { return {FactorKind::sine, w, 0.0}; }
    static TimeFactor decay(double rate) { return {FactorKind::decay, rate, 0.0}; }
    static TimeFactor levitan_sin(double w1, double w2) { return {FactorKind::levitan_sin, w1, w2}; }

    double value(double u) const;
    /// Integral over [a, b] in the factor's own time variable.
    double integral(double a, double b) const;
    /// Long-run mean lim (1/T) int_t^{t+T}.
    double mean() const;
    bool has_closed_form_integral() const { return kind != FactorKind::levitan_sin; }
    /// Bound on |d/du value| used for step-size control.
    double rate() const;
    bool is_constant() const {
        return kind == FactorKind::constant || (kind == FactorKind::cosine && frequency == 0.0);
    }
    std::string describe() const;
};

/// 1 / (2 + cos t + cos(sqrt(2) t)): Levitan almost periodic, not Bohr.
double levitan_example(double t);

/// Mean over the 2-torus of sin(1/(2 + cos a + cos b)), which is the time
/// mean of the levitan_sin factor for rationally independent frequencies.
double levitan_sin_torus_mean();

// =============================================================================
// Recurrence classes
// =============================================================================

enum class RecurrenceTag {
    stationary,
    periodic,
    quasi_periodic,
    bohr_almost_periodic,
    levitan,
    pseudo_periodic,
    pseudo_recurrent,
    poisson_stable
};

struct RecurrenceClass {
    RecurrenceTag tag = RecurrenceTag::stationary;
    double period = 0.0;
    std::vector<double> frequencies;

    /// Pairwise integer-relation screen on quasi-periodic frequencies; throws
    /// ValidationError when two frequencies satisfy p*w1 = q*w2 with
    /// max(|p|,|q|) <= max_coefficient.
    void validate(double max_coefficient = 1e6) const;
};

std::string to_string(RecurrenceTag tag);
RecurrenceTag recurrence_tag_from_string(const std::string& name);

// =============================================================================
// Time-varying operator A(t)
// =============================================================================

struct Harmonic {
    double frequency = 0.0;
    Matrix cos_coef;
    Matrix sin_coef;
};

struct DecayTerm {
    Matrix matrix;
    double rate = 0.0;
};

/// A(t) = base + sum_h (C_h cos(w_h u) + S_h sin(w_h u)) + D exp(-rate |u|),
/// u = clock(t).
class TimeVaryingOperator {
public:
    TimeVaryingOperator() = default;
    explicit TimeVaryingOperator(Matrix base, std::vector<Harmonic> harmonics = {},
                                 std::optional<DecayTerm> decay = std::nullopt, Clock clock = {});

    int dim() const { return static_cast<int>(base_.rows()); }
    Matrix operator()(double t) const;
    /// Writes A(t) into `out` (pre-sized d x d).
    void evaluate_into(double t, Matrix& out) const;

    TimeVaryingOperator shifted(double tau) const;
    TimeVaryingOperator rescaled(double eps) const;

    /// ||base|| + sum(||C|| + ||S||) + ||D||
    double sup_norm_bound() const;
    /// Zero-frequency part: base plus cosine coefficients of zero-frequency
    /// harmonics.
    Matrix mean() const;
    /// (1/T) int_t^{t+T} A(s) ds in closed form.
    Matrix average(double t, double T) const;
    /// Fastest rate of change of the coefficients in physical time.
    double max_rate() const;
    bool is_constant() const;

    const Matrix& base() const { return base_; }
    const std::vector<Harmonic>& harmonics() const { return harmonics_; }
    const std::optional<DecayTerm>& decay() const { return decay_; }
    const Clock& clock() const { return clock_; }

private:
    Matrix base_;
    std::vector<Harmonic> harmonics_;
    std::optional<DecayTerm> decay_;
    Clock clock_;
};

// =============================================================================
// State fields F(t,x), G(t,x)
// =============================================================================

enum class Saturation { tanh, sine, bounded_quadratic };

std::string to_string(Saturation s);
Saturation saturation_from_string(const std::string& name);

/// Applies the saturating nonlinearity; Lipschitz constant 1 and value 0 at 0
/// for every member of the catalog.
Vector saturate(Saturation s, const Vector& x);

enum class TermKind { constant, linear, nonlinear };

struct FieldTerm {
    TimeFactor factor;
    TermKind kind = TermKind::constant;
    Vector vector;   // constant term
    Matrix matrix;   // linear term C x, or nonlinear term K n(x)
    Saturation saturation = Saturation::tanh;
};

struct Certificate {
    double M = 0.0;  // sup_t |field(t, 0)|
    double L = 0.0;  // global Lipschitz constant in x
};

/// Drift or diffusion field: sum_k factor_k(u) * term_k(x), u = clock(t).
class StateField {
public:
    StateField() = default;
    StateField(int dim, std::vector<FieldTerm> terms, Certificate certificate, Clock clock = {});

    static StateField zero(int dim);

    int dim() const { return dim_; }
    Vector operator()(double t, const Vector& x) const;

    /// Fast path for the simulators: evaluate all time factors once per step,
    /// then apply them to many states.
    std::size_t factor_count() const { return terms_.size(); }
    void factors_at(double t, std::span<double> out) const;
    void apply(std::span<const double> factors, const Vector& x, Vector& out) const;

    StateField shifted(double tau) const;
    StateField rescaled(double eps) const;
    /// Every time factor replaced by its long-run mean; certificate inherited.
    StateField averaged() const;
    /// (1/T) int_t^{t+T} field(s, x) ds, closed form for trigonometric and
    /// decaying factors, adaptive quadrature otherwise.
    Vector average(const Vector& x, double t, double T) const;

    /// Certified constants as declared.
    const Certificate& certificate() const { return certificate_; }
    /// Bounds derivable from the term structure (|factor| <= 1, Lip(n) = 1).
    Certificate analytic_bounds() const;

    bool is_state_independent() const;
    bool has_nonlinear_terms() const;
    bool is_time_independent() const;
    double max_rate() const;

    /// Sum of constant-term vectors, ignoring time factors; valid only for
    /// time-independent fields.
    Vector constant_part() const;
    /// Sum of linear-term matrices; valid only for time-independent fields.
    Matrix linear_part() const;

    const std::vector<FieldTerm>& terms() const { return terms_; }
    const Clock& clock() const { return clock_; }

private:
    int dim_ = 0;
    std::vector<FieldTerm> terms_;
    Certificate certificate_;
    Clock clock_;
};

// =============================================================================
// Coefficient system (A, F, G)
// =============================================================================

struct Evaluation {
    Matrix a;
    Vector f;
    Vector g;
};

struct CoefficientSystem {
    TimeVaryingOperator a;
    StateField drift;
    StateField diffusion;
    RecurrenceClass recurrence;
    double eps0 = 1.0;

    int dim() const { return a.dim(); }
    Evaluation evaluate(double t, const Vector& x) const;
    CoefficientSystem shifted(double tau) const;
    CoefficientSystem rescaled(double eps) const;
    /// M = max(M_F, M_G), L = max(L_F, L_G) from the declared certificates.
    Certificate certificate() const;
};

// =============================================================================
// Bebutov metric and almost periods
// =============================================================================

using ScalarFunction = std::function<double(double)>;
/// Pointwise distance rho(phi1(t), phi2(t)) for the metric of interest.
using PointwiseDistance = std::function<double(double)>;

struct BebutovDistance {
    double value = 0.0;
    double truncation_bound = 0.0;  // 2^{-k_max}
};

/// sum_{k=1}^{k_max} 2^{-k} d_k / (1 + d_k), d_k = max over the grid on
/// [-k, k] of rho(t).
BebutovDistance bebutov_distance(const PointwiseDistance& rho, int k_max, double grid_step);
BebutovDistance bebutov_distance(const ScalarFunction& phi1, const ScalarFunction& phi2, int k_max,
                                 double grid_step);

/// Pointwise distance between a system and its shift by tau: the maximum of
/// ||A^tau(t) - A(t)|| and the field gaps sampled on a fixed state set of
/// radius `state_radius`.
PointwiseDistance system_shift_distance(const CoefficientSystem& system, double tau,
                                        double state_radius = 1.0);

struct AlmostPeriodOptions {
    double window = 100.0;       // evaluation window [-W, W]
    double eval_step = 0.05;     // coarse scan step over the window
    double verify_step = 0.005;  // dense re-verification step
    unsigned threads = 1;
};

/// Shift discrepancy sup over the window of gap(t, tau).
using ShiftGap = std::function<double(double t, double tau)>;

/// Grid points tau in [lo, hi] with sup_{|t|<=W} gap(t, tau) < epsilon,
/// ascending. Candidates from the coarse scan are re-verified on a dense grid.
std::vector<double> find_almost_periods(const ShiftGap& gap, double epsilon, double lo, double hi,
                                        double grid_step, const AlmostPeriodOptions& options = {});
std::vector<double> find_almost_periods(const ScalarFunction& phi, double epsilon, double lo,
                                        double hi, double grid_step,
                                        const AlmostPeriodOptions& options = {});

/// Largest gap between consecutive entries, including the interval ends.
double max_consecutive_gap(const std::vector<double>& taus, double lo, double hi);

// =============================================================================
// Certificate verification
// =============================================================================

struct CertificateReport {
    std::string component;
    double certified_M = 0.0;
    double certified_L = 0.0;
    double worst_M_ratio = 0.0;  // max |field(t,0)| / M
    double worst_L_ratio = 0.0;  // max |field(t,x1)-field(t,x2)| / (L |x1-x2|)
    std::size_t samples = 0;
};

struct CertificateSampling {
    double time_range = 1000.0;
    double state_radius = 10.0;
};

/// Monte Carlo check of the (M, L) certificate of a single field. Throws
/// CertificateViolation naming the witness when a sample exceeds the
/// certificate by more than 1e-9 relative.
CertificateReport verify_field_certificate(const StateField& field, const std::string& component,
                                           std::size_t sample_count, std::uint64_t seed,
                                           const CertificateSampling& sampling = {});

/// Checks drift and diffusion of a system; returns one report per field.
std::vector<CertificateReport> verify_certificates(const CoefficientSystem& system,
                                                   std::size_t sample_count, std::uint64_t seed,
                                                   const CertificateSampling& sampling = {});

}  // namespace bogolyubov
