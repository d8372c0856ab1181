#include "bogolyubov/recurrent.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "bogolyubov/errors.hpp"
#include "bogolyubov/parallel.hpp"
#include "bogolyubov/rng.hpp"

namespace bogolyubov {

namespace {

constexpr double kPi = std::numbers::pi;

double levitan_sin_value(double w1, double w2, double u) {
    const double den = 2.0 + std::cos(w1 * u) + std::cos(w2 * u);
    if (den <= 0.0) return 0.0;
    return std::sin(1.0 / den);
}

// Composite adaptive Gauss-Kronrod over pieces no longer than `piece`.
template <class F>
double composite_integral(F&& f, double a, double b, double piece) {
    if (a == b) return 0.0;
    const double sign = b > a ? 1.0 : -1.0;
    const double lo = std::min(a, b);
    const double hi = std::max(a, b);
    const auto pieces = static_cast<std::size_t>(std::ceil((hi - lo) / piece));
    const double h = (hi - lo) / static_cast<double>(std::max<std::size_t>(pieces, 1));
    double total = 0.0;
    for (std::size_t i = 0; i < std::max<std::size_t>(pieces, 1); ++i) {
        const double x0 = lo + h * static_cast<double>(i);
        const double x1 = (i + 1 == pieces) ? hi : x0 + h;
        total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, x0, x1, 12, 1e-11);
    }
    return sign * total;
}

// Density of cos a + cos b for a, b uniform on the circle: K(k)/pi^2 with
// complementary modulus k' = |s|/2. K = pi / (2 agm(1, k')) stays accurate
// near the log singularity at s = 0.
double cosine_sum_density(double s) {
    const double kc = 0.5 * std::abs(s);
    if (kc >= 1.0) return 0.0;
    double a = 1.0, b = std::max(kc, 1e-300);
    for (int i = 0; i < 64 && a - b > 4e-16 * a; ++i) {
        const double next = 0.5 * (a + b);
        b = std::sqrt(a * b);
        a = next;
    }
    return kPi / (2.0 * a) / (kPi * kPi);
}

double compute_levitan_sin_mean() {
    // E[sin(1/D)], D = 2 + cos a + cos b in (0, 4).
    auto body = [](double d) { return std::sin(1.0 / d) * cosine_sum_density(d - 2.0); };
    boost::math::quadrature::tanh_sinh<double> ts;
    double total = 0.0;
    const double cuts[] = {0.05, 1.0, 2.0, 3.0, 4.0};
    for (int i = 0; i + 1 < 5; ++i) total += ts.integrate(body, cuts[i], cuts[i + 1], 1e-12);
    // D in (0, 0.05]: substitute y = 1/D; oscillatory tail integrated period
    // by period.
    auto tail = [](double y) { return std::sin(y) * cosine_sum_density(1.0 / y - 2.0) / (y * y); };
    double y = 20.0;
    const double y_end = 2.0e4;
    while (y < y_end) {
        total += boost::math::quadrature::gauss_kronrod<double, 21>::integrate(tail, y, y + kPi, 8,
                                                                                1e-13);
        y += kPi;
    }
    // Leading term of the remainder after integrating by parts once.
    total += cosine_sum_density(1.0 / y - 2.0) / (y * y) * std::cos(y);
    return total;
}

double norm_or_zero(const Matrix& m) { return m.size() == 0 ? 0.0 : operator_norm(m); }

}  // namespace

// =============================================================================
// TimeFactor
// =============================================================================

double TimeFactor::value(double u) const {
    switch (kind) {
        case FactorKind::constant: return 1.0;
        case FactorKind::cosine: return std::cos(frequency * u);
        case FactorKind::sine: return std::sin(frequency * u);
        case FactorKind::decay: return std::exp(-frequency * std::abs(u));
        case FactorKind::levitan_sin: return levitan_sin_value(frequency, frequency2, u);
    }
    return 0.0;
}

double TimeFactor::integral(double a, double b) const {
    switch (kind) {
        case FactorKind::constant: return b - a;
        case FactorKind::cosine:
            if (frequency == 0.0) return b - a;
            return (std::sin(frequency * b) - std::sin(frequency * a)) / frequency;
        case FactorKind::sine:
            if (frequency == 0.0) return 0.0;
            return (std::cos(frequency * a) - std::cos(frequency * b)) / frequency;
        case FactorKind::decay: {
            if (frequency == 0.0) return b - a;
            auto anti = [r = frequency](double u) {
                return std::copysign((1.0 - std::exp(-r * std::abs(u))) / r, u);
            };
            return anti(b) - anti(a);
        }
        case FactorKind::levitan_sin: {
            const double w = std::max({std::abs(frequency), std::abs(frequency2), 1e-12});
            return composite_integral([this](double u) { return value(u); }, a, b, 0.5 * kPi / w);
        }
    }
    return 0.0;
}

double TimeFactor::mean() const {
    switch (kind) {
        case FactorKind::constant: return 1.0;
        case FactorKind::cosine: return frequency == 0.0 ? 1.0 : 0.0;
        case FactorKind::sine: return 0.0;
        case FactorKind::decay: return frequency == 0.0 ? 1.0 : 0.0;
        case FactorKind::levitan_sin: return levitan_sin_torus_mean();
    }
    return 0.0;
}

double TimeFactor::rate() const {
    switch (kind) {
        case FactorKind::constant: return 0.0;
        case FactorKind::cosine:
        case FactorKind::sine:
        case FactorKind::decay: return std::abs(frequency);
        case FactorKind::levitan_sin: return std::max(std::abs(frequency), std::abs(frequency2));
    }
    return 0.0;
}

std::string TimeFactor::describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind) {
        case FactorKind::constant: os << "1"; break;
        case FactorKind::cosine: os << "cos(" << frequency << ")"; break;
        case FactorKind::sine: os << "sin(" << frequency << ")"; break;
        case FactorKind::decay: os << "decay(" << frequency << ")"; break;
        case FactorKind::levitan_sin: os << "levitan_sin(" << frequency << ", " << frequency2 << ")"; break;
    }
    return os.str();
}

double levitan_example(double t) {
    return 1.0 / (2.0 + std::cos(t) + std::cos(std::numbers::sqrt2 * t));
}

double levitan_sin_torus_mean() {
    static const double mean = compute_levitan_sin_mean();
    return mean;
}

// =============================================================================
// RecurrenceClass
// =============================================================================

void RecurrenceClass::validate(double max_coefficient) const {
    if (tag == RecurrenceTag::periodic && !(period > 0.0)) {
        throw ValidationError("periodic recurrence class requires a positive period");
    }
    if (tag != RecurrenceTag::quasi_periodic) return;
    if (frequencies.size() < 2) {
        throw ValidationError("quasi_periodic recurrence class needs at least two frequencies");
    }
    for (std::size_t i = 0; i < frequencies.size(); ++i) {
        for (std::size_t j = i + 1; j < frequencies.size(); ++j) {
            const double a = std::abs(frequencies[i]);
            const double b = std::abs(frequencies[j]);
            if (a == 0.0 || b == 0.0 || a == b) {
                throw ValidationError("quasi_periodic frequencies must be nonzero and distinct");
            }
            // Continued-fraction convergents p/q of a/b.
            double x = a / b;
            double p0 = 1.0, q0 = 0.0, p1 = std::floor(x), q1 = 1.0;
            double frac = x - std::floor(x);
            while (true) {
                if (std::abs(q1 * a - p1 * b) <= 1e-14 * std::max(a, b) * q1) {
                    std::ostringstream os;
                    os << "quasi_periodic frequencies " << frequencies[i] << " and " << frequencies[j]
                       << " satisfy the integer relation " << q1 << "*w1 = " << p1 << "*w2";
                    throw ValidationError(os.str());
                }
                if (frac < 1e-15) break;
                x = 1.0 / frac;
                const double digit = std::floor(x);
                frac = x - digit;
                const double p2 = digit * p1 + p0;
                const double q2 = digit * q1 + q0;
                if (q2 > max_coefficient || p2 > max_coefficient) break;
                p0 = p1; q0 = q1; p1 = p2; q1 = q2;
            }
        }
    }
}

std::string to_string(RecurrenceTag tag) {
    switch (tag) {
        case RecurrenceTag::stationary: return "stationary";
        case RecurrenceTag::periodic: return "periodic";
        case RecurrenceTag::quasi_periodic: return "quasi_periodic";
        case RecurrenceTag::bohr_almost_periodic: return "bohr_almost_periodic";
        case RecurrenceTag::levitan: return "levitan";
        case RecurrenceTag::pseudo_periodic: return "pseudo_periodic";
        case RecurrenceTag::pseudo_recurrent: return "pseudo_recurrent";
        case RecurrenceTag::poisson_stable: return "poisson_stable";
    }
    return "unknown";
}

RecurrenceTag recurrence_tag_from_string(const std::string& name) {
    for (auto tag : {RecurrenceTag::stationary, RecurrenceTag::periodic, RecurrenceTag::quasi_periodic,
                     RecurrenceTag::bohr_almost_periodic, RecurrenceTag::levitan,
                     RecurrenceTag::pseudo_periodic, RecurrenceTag::pseudo_recurrent,
                     RecurrenceTag::poisson_stable}) {
        if (to_string(tag) == name) return tag;
    }
    throw ValidationError("unknown recurrence class '" + name + "'");
}

// =============================================================================
// TimeVaryingOperator
// =============================================================================

TimeVaryingOperator::TimeVaryingOperator(Matrix base, std::vector<Harmonic> harmonics,
                                         std::optional<DecayTerm> decay, Clock clock)
    : base_(std::move(base)), harmonics_(std::move(harmonics)), decay_(std::move(decay)), clock_(clock) {
    if (base_.rows() != base_.cols() || base_.rows() < 1 || base_.rows() > kMaxDimension) {
        throw InvalidArgument("TimeVaryingOperator: base must be square with 1 <= d <= 16");
    }
    require_finite(base_, "TimeVaryingOperator base");
    const auto d = base_.rows();
    for (auto& h : harmonics_) {
        if (h.cos_coef.size() == 0) h.cos_coef = Matrix::Zero(d, d);
        if (h.sin_coef.size() == 0) h.sin_coef = Matrix::Zero(d, d);
        if (h.cos_coef.rows() != d || h.cos_coef.cols() != d || h.sin_coef.rows() != d ||
            h.sin_coef.cols() != d) {
            throw InvalidArgument("TimeVaryingOperator: harmonic coefficient dimension mismatch");
        }
        require_finite(h.cos_coef, "harmonic cos coefficient");
        require_finite(h.sin_coef, "harmonic sin coefficient");
        if (!std::isfinite(h.frequency)) throw InvalidArgument("harmonic frequency not finite");
    }
    if (decay_) {
        if (decay_->matrix.rows() != d || decay_->matrix.cols() != d) {
            throw InvalidArgument("TimeVaryingOperator: decay matrix dimension mismatch");
        }
        if (!(decay_->rate >= 0.0)) throw InvalidArgument("TimeVaryingOperator: negative decay rate");
    }
}

Matrix TimeVaryingOperator::operator()(double t) const {
    Matrix out(base_.rows(), base_.cols());
    evaluate_into(t, out);
    return out;
}

void TimeVaryingOperator::evaluate_into(double t, Matrix& out) const {
    const double u = clock_.at(t);
    out = base_;
    for (const auto& h : harmonics_) {
        const double wu = h.frequency * u;
        out.noalias() += std::cos(wu) * h.cos_coef;
        out.noalias() += std::sin(wu) * h.sin_coef;
    }
    if (decay_) out.noalias() += std::exp(-decay_->rate * std::abs(u)) * decay_->matrix;
}

TimeVaryingOperator TimeVaryingOperator::shifted(double tau) const {
    auto copy = *this;
    copy.clock_ = clock_.shifted(tau);
    return copy;
}

TimeVaryingOperator TimeVaryingOperator::rescaled(double eps) const {
    if (!(eps > 0.0)) throw InvalidArgument("rescaled: eps must be positive");
    auto copy = *this;
    copy.clock_ = clock_.rescaled(eps);
    return copy;
}

double TimeVaryingOperator::sup_norm_bound() const {
    double bound = norm_or_zero(base_);
    for (const auto& h : harmonics_) bound += norm_or_zero(h.cos_coef) + norm_or_zero(h.sin_coef);
    if (decay_) bound += norm_or_zero(decay_->matrix);
    return bound;
}

Matrix TimeVaryingOperator::mean() const {
    Matrix m = base_;
    for (const auto& h : harmonics_) {
        if (h.frequency == 0.0) m += h.cos_coef;
    }
    if (decay_ && decay_->rate == 0.0) m += decay_->matrix;
    return m;
}

Matrix TimeVaryingOperator::average(double t, double T) const {
    if (!(T > 0.0)) throw InvalidArgument("average_operator: T must be positive");
    const double u0 = clock_.at(t);
    const double u1 = clock_.at(t + T);
    const double scale = 1.0 / (u1 - u0);
    Matrix avg = base_;
    for (const auto& h : harmonics_) {
        avg += scale * TimeFactor::cosine(h.frequency).integral(u0, u1) * h.cos_coef;
        avg += scale * TimeFactor::sine(h.frequency).integral(u0, u1) * h.sin_coef;
    }
    if (decay_) avg += scale * TimeFactor::decay(decay_->rate).integral(u0, u1) * decay_->matrix;
    return avg;
}

double TimeVaryingOperator::max_rate() const {
    double w = 0.0;
    for (const auto& h : harmonics_) w = std::max(w, std::abs(h.frequency));
    if (decay_) w = std::max(w, decay_->rate);
    return w * std::abs(clock_.speed);
}

bool TimeVaryingOperator::is_constant() const {
    for (const auto& h : harmonics_) {
        if (h.frequency != 0.0 && (h.cos_coef.norm() > 0.0 || h.sin_coef.norm() > 0.0)) return false;
    }
    return !(decay_ && decay_->rate != 0.0 && decay_->matrix.norm() > 0.0);
}

// =============================================================================
// StateField
// =============================================================================

std::string to_string(Saturation s) {
    switch (s) {
        case Saturation::tanh: return "tanh";
        case Saturation::sine: return "sin";
        case Saturation::bounded_quadratic: return "bounded_quadratic";
    }
    return "unknown";
}

Saturation saturation_from_string(const std::string& name) {
    if (name == "tanh") return Saturation::tanh;
    if (name == "sin") return Saturation::sine;
    if (name == "bounded_quadratic") return Saturation::bounded_quadratic;
    throw ValidationError("unknown nonlinearity '" + name + "' (catalog: tanh, sin, bounded_quadratic)");
}

Vector saturate(Saturation s, const Vector& x) {
    switch (s) {
        case Saturation::tanh: return x.array().tanh().matrix();
        case Saturation::sine: return x.array().sin().matrix();
        case Saturation::bounded_quadratic: return x / (1.0 + x.squaredNorm());
    }
    return x;
}

StateField::StateField(int dim, std::vector<FieldTerm> terms, Certificate certificate, Clock clock)
    : dim_(dim), terms_(std::move(terms)), certificate_(certificate), clock_(clock) {
    if (dim_ < 1 || dim_ > kMaxDimension) throw InvalidArgument("StateField: dimension out of range");
    if (!(certificate_.M >= 0.0) || !(certificate_.L >= 0.0)) {
        throw InvalidArgument("StateField: certificates must be non-negative");
    }
    for (const auto& term : terms_) {
        switch (term.kind) {
            case TermKind::constant:
                if (term.vector.size() != dim_) throw InvalidArgument("StateField: constant term size");
                require_finite(term.vector, "StateField constant term");
                break;
            case TermKind::linear:
            case TermKind::nonlinear:
                if (term.matrix.rows() != dim_ || term.matrix.cols() != dim_) {
                    throw InvalidArgument("StateField: matrix term size");
                }
                require_finite(term.matrix, "StateField matrix term");
                break;
        }
    }
}

StateField StateField::zero(int dim) { return StateField(dim, {}, {}, {}); }

Vector StateField::operator()(double t, const Vector& x) const {
    std::vector<double> f(terms_.size());
    factors_at(t, f);
    Vector out(dim_);
    apply(f, x, out);
    return out;
}

void StateField::factors_at(double t, std::span<double> out) const {
    const double u = clock_.at(t);
    for (std::size_t k = 0; k < terms_.size(); ++k) out[k] = terms_[k].factor.value(u);
}

void StateField::apply(std::span<const double> factors, const Vector& x, Vector& out) const {
    out.setZero(dim_);
    for (std::size_t k = 0; k < terms_.size(); ++k) {
        const auto& term = terms_[k];
        const double c = factors[k];
        if (c == 0.0) continue;
        switch (term.kind) {
            case TermKind::constant: out.noalias() += c * term.vector; break;
            case TermKind::linear: out.noalias() += c * (term.matrix * x); break;
            case TermKind::nonlinear: out.noalias() += c * (term.matrix * saturate(term.saturation, x)); break;
        }
    }
}

StateField StateField::shifted(double tau) const {
    auto copy = *this;
    copy.clock_ = clock_.shifted(tau);
    return copy;
}

StateField StateField::rescaled(double eps) const {
    if (!(eps > 0.0)) throw InvalidArgument("rescaled: eps must be positive");
    auto copy = *this;
    copy.clock_ = clock_.rescaled(eps);
    return copy;
}

StateField StateField::averaged() const {
    std::vector<FieldTerm> out;
    for (const auto& term : terms_) {
        const double m = term.factor.mean();
        if (m == 0.0) continue;
        FieldTerm avg = term;
        avg.factor = TimeFactor::constant();
        if (term.kind == TermKind::constant) {
            avg.vector = m * term.vector;
        } else {
            avg.matrix = m * term.matrix;
        }
        out.push_back(std::move(avg));
    }
    StateField result(dim_, std::move(out), certificate_, {});
    // Averaging cannot enlarge the structural bounds (|mean| <= sup |factor|).
    const auto mine = analytic_bounds();
    const auto theirs = result.analytic_bounds();
    if (theirs.M > mine.M * (1.0 + 1e-12) + 1e-15 || theirs.L > mine.L * (1.0 + 1e-12) + 1e-15) {
        throw NumericError("averaged field exceeds the structural bounds of the original field");
    }
    return result;
}

Vector StateField::average(const Vector& x, double t, double T) const {
    if (!(T > 0.0)) throw InvalidArgument("average_drift: T must be positive");
    if (x.size() != dim_) throw InvalidArgument("average_drift: state dimension mismatch");
    const double u0 = clock_.at(t);
    const double u1 = clock_.at(t + T);
    std::vector<double> means(terms_.size());
    for (std::size_t k = 0; k < terms_.size(); ++k) {
        means[k] = terms_[k].factor.integral(u0, u1) / (u1 - u0);
    }
    Vector out(dim_);
    apply(means, x, out);
    return out;
}

Certificate StateField::analytic_bounds() const {
    Certificate c;
    for (const auto& term : terms_) {
        switch (term.kind) {
            case TermKind::constant: c.M += term.vector.norm(); break;
            case TermKind::linear:
            case TermKind::nonlinear: c.L += operator_norm(term.matrix); break;
        }
    }
    return c;
}

bool StateField::is_state_independent() const {
    return std::all_of(terms_.begin(), terms_.end(),
                       [](const FieldTerm& t) { return t.kind == TermKind::constant; });
}

bool StateField::has_nonlinear_terms() const {
    return std::any_of(terms_.begin(), terms_.end(),
                       [](const FieldTerm& t) { return t.kind == TermKind::nonlinear; });
}

bool StateField::is_time_independent() const {
    return std::all_of(terms_.begin(), terms_.end(),
                       [](const FieldTerm& t) { return t.factor.is_constant(); });
}

double StateField::max_rate() const {
    double w = 0.0;
    for (const auto& term : terms_) w = std::max(w, term.factor.rate());
    return w * std::abs(clock_.speed);
}

Vector StateField::constant_part() const {
    Vector v = Vector::Zero(dim_);
    for (const auto& term : terms_) {
        if (term.kind == TermKind::constant) v += term.factor.value(clock_.at(0.0)) * term.vector;
    }
    return v;
}

Matrix StateField::linear_part() const {
    Matrix m = Matrix::Zero(dim_, dim_);
    for (const auto& term : terms_) {
        if (term.kind == TermKind::linear) m += term.factor.value(clock_.at(0.0)) * term.matrix;
    }
    return m;
}

// =============================================================================
// CoefficientSystem
// =============================================================================

Evaluation CoefficientSystem::evaluate(double t, const Vector& x) const {
    if (!std::isfinite(t)) throw InvalidArgument("evaluate: non-finite time");
    require_finite(x, "evaluate");
    if (x.size() != dim()) throw InvalidArgument("evaluate: state dimension mismatch");
    return {a(t), drift(t, x), diffusion(t, x)};
}

CoefficientSystem CoefficientSystem::shifted(double tau) const {
    return {a.shifted(tau), drift.shifted(tau), diffusion.shifted(tau), recurrence, eps0};
}

CoefficientSystem CoefficientSystem::rescaled(double eps) const {
    return {a.rescaled(eps), drift.rescaled(eps), diffusion.rescaled(eps), recurrence, eps0};
}

Certificate CoefficientSystem::certificate() const {
    return {std::max(drift.certificate().M, diffusion.certificate().M),
            std::max(drift.certificate().L, diffusion.certificate().L)};
}

// =============================================================================
// Bebutov distance
// =============================================================================

BebutovDistance bebutov_distance(const PointwiseDistance& rho, int k_max, double grid_step) {
    if (k_max < 1) throw InvalidArgument("bebutov_distance: k_max must be >= 1");
    if (!(grid_step > 0.0)) throw InvalidArgument("bebutov_distance: grid_step must be positive");
    // Running maximum of rho over [-k, k], growing the window outward.
    double running = 0.0;
    double value = 0.0;
    double inner = 0.0;  // window radius already covered
    const auto eval = [&](double t) { running = std::max(running, rho(t)); };
    eval(0.0);
    for (int k = 1; k <= k_max; ++k) {
        const double radius = static_cast<double>(k);
        const auto first = static_cast<long long>(std::floor(inner / grid_step)) + 1;
        for (long long j = first; static_cast<double>(j) * grid_step < radius; ++j) {
            const double t = static_cast<double>(j) * grid_step;
            eval(t);
            eval(-t);
        }
        eval(radius);
        eval(-radius);
        inner = radius;
        value += std::ldexp(running / (1.0 + running), -k);
    }
    return {value, std::ldexp(1.0, -k_max)};
}

BebutovDistance bebutov_distance(const ScalarFunction& phi1, const ScalarFunction& phi2, int k_max,
                                 double grid_step) {
    return bebutov_distance([&](double t) { return std::abs(phi1(t) - phi2(t)); }, k_max, grid_step);
}

PointwiseDistance system_shift_distance(const CoefficientSystem& system, double tau,
                                        double state_radius) {
    const int d = system.dim();
    std::vector<Vector> states{Vector::Zero(d)};
    for (int i = 0; i < d; ++i) {
        states.push_back(state_radius * Vector::Unit(d, i));
        states.push_back(-state_radius * Vector::Unit(d, i));
    }
    auto shifted = std::make_shared<CoefficientSystem>(system.shifted(tau));
    auto base = std::make_shared<CoefficientSystem>(system);
    return [shifted, base, states](double t) {
        double r = operator_norm(shifted->a(t) - base->a(t));
        for (const auto& x : states) {
            r = std::max(r, (shifted->drift(t, x) - base->drift(t, x)).norm());
            r = std::max(r, (shifted->diffusion(t, x) - base->diffusion(t, x)).norm());
        }
        return r;
    };
}

// =============================================================================
// Almost periods
// =============================================================================

namespace {

bool window_sup_below(const ShiftGap& gap, double tau, double epsilon, double window, double step) {
    const auto n = static_cast<long long>(std::ceil(window / step));
    for (long long j = -n; j <= n; ++j) {
        const double t = std::clamp(static_cast<double>(j) * step, -window, window);
        if (!(gap(t, tau) < epsilon)) return false;
    }
    return true;
}

}  // namespace

std::vector<double> find_almost_periods(const ShiftGap& gap, double epsilon, double lo, double hi,
                                        double grid_step, const AlmostPeriodOptions& options) {
    if (!(epsilon > 0.0)) throw InvalidArgument("find_almost_periods: epsilon must be positive");
    if (!(lo < hi)) throw InvalidArgument("find_almost_periods: requires lo < hi");
    if (!(grid_step > 0.0)) throw InvalidArgument("find_almost_periods: grid_step must be positive");
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / grid_step + 1e-9)) + 1;
    std::vector<char> accepted(count, 0);
    parallel_for(count, options.threads, [&](std::size_t i) {
        const double tau = lo + static_cast<double>(i) * grid_step;
        if (!window_sup_below(gap, tau, epsilon, options.window, options.eval_step)) return;
        if (!window_sup_below(gap, tau, epsilon, options.window, options.verify_step)) return;
        accepted[i] = 1;
    });
    std::vector<double> out;
    for (std::size_t i = 0; i < count; ++i) {
        if (accepted[i]) out.push_back(lo + static_cast<double>(i) * grid_step);
    }
    return out;
}

std::vector<double> find_almost_periods(const ScalarFunction& phi, double epsilon, double lo,
                                        double hi, double grid_step,
                                        const AlmostPeriodOptions& options) {
    return find_almost_periods([&](double t, double tau) { return std::abs(phi(t + tau) - phi(t)); },
                               epsilon, lo, hi, grid_step, options);
}

double max_consecutive_gap(const std::vector<double>& taus, double lo, double hi) {
    if (taus.empty()) return hi - lo;
    double gap = taus.front() - lo;
    for (std::size_t i = 1; i < taus.size(); ++i) gap = std::max(gap, taus[i] - taus[i - 1]);
    return std::max(gap, hi - taus.back());
}

// =============================================================================
// Certificates
// =============================================================================

namespace {

std::string format_vector(const Vector& v) {
    std::ostringstream os;
    os.precision(10);
    os << "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v(i);
    os << "]";
    return os.str();
}

Vector random_state(std::mt19937_64& gen, int d, double radius) {
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit;
    Vector v(d);
    for (int i = 0; i < d; ++i) v(i) = normal(gen);
    const double n = v.norm();
    if (n == 0.0) return v;
    return v * (radius * std::pow(unit(gen), 1.0 / d) / n);
}

}  // namespace

CertificateReport verify_field_certificate(const StateField& field, const std::string& component,
                                           std::size_t sample_count, std::uint64_t seed,
                                           const CertificateSampling& sampling) {
    if (sample_count < 1) throw InvalidArgument("verify_certificates: sample_count must be >= 1");
    const auto& cert = field.certificate();
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> time(-sampling.time_range, sampling.time_range);
    std::uniform_real_distribution<double> unit;
    const int d = field.dim();
    const Vector zero = Vector::Zero(d);
    CertificateReport report{component, cert.M, cert.L, 0.0, 0.0, sample_count};
    constexpr double kRel = 1e-9;
    constexpr double kAbs = 1e-12;

    for (std::size_t s = 0; s < sample_count; ++s) {
        const double t = time(gen);
        const double at_zero = field(t, zero).norm();
        report.worst_M_ratio = std::max(report.worst_M_ratio, cert.M > 0.0 ? at_zero / cert.M
                                                              : (at_zero > kAbs ? INFINITY : 0.0));
        if (at_zero > cert.M * (1.0 + kRel) + kAbs) {
            std::ostringstream os;
            os << "certificate violation: " << component << " |F(t,0)| = " << at_zero
               << " exceeds declared M = " << cert.M << " at t = " << t;
            throw CertificateViolation(os.str(), t, at_zero / std::max(cert.M, kAbs));
        }
        Vector x1 = random_state(gen, d, sampling.state_radius);
        Vector x2 = (s % 2 == 0) ? random_state(gen, d, sampling.state_radius)
                                 : Vector(x1 + random_state(gen, d, 1e-3 * (1.0 + unit(gen))));
        const double dx = (x1 - x2).norm();
        if (dx == 0.0) continue;
        const double df = (field(t, x1) - field(t, x2)).norm();
        const double ratio = cert.L > 0.0 ? df / (cert.L * dx) : (df > kAbs ? INFINITY : 0.0);
        report.worst_L_ratio = std::max(report.worst_L_ratio, ratio);
        if (df > cert.L * dx * (1.0 + kRel) + kAbs) {
            std::ostringstream os;
            os << "certificate violation: " << component << " Lipschitz ratio " << df / dx
               << " exceeds declared L = " << cert.L << " at t = " << t << ", x1 = " << format_vector(x1)
               << ", x2 = " << format_vector(x2);
            throw CertificateViolation(os.str(), t, cert.L > 0.0 ? df / (cert.L * dx) : INFINITY);
        }
    }
    return report;
}

std::vector<CertificateReport> verify_certificates(const CoefficientSystem& system,
                                                   std::size_t sample_count, std::uint64_t seed,
                                                   const CertificateSampling& sampling) {
    return {verify_field_certificate(system.drift, "drift", sample_count, seed, sampling),
            verify_field_certificate(system.diffusion, "diffusion", sample_count, mix_seed(seed, 1),
                                     sampling)};
}

}  // namespace bogolyubov
