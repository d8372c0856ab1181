#include "bogolyubov/linear_flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/minima.hpp>

#include "bogolyubov/errors.hpp"
#include "bogolyubov/parallel.hpp"

namespace bogolyubov {

// =============================================================================
// Propagators
// =============================================================================

double default_flow_step(double eps) { return std::min(1e-2, 0.1 * eps); }

FlowStepper::FlowStepper(const TimeVaryingOperator& a) : a_(a) {
    const int d = a.dim();
    for (Matrix* m : {&a0_, &a1_, &a2_, &k1_, &k2_, &k3_, &k4_, &tmp_}) m->resize(d, d);
}

void FlowStepper::step(double s, double h, Matrix& u) {
    a_.evaluate_into(s, a0_);
    a_.evaluate_into(s + 0.5 * h, a1_);
    a_.evaluate_into(s + h, a2_);
    k1_.noalias() = a0_ * u;
    tmp_ = u + 0.5 * h * k1_;
    k2_.noalias() = a1_ * tmp_;
    tmp_ = u + 0.5 * h * k2_;
    k3_.noalias() = a1_ * tmp_;
    tmp_ = u + h * k3_;
    k4_.noalias() = a2_ * tmp_;
    u += (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
}

void check_flow_step(const TimeVaryingOperator& a, double step) {
    if (!(step > 0.0) || !std::isfinite(step)) throw InvalidArgument("propagator step must be positive");
    const double scale = step * (a.sup_norm_bound() + a.max_rate());
    const double local = std::pow(scale, 5) / 120.0;
    if (local > 1e-6) {
        std::ostringstream os;
        os << "propagator step " << step << " too large: local error estimate " << local
           << " exceeds 1e-6";
        throw StepSizeError(os.str());
    }
}

Matrix cauchy_operator(const TimeVaryingOperator& a, double t, double tau, double step) {
    check_flow_step(a, step);
    if (!std::isfinite(t) || !std::isfinite(tau)) throw InvalidArgument("cauchy_operator: non-finite time");
    Matrix u = Matrix::Identity(a.dim(), a.dim());
    if (t == tau) return u;
    const auto n = static_cast<long long>(std::ceil(std::abs(t - tau) / step));
    const double h = (t - tau) / static_cast<double>(n);
    FlowStepper stepper(a);
    for (long long k = 0; k < n; ++k) stepper.step(tau + static_cast<double>(k) * h, h, u);
    return u;
}

// =============================================================================
// Exponential stability fit
// =============================================================================

SamplingPlan make_sampling_plan(const TimeVaryingOperator& a, double t_max, std::size_t n_base,
                                double step) {
    if (!(t_max > 0.0) || !(step > 0.0) || n_base < 1) {
        throw InvalidArgument("make_sampling_plan: t_max, step, n_base must be positive");
    }
    double slowest = std::numeric_limits<double>::infinity();
    for (const auto& h : a.harmonics()) {
        if (h.frequency != 0.0) slowest = std::min(slowest, std::abs(h.frequency));
    }
    const double window = std::isfinite(slowest)
                              ? 2.0 * std::numbers::pi / (slowest * std::abs(a.clock().speed))
                              : 1.0;
    SamplingPlan plan;
    plan.t_max = t_max;
    plan.step = step;
    for (std::size_t j = 0; j < n_base; ++j) {
        plan.base_points.push_back(window * static_cast<double>(j) / static_cast<double>(n_base));
    }
    return plan;
}

std::vector<double> log_norm_envelope(const TimeVaryingOperator& a, const SamplingPlan& plan) {
    check_flow_step(a, plan.step);
    if (plan.base_points.empty()) throw InvalidArgument("sampling plan has no base points");
    const auto steps = static_cast<std::size_t>(std::ceil(plan.t_max / plan.step - 1e-9));
    std::vector<double> env(steps + 1, -std::numeric_limits<double>::infinity());
    FlowStepper stepper(a);
    Matrix u(a.dim(), a.dim());
    for (double tau : plan.base_points) {
        u.setIdentity();
        env[0] = std::max(env[0], 0.0);
        for (std::size_t k = 0; k < steps; ++k) {
            stepper.step(tau + static_cast<double>(k) * plan.step, plan.step, u);
            if (!u.allFinite()) throw NumericError("propagator overflowed during dichotomy sampling");
            env[k + 1] = std::max(env[k + 1], std::log(operator_norm(u)));
        }
    }
    return env;
}

namespace {

// Index of max(y_k + nu * k * step); ties resolved toward the smallest k.
std::pair<std::size_t, double> binding_index(const std::vector<double>& y, double step, double nu) {
    std::size_t best = 0;
    double value = y[0];
    for (std::size_t k = 1; k < y.size(); ++k) {
        const double v = y[k] + nu * step * static_cast<double>(k);
        if (v > value + 1e-12 * (1.0 + std::abs(value))) {
            value = v;
            best = k;
        }
    }
    return {best, value};
}

}  // namespace

DichotomyCertificate fit_dichotomy_envelope(const std::vector<double>& y, double step) {
    if (y.size() < 3) throw InvalidArgument("fit_dichotomy: need at least 3 separations");
    const std::size_t half = (y.size() - 1) / 2;
    auto feasible = [&](double nu) { return binding_index(y, step, nu).first <= half; };

    double lo = 0.0;
    double hi = 1.0;
    while (feasible(hi)) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e8) break;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? lo : hi) = mid;
    }
    if (!(lo > 1e-8)) {
        throw NotUniformlyStable(
            "no positive decay rate dominates the sampled propagator norms (flow not uniformly "
            "asymptotically stable on the sampled window)");
    }
    DichotomyCertificate cert;
    cert.nu = lo;
    const double log_n = binding_index(y, step, lo).second;
    cert.N = std::exp(std::max(log_n, 0.0));
    cert.residual = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < y.size(); ++k) {
        cert.residual = std::max(cert.residual, y[k] - (std::log(cert.N) - lo * step * static_cast<double>(k)));
    }
    cert.t_max = step * static_cast<double>(y.size() - 1);
    cert.samples = y.size();
    return cert;
}

DichotomyCertificate fit_dichotomy(const TimeVaryingOperator& a, const SamplingPlan& plan) {
    auto cert = fit_dichotomy_envelope(log_norm_envelope(a, plan), plan.step);
    cert.base_lo = *std::min_element(plan.base_points.begin(), plan.base_points.end());
    cert.base_hi = *std::max_element(plan.base_points.begin(), plan.base_points.end());
    cert.samples *= plan.base_points.size();
    return cert;
}

// =============================================================================
// Rescaled gap
// =============================================================================

RescaledGapTable rescaled_gap(const TimeVaryingOperator& a, const Matrix& a_bar,
                              std::vector<double> eps_list, double gamma0, double nu_bar,
                              const GapOptions& options) {
    if (!(gamma0 > 0.0)) throw InvalidArgument("rescaled_gap: gamma0 must be positive");
    if (gamma0 >= nu_bar) {
        std::ostringstream os;
        os << "rescaled_gap: gamma0 = " << gamma0 << " is not below the averaged decay rate " << nu_bar;
        throw InvalidArgument(os.str());
    }
    if (!hurwitz_check(a_bar).is_hurwitz) throw PreconditionError("rescaled_gap: A_bar is not Hurwitz");
    for (double e : eps_list) {
        if (!(e > 0.0)) throw InvalidArgument("rescaled_gap: eps values must be positive");
    }
    std::sort(eps_list.begin(), eps_list.end(), std::greater<>());

    RescaledGapTable table;
    table.gamma0 = gamma0;
    table.rows.resize(eps_list.size());
    parallel_for(eps_list.size(), options.threads, [&](std::size_t i) {
        const double eps = eps_list[i];
        const double step = options.step > 0.0 ? options.step : default_flow_step(eps);
        const auto a_eps = a.rescaled(eps);
        const auto plan = make_sampling_plan(a_eps, options.t_max, options.n_base, step);
        check_flow_step(a_eps, step);
        const auto steps = static_cast<std::size_t>(std::ceil(plan.t_max / step - 1e-9));
        std::vector<Matrix> averaged(steps + 1);
        for (std::size_t k = 0; k <= steps; ++k) averaged[k] = mat_exp(a_bar, step * static_cast<double>(k));

        GapRow row{eps, 0.0, plan.base_points[0], plan.base_points[0]};
        FlowStepper stepper(a_eps);
        Matrix u(a.dim(), a.dim());
        for (double tau : plan.base_points) {
            u.setIdentity();
            for (std::size_t k = 0; k < steps; ++k) {
                stepper.step(tau + static_cast<double>(k) * step, step, u);
                const double delta = step * static_cast<double>(k + 1);
                const double gap = std::exp(gamma0 * delta) * operator_norm(u - averaged[k + 1]);
                if (gap > row.N_eps) {
                    row.N_eps = gap;
                    row.witness_t = tau + delta;
                    row.witness_tau = tau;
                }
            }
        }
        table.rows[i] = row;
    });
    return table;
}

// =============================================================================
// Damped convolution
// =============================================================================

DampedConvolution damped_convolution_sup(const TimeFactor& phi, double nu, double eps) {
    if (!(nu > 0.0) || !(eps > 0.0)) throw InvalidArgument("damped_convolution_sup: nu and eps must be positive");
    if (phi.kind != FactorKind::cosine && phi.kind != FactorKind::sine) {
        throw InvalidArgument("damped_convolution_sup: factor must be trigonometric");
    }
    const double w = std::abs(phi.frequency) / eps;
    // Tail beyond T_b bounded by exp(-nu T_b) / nu.
    const double t_b = std::log(1.0 / (1e-12 * nu)) / nu;
    const double piece = std::min(t_b, 0.25 * std::numbers::pi / std::max(w, 1e-12));
    const auto pieces = static_cast<std::size_t>(std::ceil(t_b / piece));
    const double h = t_b / static_cast<double>(pieces);

    auto value = [&](double t) {
        double total = 0.0;
        for (std::size_t i = 0; i < pieces; ++i) {
            const double a = h * static_cast<double>(i);
            total += boost::math::quadrature::gauss<double, 20>::integrate(
                [&](double s) { return std::exp(-nu * s) * phi.value((t - s) / eps); }, a, a + h);
        }
        return std::abs(total);
    };

    const double period = w > 0.0 ? 2.0 * std::numbers::pi / w : 1.0;
    constexpr int kGrid = 64;
    double best_t = 0.0;
    double best = -1.0;
    for (int j = 0; j < kGrid; ++j) {
        const double t = period * j / kGrid;
        const double v = value(t);
        if (v > best) {
            best = v;
            best_t = t;
        }
    }
    const double cell = period / kGrid;
    const auto refined = boost::math::tools::brent_find_minima([&](double t) { return -value(t); },
                                                               best_t - cell, best_t + cell, 50);
    DampedConvolution out;
    if (-refined.second > best) {
        out.sup = -refined.second;
        out.argmax_t = refined.first;
    } else {
        out.sup = best;
        out.argmax_t = best_t;
    }
    out.tail_bound = std::exp(-nu * t_b) / nu;
    return out;
}

}  // namespace bogolyubov
