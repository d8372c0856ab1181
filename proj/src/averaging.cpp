#include "bogolyubov/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include "bogolyubov/errors.hpp"

namespace bogolyubov {

// =============================================================================
// Decay moduli
// =============================================================================

double DecayModulus::operator()(double T) const {
    if (envelope.empty()) return 0.0;
    std::size_t i = 0;
    while (i + 1 < samples.size() && samples[i + 1].first <= T) ++i;
    return envelope[i];
}

bool DecayModulus::vanishes() const {
    if (envelope.empty()) return true;
    return limit || envelope.back() <= 1e-12;
}

DecayModulus fit_decay_modulus(std::vector<std::pair<double, double>> samples) {
    if (samples.size() < 2) throw InvalidArgument("fit_decay_modulus: need at least 2 samples");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!std::isfinite(samples[i].first) || !std::isfinite(samples[i].second) || samples[i].second < 0.0) {
            throw InvalidArgument("fit_decay_modulus: samples must be finite and non-negative");
        }
        if (i > 0 && !(samples[i].first > samples[i - 1].first)) {
            throw InvalidArgument("fit_decay_modulus: T values must be strictly increasing");
        }
    }
    DecayModulus m;
    m.envelope.resize(samples.size());
    double running = 0.0;
    for (std::size_t i = samples.size(); i-- > 0;) {
        running = std::max(running, samples[i].second);
        m.envelope[i] = running;
    }
    m.limit = samples.back().second < 0.01 * samples.front().second;
    m.samples = std::move(samples);
    return m;
}

// =============================================================================
// Averages
// =============================================================================

Matrix average_operator(const TimeVaryingOperator& a, double T, double t) { return a.average(t, T); }

Vector average_drift(const StateField& f, const Vector& x, double T, double t) {
    return f.average(x, t, T);
}

double average_diffusion_gap(const StateField& g, const StateField& g_bar, const Vector& x, double T,
                             double t) {
    if (!(T > 0.0)) throw InvalidArgument("average_diffusion_gap: T must be positive");
    const Vector target = g_bar(0.0, x);
    auto integrand = [&](double s) { return (g(s, x) - target).squaredNorm(); };
    const double rate = std::max(g.max_rate(), 1e-3);
    const double piece = 0.5 * std::numbers::pi / rate;
    // Split at the clock origin so the kink of decaying factors is a node.
    std::vector<double> cuts{t};
    const double origin = -g.clock().offset / g.clock().speed;
    if (origin > t && origin < t + T) cuts.push_back(origin);
    cuts.push_back(t + T);
    double total = 0.0;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        const double len = cuts[c + 1] - cuts[c];
        const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(len / piece)));
        const double h = len / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double a = cuts[c] + h * static_cast<double>(i);
            total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, a, a + h, 8,
                                                                                    1e-12);
        }
    }
    return total / T;
}

CoefficientSystem AveragedSystem::as_system(double eps0) const {
    RecurrenceClass stationary;
    return {TimeVaryingOperator(a_bar), f_bar, g_bar, stationary, eps0};
}

namespace {

void require_vanishing(const DecayModulus& m, const std::string& what) {
    if (m.vanishes()) return;
    std::ostringstream os;
    os << "averaging condition fails for the " << what << ": sampled error " << m.samples.front().second
       << " at T=" << m.samples.front().first << " only decays to " << m.samples.back().second
       << " at T=" << m.samples.back().first;
    throw ValidationError(os.str());
}

}  // namespace

AveragedSystem average_system(const CoefficientSystem& system, const ModulusSampling& sampling) {
    if (sampling.windows.size() < 2 || sampling.time_samples < 1) {
        throw InvalidArgument("average_system: need >= 2 windows and >= 1 time sample");
    }
    AveragedSystem avg;
    avg.a_bar = system.a.mean();
    avg.f_bar = system.drift.averaged();
    avg.g_bar = system.diffusion.averaged();

    const int d = system.dim();
    std::mt19937_64 gen(sampling.seed);
    std::uniform_real_distribution<double> time(-sampling.time_range, sampling.time_range);
    std::normal_distribution<double> normal;
    std::vector<double> times(sampling.time_samples);
    for (auto& t : times) t = time(gen);
    std::vector<Vector> states{Vector::Zero(d)};
    for (int k = 0; k < 3; ++k) {
        Vector v(d);
        for (int i = 0; i < d; ++i) v(i) = normal(gen);
        states.push_back(v * (sampling.state_radius / std::max(v.norm(), 1e-12)));
    }

    std::vector<std::pair<double, double>> s0, s1, s2;
    for (double T : sampling.windows) {
        double w0 = 0.0, w1 = 0.0, w2 = 0.0;
        for (double t : times) {
            w0 = std::max(w0, operator_norm(average_operator(system.a, T, t) - avg.a_bar));
            for (const auto& x : states) {
                const double nx = x.norm();
                if (!system.drift.is_time_independent()) {
                    w1 = std::max(w1, (average_drift(system.drift, x, T, t) - avg.f_bar(0.0, x)).norm() /
                                          (1.0 + nx));
                }
                if (!system.diffusion.is_time_independent()) {
                    w2 = std::max(w2, average_diffusion_gap(system.diffusion, avg.g_bar, x, T, t) /
                                          (1.0 + nx * nx));
                }
            }
        }
        s0.emplace_back(T, w0);
        s1.emplace_back(T, w1);
        s2.emplace_back(T, w2);
    }
    avg.omega = fit_decay_modulus(std::move(s0));
    avg.omega1 = fit_decay_modulus(std::move(s1));
    avg.omega2 = fit_decay_modulus(std::move(s2));
    require_vanishing(avg.omega, "operator A");
    require_vanishing(avg.omega1, "drift F");
    require_vanishing(avg.omega2, "diffusion G (quadratic mean gap)");
    return avg;
}

// =============================================================================
// Contraction
// =============================================================================

ContractionReport verify_contraction(double N, double nu, double M, double L) {
    if (!(N >= 1.0 - 1e-12) || !(nu > 0.0) || !(M >= 0.0) || !(L >= 0.0)) {
        throw InvalidArgument("verify_contraction: requires N >= 1, nu > 0, M >= 0, L >= 0");
    }
    ContractionReport rep;
    rep.N = N;
    rep.nu = nu;
    rep.M = M;
    rep.L = L;
    rep.existence_bound = nu / (N * std::sqrt(2.0 + nu));
    rep.stability_bound = nu / (2.0 * N * std::sqrt(1.0 + nu));
    rep.averaging_bound = nu / (std::sqrt(3.0) * N * std::sqrt(2.0 + nu));
    rep.existence = L < rep.existence_bound;
    rep.stability = L < rep.stability_bound;
    rep.averaging = L < rep.averaging_bound;
    if (rep.existence) {
        const double root = std::sqrt(2.0 + nu);
        rep.r = N * M * root / (nu - N * L * root);
    }
    return rep;
}

ContractionReport verify_contraction(const DichotomyCertificate& cert, double M, double L) {
    return verify_contraction(cert.N, cert.nu, M, L);
}

double scaled_modulus_sup(const std::function<double(double)>& psi, double l, double eps) {
    if (!(l > 0.0) || !(eps > 0.0)) throw InvalidArgument("scaled_modulus_sup: l and eps must be positive");
    auto value = [&](double tau) { return tau * psi(tau / eps); };
    constexpr int kGrid = 2000;
    int best = 0;
    double best_value = value(0.0);
    for (int j = 1; j <= kGrid; ++j) {
        const double v = value(l * j / kGrid);
        if (v > best_value) {
            best_value = v;
            best = j;
        }
    }
    const double lo = l * std::max(best - 1, 0) / kGrid;
    const double hi = l * std::min(best + 1, kGrid) / kGrid;
    const auto refined =
        boost::math::tools::brent_find_minima([&](double tau) { return -value(tau); }, lo, hi, 50);
    return std::max(best_value, -refined.second);
}

}  // namespace bogolyubov
