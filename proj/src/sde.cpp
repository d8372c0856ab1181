#include "bogolyubov/sde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bogolyubov/errors.hpp"
#include "bogolyubov/linear_flow.hpp"
#include "bogolyubov/parallel.hpp"
#include "bogolyubov/rng.hpp"

namespace bogolyubov {

std::string EquationTag::describe() const {
    std::ostringstream os;
    switch (kind) {
        case EquationKind::original: os << "original(eps=" << eps << ")"; break;
        case EquationKind::rescaled: os << "rescaled(eps=" << eps << ")"; break;
        case EquationKind::averaged: os << "averaged"; break;
    }
    return os.str();
}

Model make_model(const CoefficientSystem& system, const ModulusSampling& sampling) {
    return {system, average_system(system, sampling)};
}

Dynamics make_dynamics(const Model& model, EquationTag tag) {
    switch (tag.kind) {
        case EquationKind::original:
            if (!(tag.eps > 0.0)) throw InvalidArgument("original equation: eps must be positive");
            return {model.system, tag.eps, std::sqrt(tag.eps), tag};
        case EquationKind::rescaled:
            if (!(tag.eps > 0.0)) throw InvalidArgument("rescaled equation: eps must be positive");
            return {model.system.rescaled(tag.eps), 1.0, 1.0, tag};
        case EquationKind::averaged: return {model.averaged.as_system(model.system.eps0), 1.0, 1.0, tag};
    }
    throw InvalidArgument("unknown equation tag");
}

Vector PathEnsemble::state(std::size_t path, std::size_t k) const {
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v(i) = at(path, k, i);
    return v;
}

std::vector<Vector> PathEnsemble::snapshot(std::size_t k) const {
    std::vector<Vector> out;
    out.reserve(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) out.push_back(state(p, k));
    return out;
}

std::vector<double> PathEnsemble::component(std::size_t k, int i) const {
    std::vector<double> out(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) out[p] = at(p, k, i);
    return out;
}

// =============================================================================
// Simulation core
// =============================================================================

namespace {

constexpr double kDivergence = 1e6;

long long lattice_index(double t, double dt, const char* what) {
    const double q = t / dt;
    const double r = std::round(q);
    if (std::abs(q - r) > 1e-6) {
        std::ostringstream os;
        os << what << " = " << t << " is not on the dt = " << dt << " lattice";
        throw InvalidArgument(os.str());
    }
    return static_cast<long long>(r);
}

void check_step(const EquationTag& tag, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be positive");
    if (tag.kind == EquationKind::rescaled && dt > 0.1 * tag.eps * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "dt = " << dt << " too coarse for the rescaled equation at eps = " << tag.eps
           << " (requires dt <= 0.1 eps)";
        throw StepSizeError(os.str());
    }
}

// Record indices on the lattice for each grid point.
std::vector<long long> grid_indices(const TimeGrid& grid, double dt, double origin) {
    if (grid.count < 1 || !(grid.step > 0.0)) throw InvalidArgument("time grid must be non-empty and increasing");
    std::vector<long long> idx(grid.count);
    for (std::size_t k = 0; k < grid.count; ++k) idx[k] = lattice_index(grid.at(k) - origin, dt, "grid time");
    return idx;
}

PathEnsemble empty_ensemble(std::vector<double> times, std::size_t n_paths, int dim, std::uint64_t seed,
                            EquationTag tag) {
    PathEnsemble e;
    e.times = std::move(times);
    e.n_paths = n_paths;
    e.dim = dim;
    e.values.assign(n_paths * e.times.size() * static_cast<std::size_t>(dim), 0.0);
    e.seed = seed;
    e.equation = tag;
    return e;
}

[[noreturn]] void diverged(std::size_t path, double t, double norm) {
    std::ostringstream os;
    os << "path " << path << " diverged at t = " << t << " (|X| = " << norm << ")";
    throw DivergenceError(os.str(), path, t);
}

// Euler-Maruyama from lattice index n0, writing states at the ascending
// lattice indices `record` into `out` (record.front() >= n0).
void integrate_em(const Dynamics& dyn, long long n0, const std::vector<long long>& record, double dt,
                  const Vector& x0, std::uint64_t seed, const SimulationOptions& options,
                  PathEnsemble& out) {
    const int d = dyn.system.dim();
    if (x0.size() != d) throw InvalidArgument("initial state dimension mismatch");
    require_finite(x0, "initial state");
    const auto& drift = dyn.system.drift;
    const auto& diffusion = dyn.system.diffusion;
    const bool additive = diffusion.is_state_independent();
    const double sqrt_dt = std::sqrt(dt);
    const std::size_t block = std::max<std::size_t>(options.block_size, 1);
    const std::size_t n_blocks = (out.n_paths + block - 1) / block;

    parallel_for(n_blocks, options.threads, [&](std::size_t b) {
        const std::size_t p0 = b * block;
        const std::size_t p1 = std::min(out.n_paths, p0 + block);
        std::vector<Vector> xs(p1 - p0, x0);
        Matrix a(d, d);
        Vector f(d), g(d), ax(d);
        std::vector<double> fd(drift.factor_count()), fg(diffusion.factor_count());
        std::size_t r = 0;
        for (long long n = n0;; ++n) {
            while (r < record.size() && record[r] == n) {
                for (std::size_t p = p0; p < p1; ++p) {
                    for (int i = 0; i < d; ++i) out.at(p, r, i) = xs[p - p0](i);
                }
                ++r;
            }
            if (r == record.size()) break;
            const double t = options.lattice_origin + static_cast<double>(n) * dt;
            dyn.system.a.evaluate_into(t, a);
            drift.factors_at(t, fd);
            diffusion.factors_at(t, fg);
            if (additive) diffusion.apply(fg, x0, g);
            for (std::size_t p = p0; p < p1; ++p) {
                Vector& x = xs[p - p0];
                const double dw = sqrt_dt * standard_normal(seed, p, n);
                drift.apply(fd, x, f);
                if (!additive) diffusion.apply(fg, x, g);
                ax.noalias() = a * x;
                x += (dyn.drift_scale * dt) * (ax + f) + (dyn.noise_scale * dw) * g;
                const double norm = x.norm();
                if (!(norm <= kDivergence)) diverged(p, t + dt, norm);
            }
        }
    });
}

}  // namespace

PathEnsemble simulate_em(const Model& model, EquationTag tag, const Vector& x0, double t0, double t1,
                         double dt, std::size_t n_paths, std::uint64_t seed, std::size_t record_stride,
                         const SimulationOptions& options) {
    check_step(tag, dt);
    if (!(t1 > t0)) throw InvalidArgument("simulate_em: requires t1 > t0");
    if (n_paths < 1 || record_stride < 1) throw InvalidArgument("simulate_em: n_paths and stride must be >= 1");
    const long long n0 = lattice_index(t0 - options.lattice_origin, dt, "t0");
    const auto steps = static_cast<long long>(std::llround((t1 - t0) / dt));
    std::vector<long long> record;
    std::vector<double> times;
    for (long long s = 0; s <= steps; s += static_cast<long long>(record_stride)) {
        record.push_back(n0 + s);
        times.push_back(t0 + static_cast<double>(s) * dt);
    }
    auto out = empty_ensemble(std::move(times), n_paths, model.dim(), seed, tag);
    integrate_em(make_dynamics(model, tag), n0, record, dt, x0, seed, options, out);
    return out;
}

double default_burn_in(double N, double nu) {
    if (!(nu > 0.0) || !(N > 0.0)) throw InvalidArgument("default_burn_in: requires N, nu > 0");
    return std::log(100.0 * std::max(N, 1.0)) / nu;
}

PathEnsemble burn_in_solution(const Model& model, EquationTag tag, const TimeGrid& grid, double burn_in,
                              double dt, std::size_t n_paths, std::uint64_t seed,
                              const SimulationOptions& options) {
    check_step(tag, dt);
    if (!(burn_in >= 0.0)) throw InvalidArgument("burn_in must be non-negative");
    if (n_paths < 1) throw InvalidArgument("n_paths must be >= 1");
    const auto record = grid_indices(grid, dt, options.lattice_origin);
    const auto n0 =
        static_cast<long long>(std::floor((grid.start - options.lattice_origin - burn_in) / dt + 1e-9));
    std::vector<double> times(grid.count);
    for (std::size_t k = 0; k < grid.count; ++k) times[k] = grid.at(k);
    auto out = empty_ensemble(std::move(times), n_paths, model.dim(), seed, tag);
    integrate_em(make_dynamics(model, tag), n0, record, dt, Vector::Zero(model.dim()), seed, options, out);
    return out;
}

PathEnsemble bounded_solution(const Model& model, EquationTag tag, const TimeGrid& grid, double burn_in,
                              double dt, std::size_t n_paths, std::uint64_t seed,
                              const ContractionReport& contraction, const SimulationOptions& options) {
    if (!contraction.existence || !contraction.r) {
        std::ostringstream os;
        os << "bounded solution refused: L = " << contraction.L
           << " violates the existence inequality L < nu / (N sqrt(2 + nu)) = "
           << contraction.existence_bound << " (N = " << contraction.N << ", nu = " << contraction.nu << ")";
        throw ContractionRefused(os.str());
    }
    const double needed = default_burn_in(contraction.N, contraction.nu);
    if (burn_in < needed * (1.0 - 1e-12)) {
        std::ostringstream os;
        os << "burn_in = " << burn_in << " below the 1% memory horizon ln(100 N)/nu = " << needed;
        throw PreconditionError(os.str());
    }
    auto out = burn_in_solution(model, tag, grid, burn_in, dt, n_paths, seed, options);
    out.bias_bound = contraction.N * std::exp(-contraction.nu * burn_in) * *contraction.r;
    return out;
}

PathEnsemble stochastic_convolution_linear(const TimeVaryingOperator& a, const StateField& f,
                                           const StateField& g, const TimeGrid& grid, double burn_in,
                                           double dt, std::size_t n_paths, std::uint64_t seed,
                                           const SimulationOptions& options) {
    if (!f.is_state_independent() || !g.is_state_independent()) {
        throw InvalidArgument("stochastic_convolution_linear: f and g must be state independent");
    }
    const int d = a.dim();
    if (f.dim() != d || g.dim() != d) throw InvalidArgument("stochastic_convolution_linear: dimension mismatch");
    if (!(dt > 0.0) || !(burn_in >= 0.0) || n_paths < 1) {
        throw InvalidArgument("stochastic_convolution_linear: invalid dt, burn_in, or n_paths");
    }
    check_flow_step(a, dt);
    const auto record = grid_indices(grid, dt, options.lattice_origin);
    const auto n0 =
        static_cast<long long>(std::floor((grid.start - options.lattice_origin - burn_in) / dt + 1e-9));
    std::vector<double> times(grid.count);
    for (std::size_t k = 0; k < grid.count; ++k) times[k] = grid.at(k);
    auto out = empty_ensemble(std::move(times), n_paths, d, seed, EquationTag::rescaled(1.0));

    const double sqrt_dt = std::sqrt(dt);
    const Vector zero = Vector::Zero(d);
    const std::size_t block = std::max<std::size_t>(options.block_size, 1);
    const std::size_t n_blocks = (n_paths + block - 1) / block;
    parallel_for(n_blocks, options.threads, [&](std::size_t b) {
        const std::size_t p0 = b * block;
        const std::size_t p1 = std::min(n_paths, p0 + block);
        std::vector<Vector> ys(p1 - p0, zero);
        FlowStepper stepper(a);
        Matrix phi(d, d);
        Vector fv(d), gv(d);
        std::vector<double> ff(f.factor_count()), fg(g.factor_count());
        std::size_t r = 0;
        for (long long n = n0;; ++n) {
            while (r < record.size() && record[r] == n) {
                for (std::size_t p = p0; p < p1; ++p) {
                    for (int i = 0; i < d; ++i) out.at(p, r, i) = ys[p - p0](i);
                }
                ++r;
            }
            if (r == record.size()) break;
            const double t = options.lattice_origin + static_cast<double>(n) * dt;
            phi.setIdentity();
            stepper.step(t, dt, phi);
            f.factors_at(t, ff);
            g.factors_at(t, fg);
            f.apply(ff, zero, fv);
            g.apply(fg, zero, gv);
            for (std::size_t p = p0; p < p1; ++p) {
                Vector& y = ys[p - p0];
                const double dw = sqrt_dt * standard_normal(seed, p, n);
                y = phi * (y + dt * fv + dw * gv);
                if (!(y.norm() <= kDivergence)) diverged(p, t + dt, y.norm());
            }
        }
    });
    return out;
}

PathEnsemble sample_averaged_stationary(const AveragedSystem& avg, const TimeGrid& grid,
                                        std::size_t n_paths, std::uint64_t seed, StationaryMode mode,
                                        const StationaryOptions& options) {
    if (n_paths < 1) throw InvalidArgument("n_paths must be >= 1");
    if (grid.count < 1 || !(grid.step > 0.0)) throw InvalidArgument("time grid must be non-empty and increasing");
    const int d = avg.dim();
    if (mode == StationaryMode::long_run) {
        Model model{avg.as_system(), avg};
        return burn_in_solution(model, EquationTag::averaged(), grid, options.burn_in, options.dt, n_paths,
                                seed, options.simulation);
    }
    if (!avg.is_linear()) {
        throw InvalidArgument("exact_gaussian sampling requires a linear averaged system (use long_run)");
    }
    const Vector zero = Vector::Zero(d);
    const Vector f = avg.f_bar(0.0, zero);
    const Matrix g = avg.g_bar(0.0, zero);
    const Matrix p = lyapunov_stationary_cov(avg.a_bar, g);
    const Vector mu = -avg.a_bar.fullPivLu().solve(f);
    const Matrix e = mat_exp(avg.a_bar, grid.step);
    const Matrix q = p - e * p * e.transpose();
    const Matrix s0 = psd_factor(p);
    const Matrix s = psd_factor(0.5 * (q + q.transpose()));

    std::vector<double> times(grid.count);
    for (std::size_t k = 0; k < grid.count; ++k) times[k] = grid.at(k);
    auto out = empty_ensemble(std::move(times), n_paths, d, seed, EquationTag::averaged());
    parallel_for(n_paths, options.simulation.threads, [&](std::size_t path) {
        Vector z(d);
        auto draw = [&](std::size_t k) {
            for (int i = 0; i < d; ++i) z(i) = standard_normal(seed, path, static_cast<std::int64_t>(k),
                                                              static_cast<std::uint32_t>(i));
        };
        draw(0);
        Vector x = mu + s0 * z;
        for (std::size_t k = 0; k < grid.count; ++k) {
            if (k > 0) {
                draw(k);
                x = mu + e * (x - mu) + s * z;
            }
            for (int i = 0; i < d; ++i) out.at(path, k, i) = x(i);
        }
    });
    return out;
}

// =============================================================================
// Statistics
// =============================================================================

double pairwise_sum(const double* x, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

namespace {

// Mean and standard error of the mean.
std::pair<double, double> mean_se(const std::vector<double>& v) {
    const auto n = static_cast<double>(v.size());
    const double mean = pairwise_sum(v.data(), v.size()) / n;
    if (v.size() < 2) return {mean, 0.0};
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
    const double var = pairwise_sum(sq.data(), sq.size()) / (n - 1.0);
    return {mean, std::sqrt(var / n)};
}

}  // namespace

SolutionStatistics summarize(const PathEnsemble& e) {
    SolutionStatistics s;
    s.times = e.times;
    s.n_paths = e.n_paths;
    std::vector<double> buf(e.n_paths);
    for (std::size_t k = 0; k < e.n_times(); ++k) {
        Vector m(e.dim);
        for (int i = 0; i < e.dim; ++i) {
            for (std::size_t p = 0; p < e.n_paths; ++p) buf[p] = e.at(p, k, i);
            m(i) = pairwise_sum(buf.data(), buf.size()) / static_cast<double>(e.n_paths);
        }
        s.mean.push_back(m);
        for (std::size_t p = 0; p < e.n_paths; ++p) {
            double sq = 0.0;
            for (int i = 0; i < e.dim; ++i) sq += e.at(p, k, i) * e.at(p, k, i);
            buf[p] = sq;
        }
        const auto [mom, se] = mean_se(buf);
        s.second_moment.push_back(mom);
        s.second_moment_se.push_back(se);
    }
    return s;
}

SolutionStatistics coupled_deviation(const PathEnsemble& first, const PathEnsemble& second) {
    if (first.times != second.times || first.n_paths != second.n_paths || first.dim != second.dim ||
        first.seed != second.seed) {
        throw NumericError("coupled_deviation: internal consistency error (ensembles differ in grid, "
                           "path count, dimension, or Brownian seed)");
    }
    SolutionStatistics s = summarize(first);
    std::vector<double> buf(first.n_paths);
    for (std::size_t k = 0; k < first.n_times(); ++k) {
        for (std::size_t p = 0; p < first.n_paths; ++p) {
            double sq = 0.0;
            for (int i = 0; i < first.dim; ++i) {
                const double diff = first.at(p, k, i) - second.at(p, k, i);
                sq += diff * diff;
            }
            buf[p] = sq;
        }
        const auto [dev, se] = mean_se(buf);
        s.deviation.push_back(dev);
        s.deviation_se.push_back(se);
        if (k == 0 || dev > s.sup_deviation) {
            s.sup_deviation = dev;
            s.sup_deviation_se = se;
            s.sup_index = k;
        }
    }
    return s;
}

SolutionStatistics coupled_deviation(const Model& model, double eps, const TimeGrid& grid, double dt,
                                     std::size_t n_paths, std::uint64_t seed, double burn_in,
                                     const SimulationOptions& options) {
    auto fast = burn_in_solution(model, EquationTag::rescaled(eps), grid, burn_in, dt, n_paths, seed, options);
    auto slow = burn_in_solution(model, EquationTag::averaged(), grid, burn_in, dt, n_paths, seed, options);
    fast.shared_brownian = slow.shared_brownian = true;
    fast.brownian_id = slow.brownian_id = seed;
    return coupled_deviation(fast, slow);
}

PathEnsemble rescale_time(const PathEnsemble& ensemble) {
    if (ensemble.equation.kind != EquationKind::rescaled) {
        throw InvalidArgument("rescale_time: input must carry the rescaled tag, got " +
                              ensemble.equation.describe());
    }
    PathEnsemble out = ensemble;
    for (auto& t : out.times) t /= ensemble.equation.eps;
    out.equation.kind = EquationKind::original;
    return out;
}

PathEnsemble inverse_rescale_time(const PathEnsemble& ensemble) {
    if (ensemble.equation.kind != EquationKind::original) {
        throw InvalidArgument("inverse_rescale_time: input must carry the original tag, got " +
                              ensemble.equation.describe());
    }
    PathEnsemble out = ensemble;
    for (auto& t : out.times) t *= ensemble.equation.eps;
    out.equation.kind = EquationKind::rescaled;
    return out;
}

ContinuityModulus continuity_modulus(const PathEnsemble& e, std::size_t max_lag) {
    if (max_lag < 4 || e.n_times() <= max_lag) {
        throw InvalidArgument("continuity_modulus: need at least 4 distinct lags within the grid");
    }
    const double h0 = e.times[1] - e.times[0];
    ContinuityModulus out;
    std::vector<double> per_path(e.n_paths), buf;
    for (std::size_t lag = 1; lag <= max_lag; ++lag) {
        const std::size_t count = e.n_times() - lag;
        buf.resize(count);
        for (std::size_t p = 0; p < e.n_paths; ++p) {
            for (std::size_t k = 0; k < count; ++k) {
                double sq = 0.0;
                for (int i = 0; i < e.dim; ++i) {
                    const double diff = e.at(p, k + lag, i) - e.at(p, k, i);
                    sq += diff * diff;
                }
                buf[k] = sq;
            }
            per_path[p] = pairwise_sum(buf.data(), count) / static_cast<double>(count);
        }
        const auto [value, se] = mean_se(per_path);
        out.rows.push_back({h0 * static_cast<double>(lag), value, se});
    }
    double hv = 0.0, hh = 0.0, mean_v = 0.0;
    for (const auto& r : out.rows) {
        hv += r.h * r.value;
        hh += r.h * r.h;
        mean_v += r.value;
    }
    mean_v /= static_cast<double>(out.rows.size());
    out.slope = hv / hh;
    double ss_res = 0.0, ss_tot = 0.0;
    for (const auto& r : out.rows) {
        ss_res += (r.value - out.slope * r.h) * (r.value - out.slope * r.h);
        ss_tot += (r.value - mean_v) * (r.value - mean_v);
    }
    out.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
    return out;
}

}  // namespace bogolyubov
