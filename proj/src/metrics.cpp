#include "bogolyubov/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "bogolyubov/errors.hpp"
#include "bogolyubov/parallel.hpp"
#include "bogolyubov/rng.hpp"

namespace bogolyubov {

EmpiricalLaw::EmpiricalLaw(std::vector<Vector> s, std::string src)
    : samples(std::move(s)), source(std::move(src)) {
    if (samples.empty()) throw InvalidArgument("EmpiricalLaw: needs at least one sample");
    const auto d = samples.front().size();
    for (const auto& x : samples) {
        if (x.size() != d) throw InvalidArgument("EmpiricalLaw: samples differ in dimension");
        require_finite(x, "EmpiricalLaw sample");
    }
}

EmpiricalLaw EmpiricalLaw::scalar(const std::vector<double>& x, std::string src) {
    std::vector<Vector> s;
    s.reserve(x.size());
    for (double v : x) s.push_back(Vector::Constant(1, v));
    return EmpiricalLaw(std::move(s), std::move(src));
}

std::string to_string(BetaMethod m) {
    return m == BetaMethod::exact_1d ? "exact_1d" : "randomized_lower_bound";
}

// =============================================================================
// Exact one-dimensional beta
// =============================================================================

namespace {

// Stored slopes are sums of +-1/n masses; levels closer than this are one level.
constexpr double kSlopeMerge = 1e-13;

struct Segment {
    double len;
    double slope;  // stored; actual slope = slope + offset
};

// max sum_i w_i f_i subject to |f_i| <= s, |f_{i+1} - f_i| <= l (z_{i+1} - z_i).
// The value function of the prefix problem is concave piecewise linear in the
// last value; positive-slope segments live in `left`, the rest in `right`.
double bl_program(const std::vector<double>& z, const std::vector<double>& w, double l) {
    const double s = 1.0 - l;
    if (s <= 0.0 || z.empty()) return 0.0;
    std::deque<Segment> left, right;
    double offset = 0.0;
    double base = -w[0] * s;  // value at the left end -s
    if (w[0] > 0.0) {
        left.push_back({2.0 * s, w[0]});
    } else {
        right.push_back({2.0 * s, w[0]});
    }
    for (std::size_t i = 1; i < z.size(); ++i) {
        const double c = l * (z[i] - z[i - 1]);
        if (c > 0.0) {
            // Window maximum: widen the peak into a plateau of length 2c, then
            // cut c from both ends to return to [-s, s].
            if (!right.empty() && std::abs(right.front().slope + offset) <= kSlopeMerge) {
                right.front().len += 2.0 * c;
            } else if (!left.empty() && std::abs(left.back().slope + offset) <= kSlopeMerge) {
                left.back().len += 2.0 * c;
            } else {
                right.push_front({2.0 * c, -offset});
            }
            double rem = c;
            while (rem > 0.0 && (!left.empty() || !right.empty())) {
                auto& seg = left.empty() ? right.front() : left.front();
                const double take = std::min(rem, seg.len);
                base += take * (seg.slope + offset);
                seg.len -= take;
                rem -= take;
                if (seg.len <= 0.0) (left.empty() ? right : left).pop_front();
            }
            rem = c;
            while (rem > 0.0 && (!left.empty() || !right.empty())) {
                auto& seg = right.empty() ? left.back() : right.back();
                const double take = std::min(rem, seg.len);
                seg.len -= take;
                rem -= take;
                if (seg.len <= 0.0) (right.empty() ? left : right).pop_back();
            }
        }
        offset += w[i];
        base -= w[i] * s;
        while (!right.empty() && right.front().slope + offset > 0.0) {
            if (!left.empty() && std::abs(left.back().slope - right.front().slope) <= kSlopeMerge) {
                left.back().len += right.front().len;
            } else {
                left.push_back(right.front());
            }
            right.pop_front();
        }
        while (!left.empty() && left.back().slope + offset <= 0.0) {
            if (!right.empty() && std::abs(right.front().slope - left.back().slope) <= kSlopeMerge) {
                right.front().len += left.back().len;
            } else {
                right.push_front(left.back());
            }
            left.pop_back();
        }
    }
    double value = base;
    for (const auto& seg : left) value += seg.len * (seg.slope + offset);
    return value;
}

}  // namespace

BetaEstimate beta_exact_1d(std::vector<double> x, std::vector<double> y) {
    if (x.empty() || y.empty()) throw InvalidArgument("beta_exact_1d: empty sample");
    for (double v : x) if (!std::isfinite(v)) throw InvalidArgument("beta_exact_1d: non-finite sample");
    for (double v : y) if (!std::isfinite(v)) throw InvalidArgument("beta_exact_1d: non-finite sample");
    const double wx = 1.0 / static_cast<double>(x.size());
    const double wy = 1.0 / static_cast<double>(y.size());
    std::vector<std::pair<double, double>> pooled;
    pooled.reserve(x.size() + y.size());
    for (double v : x) pooled.emplace_back(v, wx);
    for (double v : y) pooled.emplace_back(v, -wy);
    std::sort(pooled.begin(), pooled.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<double> z, w;
    for (const auto& [v, m] : pooled) {
        if (!z.empty() && z.back() == v) {
            w.back() += m;
        } else {
            z.push_back(v);
            w.push_back(m);
        }
    }
    // Drop atoms whose masses cancel to rounding.
    std::vector<double> zz, ww;
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (std::abs(w[i]) > 1e-15) {
            zz.push_back(z[i]);
            ww.push_back(w[i]);
        }
    }
    BetaEstimate est;
    est.method = BetaMethod::exact_1d;
    if (zz.empty()) return est;

    auto value = [&](double l) { return bl_program(zz, ww, l); };
    double best_l = 0.0;
    double best = value(0.0);
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = 0.0, b = 1.0;
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    double fc = value(c), fd = value(d);
    for (int it = 0; it < 90 && b - a > 1e-12; ++it) {
        if (fc < fd) {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = value(d);
        } else {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = value(c);
        }
    }
    for (auto [l, v] : {std::pair{c, fc}, std::pair{d, fd}}) {
        if (v > best) {
            best = v;
            best_l = l;
        }
    }
    est.value = std::clamp(best, 0.0, 2.0);
    est.lipschitz = best_l;
    return est;
}

// =============================================================================
// Lower bound family
// =============================================================================

namespace {

double projected_gap(const EmpiricalLaw& mu, const EmpiricalLaw& nu, const std::function<double(const Vector&)>& f) {
    double a = 0.0, b = 0.0;
    for (const auto& x : mu.samples) a += f(x);
    for (const auto& x : nu.samples) b += f(x);
    return std::abs(a / static_cast<double>(mu.size()) - b / static_cast<double>(nu.size()));
}

Vector random_unit(std::mt19937_64& gen, int d) {
    std::normal_distribution<double> normal;
    Vector u(d);
    do {
        for (int i = 0; i < d; ++i) u(i) = normal(gen);
    } while (u.norm() == 0.0);
    return u / u.norm();
}

}  // namespace

BetaEstimate beta_lower_bound(const EmpiricalLaw& mu, const EmpiricalLaw& nu, const BetaOptions& options) {
    if (mu.size() == 0 || nu.size() == 0) throw InvalidArgument("beta_distance: empty law");
    if (mu.dim() != nu.dim()) throw InvalidArgument("beta_distance: dimension mismatch");
    const int d = mu.dim();
    std::mt19937_64 gen(options.seed);
    BetaEstimate est;
    est.method = BetaMethod::randomized_lower_bound;

    auto project = [](const EmpiricalLaw& law, const Vector& u) {
        std::vector<double> p(law.size());
        for (std::size_t i = 0; i < law.size(); ++i) p[i] = u.dot(law.samples[i]);
        return p;
    };
    if (options.projections) {
        std::vector<Vector> dirs;
        for (int i = 0; i < d; ++i) dirs.push_back(Vector::Unit(d, i));
        for (std::size_t k = 0; k < options.directions && d > 1; ++k) dirs.push_back(random_unit(gen, d));
        for (const auto& u : dirs) {
            est.value = std::max(est.value, beta_exact_1d(project(mu, u), project(nu, u)).value);
            ++est.family_size;
        }
    }

    // Length scale of the pooled sample for bump radii.
    double scale = 0.0;
    {
        Vector mean = Vector::Zero(d);
        for (const auto& x : mu.samples) mean += x;
        for (const auto& x : nu.samples) mean += x;
        mean /= static_cast<double>(mu.size() + nu.size());
        for (const auto& x : mu.samples) scale += (x - mean).squaredNorm();
        for (const auto& x : nu.samples) scale += (x - mean).squaredNorm();
        scale = std::sqrt(scale / static_cast<double>(mu.size() + nu.size()));
        if (!(scale > 0.0)) scale = 1.0;
    }
    std::uniform_int_distribution<std::size_t> pick(0, mu.size() + nu.size() - 1);
    std::uniform_real_distribution<double> unit;
    auto sample_point = [&]() -> const Vector& {
        const auto i = pick(gen);
        return i < mu.size() ? mu.samples[i] : nu.samples[i - mu.size()];
    };
    for (std::size_t k = 0; k < options.bumps; ++k) {
        const Vector center = sample_point();
        const double rho = scale * std::exp(std::log(0.05) + unit(gen) * std::log(100.0));
        const double height = rho / (1.0 + rho);  // Lip = height / rho, Lip + sup = 1
        est.value = std::max(est.value, projected_gap(mu, nu, [&](const Vector& x) {
            return height * std::max(0.0, 1.0 - (x - center).norm() / rho);
        }));
        ++est.family_size;
    }
    for (std::size_t k = 0; k < options.hinges; ++k) {
        const Vector u = random_unit(gen, d);
        const double offset = u.dot(sample_point());
        const double l = unit(gen);
        const double s = 1.0 - l;
        est.value = std::max(est.value, projected_gap(mu, nu, [&](const Vector& x) {
            return std::clamp(l * (u.dot(x) - offset), -s, s);
        }));
        ++est.family_size;
    }
    est.value = std::clamp(est.value, 0.0, 2.0);
    return est;
}

BetaEstimate beta_distance(const EmpiricalLaw& mu, const EmpiricalLaw& nu, const BetaOptions& options) {
    if (mu.size() == 0 || nu.size() == 0) throw InvalidArgument("beta_distance: empty law");
    if (mu.dim() != nu.dim()) throw InvalidArgument("beta_distance: dimension mismatch");
    if (mu.dim() == 1) {
        std::vector<double> x(mu.size()), y(nu.size());
        for (std::size_t i = 0; i < mu.size(); ++i) x[i] = mu.samples[i](0);
        for (std::size_t i = 0; i < nu.size(); ++i) y[i] = nu.samples[i](0);
        return beta_exact_1d(std::move(x), std::move(y));
    }
    return beta_lower_bound(mu, nu, options);
}

double noise_floor(const EmpiricalLaw& law, std::size_t shuffles, std::uint64_t seed, const BetaOptions& options) {
    if (law.size() < 2) throw InvalidArgument("noise_floor: needs at least 2 samples");
    if (shuffles < 1) throw InvalidArgument("noise_floor: needs at least 1 shuffle");
    std::vector<std::size_t> idx(law.size());
    double total = 0.0;
    for (std::size_t r = 0; r < shuffles; ++r) {
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::mt19937_64 gen(mix_seed(seed, r));
        std::shuffle(idx.begin(), idx.end(), gen);
        const std::size_t half = law.size() / 2;
        std::vector<Vector> a, b;
        for (std::size_t i = 0; i < law.size(); ++i) (i < half ? a : b).push_back(law.samples[idx[i]]);
        total += beta_distance(EmpiricalLaw(std::move(a)), EmpiricalLaw(std::move(b)), options).value;
    }
    return total / static_cast<double>(shuffles);
}

// =============================================================================
// Law convergence
// =============================================================================

SplitHalfFloor split_half_floor(const PathEnsemble& ensemble, std::size_t shuffles, std::uint64_t seed,
                                const BetaOptions& options) {
    if (ensemble.n_paths < 2) throw InvalidArgument("split_half_floor: needs at least 2 paths");
    if (shuffles < 1) throw InvalidArgument("split_half_floor: needs at least 1 shuffle");
    SplitHalfFloor floor;
    floor.per_time.assign(ensemble.n_times(), 0.0);
    std::vector<std::size_t> idx(ensemble.n_paths);
    const std::size_t half = ensemble.n_paths / 2;
    for (std::size_t r = 0; r < shuffles; ++r) {
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::mt19937_64 gen(mix_seed(seed, r));
        std::shuffle(idx.begin(), idx.end(), gen);
        double sup = 0.0;
        for (std::size_t k = 0; k < ensemble.n_times(); ++k) {
            std::vector<Vector> a, b;
            for (std::size_t i = 0; i < ensemble.n_paths; ++i) {
                (i < half ? a : b).push_back(ensemble.state(idx[i], k));
            }
            const double v = beta_distance(EmpiricalLaw(std::move(a)), EmpiricalLaw(std::move(b)), options).value;
            floor.per_time[k] += v / static_cast<double>(shuffles);
            sup = std::max(sup, v);
        }
        floor.sup += sup / static_cast<double>(shuffles);
    }
    return floor;
}

std::vector<BetaCell> ensemble_beta(const PathEnsemble& a, const PathEnsemble& b, std::size_t floor_shuffles,
                                    const BetaOptions& options) {
    if (a.n_times() != b.n_times()) throw InvalidArgument("ensemble_beta: grids differ in length");
    if (a.dim != b.dim) throw InvalidArgument("ensemble_beta: dimension mismatch");
    const auto floor = split_half_floor(a, floor_shuffles, options.seed, options);
    std::vector<BetaCell> cells(a.n_times());
    for (std::size_t k = 0; k < a.n_times(); ++k) {
        cells[k].t = a.times[k];
        cells[k].beta = beta_distance(EmpiricalLaw(a.snapshot(k)), EmpiricalLaw(b.snapshot(k)), options).value;
        cells[k].noise_floor = floor.per_time[k];
        cells[k].n_samples = a.n_paths;
    }
    return cells;
}

LawSweep law_convergence_sweep(const Model& model, const std::vector<double>& eps_list, const TimeGrid& grid,
                               std::size_t n_paths, std::uint64_t seed, const LawSweepOptions& options) {
    if (eps_list.empty()) throw ValidationError("law_convergence_sweep: empty eps list");
    double min_dt = std::numeric_limits<double>::infinity();
    for (double eps : eps_list) {
        if (!(eps > 0.0)) throw ValidationError("law_convergence_sweep: eps must be positive");
        min_dt = std::min(min_dt, options.dt_factor * eps);
    }
    const double avg_dt = options.averaged_dt > 0.0 ? options.averaged_dt : min_dt;
    const auto reference = burn_in_solution(model, EquationTag::averaged(), grid, options.burn_in, avg_dt, n_paths,
                                            mix_seed(seed, 0), options.simulation);
    LawSweep sweep;
    for (std::size_t e = 0; e < eps_list.size(); ++e) {
        const double eps = eps_list[e];
        const auto fast = burn_in_solution(model, EquationTag::rescaled(eps), grid, options.burn_in,
                                           options.dt_factor * eps, n_paths, mix_seed(seed, e + 1),
                                           options.simulation);
        const auto floor = split_half_floor(fast, options.floor_shuffles, options.beta.seed, options.beta);
        BetaRow row{eps, -1.0, 0.0, floor.sup};
        for (std::size_t k = 0; k < grid.count; ++k) {
            BetaCell cell{eps, fast.times[k], 0.0, floor.per_time[k], n_paths};
            cell.beta = beta_distance(EmpiricalLaw(fast.snapshot(k)), EmpiricalLaw(reference.snapshot(k)), options.beta)
                            .value;
            if (cell.beta > row.sup_beta) {
                row.sup_beta = cell.beta;
                row.argmax_t = cell.t;
            }
            sweep.cells.push_back(cell);
        }
        sweep.rows.push_back(row);
    }
    return sweep;
}

// =============================================================================
// Comparability probe
// =============================================================================

ProbeReport comparability_probe(const CoefficientSystem& system, const EnsembleProvider& provider,
                                const std::vector<double>& shifts, const ProbeOptions& options) {
    if (!(options.window > 0.0) || !(options.grid_step > 0.0)) {
        throw InvalidArgument("comparability_probe: window and grid_step must be positive");
    }
    const auto count = static_cast<std::size_t>(std::floor(options.window / options.grid_step + 1e-9)) + 1;
    const auto base = provider(TimeGrid{0.0, options.grid_step, count}, mix_seed(options.seed, 0));
    ProbeReport report;
    report.noise_floor = split_half_floor(base, options.floor_shuffles, options.beta.seed, options.beta).sup;
    double c = 0.0;
    std::size_t hypothesis_rows = 0;
    for (std::size_t n = 0; n < shifts.size(); ++n) {
        double shift = shifts[n];
        if (options.shift_lattice > 0.0) shift = std::round(shift / options.shift_lattice) * options.shift_lattice;
        ProbeRow row;
        row.shift = shift;
        row.coefficient_distance =
            bebutov_distance(system_shift_distance(system, shift, options.state_radius), options.k_max,
                             options.bebutov_step)
                .value;
        const auto moved = provider(TimeGrid{shift, options.grid_step, count}, mix_seed(options.seed, n + 1));
        for (std::size_t k = 0; k < count; ++k) {
            row.law_distance = std::max(
                row.law_distance,
                beta_distance(EmpiricalLaw(moved.snapshot(k)), EmpiricalLaw(base.snapshot(k)), options.beta).value);
        }
        row.in_hypothesis = row.coefficient_distance <= options.hypothesis_threshold;
        if (row.in_hypothesis) {
            ++hypothesis_rows;
            const double excess = std::max(0.0, row.law_distance - report.noise_floor);
            if (excess > 0.0) {
                c = std::max(c, row.coefficient_distance > 0.0 ? excess / row.coefficient_distance
                                                               : std::numeric_limits<double>::infinity());
            }
        }
        report.rows.push_back(row);
    }
    report.fitted_c = c;
    std::ostringstream os;
    if (hypothesis_rows == 0) {
        report.pass = false;
        os << "no shift brings the coefficients within " << options.hypothesis_threshold
           << " in Bebutov distance; nothing to test";
    } else {
        report.pass = c <= options.c_cap;
        os << hypothesis_rows << " near-period shift(s); fitted c = " << c << " (cap " << options.c_cap
           << "), noise floor " << report.noise_floor;
    }
    report.message = os.str();
    return report;
}

}  // namespace bogolyubov
