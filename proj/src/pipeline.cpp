#include "bogolyubov/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "bogolyubov/averaging.hpp"
#include "bogolyubov/errors.hpp"
#include "bogolyubov/linear_flow.hpp"
#include "bogolyubov/metrics.hpp"
#include "bogolyubov/rng.hpp"
#include "bogolyubov/sde.hpp"

namespace bogolyubov {

namespace fs = std::filesystem;

bool RunResult::all_pass() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

// =============================================================================
// CSV helpers
// =============================================================================

namespace {

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const fs::path& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw NumericError("cannot write artifact " + path.string());
        row(header);
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << "\n";
    }

private:
    std::ofstream out_;
};

struct Table {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& key) const {
        const auto it = std::find(header.begin(), header.end(), key);
        if (it == header.end()) throw ValidationError("artifact " + name + " lacks column '" + key + "'");
        return static_cast<std::size_t>(it - header.begin());
    }
    const std::string& text(std::size_t r, const std::string& key) const { return rows[r].at(column(key)); }
    double value(std::size_t r, const std::string& key) const {
        const auto& s = text(r, key);
        try {
            return std::stod(s);
        } catch (const std::exception&) {
            throw ValidationError("artifact " + name + ": malformed number '" + s + "' in column " + key);
        }
    }
};

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

Table read_table(const fs::path& dir, const std::string& name) {
    std::ifstream in(dir / name);
    if (!in) throw ValidationError("missing artifact: " + (dir / name).string());
    Table t;
    t.name = name;
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("empty artifact: " + (dir / name).string());
    t.header = split_csv(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split_csv(line);
        if (cells.size() != t.header.size()) throw ValidationError("malformed row in artifact " + name);
        t.rows.push_back(std::move(cells));
    }
    return t;
}

bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (!(v[i] < v[i - 1])) return false;
    }
    return true;
}

std::vector<double> sorted_descending(std::vector<double> v) {
    std::sort(v.begin(), v.end(), std::greater<>());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

// =============================================================================
// Shared preparation
// =============================================================================

struct Prepared {
    Model model;
    DichotomyCertificate averaged_fit;
    double spectral_abscissa = 0.0;
    std::vector<std::pair<double, std::optional<DichotomyCertificate>>> fits;  // decreasing eps
    double N_uniform = 1.0;
    double nu_uniform = 0.0;
    double alpha_observed = 0.0;
    ContractionReport contraction;
    double burn_in = 0.0;
    double bias = 0.0;  // norm units
};

TimeGrid experiment_grid(const ExperimentConfig& ex) {
    const auto count = static_cast<std::size_t>(std::floor((ex.t_end - ex.t_start) / ex.t_step + 1e-9)) + 1;
    return TimeGrid{ex.t_start, ex.t_step, count};
}

SimulationOptions simulation_options(const ExperimentConfig& ex) {
    SimulationOptions s;
    s.threads = ex.threads;
    return s;
}

Prepared prepare(const ScenarioConfig& config, const std::vector<double>& fit_eps) {
    const auto& ex = config.experiment;
    Prepared p;
    p.model = make_model(config.system);
    const auto spectrum = hurwitz_check(p.model.averaged.a_bar);
    p.spectral_abscissa = spectrum.spectral_abscissa;
    if (!spectrum.is_hurwitz) {
        std::ostringstream os;
        os << "averaged operator A_bar fails hurwitz_check (spectral abscissa " << spectrum.spectral_abscissa
           << " >= 0)";
        throw ValidationError(os.str());
    }
    const TimeVaryingOperator a_bar(p.model.averaged.a_bar);
    p.averaged_fit = fit_dichotomy(a_bar, make_sampling_plan(a_bar, ex.t_max, ex.n_base, 1e-2));

    bool any = false;
    for (double eps : fit_eps) {
        const auto a_eps = config.system.a.rescaled(eps);
        std::optional<DichotomyCertificate> fit;
        try {
            fit = fit_dichotomy(a_eps, make_sampling_plan(a_eps, ex.t_max, ex.n_base, default_flow_step(eps)));
        } catch (const NotUniformlyStable&) {
        }
        if (fit) {
            if (!any) {
                p.N_uniform = fit->N;
                p.nu_uniform = fit->nu;
                p.alpha_observed = eps;
                any = true;
            } else {
                p.N_uniform = std::max(p.N_uniform, fit->N);
                p.nu_uniform = std::min(p.nu_uniform, fit->nu);
                p.alpha_observed = std::max(p.alpha_observed, eps);
            }
        }
        p.fits.emplace_back(eps, fit);
    }
    if (!any) throw NotUniformlyStable("no swept eps admits an exponential stability fit for A(t / eps)");

    const auto cert = config.system.certificate();
    p.contraction = verify_contraction(p.N_uniform, p.nu_uniform, cert.M, cert.L);
    p.burn_in = ex.burn_in > 0.0 ? ex.burn_in
                                 : std::max(default_burn_in(p.N_uniform, p.nu_uniform),
                                            default_burn_in(p.averaged_fit.N, p.averaged_fit.nu));
    if (p.contraction.r) p.bias = p.N_uniform * std::exp(-p.nu_uniform * p.burn_in) * *p.contraction.r;
    return p;
}

[[noreturn]] void refuse(const ContractionReport& c) {
    std::ostringstream os;
    os << "contraction refused: L = " << c.L << " violates the existence inequality L < nu / (N sqrt(2 + nu)) = "
       << c.existence_bound << " (N = " << c.N << ", nu = " << c.nu << ", M = " << c.M << ")";
    throw ContractionRefused(os.str());
}

struct L2Row {
    double eps;
    double dt;
    SolutionStatistics stats;
    double max_moment = 0.0;
    double max_moment_se = 0.0;
    double moment_bound = 0.0;
    bool bounded_ok = false;
};

L2Row l2_row(const ScenarioConfig& config, const Prepared& p, double eps) {
    const auto& ex = config.experiment;
    L2Row row{eps, ex.l2_dt_factor * eps, {}};
    row.stats = coupled_deviation(p.model, eps, experiment_grid(ex), row.dt, ex.n_paths, ex.seed, p.burn_in,
                                  simulation_options(ex));
    std::size_t arg = 0;
    for (std::size_t k = 0; k < row.stats.second_moment.size(); ++k) {
        if (row.stats.second_moment[k] > row.stats.second_moment[arg]) arg = k;
    }
    row.max_moment = row.stats.second_moment[arg];
    row.max_moment_se = row.stats.second_moment_se[arg];
    const double r = *p.contraction.r;
    // (r + b)^2 - r^2 is the second-moment allowance for a truncation bias b.
    row.moment_bound = r * r + 2.0 * r * p.bias + p.bias * p.bias;
    row.bounded_ok = row.max_moment <= row.moment_bound + 3.0 * row.max_moment_se;
    return row;
}

LawSweep beta_sweep(const ScenarioConfig& config, const Prepared& p, const std::vector<double>& eps) {
    const auto& ex = config.experiment;
    LawSweepOptions opts;
    opts.burn_in = p.burn_in;
    opts.dt_factor = ex.beta_dt_factor;
    opts.simulation = simulation_options(ex);
    opts.beta.seed = mix_seed(ex.seed, 2);
    return law_convergence_sweep(p.model, eps, experiment_grid(ex), ex.n_paths_beta, mix_seed(ex.seed, 1), opts);
}

// Sup over the state probe set of the coefficient gap between t and t + tau,
// matching system_shift_distance without building shifted copies.
ShiftGap coefficient_gap(const CoefficientSystem& system, double radius) {
    const int d = system.dim();
    std::vector<Vector> states{Vector::Zero(d)};
    for (int i = 0; i < d; ++i) {
        states.push_back(radius * Vector::Unit(d, i));
        states.push_back(-radius * Vector::Unit(d, i));
    }
    return [&system, states](double t, double tau) {
        double r = operator_norm(system.a(t + tau) - system.a(t));
        for (const auto& x : states) {
            r = std::max(r, (system.drift(t + tau, x) - system.drift(t, x)).norm());
            r = std::max(r, (system.diffusion(t + tau, x) - system.diffusion(t, x)).norm());
        }
        return r;
    };
}

// Near-period shifts in the original time scale, one per cluster of accepted
// grid points, followed by one shift between clusters.
std::vector<double> probe_taus(const ScenarioConfig& config) {
    const auto& ex = config.experiment;
    const auto& rec = config.system.recurrence;
    std::vector<double> taus;
    if (rec.tag == RecurrenceTag::periodic && rec.period > 0.0) {
        for (std::size_t n = 1; n <= ex.probe_count; ++n) taus.push_back(rec.period * static_cast<double>(n));
        taus.push_back(0.5 * rec.period);
        return taus;
    }
    AlmostPeriodOptions ap;
    ap.window = ex.probe_ap_window;
    ap.threads = ex.threads;
    const auto found = find_almost_periods(coefficient_gap(config.system, 1.0), ex.probe_accuracy, ex.probe_search_lo,
                                           ex.probe_search_hi, ex.probe_search_step, ap);
    std::size_t i = 0;
    while (i < found.size() && taus.size() < ex.probe_count) {
        std::size_t j = i;
        while (j + 1 < found.size() && found[j + 1] - found[j] <= 1.5 * ex.probe_search_step) ++j;
        taus.push_back(found[(i + j) / 2]);
        i = j + 1;
    }
    taus.push_back(0.5 * (taus.empty() ? ex.probe_search_lo : taus.front()));
    return taus;
}

ProbeReport run_probe(const ScenarioConfig& config, const Prepared& p) {
    const auto& ex = config.experiment;
    const double eps = ex.probe_eps;
    std::vector<double> shifts;
    if (!ex.probe_shifts.empty()) {
        shifts = ex.probe_shifts;
    } else {
        for (double tau : probe_taus(config)) shifts.push_back(eps * tau);
    }
    const Model& model = p.model;
    const double burn_in = p.burn_in;
    const double dt = ex.beta_dt_factor * eps;
    const std::size_t n_paths = ex.probe_n_paths;
    const unsigned threads = ex.threads;
    EnsembleProvider provider = [&model, eps, burn_in, dt, n_paths, threads](const TimeGrid& grid,
                                                                             std::uint64_t seed) {
        SimulationOptions sim;
        sim.threads = threads;
        sim.lattice_origin = grid.start;
        return burn_in_solution(model, EquationTag::rescaled(eps), grid, burn_in, dt, n_paths, seed, sim);
    };
    ProbeOptions opts;
    opts.window = ex.probe_window;
    opts.grid_step = ex.t_step;
    opts.hypothesis_threshold = ex.probe_threshold;
    opts.c_cap = ex.probe_c_cap;
    opts.seed = mix_seed(ex.seed, 3);
    opts.beta.seed = mix_seed(ex.seed, 4);
    return comparability_probe(config.system.rescaled(eps), provider, shifts, opts);
}

}  // namespace

// =============================================================================
// run_scenario
// =============================================================================

RunResult run_scenario(const ScenarioConfig& config, const std::string& out_dir) {
    validate_config(config);
    const auto& ex = config.experiment;
    const fs::path dir(out_dir);
    fs::create_directories(dir);

    {
        const auto reports = verify_certificates(config.system, ex.certificate_samples, ex.seed);
        CsvWriter csv(dir / "certificates.csv",
                      {"component", "certified_M", "certified_L", "worst_M_ratio", "worst_L_ratio", "samples"});
        for (const auto& r : reports) {
            csv.row({r.component, num(r.certified_M), num(r.certified_L), num(r.worst_M_ratio), num(r.worst_L_ratio),
                     std::to_string(r.samples)});
        }
    }

    const auto eps = sorted_descending(ex.eps);
    auto fit_eps = eps;
    fit_eps.insert(fit_eps.end(), ex.gap_eps.begin(), ex.gap_eps.end());
    fit_eps = sorted_descending(fit_eps);
    const Prepared p = prepare(config, fit_eps);

    {
        CsvWriter csv(dir / "averaging.csv", {"modulus", "T", "sample", "envelope", "vanishes"});
        const std::pair<const char*, const DecayModulus*> moduli[] = {
            {"operator", &p.model.averaged.omega},
            {"drift", &p.model.averaged.omega1},
            {"diffusion", &p.model.averaged.omega2}};
        for (const auto& [name, m] : moduli) {
            for (std::size_t i = 0; i < m->samples.size(); ++i) {
                csv.row({name, num(m->samples[i].first), num(m->samples[i].second), num(m->envelope[i]),
                         m->vanishes() ? "1" : "0"});
            }
        }
    }

    {
        CsvWriter csv(dir / "stability.csv", {"section", "epsilon", "key", "value"});
        csv.row({"averaged", "", "N", num(p.averaged_fit.N)});
        csv.row({"averaged", "", "nu", num(p.averaged_fit.nu)});
        csv.row({"averaged", "", "residual", num(p.averaged_fit.residual)});
        csv.row({"averaged", "", "spectral_abscissa", num(p.spectral_abscissa)});
        for (const auto& [e, fit] : p.fits) {
            csv.row({"rescaled", num(e), "fit_ok", fit ? "1" : "0"});
            if (fit) {
                csv.row({"rescaled", num(e), "N", num(fit->N)});
                csv.row({"rescaled", num(e), "nu", num(fit->nu)});
                csv.row({"rescaled", num(e), "residual", num(fit->residual)});
            }
        }
        csv.row({"uniform", "", "N", num(p.N_uniform)});
        csv.row({"uniform", "", "nu", num(p.nu_uniform)});
        csv.row({"uniform", "", "alpha_observed", num(p.alpha_observed)});
        const auto& c = p.contraction;
        csv.row({"contraction", "", "M", num(c.M)});
        csv.row({"contraction", "", "L", num(c.L)});
        csv.row({"contraction", "", "existence", c.existence ? "1" : "0"});
        csv.row({"contraction", "", "stability", c.stability ? "1" : "0"});
        csv.row({"contraction", "", "averaging", c.averaging ? "1" : "0"});
        csv.row({"contraction", "", "existence_bound", num(c.existence_bound)});
        csv.row({"contraction", "", "stability_bound", num(c.stability_bound)});
        csv.row({"contraction", "", "averaging_bound", num(c.averaging_bound)});
        csv.row({"contraction", "", "r", c.r ? num(*c.r) : "nan"});
        csv.row({"contraction", "", "burn_in", num(p.burn_in)});
        csv.row({"contraction", "", "bias", num(p.bias)});
    }
    if (!p.contraction.existence || !p.contraction.r) refuse(p.contraction);

    {
        const double nu_bar = p.averaged_fit.nu;
        const double gamma0 = ex.gamma0 > 0.0 ? ex.gamma0 : 0.5 * nu_bar;
        GapOptions go;
        go.t_max = ex.t_max;
        go.n_base = ex.n_base;
        go.threads = ex.threads;
        const auto table = rescaled_gap(config.system.a, p.model.averaged.a_bar, ex.gap_eps, gamma0, nu_bar, go);
        CsvWriter csv(dir / "gap_table.csv", {"epsilon", "gamma0", "N_eps", "witness_t", "witness_tau"});
        for (const auto& r : table.rows) {
            csv.row({num(r.eps), num(table.gamma0), num(r.N_eps), num(r.witness_t), num(r.witness_tau)});
        }
    }

    {
        CsvWriter csv(dir / "l2_sweep.csv",
                      {"epsilon", "dt", "burn_in", "t_sup", "sup_deviation", "sup_se", "max_second_moment",
                       "max_second_moment_se", "moment_bound", "bounded_ok", "n_paths"});
        for (double e : eps) {
            const auto row = l2_row(config, p, e);
            csv.row({num(e), num(row.dt), num(p.burn_in), num(row.stats.times[row.stats.sup_index]),
                     num(row.stats.sup_deviation), num(row.stats.sup_deviation_se), num(row.max_moment),
                     num(row.max_moment_se), num(row.moment_bound), row.bounded_ok ? "1" : "0",
                     std::to_string(ex.n_paths)});
        }
    }

    {
        const auto sweep = beta_sweep(config, p, eps);
        CsvWriter csv(dir / "beta_sweep.csv", {"epsilon", "t", "beta", "noise_floor", "n_samples", "sup_noise_floor"});
        std::map<double, double> sup_floor;
        for (const auto& r : sweep.rows) sup_floor[r.eps] = r.noise_floor;
        for (const auto& c : sweep.cells) {
            csv.row({num(c.eps), num(c.t), num(c.beta), num(c.noise_floor), std::to_string(c.n_samples),
                     num(sup_floor[c.eps])});
        }
    }

    {
        const auto probe = run_probe(config, p);
        CsvWriter csv(dir / "comparability.csv", {"epsilon", "shift", "coefficient_distance", "law_distance",
                                                  "in_hypothesis", "noise_floor", "fitted_c", "pass"});
        for (const auto& r : probe.rows) {
            csv.row({num(ex.probe_eps), num(r.shift), num(r.coefficient_distance), num(r.law_distance),
                     r.in_hypothesis ? "1" : "0", num(probe.noise_floor), num(probe.fitted_c),
                     probe.pass ? "1" : "0"});
        }
    }

    {
        const auto text = report(out_dir);
        std::ofstream out(dir / "summary.txt");
        out << text;
    }
    return RunResult{out_dir, artifact_verdicts(out_dir)};
}

// =============================================================================
// recurrence_probe
// =============================================================================

ProbeReport recurrence_probe(const ScenarioConfig& config) {
    validate_config(config);
    const Prepared p = prepare(config, {config.experiment.probe_eps});
    return run_probe(config, p);
}

// =============================================================================
// sweep_epsilon
// =============================================================================

ConvergenceTable sweep_epsilon(const ScenarioConfig& config, const std::vector<double>& eps_list) {
    if (eps_list.empty()) throw ValidationError("sweep_epsilon: empty eps list");
    ScenarioConfig cfg = config;
    cfg.experiment.eps = sorted_descending(eps_list);
    validate_config(cfg);
    const auto& eps = cfg.experiment.eps;
    const Prepared p = prepare(cfg, eps);
    if (!p.contraction.existence || !p.contraction.r) refuse(p.contraction);

    ConvergenceTable table;
    for (double e : eps) {
        const auto row = l2_row(cfg, p, e);
        table.rows.push_back({e, row.stats.sup_deviation, row.stats.sup_deviation_se, 0.0, 0.0});
    }
    const auto sweep = beta_sweep(cfg, p, eps);
    for (std::size_t i = 0; i < eps.size(); ++i) {
        table.rows[i].sup_beta = sweep.rows[i].sup_beta;
        table.rows[i].noise_floor = sweep.rows[i].noise_floor;
    }
    if (table.rows.size() > 1) {
        std::vector<double> l2, beta;
        for (const auto& r : table.rows) {
            l2.push_back(r.sup_l2);
            beta.push_back(r.sup_beta);
        }
        table.l2_decreasing = strictly_decreasing(l2);
        table.beta_decreasing = strictly_decreasing(beta);
    }
    return table;
}

void write_convergence_csv(std::ostream& os, const ConvergenceTable& table) {
    os << "epsilon,sup_l2_deviation,sup_l2_se,sup_beta,noise_floor\n";
    for (const auto& r : table.rows) {
        os << num(r.eps) << "," << num(r.sup_l2) << "," << num(r.sup_l2_se) << "," << num(r.sup_beta) << ","
           << num(r.noise_floor) << "\n";
    }
    auto verdict = [](const std::optional<bool>& v) { return v ? (*v ? "decreasing" : "not decreasing") : "n/a"; };
    os << "# l2: " << verdict(table.l2_decreasing) << "; beta: " << verdict(table.beta_decreasing) << "\n";
}

// =============================================================================
// report
// =============================================================================

namespace {

struct Artifacts {
    std::map<std::string, Table> tables;
    const Table& operator[](const std::string& name) const { return tables.at(name); }
};

Artifacts load_artifacts(const std::string& dir) {
    Artifacts a;
    for (const auto& name : artifact_names()) a.tables.emplace(name, read_table(dir, name));
    return a;
}

std::optional<double> stability_value(const Table& t, const std::string& section, const std::string& key,
                                      const std::string& eps = "") {
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        if (t.text(r, "section") == section && t.text(r, "key") == key && t.text(r, "epsilon") == eps) {
            return t.value(r, "value");
        }
    }
    return std::nullopt;
}

struct BetaSummary {
    double eps;
    double sup_beta;
    double argmax_t;
    double floor;
};

std::vector<BetaSummary> beta_rows(const Table& t) {
    std::vector<BetaSummary> rows;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const double e = t.value(r, "epsilon");
        if (rows.empty() || rows.back().eps != e) rows.push_back({e, -1.0, 0.0, 0.0});
        auto& b = rows.back();
        const double beta = t.value(r, "beta");
        if (beta > b.sup_beta) {
            b.sup_beta = beta;
            b.argmax_t = t.value(r, "t");
        }
        b.floor = t.value(r, "sup_noise_floor");
    }
    return rows;
}

std::vector<Verdict> verdicts_from(const Artifacts& a) {
    std::vector<Verdict> out;
    {
        const auto& t = a["certificates.csv"];
        bool ok = !t.rows.empty();
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            ok = ok && t.value(r, "worst_M_ratio") <= 1.0 + 1e-9 && t.value(r, "worst_L_ratio") <= 1.0 + 1e-9;
        }
        out.push_back({"certificates", ok, std::to_string(t.rows.size()) + " field(s) checked"});
    }
    {
        const auto& t = a["averaging.csv"];
        bool ok = !t.rows.empty();
        for (std::size_t r = 0; r < t.rows.size(); ++r) ok = ok && t.text(r, "vanishes") == "1";
        out.push_back({"averaging moduli vanish", ok, ""});
    }
    {
        const auto& t = a["stability.csv"];
        std::size_t fits = 0, ok_fits = 0;
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            if (t.text(r, "section") == "rescaled" && t.text(r, "key") == "fit_ok") {
                ++fits;
                if (t.value(r, "value") == 1.0) ++ok_fits;
            }
        }
        out.push_back({"dichotomy transfer", fits > 0 && ok_fits == fits,
                       std::to_string(ok_fits) + "/" + std::to_string(fits) + " eps fitted"});
        const auto existence = stability_value(t, "contraction", "existence");
        out.push_back({"contraction", existence && *existence == 1.0, "existence inequality"});
    }
    {
        const auto& t = a["gap_table.csv"];
        std::vector<double> n;
        for (std::size_t r = 0; r < t.rows.size(); ++r) n.push_back(t.value(r, "N_eps"));
        out.push_back({"averaged-flow gap", !n.empty() && strictly_decreasing(n),
                       n.size() > 1 ? "N(eps) strictly decreasing" : "single eps, no trend"});
    }
    {
        const auto& t = a["l2_sweep.csv"];
        std::vector<double> d;
        bool bounded = !t.rows.empty();
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            d.push_back(t.value(r, "sup_deviation"));
            bounded = bounded && t.text(r, "bounded_ok") == "1";
        }
        out.push_back({"L2 convergence", !d.empty() && strictly_decreasing(d),
                       d.size() > 1 ? "sup deviation strictly decreasing" : "single eps, no trend"});
        out.push_back({"boundedness radius", bounded, "max E|X|^2 <= (r + bias)^2 + 3 SE"});
    }
    {
        const auto rows = beta_rows(a["beta_sweep.csv"]);
        std::vector<double> b;
        for (const auto& r : rows) b.push_back(r.sup_beta);
        const bool floor = !rows.empty() && rows.back().sup_beta <= rows.back().floor;
        out.push_back({"distributional convergence", !rows.empty() && strictly_decreasing(b) && floor,
                       "sup beta decreasing, smallest eps at the noise floor"});
    }
    {
        const auto& t = a["comparability.csv"];
        const bool pass = !t.rows.empty() && t.text(0, "pass") == "1";
        out.push_back({"recurrence probe", pass,
                       t.rows.empty() ? "no rows" : "fitted c = " + short_num(t.value(0, "fitted_c"))});
    }
    return out;
}

}  // namespace

std::vector<Verdict> artifact_verdicts(const std::string& dir) { return verdicts_from(load_artifacts(dir)); }

std::string report(const std::string& dir) {
    const auto a = load_artifacts(dir);
    std::ostringstream os;
    os << "Stages\n";
    const char* stage_names[] = {"certificate check", "averaging",         "dichotomy fit and contraction",
                                 "rescaled gap",      "coupled L2 sweep",  "beta law sweep",
                                 "comparability probe"};
    for (std::size_t i = 0; i < artifact_names().size(); ++i) {
        os << "  " << (i + 1) << ". " << stage_names[i] << " -> " << artifact_names()[i] << " ("
           << a[artifact_names()[i]].rows.size() << " rows)\n";
    }

    const auto& st = a["stability.csv"];
    auto show = [&](const char* label, const std::string& section, const std::string& key) {
        const auto v = stability_value(st, section, key);
        os << "  " << label << " = " << (v ? short_num(*v) : std::string("n/a")) << "\n";
    };
    os << "\nConstants\n";
    show("averaged N", "averaged", "N");
    show("averaged nu", "averaged", "nu");
    show("uniform N", "uniform", "N");
    show("uniform nu", "uniform", "nu");
    show("alpha_observed", "uniform", "alpha_observed");
    const auto& gap = a["gap_table.csv"];
    os << "  gamma0 = " << (gap.rows.empty() ? std::string("n/a") : short_num(gap.value(0, "gamma0"))) << "\n";
    show("M", "contraction", "M");
    show("L", "contraction", "L");
    show("r", "contraction", "r");
    show("burn-in", "contraction", "burn_in");
    show("truncation bias", "contraction", "bias");
    for (const char* key : {"existence", "stability", "averaging"}) {
        const auto v = stability_value(st, "contraction", key);
        os << "  " << key << " inequality: " << (v && *v == 1.0 ? "holds" : "fails") << "\n";
    }

    os << "\nRescaled gap\n  eps        N(eps)\n";
    for (std::size_t r = 0; r < gap.rows.size(); ++r) {
        os << "  " << short_num(gap.value(r, "epsilon")) << "  " << short_num(gap.value(r, "N_eps")) << "\n";
    }

    os << "\nConvergence\n  eps        sup L2       SE           sup beta     floor\n";
    const auto& l2 = a["l2_sweep.csv"];
    const auto beta = beta_rows(a["beta_sweep.csv"]);
    for (std::size_t r = 0; r < l2.rows.size(); ++r) {
        const double e = l2.value(r, "epsilon");
        os << "  " << short_num(e) << "  " << short_num(l2.value(r, "sup_deviation")) << "  "
           << short_num(l2.value(r, "sup_se"));
        for (const auto& b : beta) {
            if (b.eps == e) os << "  " << short_num(b.sup_beta) << "  " << short_num(b.floor);
        }
        os << "\n";
    }

    os << "\nComparability probe\n  shift      d_n          s_n          hypothesis\n";
    const auto& cp = a["comparability.csv"];
    for (std::size_t r = 0; r < cp.rows.size(); ++r) {
        os << "  " << short_num(cp.value(r, "shift")) << "  " << short_num(cp.value(r, "coefficient_distance"))
           << "  " << short_num(cp.value(r, "law_distance")) << "  " << (cp.text(r, "in_hypothesis") == "1" ? "yes" : "no")
           << "\n";
    }
    if (!cp.rows.empty()) os << "  noise floor = " << short_num(cp.value(0, "noise_floor")) << "\n";

    os << "\nVerdicts\n";
    for (const auto& v : verdicts_from(a)) {
        os << "  " << (v.pass ? "PASS" : "FAIL") << "  " << v.name;
        if (!v.detail.empty()) os << " (" << v.detail << ")";
        os << "\n";
    }
    return os.str();
}

}  // namespace bogolyubov
