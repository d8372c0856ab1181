#include "bogolyubov/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

#include "bogolyubov/errors.hpp"

namespace bogolyubov {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char c : s) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == sep && depth == 0) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

double parse_atom(const std::string& raw) {
    std::string s = trim(raw);
    if (s.empty()) throw ValidationError("empty number");
    double sign = 1.0;
    if (s[0] == '-' || s[0] == '+') {
        if (s[0] == '-') sign = -1.0;
        s = trim(s.substr(1));
    }
    if (s == "pi") return sign * std::numbers::pi;
    if (s.rfind("sqrt(", 0) == 0 && s.back() == ')') {
        const double inner = parse_number(s.substr(5, s.size() - 6));
        if (inner < 0.0) throw ValidationError("sqrt of a negative number: " + raw);
        return sign * std::sqrt(inner);
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ValidationError("not a number: '" + raw + "'");
    }
    if (used != s.size()) throw ValidationError("not a number: '" + raw + "'");
    return sign * v;
}

}  // namespace

double parse_number(const std::string& text) {
    double v = 1.0;
    for (const auto& part : split(text, '*')) v *= parse_atom(part);
    if (!std::isfinite(v)) throw ValidationError("non-finite number: '" + text + "'");
    return v;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    if (trim(text).empty()) return out;
    for (const auto& part : split(text, ',')) out.push_back(parse_number(part));
    return out;
}

namespace {

struct Line {
    std::string key;
    std::string value;
    int number;
};

struct Context {
    std::string origin;
    int dim = 0;

    [[noreturn]] void fail(const Line& line, const std::string& msg) const {
        std::ostringstream os;
        os << origin << ":" << line.number << ": " << msg;
        throw ValidationError(os.str());
    }
};

Matrix parse_matrix(const Context& ctx, const Line& line, const std::string& text) {
    const auto rows = split(text, ';');
    if (static_cast<int>(rows.size()) != ctx.dim) ctx.fail(line, "matrix must have " + std::to_string(ctx.dim) + " rows");
    Matrix m(ctx.dim, ctx.dim);
    for (int i = 0; i < ctx.dim; ++i) {
        const auto entries = parse_list(rows[static_cast<std::size_t>(i)]);
        if (static_cast<int>(entries.size()) != ctx.dim) {
            ctx.fail(line, "matrix row must have " + std::to_string(ctx.dim) + " entries");
        }
        for (int j = 0; j < ctx.dim; ++j) m(i, j) = entries[static_cast<std::size_t>(j)];
    }
    return m;
}

Vector parse_vector(const Context& ctx, const Line& line, const std::string& text) {
    const auto entries = parse_list(text);
    if (static_cast<int>(entries.size()) != ctx.dim) {
        ctx.fail(line, "vector must have " + std::to_string(ctx.dim) + " entries");
    }
    Vector v(ctx.dim);
    for (int i = 0; i < ctx.dim; ++i) v(i) = entries[static_cast<std::size_t>(i)];
    return v;
}

TimeFactor parse_factor(const Context& ctx, const Line& line, const std::string& raw) {
    const std::string s = trim(raw);
    if (s == "1") return TimeFactor::constant();
    const auto open = s.find('(');
    if (open == std::string::npos || s.back() != ')') ctx.fail(line, "unknown time factor '" + s + "'");
    const std::string head = s.substr(0, open);
    const auto args = parse_list(s.substr(open + 1, s.size() - open - 2));
    auto want = [&](std::size_t n) {
        if (args.size() != n) ctx.fail(line, "time factor '" + head + "' takes " + std::to_string(n) + " argument(s)");
    };
    if (head == "cos") { want(1); return TimeFactor::cosine(args[0]); }
    if (head == "sin") { want(1); return TimeFactor::sine(args[0]); }
    if (head == "decay") {
        want(1);
        if (args[0] < 0.0) ctx.fail(line, "decay rate must be non-negative");
        return TimeFactor::decay(args[0]);
    }
    if (head == "levitan_sin") { want(2); return TimeFactor::levitan_sin(args[0], args[1]); }
    ctx.fail(line, "unknown time factor '" + head + "' (catalog: 1, cos, sin, decay, levitan_sin)");
}

std::size_t parse_count(const Context& ctx, const Line& line) {
    const double v = parse_number(line.value);
    if (v < 0.0 || v != std::floor(v)) ctx.fail(line, "'" + line.key + "' must be a non-negative integer");
    return static_cast<std::size_t>(v);
}

struct FieldBuilder {
    std::vector<FieldTerm> terms;
    std::optional<double> M, L;
};

void field_line(const Context& ctx, const Line& line, FieldBuilder& fb) {
    if (line.key == "certified_M") { fb.M = parse_number(line.value); return; }
    if (line.key == "certified_L") { fb.L = parse_number(line.value); return; }
    const auto parts = split(line.value, '|');
    FieldTerm term;
    if (line.key == "constant") {
        if (parts.size() != 2) ctx.fail(line, "constant = FACTOR | VECTOR");
        term.factor = parse_factor(ctx, line, parts[0]);
        term.kind = TermKind::constant;
        term.vector = parse_vector(ctx, line, parts[1]);
    } else if (line.key == "linear") {
        if (parts.size() != 2) ctx.fail(line, "linear = FACTOR | MATRIX");
        term.factor = parse_factor(ctx, line, parts[0]);
        term.kind = TermKind::linear;
        term.matrix = parse_matrix(ctx, line, parts[1]);
    } else if (line.key == "nonlinear") {
        if (parts.size() != 3) ctx.fail(line, "nonlinear = FACTOR | KIND | MATRIX");
        term.factor = parse_factor(ctx, line, parts[0]);
        term.kind = TermKind::nonlinear;
        try {
            term.saturation = saturation_from_string(parts[1]);
        } catch (const ValidationError& e) {
            ctx.fail(line, e.what());
        }
        term.matrix = parse_matrix(ctx, line, parts[2]);
    } else {
        ctx.fail(line, "unknown key '" + line.key + "'");
    }
    fb.terms.push_back(std::move(term));
}

StateField build_field(const Context& ctx, const std::string& section, const FieldBuilder& fb) {
    if (!fb.M || !fb.L) {
        throw ValidationError(ctx.origin + ": section [" + section + "] must declare certified_M and certified_L");
    }
    try {
        return StateField(ctx.dim, fb.terms, Certificate{*fb.M, *fb.L});
    } catch (const InvalidArgument& e) {
        throw ValidationError(ctx.origin + ": section [" + section + "]: " + e.what());
    }
}

using Setter = std::function<void(const Context&, const Line&, ExperimentConfig&)>;

std::map<std::string, Setter> experiment_setters() {
    std::map<std::string, Setter> m;
    auto number = [](double ExperimentConfig::*field) {
        return Setter([field](const Context&, const Line& l, ExperimentConfig& e) { e.*field = parse_number(l.value); });
    };
    auto count = [](std::size_t ExperimentConfig::*field) {
        return Setter([field](const Context& c, const Line& l, ExperimentConfig& e) { e.*field = parse_count(c, l); });
    };
    auto list = [](std::vector<double> ExperimentConfig::*field) {
        return Setter([field](const Context&, const Line& l, ExperimentConfig& e) { e.*field = parse_list(l.value); });
    };
    m["eps"] = list(&ExperimentConfig::eps);
    m["gap_eps"] = list(&ExperimentConfig::gap_eps);
    m["t_start"] = number(&ExperimentConfig::t_start);
    m["t_end"] = number(&ExperimentConfig::t_end);
    m["t_step"] = number(&ExperimentConfig::t_step);
    m["l2_dt_factor"] = number(&ExperimentConfig::l2_dt_factor);
    m["beta_dt_factor"] = number(&ExperimentConfig::beta_dt_factor);
    m["n_paths"] = count(&ExperimentConfig::n_paths);
    m["n_paths_beta"] = count(&ExperimentConfig::n_paths_beta);
    m["burn_in"] = number(&ExperimentConfig::burn_in);
    m["seed"] = [](const Context& c, const Line& l, ExperimentConfig& e) {
        try {
            std::size_t used = 0;
            e.seed = std::stoull(l.value, &used);
            if (used != l.value.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            c.fail(l, "seed must be an unsigned 64-bit integer");
        }
    };
    m["gamma0"] = number(&ExperimentConfig::gamma0);
    m["t_max"] = number(&ExperimentConfig::t_max);
    m["n_base"] = count(&ExperimentConfig::n_base);
    m["certificate_samples"] = count(&ExperimentConfig::certificate_samples);
    m["probe_eps"] = number(&ExperimentConfig::probe_eps);
    m["probe_shifts"] = list(&ExperimentConfig::probe_shifts);
    m["probe_accuracy"] = number(&ExperimentConfig::probe_accuracy);
    m["probe_search_lo"] = number(&ExperimentConfig::probe_search_lo);
    m["probe_search_hi"] = number(&ExperimentConfig::probe_search_hi);
    m["probe_search_step"] = number(&ExperimentConfig::probe_search_step);
    m["probe_ap_window"] = number(&ExperimentConfig::probe_ap_window);
    m["probe_count"] = count(&ExperimentConfig::probe_count);
    m["probe_window"] = number(&ExperimentConfig::probe_window);
    m["probe_n_paths"] = count(&ExperimentConfig::probe_n_paths);
    m["probe_threshold"] = number(&ExperimentConfig::probe_threshold);
    m["probe_c_cap"] = number(&ExperimentConfig::probe_c_cap);
    m["threads"] = [](const Context& c, const Line& l, ExperimentConfig& e) {
        e.threads = static_cast<unsigned>(parse_count(c, l));
    };
    return m;
}

}  // namespace

ScenarioConfig parse_config(std::istream& in, const std::string& origin) {
    Context ctx{origin, 0};
    std::map<std::string, std::vector<Line>> sections;
    std::vector<std::string> order;
    std::string section;
    std::string raw;
    int number = 0;
    const std::vector<std::string> known{"", "operator", "drift", "diffusion", "experiment"};
    while (std::getline(in, raw)) {
        ++number;
        const auto hash = raw.find('#');
        const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (text.empty()) continue;
        if (text.front() == '[') {
            if (text.back() != ']') ctx.fail({"", "", number}, "malformed section header");
            section = trim(text.substr(1, text.size() - 2));
            if (std::find(known.begin(), known.end(), section) == known.end() || section.empty()) {
                ctx.fail({"", "", number}, "unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) ctx.fail({"", "", number}, "expected key = value");
        sections[section].push_back({trim(text.substr(0, eq)), trim(text.substr(eq + 1)), number});
    }

    ScenarioConfig config;
    bool have_schema = false;
    RecurrenceClass recurrence;
    double eps0 = 1.0;
    for (const auto& line : sections[""]) {
        if (line.key == "schema") {
            if (line.value != "bogolyubov/1") ctx.fail(line, "unsupported schema '" + line.value + "' (expected bogolyubov/1)");
            have_schema = true;
        } else if (line.key == "name") {
            config.name = line.value;
        } else if (line.key == "dimension") {
            const auto d = parse_count(ctx, line);
            if (d < 1 || d > static_cast<std::size_t>(kMaxDimension)) ctx.fail(line, "dimension must be in [1, 16]");
            ctx.dim = static_cast<int>(d);
        } else if (line.key == "recurrence") {
            try {
                recurrence.tag = recurrence_tag_from_string(line.value);
            } catch (const ValidationError& e) {
                ctx.fail(line, e.what());
            }
        } else if (line.key == "period") {
            recurrence.period = parse_number(line.value);
        } else if (line.key == "frequencies") {
            recurrence.frequencies = parse_list(line.value);
        } else if (line.key == "eps0") {
            eps0 = parse_number(line.value);
            if (!(eps0 > 0.0)) ctx.fail(line, "eps0 must be positive");
        } else {
            ctx.fail(line, "unknown key '" + line.key + "'");
        }
    }
    if (!have_schema) throw ValidationError(origin + ": missing 'schema = bogolyubov/1'");
    if (ctx.dim == 0) throw ValidationError(origin + ": missing 'dimension'");
    if (config.name.empty()) throw ValidationError(origin + ": missing 'name'");

    std::optional<Matrix> base;
    std::vector<Harmonic> harmonics;
    std::optional<DecayTerm> decay;
    for (const auto& line : sections["operator"]) {
        if (line.key == "base") {
            base = parse_matrix(ctx, line, line.value);
        } else if (line.key == "harmonic") {
            const auto parts = split(line.value, '|');
            if (parts.size() != 3) ctx.fail(line, "harmonic = FREQ | COS_MATRIX | SIN_MATRIX");
            harmonics.push_back({parse_number(parts[0]), parse_matrix(ctx, line, parts[1]), parse_matrix(ctx, line, parts[2])});
        } else if (line.key == "decay") {
            const auto parts = split(line.value, '|');
            if (parts.size() != 2) ctx.fail(line, "decay = RATE | MATRIX");
            decay = DecayTerm{parse_matrix(ctx, line, parts[1]), parse_number(parts[0])};
        } else {
            ctx.fail(line, "unknown key '" + line.key + "' in [operator]");
        }
    }
    if (!base) throw ValidationError(origin + ": [operator] must declare 'base'");

    FieldBuilder drift, diffusion;
    for (const auto& line : sections["drift"]) field_line(ctx, line, drift);
    for (const auto& line : sections["diffusion"]) field_line(ctx, line, diffusion);

    const auto setters = experiment_setters();
    for (const auto& line : sections["experiment"]) {
        const auto it = setters.find(line.key);
        if (it == setters.end()) ctx.fail(line, "unknown key '" + line.key + "' in [experiment]");
        it->second(ctx, line, config.experiment);
    }

    try {
        config.system.a = TimeVaryingOperator(*base, harmonics, decay);
    } catch (const InvalidArgument& e) {
        throw ValidationError(origin + ": [operator]: " + e.what());
    }
    config.system.drift = build_field(ctx, "drift", drift);
    config.system.diffusion = build_field(ctx, "diffusion", diffusion);
    config.system.recurrence = recurrence;
    config.system.eps0 = eps0;
    return config;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config '" + path + "'");
    return parse_config(in, path);
}

namespace {

bool on_lattice(double t, double dt) {
    const double q = t / dt;
    return std::abs(q - std::round(q)) <= 1e-6;
}

}  // namespace

void validate_config(const ScenarioConfig& config) {
    const auto& ex = config.experiment;
    const double eps0 = config.system.eps0;
    auto check_eps = [&](const std::vector<double>& list, const char* what) {
        for (double e : list) {
            if (!(e > 0.0) || e > eps0 * (1.0 + 1e-12)) {
                std::ostringstream os;
                os << what << " value " << e << " outside (0, eps0 = " << eps0 << "]";
                throw ValidationError(os.str());
            }
        }
    };
    if (ex.eps.empty()) throw ValidationError("eps list is empty");
    check_eps(ex.eps, "eps");
    check_eps(ex.gap_eps, "gap_eps");
    check_eps({ex.probe_eps}, "probe_eps");
    for (double f : {ex.l2_dt_factor, ex.beta_dt_factor}) {
        if (!(f > 0.0) || f > 0.1) throw ValidationError("dt rule violated: dt factors must lie in (0, 0.1]");
    }
    if (!(ex.t_step > 0.0) || !(ex.t_end >= ex.t_start)) throw ValidationError("time grid must be increasing");
    for (double e : ex.eps) {
        for (double f : {ex.l2_dt_factor, ex.beta_dt_factor}) {
            const double dt = f * e;
            if (!on_lattice(ex.t_start, dt) || !on_lattice(ex.t_step, dt)) {
                std::ostringstream os;
                os << "time grid (t_start = " << ex.t_start << ", t_step = " << ex.t_step
                   << ") is not aligned with dt = " << dt << " at eps = " << e;
                throw ValidationError(os.str());
            }
        }
    }
    if (ex.n_paths < 2 || ex.n_paths_beta < 2 || ex.probe_n_paths < 2) {
        throw ValidationError("path counts must be at least 2");
    }
    if (ex.n_base < 1 || !(ex.t_max > 0.0)) throw ValidationError("dichotomy sampling needs n_base >= 1, t_max > 0");
    if (ex.certificate_samples < 1) throw ValidationError("certificate_samples must be >= 1");
    config.system.recurrence.validate();
    verify_certificates(config.system, ex.certificate_samples, ex.seed);
}

}  // namespace bogolyubov
