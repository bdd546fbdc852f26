#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace homtomo::cli {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& what) { throw CliError("config", what); }

const json& member(const json& node, const std::string& key, const std::string& where) {
    if (!node.is_object() || !node.contains(key)) {
        config_error(where + "." + key + " is required");
    }
    return node.at(key);
}

double as_number(const json& node, const std::string& where) {
    if (!node.is_number()) {
        config_error(where + " must be a number");
    }
    const double v = node.get<double>();
    if (!std::isfinite(v)) {
        config_error(where + " must be finite");
    }
    return v;
}

double number(const json& node, const std::string& key, const std::string& where) {
    return as_number(member(node, key, where), where + "." + key);
}

double number_or(const json& node, const std::string& key, const std::string& where, double fallback) {
    return node.contains(key) ? number(node, key, where) : fallback;
}

std::uint64_t unsigned_int(const json& node, const std::string& key, const std::string& where) {
    const json& v = member(node, key, where);
    if (!v.is_number_unsigned()) {
        config_error(where + "." + key + " must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

std::string shape_of(const json& node, const std::string& where) {
    const json& s = member(node, "shape", where);
    if (!s.is_string()) {
        config_error(where + ".shape must be a string");
    }
    return s.get<std::string>();
}

const json* section(const Config& cfg, const std::string& name) {
    if (!cfg.doc.contains(name)) {
        return nullptr;
    }
    const json& s = cfg.doc.at(name);
    if (!s.is_object()) {
        config_error(name + " must be an object");
    }
    return &s;
}

std::filesystem::path resolve(const Config& cfg, const json& node, const std::string& where) {
    if (!node.is_string()) {
        config_error(where + " must be a path string");
    }
    std::filesystem::path p = node.get<std::string>();
    return p.is_absolute() ? p : cfg.base_dir / p;
}

Vector read_amplitude_table(const std::filesystem::path& path, std::size_t n) {
    std::ifstream in(path);
    if (!in) {
        throw CliError("io", "cannot open amplitude table " + path.string());
    }
    Vector amp(static_cast<Eigen::Index>(n));
    std::size_t row = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        double re = 0.0;
        double im = 0.0;
        if (!(fields >> re >> im)) {
            if (row == 0) {
                continue;  // header
            }
            config_error("malformed amplitude table line: " + line);
        }
        if (row >= n) {
            config_error("amplitude table has more rows than grid points");
        }
        amp(static_cast<Eigen::Index>(row++)) = complex(re, im);
    }
    if (row != n) {
        config_error("amplitude table has " + std::to_string(row) + " rows, grid has " + std::to_string(n));
    }
    return amp;
}

TemporalState parse_pure(const Config& cfg, const json& node, const std::string& where, const TimeGrid& grid,
                         const FilterOperator& filter) {
    const std::string shape = shape_of(node, where);
    if (shape == "gaussian" || shape == "rect_spectrum") {
        return make_pulse(grid, parse_reference_spec(node, where));
    }
    if (shape == "double_gaussian") {
        const double tau = number(node, "tau", where);
        const double t1 = number(node, "t1", where);
        const double t2 = number(node, "t2", where);
        const double phase = number_or(node, "phase", where, 0.0);
        const Vector amp = make_pulse(grid, {GaussianShape{tau}, t1, 0.0}).amp() +
                           make_pulse(grid, {GaussianShape{tau}, t2, phase}).amp();
        return TemporalState::normalized(grid, amp);
    }
    if (shape == "chirped_gaussian") {
        const double tau = number(node, "tau", where);
        const double center = number_or(node, "center", where, 0.0);
        const double chirp = number(node, "chirp", where);
        // Envelope of the unchirped pulse carries the leakage checks.
        const TemporalState base = make_pulse(grid, {GaussianShape{tau}, center, 0.0});
        Vector amp = base.amp();
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const double x = grid.time(j) - center;
            amp(static_cast<Eigen::Index>(j)) *= std::polar(1.0, chirp * x * x);
        }
        return TemporalState::normalized(grid, amp);
    }
    if (shape == "pulse_superposition") {
        const std::vector<double> times = parse_range(member(node, "times", where), where + ".times");
        std::vector<complex> coeffs(times.size(), complex(1.0, 0.0));
        if (node.contains("coefficients")) {
            const json& c = node.at("coefficients");
            if (!c.is_array() || c.size() != times.size()) {
                config_error(where + ".coefficients must list one [re, im] pair per time");
            }
            for (std::size_t i = 0; i < times.size(); ++i) {
                if (!c[i].is_array() || c[i].size() != 2) {
                    config_error(where + ".coefficients entries must be [re, im]");
                }
                coeffs[i] = complex(as_number(c[i][0], where + ".coefficients"), as_number(c[i][1], where + ".coefficients"));
            }
        }
        Vector amp = Vector::Zero(static_cast<Eigen::Index>(grid.size()));
        Boundary boundary = Boundary::windowed;
        for (std::size_t i = 0; i < times.size(); ++i) {
            const TemporalState pulse = filter.at_time(times[i]);
            boundary = pulse.boundary();
            amp += coeffs[i] * pulse.amp();
        }
        return TemporalState::normalized(grid, amp, boundary);
    }
    if (shape == "table") {
        const Vector amp = read_amplitude_table(resolve(cfg, member(node, "file", where), where + ".file"), grid.size());
        return TemporalState::normalized(grid, amp, Boundary::periodic);
    }
    config_error(where + ".shape '" + shape + "' is not a single-photon shape");
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

Config parse_config(const std::string& text, std::filesystem::path base_dir) {
    Config cfg;
    try {
        cfg.doc = json::parse(text);
    } catch (const json::parse_error& e) {
        config_error(std::string("config is not valid JSON: ") + e.what());
    }
    if (!cfg.doc.is_object()) {
        config_error("config root must be an object");
    }
    cfg.base_dir = std::move(base_dir);
    cfg.hash = fnv1a64(text);
    return cfg;
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw CliError("io", "cannot open config " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.parent_path());
}

TimeGrid parse_grid(const Config& cfg) {
    const json& g = member(cfg.doc, "grid", "config");
    const std::uint64_t n = unsigned_int(g, "n_points", "grid");
    const double dt = number(g, "dt", "grid");
    const double omega0 = number(g, "omega0", "grid");
    if (g.contains("t_start")) {
        return TimeGrid(n, dt, number(g, "t_start", "grid"), omega0);
    }
    return TimeGrid::centered(n, dt, omega0);
}

ReferenceSpec parse_reference_spec(const json& node, const std::string& where) {
    const std::string shape = shape_of(node, where);
    ReferenceSpec spec{GaussianShape{1.0}, number_or(node, "center", where, 0.0), number_or(node, "phase", where, 0.0)};
    if (shape == "gaussian") {
        if (node.contains("tau") == node.contains("bandwidth")) {
            config_error(where + " needs exactly one of tau or bandwidth");
        }
        spec.shape = GaussianShape{node.contains("tau") ? number(node, "tau", where)
                                                        : gaussian_tau_for_bandwidth(number(node, "bandwidth", where))};
    } else if (shape == "rect_spectrum") {
        spec.shape = RectSpectrumShape{number(node, "delta_omega", where)};
    } else {
        config_error(where + ".shape must be gaussian or rect_spectrum");
    }
    return spec;
}

FilterOperator parse_filter(const Config& cfg, const TimeGrid& grid) {
    ReferenceSpec spec = parse_reference_spec(member(cfg.doc, "reference", "config"), "reference");
    spec.peak_time = 0.0;
    spec.phase = 0.0;
    return filter_from_pulse(make_pulse(grid, spec));
}

DensityMatrix parse_signal(const Config& cfg, const TimeGrid& grid, const FilterOperator& filter) {
    const json& node = member(cfg.doc, "signal", "config");
    if (shape_of(node, "signal") != "mixture") {
        return DensityMatrix::pure(parse_pure(cfg, node, "signal", grid, filter));
    }
    const json& comps = member(node, "components", "signal");
    if (!comps.is_array() || comps.empty()) {
        config_error("signal.components must be a non-empty array");
    }
    std::vector<std::pair<double, TemporalState>> parts;
    for (std::size_t i = 0; i < comps.size(); ++i) {
        const std::string where = "signal.components[" + std::to_string(i) + "]";
        parts.emplace_back(number(comps[i], "weight", where),
                           parse_pure(cfg, member(comps[i], "state", where), where + ".state", grid, filter));
    }
    return DensityMatrix::mixture(parts);
}

BipartiteState parse_pair_signal(const Config& cfg, const TimeGrid& grid, const FilterOperator& filter) {
    const json& node = member(cfg.doc, "signal", "config");
    const std::string shape = shape_of(node, "signal");
    if (shape == "pdc") {
        return pdc_model(grid, number(node, "pump_duration", "signal"), number(node, "correlation_time", "signal"),
                         number_or(node, "center", "signal", 0.0));
    }
    if (shape == "product") {
        return BipartiteState::product(parse_pure(cfg, member(node, "a", "signal"), "signal.a", grid, filter),
                                       parse_pure(cfg, member(node, "b", "signal"), "signal.b", grid, filter));
    }
    config_error("signal.shape must be pdc or product for pair runs");
}

std::vector<double> parse_range(const json& node, const std::string& where) {
    std::vector<double> out;
    if (node.is_array()) {
        for (std::size_t i = 0; i < node.size(); ++i) {
            out.push_back(as_number(node[i], where + "[" + std::to_string(i) + "]"));
        }
        return out;
    }
    if (node.is_object()) {
        const double start = number(node, "start", where);
        const double stop = number(node, "stop", where);
        const std::uint64_t count = unsigned_int(node, "count", where);
        if (count == 0) {
            config_error(where + ".count must be >= 1");
        }
        if (count == 1) {
            return {start};
        }
        // Weighted endpoints keep symmetric ranges exactly symmetric (0 lands on 0).
        const double last = static_cast<double>(count - 1);
        for (std::uint64_t i = 0; i < count; ++i) {
            const double k = static_cast<double>(i);
            out.push_back(start * ((last - k) / last) + stop * (k / last));
        }
        return out;
    }
    config_error(where + " must be an array or {start, stop, count}");
}

std::vector<double> schedule_range(const Config& cfg, const std::string& key,
                                   std::optional<std::vector<double>> fallback) {
    const json* s = section(cfg, "schedule");
    if (s && s->contains(key)) {
        return parse_range(s->at(key), "schedule." + key);
    }
    if (!fallback) {
        config_error("schedule." + key + " is required");
    }
    return *fallback;
}

double schedule_number(const Config& cfg, const std::string& key, double fallback) {
    const json* s = section(cfg, "schedule");
    return s ? number_or(*s, key, "schedule", fallback) : fallback;
}

std::optional<TrialPlan> parse_trials(const Config& cfg) {
    const json* t = section(cfg, "trials");
    if (!t) {
        return std::nullopt;
    }
    TrialPlan plan{unsigned_int(*t, "trials_per_setting", "trials"), 0};
    if (plan.trials_per_setting == 0) {
        config_error("trials.trials_per_setting must be >= 1");
    }
    plan.seed = t->contains("seed") ? unsigned_int(*t, "seed", "trials") : 0;
    return plan;
}

bool tomography_flag(const Config& cfg, const std::string& key, bool fallback) {
    const json* t = section(cfg, "tomography");
    if (!t || !t->contains(key)) {
        return fallback;
    }
    if (!t->at(key).is_boolean()) {
        config_error("tomography." + key + " must be true or false");
    }
    return t->at(key).get<bool>();
}

double tomography_number(const Config& cfg, const std::string& key, double fallback) {
    const json* t = section(cfg, "tomography");
    return t ? number_or(*t, key, "tomography", fallback) : fallback;
}

std::optional<std::filesystem::path> tomography_path(const Config& cfg, const std::string& key) {
    const json* t = section(cfg, "tomography");
    if (!t || !t->contains(key)) {
        return std::nullopt;
    }
    return resolve(cfg, t->at(key), "tomography." + key);
}

std::filesystem::path output_dir(const Config& cfg) {
    const json* o = section(cfg, "output");
    if (!o || !o->contains("dir")) {
        return cfg.base_dir.empty() ? std::filesystem::path(".") : cfg.base_dir;
    }
    return resolve(cfg, o->at("dir"), "output.dir");
}

}  // namespace homtomo::cli
