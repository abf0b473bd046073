#include "triadic/config.hpp"

#include <charconv>
#include <functional>
#include <sstream>

#include "triadic/io.hpp"

namespace triadic {

namespace {

enum class Kind { Str, Int, Long, U64, Double, Bool, DoubleList };

struct Entry {
    const char* section;
    const char* key;
    Kind kind;
    size_t offset;
    const char* doc;
};

#define FIELD(sec, key, kind, member, doc) \
    Entry{sec, key, kind, offsetof(ExperimentConfig, member), doc}

const std::vector<Entry>& schema() {
    using K = Kind;
    static const std::vector<Entry> s = {
        FIELD("model", "preset", K::Str, model_preset, "ieee14 | custom"),
        FIELD("model", "sigma_n", K::Double, sigma_n, "observation noise standard deviation"),
        FIELD("model", "rho_u", K::Double, rho_u, "box bound on components of the attack estimate"),
        FIELD("model", "delta", K::Double, delta, "relaxation tolerance applied to every column"),
        FIELD("model", "custom_meters", K::Int, custom_meters, "custom preset: observation rows"),
        FIELD("model", "custom_states", K::Int, custom_states, "custom preset: state count"),
        FIELD("model", "custom_h", K::DoubleList, custom_h, "custom preset: H, row-major"),
        FIELD("model", "custom_regions", K::Str, custom_regions,
              "custom preset: per-region row lists, e.g. 0,1|2,3"),
        FIELD("uncertainty", "variant", K::Str, variant,
              "singleton | ellipsoid | dnorm | polyhedron"),
        FIELD("uncertainty", "ellipsoid_radius", K::Double, ellipsoid_radius,
              "deviation ball radius"),
        FIELD("uncertainty", "dnorm_budget", K::Int, dnorm_budget,
              "max number of deviating components"),
        FIELD("uncertainty", "dnorm_mag", K::Double, dnorm_mag, "per-component deviation bound"),
        FIELD("uncertainty", "poly_halfwidth", K::Double, poly_halfwidth,
              "custom preset: box half-width around the nominal column"),
        FIELD("inner", "iterations", K::Int, inner_iterations,
              "inner estimator gradient steps per evaluation"),
        FIELD("inner", "penalty", K::Double, inner_penalty, "augmented-Lagrangian penalty weight"),
        FIELD("inner", "step_h", K::Double, inner_step_h, "inner column step size"),
        FIELD("inner", "step_mult", K::Double, inner_step_mult, "inner multiplier step size"),
        FIELD("inner", "frozen_gradient", K::Bool, inner_frozen_gradient,
              "differentiate surrogates with the final iterate frozen"),
        FIELD("solver", "mode", K::Str, mode, "sync | async"),
        FIELD("solver", "active_count", K::Int, active_count,
              "workers per iteration (S); 0 = all"),
        FIELD("solver", "staleness_bound", K::Int, staleness_bound,
              "max iterations between worker contributions (tau)"),
        FIELD("solver", "epsilon", K::Double, epsilon,
              "termination target on the squared gradient norm"),
        FIELD("solver", "max_iters", K::Long, max_iters, "iteration budget per solve"),
        FIELD("solver", "seed", K::U64, seed, "base seed for every derived stream"),
        FIELD("solver", "delay_mu", K::Double, delay_mu, "log-normal worker delay location"),
        FIELD("solver", "delay_sigma", K::Double, delay_sigma, "log-normal worker delay scale"),
        FIELD("solver", "divergence_cap", K::Double, divergence_cap,
              "abort once any variable magnitude exceeds this"),
        FIELD("solver", "check_period", K::Int, check_period, "iterations between cut checks (w)"),
        FIELD("solver", "freeze_after", K::Int, freeze_after, "last iteration allowed to add cuts (K1)"),
        FIELD("solver", "capacity", K::Int, capacity, "hard bound on the cutting-plane count (P)"),
        FIELD("solver", "gate_ratio", K::Double, gate_ratio,
              "cut only when violation exceeds this multiple of the polytope violation"),
        FIELD("solver", "refresh_slacks", K::Bool, refresh_slacks,
              "re-seed squared slacks upward at check boundaries"),
        FIELD("solver", "step_dual", K::Double, step_dual,
              "dual ascent step; also sets the regularization decay"),
        FIELD("solver", "step_local", K::Double, step_local, "local block descent step"),
        FIELD("solver", "step_slack", K::Double, step_slack, "squared-slack descent step"),
        FIELD("solver", "step_x", K::Double, step_x, "global estimate descent step"),
        FIELD("solver", "reg_floor", K::Double, reg_floor, "lower clip for the regularization decay"),
        FIELD("solver", "xi", K::Double, xi, "schedule constant, must exceed 2"),
        FIELD("solver", "nu", K::Double, nu,
              "bound on the squared plane-normal sum; 0 = track the live sum"),
        FIELD("solver", "derive_primal_steps", K::Bool, derive_primal_steps,
              "derive primal steps from the convergence schedule (needs reg_floor > 0)"),
        FIELD("solver", "project_link_dual", K::Bool, project_link_dual,
              "clamp the link multiplier at zero as the update rule is written"),
        FIELD("solver", "scale_step_x", K::Bool, scale_step_x,
              "divide step_x by the squared plane-normal sum"),
        FIELD("detector", "fap_targets", K::DoubleList, fap_targets,
              "false-alarm periods for the experiment matrix"),
        FIELD("detector", "calibration_runs", K::Int, calibration_runs,
              "change-free Monte Carlo runs for threshold calibration"),
        FIELD("detector", "eval_runs", K::Int, eval_runs, "Monte Carlo runs per evaluation"),
        FIELD("detector", "t_a", K::Int, t_a, "change time for evaluation streams"),
        FIELD("detector", "horizon", K::Int, horizon, "evaluation stream length"),
        FIELD("detector", "delay_bounds", K::DoubleList, delay_bounds,
              "delay bounds for the success-rate table"),
        FIELD("detector", "zeta", K::Double, zeta, "detector threshold; 0 = calibrate"),
        FIELD("output", "directory", K::Str, out_dir, "where result files are written"),
    };
    return s;
}

#undef FIELD

template <typename T>
T* at(ExperimentConfig& c, size_t offset) {
    return reinterpret_cast<T*>(reinterpret_cast<char*>(&c) + offset);
}
template <typename T>
const T* at(const ExperimentConfig& c, size_t offset) {
    return reinterpret_cast<const T*>(reinterpret_cast<const char*>(&c) + offset);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, const std::string& where) {
    try {
        size_t pos = 0;
        const double d = std::stod(v, &pos);
        require(pos == v.size(), "trailing characters in " + where);
        return d;
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("expected a number for " + where + ", got '" + v + "'");
    }
}

bool parse_bool(const std::string& v, const std::string& where) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument("expected true/false for " + where + ", got '" + v + "'");
}

std::vector<double> parse_list(const std::string& v, const std::string& where) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        cell = trim(cell);
        if (!cell.empty()) out.push_back(parse_double(cell, where));
    }
    return out;
}

std::string render(const ExperimentConfig& c, const Entry& e) {
    switch (e.kind) {
        case Kind::Str: return *at<std::string>(c, e.offset);
        case Kind::Int: return std::to_string(*at<int>(c, e.offset));
        case Kind::Long: return std::to_string(*at<long>(c, e.offset));
        case Kind::U64: return std::to_string(*at<std::uint64_t>(c, e.offset));
        case Kind::Double: return format_double(*at<double>(c, e.offset));
        case Kind::Bool: return *at<bool>(c, e.offset) ? "true" : "false";
        case Kind::DoubleList: {
            const auto& v = *at<std::vector<double>>(c, e.offset);
            std::string s;
            for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
            return s;
        }
    }
    return "";
}

void assign(ExperimentConfig& c, const Entry& e, const std::string& v, const std::string& where) {
    switch (e.kind) {
        case Kind::Str: *at<std::string>(c, e.offset) = v; break;
        case Kind::Int: *at<int>(c, e.offset) = static_cast<int>(parse_double(v, where)); break;
        case Kind::Long: *at<long>(c, e.offset) = static_cast<long>(parse_double(v, where)); break;
        case Kind::U64:
            *at<std::uint64_t>(c, e.offset) = static_cast<std::uint64_t>(parse_double(v, where));
            break;
        case Kind::Double: *at<double>(c, e.offset) = parse_double(v, where); break;
        case Kind::Bool: *at<bool>(c, e.offset) = parse_bool(v, where); break;
        case Kind::DoubleList: *at<std::vector<double>>(c, e.offset) = parse_list(v, where); break;
    }
}

}  // namespace

ExperimentConfig load_config(const std::string& text) {
    ExperimentConfig c;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            require(line.back() == ']', "malformed section header at line " + std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            bool known = false;
            for (const auto& e : schema()) known |= (section == e.section);
            require(known, "unknown section '" + section + "' at line " + std::to_string(lineno));
            continue;
        }
        const auto eq = line.find('=');
        require(eq != std::string::npos, "expected key=value at line " + std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const Entry* entry = nullptr;
        for (const auto& e : schema())
            if (section == e.section && key == e.key) entry = &e;
        require(entry != nullptr,
                "unknown key '" + section + "." + key + "' at line " + std::to_string(lineno));
        assign(c, *entry, value, section + "." + key);
    }
    return c;
}

ExperimentConfig load_config_file(const std::string& path) {
    return load_config(read_text_file(path));
}

std::string emit_config(const ExperimentConfig& c) {
    std::ostringstream out;
    std::string section;
    for (const auto& e : schema()) {
        if (section != e.section) {
            if (!section.empty()) out << '\n';
            section = e.section;
            out << '[' << section << "]\n";
        }
        out << e.key << " = " << render(c, e) << "  # " << e.doc << '\n';
    }
    return out.str();
}

SetKind parse_variant(const std::string& name) {
    if (name == "singleton") return SetKind::Singleton;
    if (name == "ellipsoid") return SetKind::Ellipsoid;
    if (name == "dnorm") return SetKind::DNorm;
    if (name == "polyhedron") return SetKind::Polyhedron;
    throw std::invalid_argument("unknown uncertainty variant '" + name + "'");
}

SystemModel build_model(const ExperimentConfig& c) {
    const SetKind kind = parse_variant(c.variant);
    if (c.model_preset == "ieee14") return load_ieee14(kind, c.delta, c.sigma_n, c.rho_u);
    require(c.model_preset == "custom", "unknown model preset '" + c.model_preset + "'");

    SystemModel m;
    const int M = c.custom_meters;
    const int N = c.custom_states;
    require(static_cast<int>(c.custom_h.size()) == M * N, "custom_h must hold meters*states values");
    m.H = Mat(M, N);
    for (int r = 0; r < M; ++r)
        for (int j = 0; j < N; ++j) m.H(r, j) = c.custom_h[r * N + j];
    m.sigma_n = c.sigma_n;
    m.rho_u = c.rho_u;
    m.delta = Vec::Constant(N, c.delta);
    std::stringstream rs(c.custom_regions);
    std::string part;
    while (std::getline(rs, part, '|')) {
        std::vector<int> rows;
        std::stringstream ps(part);
        std::string cell;
        while (std::getline(ps, cell, ','))
            if (!trim(cell).empty()) rows.push_back(std::stoi(trim(cell)));
        if (!rows.empty()) m.regions.push_back(std::move(rows));
    }
    for (int j = 0; j < N; ++j) {
        Vec col = m.H.col(j);
        m.nominal_columns.push_back(col);
        switch (kind) {
            case SetKind::Singleton: m.sets.push_back(make_singleton(col)); break;
            case SetKind::Ellipsoid: m.sets.push_back(make_ellipsoid(col, c.ellipsoid_radius)); break;
            case SetKind::DNorm:
                m.sets.push_back(make_dnorm(col, std::min(c.dnorm_budget, M), c.dnorm_mag));
                break;
            case SetKind::Polyhedron: {
                Mat D(2 * M, M);
                D << Mat::Identity(M, M), -Mat::Identity(M, M);
                Vec bound(2 * M);
                bound << (col.array() + c.poly_halfwidth).matrix(),
                    (-(col.array() - c.poly_halfwidth)).matrix();
                m.sets.push_back(make_polyhedron(col, D, bound));
                break;
            }
            case SetKind::General: require(false, "general variant has no config form");
        }
    }
    m.validate();
    return m;
}

SolverSettings build_solver_settings(const ExperimentConfig& c) {
    SolverSettings s;
    s.inner.iterations = c.inner_iterations;
    s.inner.penalty = c.inner_penalty;
    s.inner.step_h = c.inner_step_h;
    s.inner.step_mult = c.inner_step_mult;
    s.inner.frozen_gradient = c.inner_frozen_gradient;

    s.poly.check_period = c.check_period;
    s.poly.freeze_after = c.freeze_after;
    s.poly.capacity = c.capacity;
    s.poly.gate_ratio = c.gate_ratio;
    s.poly.refresh_slacks = c.refresh_slacks;

    s.schedule.step_dual_lo = s.schedule.step_dual_hi = s.schedule.step_dual_link =
        s.schedule.step_dual_plane = c.step_dual;
    s.schedule.floor_lo = s.schedule.floor_hi = s.schedule.floor_link = s.schedule.floor_plane =
        c.reg_floor;
    s.schedule.step_local = c.step_local;
    s.schedule.step_slack_lo = s.schedule.step_slack_hi = s.schedule.step_plane_slack = c.step_slack;
    s.schedule.step_x = c.step_x;
    s.schedule.scale_step_x = c.scale_step_x;
    s.schedule.derive_primal_steps = c.derive_primal_steps;
    s.schedule.xi = c.xi;
    s.schedule.nu = c.nu;
    s.schedule.project_link_dual = c.project_link_dual;

    s.run.mode = c.mode == "sync" ? RunMode::Sync : RunMode::Async;
    require(c.mode == "sync" || c.mode == "async", "solver mode must be sync or async");
    s.run.active_count = c.active_count;
    s.run.staleness_bound = c.staleness_bound;
    s.run.seed = c.seed;
    s.run.max_iters = c.max_iters;
    s.run.epsilon = c.epsilon;
    s.run.delay_mu = c.delay_mu;
    s.run.delay_sigma = c.delay_sigma;
    s.run.divergence_cap = c.divergence_cap;
    return s;
}

}  // namespace triadic
