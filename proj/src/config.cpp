#include "gss/config.hpp"
#include "gss/errors.hpp"
#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace gss {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

// Raw "section.key" -> value map, consumed key by key so that anything left
// over can be reported as unknown.
struct RawConfig {
    std::map<std::string, std::string> kv;

    bool has(const std::string& key) const { return kv.count(key) > 0; }

    std::string take(const std::string& key) {
        auto it = kv.find(key);
        if (it == kv.end()) throw ConfigError(key, "required key missing");
        std::string v = it->second;
        kv.erase(it);
        return v;
    }

    std::string take_or(const std::string& key, const std::string& dflt) {
        auto it = kv.find(key);
        if (it == kv.end()) return dflt;
        std::string v = it->second;
        kv.erase(it);
        return v;
    }

    double take_real(const std::string& key) { return to_real(key, take(key)); }

    double take_real_or(const std::string& key, double dflt) {
        auto it = kv.find(key);
        if (it == kv.end()) return dflt;
        double v = to_real(key, it->second);
        kv.erase(it);
        return v;
    }

    int take_int_or(const std::string& key, int dflt) {
        auto it = kv.find(key);
        if (it == kv.end()) return dflt;
        std::string text = it->second;
        kv.erase(it);
        double v = to_real(key, text);
        if (v != std::floor(v)) throw ConfigError(key, "expected an integer, got '" + text + "'");
        return static_cast<int>(v);
    }

    double to_real(const std::string& key, const std::string& text) const {
        try {
            std::size_t used = 0;
            double v = std::stod(text, &used);
            if (used != text.size()) throw std::invalid_argument(text);
            return v;
        } catch (const std::exception&) {
            throw ConfigError(key, "expected a number, got '" + text + "'");
        }
    }
};

RawConfig read_raw(std::istream& in, const std::string& origin) {
    RawConfig raw;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t cut = line.find_first_of("#;");
        if (cut != std::string::npos) line = line.substr(0, cut);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(lineno), "unterminated section header");
            section = lower(trim(line.substr(1, line.size() - 2)));
            if (section.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno), "empty section name");
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno), "expected 'key = value'");
        std::string key = lower(trim(line.substr(0, eq)));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno), "empty key");
        if (section.empty())
            throw ConfigError(key, "key appears before any [section] header");
        std::string full = section + "." + key;
        if (raw.kv.count(full)) throw ConfigError(full, "duplicate key");
        raw.kv[full] = val;
    }
    return raw;
}

std::vector<double> read_column_file(const std::string& key, const std::string& path, int want) {
    std::ifstream in(path);
    if (!in) throw ConfigError(key, "cannot open '" + path + "'");
    std::vector<double> vals;
    double x;
    while (in >> x) vals.push_back(x);
    if (static_cast<int>(vals.size()) != want)
        throw ConfigError(key, "expected " + std::to_string(want) + " values in '" + path +
                                   "', got " + std::to_string(vals.size()));
    return vals;
}

NonlinearTerm read_term(RawConfig& raw, const std::string& prefix, int points, double radius) {
    NonlinearTerm t;
    std::string kind = lower(raw.take_or(prefix + "_kind", "power"));
    if (kind == "power") {
        t.kind = TermKind::ConstantPower;
        t.profile = CoefProfile::One;
    } else if (kind == "radial_power") {
        t.kind = TermKind::RadialCoefficientPower;
    } else if (kind == "weighted_power") {
        t.kind = TermKind::WeightedPower;
    } else {
        throw ConfigError(prefix + "_kind", "expected power | radial_power | weighted_power");
    }
    t.coefficient = raw.take_real_or(prefix + "_coefficient", 1.0);
    if (t.coefficient == 0.0) throw ConfigError(prefix + "_coefficient", "must be nonzero");
    t.power = raw.take_real(prefix + "_power");
    if (!(t.power > 2.0)) throw ConfigError(prefix + "_power", "must exceed 2");
    if (t.kind != TermKind::ConstantPower) {
        if (raw.has(prefix + "_profile_file")) {
            t.profile = CoefProfile::Tabulated;
            t.a_table = read_column_file(prefix + "_profile_file",
                                         raw.take(prefix + "_profile_file"), points + 1);
            for (double a : t.a_table)
                if (!(a > 0.0)) throw ConfigError(prefix + "_profile_file", "profile must stay positive");
            // centered differences for r a'(r); one-sided at the ends
            double h = radius / (points + 1);
            t.ra_prime_table.resize(t.a_table.size());
            for (int i = 0; i <= points; ++i) {
                double d;
                if (i == 0)
                    d = (t.a_table[1] - t.a_table[0]) / h;
                else if (i == points)
                    d = (t.a_table[points] - t.a_table[points - 1]) / h;
                else
                    d = (t.a_table[i + 1] - t.a_table[i - 1]) / (2 * h);
                t.ra_prime_table[i] = i * h * d;
            }
        } else {
            t.profile = CoefProfile::Poly;
            t.theta = raw.take_real(prefix + "_theta");
        }
    }
    return t;
}

} // namespace

std::vector<double> RunConfig::c_grid() const {
    std::vector<double> cs(masscurve.c_count);
    if (masscurve.c_count == 1) {
        cs[0] = masscurve.c_min;
        return cs;
    }
    if (masscurve.log_scale) {
        double la = std::log(masscurve.c_min), lb = std::log(masscurve.c_max);
        for (int i = 0; i < masscurve.c_count; ++i)
            cs[i] = std::exp(la + (lb - la) * i / (masscurve.c_count - 1));
    } else {
        for (int i = 0; i < masscurve.c_count; ++i)
            cs[i] = masscurve.c_min +
                    (masscurve.c_max - masscurve.c_min) * i / (masscurve.c_count - 1);
    }
    return cs;
}

StepControls RunConfig::step_controls() const {
    StepControls ctl;
    ctl.ds_init = continuation.ds_init;
    ctl.ds_min = continuation.ds_min;
    ctl.ds_max = continuation.ds_max;
    ctl.max_steps = continuation.max_steps;
    ctl.tol = solver.tol;
    ctl.max_iter = solver.max_iter;
    return ctl;
}

MassCurveControls RunConfig::masscurve_controls(int threads) const {
    MassCurveControls ctl;
    ctl.tol = solver.tol;
    ctl.max_iter = solver.max_iter;
    ctl.dc_fd = masscurve.dc_fd;
    ctl.threads = threads;
    return ctl;
}

RunConfig parse_config(std::istream& in, const std::string& origin) {
    RawConfig raw = read_raw(in, origin);
    RunConfig cfg;

    cfg.grid.radius = raw.take_real_or("grid.radius", cfg.grid.radius);
    if (!(cfg.grid.radius >= 5.0 && cfg.grid.radius <= 200.0))
        throw ConfigError("grid.radius", "must lie in [5, 200]");
    cfg.grid.points = raw.take_int_or("grid.points", cfg.grid.points);
    if (cfg.grid.points < 256 || cfg.grid.points > 200000)
        throw ConfigError("grid.points", "must lie in [256, 200000]");

    cfg.model.dim = raw.take_int_or("problem.dim", 1);
    if (cfg.model.dim < 1) throw ConfigError("problem.dim", "must be a positive integer");

    std::string pot = lower(raw.take_or("problem.potential", "none"));
    if (pot == "none" || pot == "zero") {
        cfg.model.potential.kind = PotentialKind::Zero;
    } else if (pot == "well") {
        cfg.model.potential.kind = PotentialKind::BoundedWell;
        cfg.model.potential.depth = raw.take_real("problem.well_depth");
        if (!(cfg.model.potential.depth > 0.0))
            throw ConfigError("problem.well_depth", "must be positive");
        cfg.model.potential.width = raw.take_real("problem.well_width");
        if (!(cfg.model.potential.width > 0.0))
            throw ConfigError("problem.well_width", "must be positive");
    } else if (pot == "harmonic") {
        cfg.model.potential.kind = PotentialKind::Harmonic;
    } else if (pot == "tabulated") {
        cfg.model.potential.kind = PotentialKind::Tabulated;
        std::string path = raw.take("problem.potential_file");
        cfg.model.potential.v_table =
            read_column_file("problem.potential_file", path, cfg.grid.points + 1);
        double h = cfg.grid.radius / (cfg.grid.points + 1);
        int M = cfg.grid.points;
        auto& vt = cfg.model.potential.v_table;
        cfg.model.potential.rv_prime_table.resize(vt.size());
        for (int i = 0; i <= M; ++i) {
            double d;
            if (i == 0)
                d = (vt[1] - vt[0]) / h;
            else if (i == M)
                d = (vt[M] - vt[M - 1]) / h;
            else
                d = (vt[i + 1] - vt[i - 1]) / (2 * h);
            cfg.model.potential.rv_prime_table[i] = i * h * d;
        }
    } else {
        throw ConfigError("problem.potential", "expected none | well | harmonic | tabulated");
    }

    for (int k = 1; k <= 16; ++k) {
        std::string prefix = "problem.term" + std::to_string(k);
        bool present = false;
        for (const char* suf : {"_kind", "_coefficient", "_power", "_theta", "_profile_file"})
            if (raw.has(prefix + suf)) present = true;
        if (!present) continue;
        cfg.model.terms.push_back(read_term(raw, prefix, cfg.grid.points, cfg.grid.radius));
    }
    if (cfg.model.terms.empty()) throw ConfigError("problem.term1_power", "required key missing");

    cfg.solver.tol = raw.take_real_or("solver.tol", cfg.solver.tol);
    if (!(cfg.solver.tol > 0.0)) throw ConfigError("solver.tol", "must be positive");
    cfg.solver.max_iter = raw.take_int_or("solver.max_iter", cfg.solver.max_iter);
    if (cfg.solver.max_iter < 1) throw ConfigError("solver.max_iter", "must be at least 1");

    cfg.continuation.lambda_start =
        raw.take_real_or("continuation.lambda_start", cfg.continuation.lambda_start);
    cfg.continuation.lambda_end =
        raw.take_real_or("continuation.lambda_end", cfg.continuation.lambda_end);
    if (!(cfg.continuation.lambda_start < 0.0))
        throw ConfigError("continuation.lambda_start", "must be negative");
    if (!(cfg.continuation.lambda_end < cfg.continuation.lambda_start))
        throw ConfigError("continuation.lambda_end", "must lie below lambda_start (trace deepens)");
    cfg.continuation.ds_init = raw.take_real_or("continuation.ds_init", cfg.continuation.ds_init);
    cfg.continuation.ds_min = raw.take_real_or("continuation.ds_min", cfg.continuation.ds_min);
    cfg.continuation.ds_max = raw.take_real_or("continuation.ds_max", cfg.continuation.ds_max);
    if (!(cfg.continuation.ds_min > 0.0 && cfg.continuation.ds_min <= cfg.continuation.ds_init &&
          cfg.continuation.ds_init <= cfg.continuation.ds_max))
        throw ConfigError("continuation.ds_init", "need 0 < ds_min <= ds_init <= ds_max");
    cfg.continuation.max_steps =
        raw.take_int_or("continuation.max_steps", cfg.continuation.max_steps);
    if (cfg.continuation.max_steps < 1)
        throw ConfigError("continuation.max_steps", "must be at least 1");

    cfg.masscurve.c_min = raw.take_real_or("masscurve.c_min", cfg.masscurve.c_min);
    cfg.masscurve.c_max = raw.take_real_or("masscurve.c_max", cfg.masscurve.c_max);
    if (!(cfg.masscurve.c_min > 0.0)) throw ConfigError("masscurve.c_min", "must be positive");
    if (!(cfg.masscurve.c_max >= cfg.masscurve.c_min))
        throw ConfigError("masscurve.c_max", "must be >= c_min");
    cfg.masscurve.c_count = raw.take_int_or("masscurve.c_count", cfg.masscurve.c_count);
    if (cfg.masscurve.c_count < 1) throw ConfigError("masscurve.c_count", "must be at least 1");
    std::string scale = lower(raw.take_or("masscurve.c_scale", "log"));
    if (scale == "log")
        cfg.masscurve.log_scale = true;
    else if (scale == "linear")
        cfg.masscurve.log_scale = false;
    else
        throw ConfigError("masscurve.c_scale", "expected log | linear");
    cfg.masscurve.dc_fd = raw.take_real_or("masscurve.dc_fd", cfg.masscurve.dc_fd);
    if (!(cfg.masscurve.dc_fd > 0.0)) throw ConfigError("masscurve.dc_fd", "must be positive");

    cfg.flow.dt = raw.take_real_or("flow.dt", cfg.flow.dt);
    if (!(cfg.flow.dt > 0.0)) throw ConfigError("flow.dt", "must be positive");
    cfg.flow.tol = raw.take_real_or("flow.tol", cfg.flow.tol);
    if (!(cfg.flow.tol > 0.0)) throw ConfigError("flow.tol", "must be positive");
    cfg.flow.max_steps = raw.take_int_or("flow.max_steps", cfg.flow.max_steps);
    if (cfg.flow.max_steps < 1) throw ConfigError("flow.max_steps", "must be at least 1");
    if (raw.has("flow.seed_widths")) {
        std::istringstream ws(raw.take("flow.seed_widths"));
        cfg.flow.widths.clear();
        double w;
        while (ws >> w) {
            if (!(w > 0.0)) throw ConfigError("flow.seed_widths", "widths must be positive");
            cfg.flow.widths.push_back(w);
        }
        if (cfg.flow.widths.empty())
            throw ConfigError("flow.seed_widths", "expected at least one width");
    }

    cfg.output.directory = raw.take_or("output.directory", cfg.output.directory);
    cfg.output.format = lower(raw.take_or("output.format", cfg.output.format));
    if (cfg.output.format != "csv" && cfg.output.format != "json" &&
        cfg.output.format != "both")
        throw ConfigError("output.format", "expected csv | json | both");

    if (!raw.kv.empty()) throw ConfigError(raw.kv.begin()->first, "unknown key");
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open config file");
    return parse_config(in, path);
}

} // namespace gss
