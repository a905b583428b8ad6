#include "plate/config.hpp"
#include "plate/io.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace plate {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

struct Entry {
    std::string value;
    int line = 0;
};

class Reader {
public:
    std::vector<std::string> errors;

    explicit Reader(const std::string& text) {
        std::istringstream in(text);
        std::string raw, section;
        int line = 0;
        while (std::getline(in, raw)) {
            ++line;
            const auto hash = raw.find('#');
            const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
            if (s.empty()) continue;
            if (s.front() == '[') {
                if (s.back() != ']') {
                    errors.push_back("line " + std::to_string(line) + ": malformed section header");
                    continue;
                }
                section = trim(s.substr(1, s.size() - 2));
                continue;
            }
            const auto eq = s.find('=');
            if (eq == std::string::npos) {
                errors.push_back("line " + std::to_string(line) + ": expected key = value");
                continue;
            }
            const std::string key = (section.empty() ? "" : section + ".") + trim(s.substr(0, eq));
            if (entries_.count(key)) {
                errors.push_back("line " + std::to_string(line) + ": duplicate key " + key);
                continue;
            }
            entries_[key] = {trim(s.substr(eq + 1)), line};
        }
    }

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    void require(const std::string& key) {
        if (!has(key)) errors.push_back("missing required key " + key + " (physical parameters have no defaults)");
    }

    template <class T>
    void get(const std::string& key, T& out) {
        used_.insert(key);
        auto it = entries_.find(key);
        if (it == entries_.end()) return;
        if (!convert(it->second.value, out))
            errors.push_back("line " + std::to_string(it->second.line) + ": cannot parse " + key + " = '" +
                             it->second.value + "'");
    }

    void report_unknown() {
        for (const auto& [key, e] : entries_)
            if (!used_.count(key)) errors.push_back("line " + std::to_string(e.line) + ": unknown key " + key);
    }

private:
    static bool convert(const std::string& s, double& out) {
        const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
        return r.ec == std::errc() && r.ptr == s.data() + s.size();
    }
    static bool convert(const std::string& s, int& out) {
        const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
        return r.ec == std::errc() && r.ptr == s.data() + s.size();
    }
    static bool convert(const std::string& s, std::uint64_t& out) {
        const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
        return r.ec == std::errc() && r.ptr == s.data() + s.size();
    }
    static bool convert(const std::string& s, bool& out) {
        if (s == "true" || s == "1" || s == "yes") return out = true, true;
        if (s == "false" || s == "0" || s == "no") return out = false, true;
        return false;
    }
    static bool convert(const std::string& s, std::string& out) {
        out = s;
        return !s.empty();
    }
    template <class T>
    static bool convert(const std::string& s, std::vector<T>& out) {
        out.clear();
        std::istringstream in(s);
        std::string item;
        while (std::getline(in, item, ',')) {
            T v{};
            if (!convert(trim(item), v)) return false;
            out.push_back(v);
        }
        return !out.empty();
    }

    std::map<std::string, Entry> entries_;
    std::set<std::string> used_;
};

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    RunConfig rc;
    rc.file_hash = fnv1a64(text);
    Reader r(text);

    for (const char* key : {"plate.alpha", "plate.delta", "plate.beta", "plate.kappa", "plate.damping"})
        r.require(key);
    PlateConfig& p = rc.plate;
    r.get("plate.alpha", p.alpha);
    r.get("plate.delta", p.delta);
    r.get("plate.beta", p.beta);
    r.get("plate.kappa", p.kappa);
    r.get("plate.damping", p.damping);
    r.get("plate.allow_undamped", p.allow_undamped);
    r.get("domain.l", p.dom.l);
    r.get("domain.sigma", p.dom.sigma);

    std::string kind = "zero";
    double load = 0.0, tmin = 0.0, tmax = 0.0;
    std::vector<double> values;
    r.get("source.kind", kind);
    r.get("source.load", load);
    r.get("source.table_min", tmin);
    r.get("source.table_max", tmax);
    r.get("source.values", values);
    try {
        if (kind == "zero") p.source = SourceFunction::zero();
        else if (kind == "cubic_minus_load") p.source = SourceFunction::cubic_minus_load(load);
        else if (kind == "table") p.source = SourceFunction::custom_table(tmin, tmax, values);
        else r.errors.push_back("source.kind must be zero, cubic_minus_load or table");
    } catch (const ConfigError& e) {
        r.errors.insert(r.errors.end(), e.violations().begin(), e.violations().end());
    }

    r.get("basis.mx", rc.basis.mx);
    r.get("basis.ny", rc.basis.ny);
    r.get("basis.oversample", rc.basis.oversample);

    r.get("sim.dt", rc.sim.dt);
    r.get("sim.T", rc.sim.T);
    r.get("sim.snapshot_every", rc.sim.snapshot_every);
    r.get("sim.fp_tol", rc.sim.fp_tol);
    r.get("sim.fp_maxiter", rc.sim.fp_maxiter);
    r.get("sim.seed", rc.sim.seed);

    r.get("initial.kind", rc.initial.kind);
    r.get("initial.m", rc.initial.m);
    r.get("initial.k", rc.initial.k);
    r.get("initial.amplitude", rc.initial.amplitude);
    r.get("initial.radius", rc.initial.radius);
    r.get("initial.kick", rc.initial.kick);

    rc.sweep.seed = rc.sim.seed;
    r.get("sweep.radii", rc.sweep.radii);
    r.get("sweep.samples", rc.sweep.samples_per_radius);
    r.get("sweep.T", rc.sweep.T);
    r.get("sweep.tail_fraction", rc.sweep.tail_fraction);
    r.get("sweep.dt", rc.sweep.dt);
    r.get("sweep.snapshot_every", rc.sweep.snapshot_every);
    r.get("sweep.seed", rc.sweep.seed);

    r.get("pairs.count", rc.pairs.count);
    r.get("pairs.radius", rc.pairs.radius);
    r.get("pairs.distance", rc.pairs.distance);
    r.get("pairs.T", rc.pairs.T);
    r.get("pairs.dt", rc.pairs.dt);
    r.get("pairs.snapshot_every", rc.pairs.snapshot_every);

    r.get("dimension.embed_dims", rc.dimension.embed_dims);
    r.get("dimension.theiler", rc.dimension.theiler);
    r.get("dimension.tail_fraction", rc.dimension.tail_fraction);

    r.get("stationary.samples", rc.stationary.samples);
    r.get("stationary.radius", rc.stationary.radius);
    r.get("stationary.T", rc.stationary.T);
    r.get("stationary.dt", rc.stationary.dt);

    r.get("barrier.eta_tilde", rc.barrier.eta_tilde);
    r.report_unknown();

    std::vector<std::string> errors = std::move(r.errors);
    auto add = [&](std::vector<std::string> v) { errors.insert(errors.end(), v.begin(), v.end()); };
    add(p.violations());
    add(rc.sim.violations());
    add(rc.sweep.violations());
    if (rc.basis.mx < 1) errors.push_back("basis.mx must be >= 1");
    if (rc.basis.ny < 1) errors.push_back("basis.ny must be >= 1");
    if (rc.basis.oversample < 2) errors.push_back("basis.oversample must be >= 2");
    const std::string& ik = rc.initial.kind;
    if (ik != "mode" && ik != "eigenmode" && ik != "random" && ik != "stationary_kick")
        errors.push_back("initial.kind must be mode, eigenmode, random or stationary_kick");
    if (ik == "eigenmode" && (rc.initial.m < 1 || rc.initial.m > rc.basis.mx * rc.basis.ny))
        errors.push_back("initial.m (eigenmode index) outside the basis");
    if (ik == "mode" && (rc.initial.m < 1 || rc.initial.m > rc.basis.mx || rc.initial.k < 0 ||
                         rc.initial.k >= rc.basis.ny))
        errors.push_back("initial.m / initial.k outside the basis");
    if (rc.initial.radius < 0.0 || rc.initial.kick < 0.0) errors.push_back("initial.radius and initial.kick must be >= 0");
    if (rc.pairs.count < 1 || !(rc.pairs.distance > 0.0) || !(rc.pairs.T > 0.0) || !(rc.pairs.dt > 0.0) ||
        rc.pairs.snapshot_every < 1)
        errors.push_back("pairs: count >= 1 and positive distance, T, dt, snapshot_every required");
    for (int d : rc.dimension.embed_dims)
        if (d < 1) errors.push_back("dimension.embed_dims entries must be >= 1");
    if (rc.dimension.theiler < 0) errors.push_back("dimension.theiler must be >= 0");
    if (!(rc.dimension.tail_fraction > 0.0 && rc.dimension.tail_fraction < 1.0))
        errors.push_back("dimension.tail_fraction must lie in (0, 1)");
    if (rc.stationary.samples < 1 || !(rc.stationary.T > 0.0) || !(rc.stationary.dt > 0.0))
        errors.push_back("stationary: samples >= 1 and positive T, dt required");
    if (!(rc.barrier.eta_tilde >= 0.0 && rc.barrier.eta_tilde < 1.0))
        errors.push_back("barrier.eta_tilde must lie in [0, 1)");

    if (errors.empty()) {
        rc.assumption_f = validate_assumption_f(p);
        if (!rc.assumption_f.accepted) errors.push_back("Assumption (f) rejected: " + rc.assumption_f.detail);
    }
    if (!errors.empty()) throw ConfigError(std::move(errors));
    return rc;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError({"cannot open config file " + path});
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace plate
