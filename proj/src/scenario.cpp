#include "qabsorb/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "qabsorb/errors.hpp"

namespace qabsorb {

using json = nlohmann::json;

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where)
{
    if (!obj.is_object())
        throw ConfigError(where + " must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

double num(const json& obj, const char* key, double def, const std::string& where)
{
    if (!obj.contains(key))
        return def;
    const json& v = obj.at(key);
    if (!v.is_number())
        throw ConfigError(where + "." + key + " must be a number");
    double x = v.get<double>();
    if (!std::isfinite(x))
        throw ConfigError(where + "." + key + " must be finite");
    return x;
}

bool flag(const json& obj, const char* key, bool def, const std::string& where)
{
    if (!obj.contains(key))
        return def;
    if (!obj.at(key).is_boolean())
        throw ConfigError(where + "." + key + " must be true or false");
    return obj.at(key).get<bool>();
}

std::string str(const json& obj, const char* key, const std::string& def, const std::string& where)
{
    if (!obj.contains(key))
        return def;
    if (!obj.at(key).is_string())
        throw ConfigError(where + "." + key + " must be a string");
    return obj.at(key).get<std::string>();
}

int integer(const json& obj, const char* key, int def, const std::string& where)
{
    if (!obj.contains(key))
        return def;
    const json& v = obj.at(key);
    if (!v.is_number_integer())
        throw ConfigError(where + "." + key + " must be an integer");
    return v.get<int>();
}

void positive(double x, const std::string& name)
{
    if (!(x > 0.0))
        throw ConfigError(name + " must be positive");
}

} // namespace

std::vector<double> SweepSpec::values() const
{
    std::vector<double> v;
    if (points == 1) {
        v.push_back(min);
        return v;
    }
    for (int k = 0; k < points; ++k) {
        double t = static_cast<double>(k) / (points - 1);
        if (spacing == "log")
            v.push_back(min * std::pow(max / min, t));
        else
            v.push_back(min + (max - min) * t);
    }
    v.front() = min;
    v.back() = max;
    if (axis == "n_q")
        for (auto& x : v)
            x = std::round(x);
    return v;
}

std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

// 3 and 3.0 hash alike; integers beyond 2^53 (seeds) stay exact.
json normalized(const json& j)
{
    if (j.is_object() || j.is_array()) {
        json out = j;
        for (auto& v : out)
            v = normalized(v);
        return out;
    }
    if (j.is_number_integer()) {
        const double d = j.get<double>();
        if (std::abs(d) < 9007199254740992.0)
            return json(d);
    }
    return j;
}

} // namespace

Scenario parse_scenario(const std::string& text, const std::string& base_dir)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(doc, {"system", "layout", "environment", "observables", "sweep", "montecarlo"},
               "config");
    Scenario s;
    s.base_dir = base_dir;
    s.canonical = normalized(doc).dump();

    const json empty = json::object();
    const json& env = doc.contains("environment") ? doc["environment"] : empty;
    check_keys(env, {"T_S", "T_W", "delta", "omega_S", "epsilon", "backend", "phenomenological",
                     "table"},
               "environment");
    EnvSpec& e = s.environment;
    e.T_S = num(env, "T_S", e.T_S, "environment");
    e.T_W = num(env, "T_W", e.T_W, "environment");
    e.delta_um = num(env, "delta", e.delta_um, "environment");
    e.omega_S = num(env, "omega_S", e.omega_S, "environment");
    e.epsilon = num(env, "epsilon", e.epsilon, "environment");
    e.backend = str(env, "backend", e.backend, "environment");
    e.table = str(env, "table", "", "environment");
    if (e.T_S < 0 || e.T_W < 0)
        throw ConfigError("temperatures must be >= 0");
    if (e.epsilon < 0 || e.epsilon > 1)
        throw ConfigError("environment.epsilon must lie in [0, 1]");
    positive(e.omega_S, "environment.omega_S");
    if (e.backend != "equilibrium" && e.backend != "phenomenological" && e.backend != "tabulated")
        throw ConfigError("environment.backend must be equilibrium, phenomenological or tabulated");
    if (e.backend == "tabulated" && e.table.empty())
        throw ConfigError("tabulated backend needs environment.table");
    if (env.contains("phenomenological")) {
        const json& ph = env["phenomenological"];
        const std::string w = "environment.phenomenological";
        check_keys(ph, {"z0", "p", "amplitude", "off_resonance", "window", "amplitudes"}, w);
        e.z0_um = num(ph, "z0", e.z0_um, w);
        e.p = num(ph, "p", e.p, w);
        e.amplitude = num(ph, "amplitude", e.amplitude, w);
        e.off_resonance = num(ph, "off_resonance", e.off_resonance, w);
        e.window = num(ph, "window", e.window, w);
        positive(e.z0_um, w + ".z0");
        positive(e.p, w + ".p");
        if (e.amplitude < 0 || e.off_resonance < 0 || e.window < 0)
            throw ConfigError(w + ": amplitudes and window must be >= 0");
        if (ph.contains("amplitudes")) {
            const json& am = ph["amplitudes"];
            if (!am.is_object())
                throw ConfigError(w + ".amplitudes must be an object");
            for (auto it = am.begin(); it != am.end(); ++it) {
                if (!it.value().is_number() || it.value().get<double>() < 0)
                    throw ConfigError(w + ".amplitudes." + it.key() + " must be a number >= 0");
                e.amplitudes[it.key()] = it.value().get<double>();
            }
        }
    }

    const json& lay = doc.contains("layout") ? doc["layout"] : empty;
    check_keys(lay, {"n_q", "r", "z"}, "layout");
    const int n_q = integer(lay, "n_q", 4, "layout");
    s.r_um = num(lay, "r", s.r_um, "layout");
    s.z_um = num(lay, "z", s.z_um, "layout");
    if (n_q < 1 || n_q > 7)
        throw ConfigError("layout.n_q must lie in 1..7");
    positive(s.r_um, "layout.r");
    positive(s.z_um, "layout.z");

    const json& sys = doc.contains("system") ? doc["system"] : empty;
    check_keys(sys, {"n_q", "omega_q", "omega_1", "omega_2", "omega_3", "dipole_qubit",
                     "dipole_machine"},
               "system");
    if (sys.contains("n_q") && integer(sys, "n_q", n_q, "system") != n_q)
        throw ConfigError("system.n_q differs from layout.n_q");
    SystemSpec& sp = s.system;
    const double wq = num(sys, "omega_q", 0.1 * e.omega_S, "system");
    const double w3 = num(sys, "omega_3", e.omega_S, "system");
    sp = SystemSpec::from_frequencies(n_q, wq, w3);
    sp.omega_1 = num(sys, "omega_1", sp.omega_1, "system");
    sp.omega_2 = num(sys, "omega_2", sp.omega_2, "system");
    sp.d_qubit = num(sys, "dipole_qubit", sp.d_qubit, "system");
    if (sys.contains("dipole_machine")) {
        const json& dm = sys["dipole_machine"];
        if (!dm.is_array() || dm.size() != 3)
            throw ConfigError("system.dipole_machine must be an array of 3 numbers");
        for (int k = 0; k < 3; ++k) {
            if (!dm[k].is_number())
                throw ConfigError("system.dipole_machine must be an array of 3 numbers");
            sp.d_machine[k] = dm[k].get<double>();
        }
    }
    try {
        sp.validate();
    } catch (const Error& ex) {
        throw ConfigError(std::string("system: ") + ex.what());
    }

    const json& obs = doc.contains("observables") ? doc["observables"] : empty;
    check_keys(obs, {"temperatures", "fluxes", "entropy", "entropy_local_only",
                     "collective_temperature", "correlations"},
               "observables");
    ObservableFlags& o = s.observables;
    o.temperatures = flag(obs, "temperatures", o.temperatures, "observables");
    o.fluxes = flag(obs, "fluxes", o.fluxes, "observables");
    o.entropy = flag(obs, "entropy", o.entropy, "observables");
    o.entropy_local_only = flag(obs, "entropy_local_only", o.entropy_local_only, "observables");
    o.collective_temperature =
        flag(obs, "collective_temperature", o.collective_temperature, "observables");
    o.correlations = flag(obs, "correlations", o.correlations, "observables");

    if (doc.contains("sweep")) {
        const json& sw = doc["sweep"];
        check_keys(sw, {"axis", "min", "max", "points", "spacing"}, "sweep");
        SweepSpec& w = s.sweep;
        w.enabled = true;
        w.axis = str(sw, "axis", "z", "sweep");
        if (w.axis != "z" && w.axis != "epsilon" && w.axis != "r" && w.axis != "n_q")
            throw ConfigError("sweep.axis must be z, epsilon, r or n_q");
        if (!sw.contains("min") || !sw.contains("max"))
            throw ConfigError("sweep needs min and max");
        w.min = num(sw, "min", 0, "sweep");
        w.max = num(sw, "max", 0, "sweep");
        w.points = integer(sw, "points", 1, "sweep");
        w.spacing = str(sw, "spacing", "linear", "sweep");
        if (w.points < 1)
            throw ConfigError("sweep.points must be >= 1");
        if (w.spacing != "linear" && w.spacing != "log")
            throw ConfigError("sweep.spacing must be linear or log");
        if (w.max < w.min)
            throw ConfigError("sweep.max must be >= sweep.min");
        if (w.axis == "epsilon") {
            if (w.min < 0 || w.max > 1)
                throw ConfigError("epsilon sweep must stay in [0, 1]");
            if (w.spacing == "log" && !(w.min > 0))
                throw ConfigError("log spacing needs positive bounds");
        } else if (w.axis == "n_q") {
            if (w.min < 1 || w.max > 7 || w.min != std::round(w.min) || w.max != std::round(w.max))
                throw ConfigError("n_q sweep bounds must be integers in 1..7");
        } else {
            positive(w.min, "sweep.min");
        }
    }

    if (doc.contains("montecarlo")) {
        const json& mc = doc["montecarlo"];
        check_keys(mc, {"samples", "sigma", "seed"}, "montecarlo");
        s.montecarlo.samples = integer(mc, "samples", 0, "montecarlo");
        s.montecarlo.sigma_um = num(mc, "sigma", 0.0, "montecarlo");
        if (mc.contains("seed")) {
            if (!mc["seed"].is_number_unsigned() && !mc["seed"].is_number_integer())
                throw ConfigError("montecarlo.seed must be an integer");
            s.montecarlo.seed = mc["seed"].get<std::uint64_t>();
        }
        if (s.montecarlo.samples < 0)
            throw ConfigError("montecarlo.samples must be >= 0");
        if (s.montecarlo.sigma_um < 0)
            throw ConfigError("montecarlo.sigma must be >= 0");
    }
    return s;
}

Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    std::string dir = std::filesystem::path(path).parent_path().string();
    return parse_scenario(ss.str(), dir.empty() ? "." : dir);
}

std::shared_ptr<const RateBackend> make_backend(const EnvSpec& e, const std::string& base_dir)
{
    if (e.backend == "equilibrium")
        return std::make_shared<EquilibriumBackend>();
    if (e.backend == "phenomenological") {
        PhenomenologicalParams p;
        p.z0 = e.z0_um * 1e-6;
        p.p = e.p;
        p.amplitude = e.amplitude;
        p.off_resonance = e.off_resonance;
        p.window = e.window;
        p.omega_S = e.omega_S;
        p.amplitude_override = e.amplitudes;
        return std::make_shared<PhenomenologicalBackend>(p);
    }
    std::filesystem::path tp(e.table);
    if (tp.is_relative())
        tp = std::filesystem::path(base_dir) / tp;
    try {
        return std::make_shared<TabulatedBackend>(TabulatedBackend::from_file(tp.string()));
    } catch (const DataError& ex) {
        throw ConfigError(ex.what());
    }
}

} // namespace qabsorb
