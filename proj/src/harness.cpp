#include "qabsorb/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "qabsorb/correlations.hpp"
#include "qabsorb/dynamics.hpp"
#include "qabsorb/errors.hpp"
#include "qabsorb/rng.hpp"
#include "qabsorb/thermodynamics.hpp"

namespace qabsorb {

using json = nlohmann::json;

namespace {

constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();

int max_qubits(const Scenario& s)
{
    if (s.sweep.enabled && s.sweep.axis == "n_q")
        return static_cast<int>(std::round(s.sweep.max));
    return s.system.n_q;
}

std::vector<std::string> transition_ids(int n_q)
{
    std::vector<std::string> ids = {"M1", "M2", "M3"};
    for (int k = 1; k <= n_q; ++k)
        ids.push_back("q" + std::to_string(k));
    return ids;
}

std::vector<std::string> pair_ids(int n_q)
{
    std::vector<std::string> ids;
    for (int k = 1; k <= n_q; ++k)
        ids.push_back("M2-q" + std::to_string(k));
    for (int i = 1; i <= n_q; ++i)
        for (int j = i + 1; j <= n_q; ++j)
            ids.push_back("q" + std::to_string(i) + "-q" + std::to_string(j));
    return ids;
}

std::string x_name(const Scenario& s)
{
    if (!s.sweep.enabled)
        return "z_um";
    if (s.sweep.axis == "z")
        return "z_um";
    if (s.sweep.axis == "r")
        return "r_um";
    return s.sweep.axis;
}

std::vector<double> sweep_values(const Scenario& s)
{
    if (s.sweep.enabled)
        return s.sweep.values();
    return {s.z_um};
}

void parallel_for(size_t n, int jobs, const std::function<void(size_t)>& fn)
{
    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
    if (workers <= 1) {
        for (size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (size_t i = next++; i < n; i = next++)
                fn(i);
        });
    for (auto& t : pool)
        t.join();
}

std::string hex64(std::uint64_t h)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json base_meta(const Scenario& s, const char* mode)
{
    json m;
    m["tool"] = "qabsorb";
    m["version"] = tool_version;
    m["rng"] = rng_algorithm_id;
    m["config_hash"] = hex64(fnv1a(s.canonical));
    m["mode"] = mode;
    return m;
}

OutputRow failed_row(double x, const std::exception& e)
{
    OutputRow r;
    r.x = x;
    r.ok = false;
    if (auto* qe = dynamic_cast<const Error*>(&e))
        r.error = std::string(qe->kind()) + ": " + qe->what();
    else
        r.error = std::string("internal: ") + e.what();
    r.n_ok = 0;
    return r;
}

std::string fmt_num(double v)
{
    if (std::isnan(v))
        return "";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_quote(const std::string& s)
{
    if (s.find_first_of(",\"\r\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"')
            out += '"';
        out += ch;
    }
    return out + "\"";
}

// RFC 4180 record reader; returns false at end of input.
bool read_record(std::istream& is, std::vector<std::string>& fields)
{
    fields.clear();
    if (is.peek() == std::char_traits<char>::eof())
        return false;
    std::string cur;
    bool quoted = false, any = false;
    for (int c; (c = is.get()) != std::char_traits<char>::eof();) {
        any = true;
        if (quoted) {
            if (c == '"') {
                if (is.peek() == '"') {
                    cur += '"';
                    is.get();
                } else {
                    quoted = false;
                }
            } else {
                cur += static_cast<char>(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c == '\n') {
            break;
        } else if (c != '\r') {
            cur += static_cast<char>(c);
        }
    }
    if (any)
        fields.push_back(cur);
    return any;
}

double parse_num(const std::string& s)
{
    if (s.empty())
        return nan_v;
    return std::strtod(s.c_str(), nullptr);
}

} // namespace

int RunResult::col(const std::string& name) const
{
    for (size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name)
            return static_cast<int>(i);
    return -1;
}

std::vector<std::string> output_columns(const Scenario& s)
{
    const int n = max_qubits(s);
    std::vector<std::string> cols = {"residual"};
    const auto& o = s.observables;
    if (o.temperatures)
        for (const auto& id : transition_ids(n)) {
            cols.push_back("mbeta_" + id);
            cols.push_back("menv_" + id);
        }
    if (o.fluxes) {
        for (const auto& id : transition_ids(n)) {
            cols.push_back("Q_" + id);
            cols.push_back("X_" + id);
        }
        for (const auto& id : pair_ids(n)) {
            cols.push_back("Qr_" + id);
            cols.push_back("Qd_" + id);
        }
        cols.push_back("dU_dt");
    }
    if (o.entropy)
        cols.push_back("dS_dt");
    if (o.collective_temperature) {
        cols.push_back("T_C");
        cols.push_back("mbeta_C");
        cols.push_back("Dt_TC");
    }
    if (o.correlations) {
        cols.push_back("MI");
        cols.push_back("MI_res");
        cols.push_back("tau");
        cols.push_back("discord");
    }
    return cols;
}

Layout scenario_layout(const Scenario& s, double x)
{
    int n_q = s.system.n_q;
    double r = s.r_um, z = s.z_um;
    if (s.sweep.enabled) {
        if (s.sweep.axis == "z")
            z = x;
        else if (s.sweep.axis == "r")
            r = x;
        else if (s.sweep.axis == "n_q")
            n_q = static_cast<int>(std::round(x));
    }
    return circle_layout(n_q, r * 1e-6, z * 1e-6, s.system.d_qubit);
}

EnvConfig scenario_environment(const Scenario& s, double x)
{
    EnvConfig env;
    env.T_S = s.environment.T_S;
    env.T_W = s.environment.T_W;
    env.delta = s.environment.delta_um * 1e-6;
    env.omega_S = s.environment.omega_S;
    env.backend = make_backend(s.environment, s.base_dir);
    double eps = s.environment.epsilon;
    if (s.sweep.enabled && s.sweep.axis == "epsilon")
        eps = x;
    return scale_temperatures(env, eps);
}

OutputRow evaluate_point(const Scenario& s, double x, const Layout* layout_override)
{
    const Layout layout = layout_override ? *layout_override : scenario_layout(s, x);
    SystemSpec spec = s.system;
    spec.n_q = layout.n_qubits();
    const Model m = build_model(spec, layout, scenario_environment(s, x));
    const SteadyReport rep = steady_state_report(m.L);
    const DensityMatrix& rho = rep.rho;

    const auto cols = output_columns(s);
    OutputRow row;
    row.x = x;
    row.residual = rep.residual;
    row.values.assign(cols.size(), nan_v);
    auto set = [&](const std::string& name, double v) {
        for (size_t i = 0; i < cols.size(); ++i)
            if (cols[i] == name) {
                row.values[i] = v;
                return;
            }
    };
    set("residual", rep.residual);
    const auto& o = s.observables;
    if (o.temperatures) {
        const TemperatureReport t = temperatures(rho, m);
        for (size_t i = 0; i < m.transitions.size(); ++i) {
            const std::string id = m.transitions[i].id();
            set("mbeta_" + id, t.population[i].mbeta);
            set("menv_" + id, t.environment[i].mbeta);
        }
    }
    if (o.fluxes) {
        const FluxReport f = fluxes(rho, m, false);
        for (size_t i = 0; i < m.transitions.size(); ++i) {
            const std::string id = m.transitions[i].id();
            set("Q_" + id, f.local[i]);
            set("X_" + id, f.prefactor[i] ? *f.prefactor[i] : nan_v);
        }
        for (const auto& p : f.pairs) {
            const std::string id = pair_id(m.transitions[p.a], m.transitions[p.b]);
            set("Qr_" + id, p.resonant_ab);
            set("Qd_" + id, p.nonlocal);
        }
        set("dU_dt", f.dU_dt);
    }
    if (o.entropy) {
        EntropyOptions eo;
        eo.local_only = o.entropy_local_only;
        eo.include_state_term = false;
        set("dS_dt", entropy_production(m, rho, eo));
    }
    if (o.collective_temperature) {
        const CollectiveTemperature tc = collective_temperature(rho, spec);
        set("T_C", tc.T);
        set("mbeta_C", tc.mbeta);
        set("Dt_TC", tc.residual);
    }
    if (o.correlations) {
        set("MI", maximize_over_partitions(rho.matrix, rho.dims, Quantifier::mi).value);
        set("MI_res",
            maximize_over_partitions(rho.matrix, rho.dims, Quantifier::mi_rescaled).value);
        if (rho.dims.size() >= 3)
            set("tau", maximize_over_partitions(rho.matrix, rho.dims, Quantifier::tau).value);
        set("discord", maximize_over_partitions(rho.matrix, rho.dims, Quantifier::discord).value);
    }
    return row;
}

RunResult run_scenario(const Scenario& s, const RunOptions& opt)
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto xs = sweep_values(s);
    RunResult res;
    res.columns = output_columns(s);
    res.x_column = x_name(s);
    res.rows.resize(xs.size());
    parallel_for(xs.size(), opt.jobs, [&](size_t i) {
        try {
            res.rows[i] = evaluate_point(s, xs[i]);
        } catch (const std::exception& e) {
            res.rows[i] = failed_row(xs[i], e);
        }
    });
    res.meta = base_meta(s, "deterministic");
    json resid = json::array();
    for (const auto& r : res.rows)
        resid.push_back(r.ok ? json(r.residual) : json(nullptr));
    res.meta["residuals"] = resid;
    res.meta["wall_clock_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (opt.strict)
        for (const auto& r : res.rows)
            if (!r.ok)
                throw SolverFailure("point " + fmt_num(r.x) + ": " + r.error);
    return res;
}

RunResult run_montecarlo(const Scenario& s, const RunOptions& opt)
{
    const auto t0 = std::chrono::steady_clock::now();
    const int ns = s.montecarlo.samples;
    if (ns < 1)
        throw ConfigError("montecarlo.samples must be >= 1");
    const std::uint64_t master = opt.seed ? *opt.seed : s.montecarlo.seed;
    const double sigma = s.montecarlo.sigma_um * 1e-6;
    const auto xs = sweep_values(s);
    const auto base_cols = output_columns(s);

    std::vector<OutputRow> samples(xs.size() * static_cast<size_t>(ns));
    parallel_for(samples.size(), opt.jobs, [&](size_t k) {
        const size_t p = k / ns, q = k % ns;
        try {
            const Layout l = gaussian_perturb(scenario_layout(s, xs[p]), sigma,
                                              derive_seed(master, p, q));
            samples[k] = evaluate_point(s, xs[p], &l);
        } catch (const std::exception& e) {
            samples[k] = failed_row(xs[p], e);
        }
    });

    RunResult res;
    res.x_column = x_name(s);
    for (const auto& c : base_cols) {
        res.columns.push_back(c);
        res.columns.push_back(c + "_se");
    }
    res.columns.push_back("n_ok");
    res.columns.push_back("n_failed");
    json resid = json::array();
    for (size_t p = 0; p < xs.size(); ++p) {
        OutputRow row;
        row.x = xs[p];
        const size_t nc = base_cols.size();
        std::vector<double> mean(nc, 0.0), m2(nc, 0.0);
        std::vector<int> cnt(nc, 0);
        int ok = 0, bad = 0;
        double rmax = 0.0;
        std::string first_err;
        for (int q = 0; q < ns; ++q) {
            const OutputRow& r = samples[p * ns + q];
            if (!r.ok) {
                ++bad;
                if (first_err.empty())
                    first_err = r.error;
                continue;
            }
            ++ok;
            rmax = std::max(rmax, r.residual);
            for (size_t c = 0; c < nc; ++c) {
                double v = r.values[c];
                if (std::isnan(v))
                    continue;
                // Welford; identical samples leave the mean bit-exact
                ++cnt[c];
                double d = v - mean[c];
                mean[c] += d / cnt[c];
                m2[c] += d * (v - mean[c]);
            }
        }
        row.n_ok = ok;
        row.n_failed = bad;
        row.residual = rmax;
        if (ok == 0) {
            row.ok = false;
            row.error = first_err;
            row.values.assign(res.columns.size(), nan_v);
        } else {
            for (size_t c = 0; c < nc; ++c) {
                row.values.push_back(cnt[c] ? mean[c] : nan_v);
                double se = cnt[c] > 1 ? std::sqrt(m2[c] / (cnt[c] - 1) / cnt[c]) : 0.0;
                row.values.push_back(cnt[c] ? se : nan_v);
            }
            row.values.push_back(nan_v);
            row.values.push_back(nan_v);
        }
        row.values[res.columns.size() - 2] = ok;
        row.values[res.columns.size() - 1] = bad;
        resid.push_back(ok ? json(rmax) : json(nullptr));
        res.rows.push_back(row);
    }
    res.meta = base_meta(s, "montecarlo");
    res.meta["seed"] = master;
    res.meta["samples"] = ns;
    res.meta["sigma_um"] = s.montecarlo.sigma_um;
    res.meta["residuals"] = resid;
    res.meta["wall_clock_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (opt.strict)
        for (const auto& r : res.rows)
            if (r.n_failed > 0)
                throw SolverFailure("point " + fmt_num(r.x) + ": " +
                                    std::to_string(r.n_failed) + " samples failed");
    return res;
}

void write_csv(const RunResult& r, std::ostream& os)
{
    os << "#meta " << r.meta.dump() << "\n";
    os << csv_quote(r.x_column) << ",status,error";
    for (const auto& c : r.columns)
        os << "," << csv_quote(c);
    os << "\n";
    for (const auto& row : r.rows) {
        os << fmt_num(row.x) << "," << (row.ok ? "ok" : "error") << "," << csv_quote(row.error);
        for (double v : row.values)
            os << "," << fmt_num(v);
        os << "\n";
    }
}

void write_json(const RunResult& r, std::ostream& os)
{
    json doc;
    doc["meta"] = r.meta;
    json cols = json::array({r.x_column});
    for (const auto& c : r.columns)
        cols.push_back(c);
    doc["columns"] = cols;
    json rows = json::array();
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    for (const auto& row : r.rows) {
        json jr;
        jr["status"] = row.ok ? "ok" : "error";
        if (!row.ok)
            jr["error"] = row.error;
        json vals = json::array({num(row.x)});
        for (double v : row.values)
            vals.push_back(num(v));
        jr["values"] = vals;
        rows.push_back(jr);
    }
    doc["rows"] = rows;
    os << doc.dump(2) << "\n";
}

RunResult read_csv(std::istream& is)
{
    RunResult r;
    std::string line;
    if (!std::getline(is, line) || line.rfind("#meta ", 0) != 0)
        throw DataError("csv: missing #meta line");
    r.meta = json::parse(line.substr(6));
    std::vector<std::string> f;
    if (!read_record(is, f) || f.size() < 3)
        throw DataError("csv: missing header");
    r.x_column = f[0];
    r.columns.assign(f.begin() + 3, f.end());
    while (read_record(is, f)) {
        if (f.size() != r.columns.size() + 3)
            throw DataError("csv: row width differs from header");
        OutputRow row;
        row.x = parse_num(f[0]);
        row.ok = f[1] == "ok";
        row.error = f[2];
        for (size_t i = 3; i < f.size(); ++i)
            row.values.push_back(parse_num(f[i]));
        r.rows.push_back(row);
    }
    return r;
}

} // namespace qabsorb
