#include "qabsorb/environment.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "qabsorb/constants.hpp"
#include "qabsorb/errors.hpp"

namespace qabsorb {

std::string TransitionSpec::id() const
{
    switch (label) {
    case TransitionLabel::machine1:
        return "M1";
    case TransitionLabel::machine2:
        return "M2";
    case TransitionLabel::machine3:
        return "M3";
    case TransitionLabel::qubit:
        break;
    }
    return "q" + std::to_string(qubit_index);
}

namespace {

int order_key(const TransitionSpec& t)
{
    switch (t.label) {
    case TransitionLabel::machine1:
        return 1;
    case TransitionLabel::machine2:
        return 2;
    case TransitionLabel::machine3:
        return 3;
    case TransitionLabel::qubit:
        break;
    }
    return 3 + t.qubit_index;
}

// cos x / x^2 - sin x / x^3, series below x = 0.1 to avoid cancellation
double g_minus(double x)
{
    if (x < 0.1) {
        double x2 = x * x, term = 1.0, s = 0.0, fact = 1.0; // fact = (2k+1)!
        for (int k = 1; k <= 7; ++k) {
            fact *= (2.0 * k) * (2.0 * k + 1.0);
            s += (k % 2 ? -1.0 : 1.0) * term * 2.0 * k / fact;
            term *= x2;
        }
        return s;
    }
    return std::cos(x) / (x * x) - std::sin(x) / (x * x * x);
}

} // namespace

std::string pair_id(const TransitionSpec& a, const TransitionSpec& b)
{
    return order_key(a) <= order_key(b) ? a.id() + "-" + b.id() : b.id() + "-" + a.id();
}

FreeSpaceCorrelation free_space_correlation(const PairFrame& f, double omega)
{
    const double x = omega * f.separation / phys::c;
    const vec3& pa = f.dipole_a;
    const vec3& pb = f.dipole_b;
    const double par = pa.x() * pb.x();
    const double perp = pa.y() * pb.y() + pa.z() * pb.z();
    const double gm = g_minus(x);
    const double sx = std::sin(x), cx = std::cos(x);
    const double sinc = x < 1e-8 ? 1.0 : sx / x;

    FreeSpaceCorrelation out;
    const double f_par = -3.0 * gm;
    const double f_perp = 1.5 * (sinc + gm);
    out.dissipative = par * f_par + perp * f_perp;

    const double x2 = x * x, x3 = x2 * x;
    const double l_par = -1.5 * (sx / x2 + cx / x3);
    const double l_perp = 0.75 * (-cx / x + sx / x2 + cx / x3);
    out.coupling = par * l_par + perp * l_perp;
    return out;
}

LocalAlpha EquilibriumBackend::local(const TransitionSpec&, double) const
{
    return {1.0, 0.0};
}

PairAlpha EquilibriumBackend::pair(const TransitionSpec&, const TransitionSpec&, double free_F,
                                   double) const
{
    PairAlpha out;
    out.alpha_W = free_F;
    return out;
}

double PhenomenologicalBackend::screen(double z) const
{
    return 1.0 / (1.0 + std::pow(z / p_.z0, p_.p));
}

double PhenomenologicalBackend::amplitude(const TransitionSpec& t) const
{
    if (auto it = p_.amplitude_override.find(t.id()); it != p_.amplitude_override.end())
        return it->second;
    return std::abs(t.omega - p_.omega_S) / p_.omega_S < p_.window ? p_.amplitude
                                                                    : p_.off_resonance;
}

LocalAlpha PhenomenologicalBackend::local(const TransitionSpec& t, double z) const
{
    double s = screen(z);
    return {1.0 - s, amplitude(t) * s};
}

PairAlpha PhenomenologicalBackend::pair(const TransitionSpec& a, const TransitionSpec& b,
                                        double free_F, double z) const
{
    double s = screen(z);
    PairAlpha out;
    out.alpha_W = (1.0 - s) * free_F;
    out.alpha_S = std::sqrt(amplitude(a) * amplitude(b)) * s * free_F;
    return out;
}

TabulatedBackend TabulatedBackend::from_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open rate table '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str());
}

TabulatedBackend TabulatedBackend::from_string(const std::string& text)
{
    TabulatedBackend tb;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos)
            line.erase(h);
        std::istringstream ls(line);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;)
            tok.push_back(t);
        if (tok.empty())
            continue;
        if (tok.size() != 6)
            throw DataError("rate table line " + std::to_string(lineno) + ": expected 6 columns");
        Row r;
        r.id = tok[0];
        try {
            size_t pos = 0;
            double v[5];
            for (int i = 0; i < 5; ++i) {
                v[i] = std::stod(tok[i + 1], &pos);
                if (pos != tok[i + 1].size())
                    throw std::invalid_argument("trailing");
            }
            r.omega = v[0];
            r.z = v[1];
            r.alpha_W = v[2];
            r.alpha_S = v[3];
            r.K = v[4];
        } catch (const std::exception&) {
            if (!header_seen && tb.rows_.empty()) {
                header_seen = true;
                continue;
            }
            throw DataError("rate table line " + std::to_string(lineno) + ": bad number");
        }
        tb.rows_.push_back(r);
    }
    return tb;
}

const TabulatedBackend::Row& TabulatedBackend::find(const std::string& id, double omega,
                                                    double z) const
{
    // grid match up to representation noise of the unit conversion
    auto same = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::abs(b); };
    for (const auto& r : rows_)
        if (r.id == id && same(r.omega, omega) && same(r.z, z))
            return r;
    std::ostringstream os;
    os << "rate table has no entry for " << id << " at omega=" << omega << " z=" << z;
    throw DataError(os.str());
}

LocalAlpha TabulatedBackend::local(const TransitionSpec& t, double z) const
{
    const Row& r = find(t.id(), t.omega, z);
    return {r.alpha_W, r.alpha_S};
}

PairAlpha TabulatedBackend::pair(const TransitionSpec& a, const TransitionSpec& b, double,
                                 double z) const
{
    const Row& r = find(pair_id(a, b), a.omega, z);
    PairAlpha out;
    out.alpha_W = r.alpha_W;
    out.alpha_S = r.alpha_S;
    out.K = r.K;
    return out;
}

const PairRate* RateSet::find_pair(int a, int b) const
{
    if (a > b)
        std::swap(a, b);
    for (const auto& p : pairs)
        if (p.a == a && p.b == b)
            return &p;
    return nullptr;
}

double gamma0(double omega, double d)
{
    if (!(omega > 0.0))
        throw ParameterError("gamma0: omega must be positive");
    return d * d * omega * omega * omega /
           (3.0 * phys::hbar * phys::pi * phys::eps0 * phys::c * phys::c * phys::c);
}

double bose_occupation(double omega, double T)
{
    if (!(omega > 0.0) || T < 0.0)
        throw ParameterError("bose_occupation: need omega > 0 and T >= 0");
    if (T == 0.0)
        return 0.0;
    return 1.0 / std::expm1(phys::hbar * omega / (phys::k_B * T));
}

namespace {

const RateBackend& backend_of(const EnvConfig& env)
{
    if (!env.backend)
        throw ConfigError("environment has no rate backend");
    return *env.backend;
}

} // namespace

LocalRate local_rates(const TransitionSpec& t, const EnvConfig& env, const Layout& layout)
{
    const LocalAlpha al = backend_of(env).local(t, layout.z);
    if (al.alpha_W < 0.0 || al.alpha_S < 0.0)
        throw DataError("negative alpha weight for " + t.id());
    const double g = gamma0(t.omega, t.dipole.norm());
    const double nW = bose_occupation(t.omega, env.T_W);
    const double nS = bose_occupation(t.omega, env.T_S);
    LocalRate r;
    r.gp = g * ((1.0 + nW) * al.alpha_W + (1.0 + nS) * al.alpha_S);
    r.gm = g * (nW * al.alpha_W + nS * al.alpha_S);
    return r;
}

bool resonant(double w1, double w2)
{
    return std::abs(w1 - w2) <= 1e-9 * std::max(std::abs(w1), std::abs(w2));
}

PairRate pair_rates(const TransitionSpec& a, const TransitionSpec& b, const EnvConfig& env,
                    const Layout& layout)
{
    if (!resonant(a.omega, b.omega))
        throw ContractError("pair_rates: " + a.id() + " and " + b.id() + " are not resonant");
    if (a.site == b.site)
        throw ContractError("pair_rates: transitions share an owner");
    PairFrame f = pair_geometry(layout, a.site, b.site);
    const double ma = a.dipole.norm(), mb = b.dipole.norm();
    auto comps = [&](const vec3& d, double m) {
        vec3 u = m > 0 ? vec3(d / m) : vec3::Zero();
        vec3 c(u.dot(f.ex), u.dot(f.ey), u.dot(f.ez));
        // orthogonal projections come out at rounding level; make them exact
        for (int i = 0; i < 3; ++i)
            if (std::abs(c[i]) < 1e-12)
                c[i] = 0.0;
        return c;
    };
    f.dipole_a = comps(a.dipole, ma);
    f.dipole_b = comps(b.dipole, mb);
    const double w = a.omega;
    const FreeSpaceCorrelation fs = free_space_correlation(f, w);
    const PairAlpha al = backend_of(env).pair(a, b, fs.dissipative, layout.z);
    const double g = std::sqrt(gamma0(w, ma) * gamma0(w, mb));
    const double nW = bose_occupation(w, env.T_W);
    const double nS = bose_occupation(w, env.T_S);
    PairRate p;
    p.gp = g * ((1.0 + nW) * al.alpha_W + (1.0 + nS) * al.alpha_S);
    p.gm = g * (nW * std::conj(al.alpha_W) + nS * std::conj(al.alpha_S));
    p.lambda = g * (fs.coupling + al.K);
    return p;
}

EnvTemperature env_temperature(double gp, double gm, double omega)
{
    if (!(gp > 0.0))
        throw ContractError("env_temperature: emission rate must be positive");
    if (gm < 0.0)
        throw ContractError("env_temperature: negative absorption rate");
    const double inf = std::numeric_limits<double>::infinity();
    if (gm == 0.0)
        return {0.0, -inf};
    const double lr = std::log(gp / gm);
    const double mbeta = -phys::k_B * lr / (phys::hbar * omega);
    if (lr == 0.0)
        return {inf, 0.0};
    return {phys::hbar * omega / (phys::k_B * lr), mbeta};
}

EnvConfig scale_temperatures(const EnvConfig& env, double epsilon)
{
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
        throw ParameterError("scale_temperatures: epsilon must lie in [0, 1]");
    EnvConfig out = env;
    out.T_S *= epsilon;
    out.T_W *= epsilon;
    out.epsilon *= epsilon;
    return out;
}

RateSet compute_rates(const std::vector<TransitionSpec>& ts, const EnvConfig& env,
                      const Layout& layout)
{
    RateSet rs;
    rs.local.reserve(ts.size());
    for (const auto& t : ts)
        rs.local.push_back(local_rates(t, env, layout));
    for (int i = 0; i < static_cast<int>(ts.size()); ++i)
        for (int j = i + 1; j < static_cast<int>(ts.size()); ++j) {
            if (ts[i].site == ts[j].site || !resonant(ts[i].omega, ts[j].omega))
                continue;
            PairRate p = pair_rates(ts[i], ts[j], env, layout);
            p.a = i;
            p.b = j;
            rs.pairs.push_back(p);
        }
    return rs;
}

} // namespace qabsorb
