#include "doctest.h"

#include <fstream>
#include <numeric>
#include <sstream>

#include "qabsorb/errors.hpp"
#include "qabsorb/harness.hpp"

using namespace qabsorb;

namespace {

std::string small_sweep(const std::string& extra = "", bool correlations = false)
{
    return std::string(R"({ "layout": {"n_q": 2, "r": 0.833, "z": 2.72},
  "observables": {"collective_temperature": true, "correlations": )") +
           (correlations ? "true" : "false") + R"(},
  "sweep": {"axis": "z", "min": 0.5, "max": 20, "points": 4, "spacing": "log"})" + extra + "}";
}

std::string csv_of(const RunResult& r)
{
    RunResult c = r;
    c.meta.erase("wall_clock_s");
    std::ostringstream os;
    write_csv(c, os);
    return os.str();
}

bool same_bits(double a, double b)
{
    return (std::isnan(a) && std::isnan(b)) || a == b;
}

} // namespace

TEST_CASE("scenario parsing")
{
    Scenario d = parse_scenario("{}");
    CHECK(d.system.n_q == 4);
    CHECK(d.r_um == doctest::Approx(0.833));
    CHECK(d.environment.T_S == 900);
    CHECK_FALSE(d.sweep.enabled);

    Scenario s = parse_scenario(small_sweep("", true));
    CHECK(s.system.n_q == 2);
    CHECK(s.sweep.enabled);
    auto xs = s.sweep.values();
    REQUIRE(xs.size() == 4);
    CHECK(xs.front() == doctest::Approx(0.5));
    CHECK(xs.back() == doctest::Approx(20));
    CHECK(xs[1] / xs[0] == doctest::Approx(xs[2] / xs[1]));

    CHECK_THROWS_AS(parse_scenario("{ \"layout\": { \"nq\": 3 } }"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("{ \"extra\": 1 }"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("{ \"layout\": { \"r\": -1 } }"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("{ \"layout\": { \"n_q\": 9 } }"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("{ \"environment\": { \"epsilon\": 2 } }"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("{ \"environment\": { \"backend\": \"magic\" } }"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("{ \"environment\": { \"backend\": \"tabulated\" } }"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("{ \"sweep\": { \"axis\": \"T\", \"min\": 1, \"max\": 2 } }"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("{ \"sweep\": { \"axis\": \"z\", \"min\": 0, \"max\": 2, \"spacing\": \"log\" } }"),
                    ConfigError);
    CHECK_THROWS_AS(parse_scenario("{ \"system\": { \"omega_q\": \"fast\" } }"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("{ \"layout\": "), ConfigError);
    CHECK_THROWS_AS(load_scenario("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("config hash follows content, not formatting")
{
    Scenario a = parse_scenario("{\"layout\": {\"z\": 3}}");
    Scenario b = parse_scenario("{ \"layout\" : { \"z\" : 3.0 } }");
    Scenario c = parse_scenario("{\"layout\": {\"z\": 4}}");
    CHECK(fnv1a(a.canonical) == fnv1a(b.canonical));
    CHECK(fnv1a(a.canonical) != fnv1a(c.canonical));
    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
}

TEST_CASE("default scenario file loads")
{
    Scenario s = load_scenario(std::string(QABSORB_SOURCE_DIR) + "/scenarios/default.json");
    CHECK(s.system.n_q == 4);
    CHECK(s.sweep.points == 60);
    CHECK(s.sweep.spacing == "log");
}

TEST_CASE("run output layout and CSV round trip")
{
    Scenario s = parse_scenario(small_sweep("", true));
    RunResult r = run_scenario(s, {2, false, {}});
    CHECK(r.x_column == "z_um");
    REQUIRE(r.rows.size() == 4);
    CHECK(r.col("mbeta_q1") >= 0);
    CHECK(r.col("Qr_M2-q1") >= 0);
    CHECK(r.col("discord") >= 0);
    CHECK(r.col("mbeta_q3") == -1);
    for (const auto& row : r.rows) {
        CHECK(row.ok);
        CHECK(row.residual <= 1e-10);
        CHECK(row.values.size() == r.columns.size());
    }
    for (const char* k : {"tool", "version", "rng", "config_hash", "wall_clock_s", "residuals"})
        CHECK(r.meta.contains(k));
    CHECK(r.meta["residuals"].size() == 4);

    std::ostringstream os;
    write_csv(r, os);
    std::istringstream is(os.str());
    RunResult back = read_csv(is);
    CHECK(back.columns == r.columns);
    CHECK(back.meta == r.meta);
    REQUIRE(back.rows.size() == r.rows.size());
    for (size_t i = 0; i < r.rows.size(); ++i) {
        CHECK(back.rows[i].x == r.rows[i].x);
        for (size_t c = 0; c < r.columns.size(); ++c)
            CHECK(same_bits(back.rows[i].values[c], r.rows[i].values[c]));
    }

    std::ostringstream js;
    write_json(r, js);
    auto doc = nlohmann::json::parse(js.str());
    CHECK(doc["rows"].size() == 4);
    CHECK(doc["columns"].size() == r.columns.size() + 1);
}

TEST_CASE("CSV quoting survives commas and quotes in error text")
{
    RunResult r;
    r.x_column = "z_um";
    r.columns = {"a", "b"};
    r.meta = {{"tool", "qabsorb"}};
    OutputRow ok;
    ok.x = 1.0 / 3.0;
    ok.values = {std::numeric_limits<double>::infinity(), std::nan("")};
    OutputRow bad;
    bad.x = 2;
    bad.ok = false;
    bad.error = "data: missing \"q1\", line 3\nnext";
    bad.values = {1e-300, -0.0};
    r.rows = {ok, bad};
    std::ostringstream os;
    write_csv(r, os);
    std::istringstream is(os.str());
    RunResult back = read_csv(is);
    REQUIRE(back.rows.size() == 2);
    CHECK(back.rows[0].x == 1.0 / 3.0);
    CHECK(std::isinf(back.rows[0].values[0]));
    CHECK(std::isnan(back.rows[0].values[1]));
    CHECK_FALSE(back.rows[1].ok);
    CHECK(back.rows[1].error == bad.error);
    CHECK(back.rows[1].values[0] == 1e-300);
}

TEST_CASE("runs are deterministic and independent of the worker count")
{
    Scenario s = parse_scenario(small_sweep());
    std::string a = csv_of(run_scenario(s, {1, false, {}}));
    std::string b = csv_of(run_scenario(s, {4, false, {}}));
    CHECK(a == b);
}

TEST_CASE("failing points are recorded, strict mode raises")
{
    Scenario s = parse_scenario(small_sweep(R"(, "system": {"dipole_qubit": 0})"));
    RunResult r = run_scenario(s);
    for (const auto& row : r.rows) {
        CHECK_FALSE(row.ok);
        CHECK(row.error.rfind("degeneracy:", 0) == 0);
    }
    CHECK_THROWS_AS(run_scenario(s, {1, true, {}}), SolverFailure);
}

TEST_CASE("sweep axes")
{
    Scenario e = parse_scenario(R"({ "layout": {"n_q": 1},
      "environment": {"backend": "equilibrium"},
      "sweep": {"axis": "epsilon", "min": 0.5, "max": 1, "points": 2} })");
    RunResult re = run_scenario(e);
    CHECK(re.x_column == "epsilon");
    const int c = re.col("menv_q1");
    CHECK(re.rows[0].values[c] == doctest::Approx(2 * re.rows[1].values[c]).epsilon(1e-9));

    Scenario n = parse_scenario(R"({ "layout": {"n_q": 1},
      "observables": {"collective_temperature": false},
      "sweep": {"axis": "n_q", "min": 1, "max": 3, "points": 3} })");
    RunResult rn = run_scenario(n);
    REQUIRE(rn.rows.size() == 3);
    const int q3 = rn.col("mbeta_q3");
    REQUIRE(q3 >= 0);
    CHECK(std::isnan(rn.rows[0].values[q3]));
    CHECK(std::isfinite(rn.rows[2].values[q3]));

    Scenario rr = parse_scenario(R"({ "layout": {"n_q": 1},
      "sweep": {"axis": "r", "min": 1, "max": 2, "points": 2} })");
    CHECK(run_scenario(rr).x_column == "r_um");
}

TEST_CASE("Monte Carlo reproducibility")
{
    const std::string mc = R"(, "montecarlo": {"samples": 3, "sigma": 0.5, "seed": 17})";
    Scenario s = parse_scenario(small_sweep(mc));
    RunResult a = run_montecarlo(s, {2, false, {}});
    RunResult b = run_montecarlo(s, {3, false, {}});
    CHECK(csv_of(a) == csv_of(b));
    CHECK(a.col("mbeta_q1_se") >= 0);
    CHECK(a.col("n_ok") >= 0);
    CHECK(a.meta["seed"] == 17);
    RunResult c = run_montecarlo(s, {2, false, 18});
    CHECK(csv_of(a) != csv_of(c));
    CHECK(c.meta["seed"] == 18);
    for (const auto& row : a.rows)
        CHECK(row.values[a.col("n_ok")] == 3);
}

TEST_CASE("Monte Carlo with zero spread reproduces the deterministic run")
{
    Scenario s = parse_scenario(small_sweep(R"(, "montecarlo": {"samples": 4, "sigma": 0, "seed": 5})"));
    RunResult det = run_scenario(s);
    RunResult mc = run_montecarlo(s);
    REQUIRE(mc.rows.size() == det.rows.size());
    for (size_t i = 0; i < det.rows.size(); ++i)
        for (size_t c = 0; c < det.columns.size(); ++c) {
            const int k = mc.col(det.columns[c]);
            REQUIRE(k >= 0);
            CHECK(same_bits(mc.rows[i].values[k], det.rows[i].values[c]));
            CHECK(same_bits(mc.rows[i].values[k + 1], std::isnan(det.rows[i].values[c]) ? std::nan("") : 0.0));
        }
}

TEST_CASE("epsilon sweep leaves the qubit temperatures nearly unchanged" * doctest::may_fail())
{
    // Declared threshold: max variation of -beta_q2 over epsilon in [0.6, 1]
    // below 10% of its epsilon = 1 value.
    Scenario s = parse_scenario(R"({
      "observables": {"collective_temperature": false, "entropy": false, "fluxes": false},
      "sweep": {"axis": "epsilon", "min": 0.6, "max": 1.0, "points": 9} })");
    RunResult r = run_scenario(s, {4, false, {}});
    const int c = r.col("mbeta_q2");
    double lo = 1e300, hi = -1e300;
    for (const auto& row : r.rows) {
        lo = std::min(lo, row.values[c]);
        hi = std::max(hi, row.values[c]);
    }
    const double ref = std::abs(r.rows.back().values[c]);
    MESSAGE("relative variation of -beta_q2: " << (hi - lo) / ref);
    CHECK((hi - lo) < 0.1 * ref);
}

TEST_CASE("machine temperature extrema scale linearly with the qubit count" * doctest::may_fail())
{
    // Declared threshold: extrema of -beta_M2 over z monotone in n_q, linear fit R^2 >= 0.95.
    std::vector<double> hi, lo;
    for (int n = 1; n <= 5; ++n) {
        Scenario s = parse_scenario(R"({ "layout": {"n_q": )" + std::to_string(n) + R"(},
          "observables": {"collective_temperature": false, "entropy": false, "fluxes": false},
          "sweep": {"axis": "z", "min": 0.1, "max": 100, "points": 40, "spacing": "log"} })");
        RunResult r = run_scenario(s, {4, false, {}});
        const int c = r.col("mbeta_M2");
        double h = -1e300, l = 1e300;
        for (const auto& row : r.rows) {
            h = std::max(h, row.values[c]);
            l = std::min(l, row.values[c]);
        }
        hi.push_back(h);
        lo.push_back(l);
    }
    auto r2 = [](const std::vector<double>& y) {
        const double n = static_cast<double>(y.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (size_t i = 0; i < y.size(); ++i) {
            double x = static_cast<double>(i + 1);
            sx += x;
            sy += y[i];
            sxx += x * x;
            sxy += x * y[i];
        }
        double b = (n * sxy - sx * sy) / (n * sxx - sx * sx), a = (sy - b * sx) / n;
        double ss = 0, st = 0, my = sy / n;
        for (size_t i = 0; i < y.size(); ++i) {
            double f = a + b * static_cast<double>(i + 1);
            ss += (y[i] - f) * (y[i] - f);
            st += (y[i] - my) * (y[i] - my);
        }
        return 1 - ss / st;
    };
    auto monotone = [](const std::vector<double>& y) {
        bool up = true, down = true;
        for (size_t i = 1; i < y.size(); ++i) {
            up &= y[i] > y[i - 1];
            down &= y[i] < y[i - 1];
        }
        return up || down;
    };
    MESSAGE("max: R^2 " << r2(hi) << " monotone " << monotone(hi));
    MESSAGE("min: R^2 " << r2(lo) << " monotone " << monotone(lo));
    CHECK(monotone(hi));
    CHECK(monotone(lo));
    CHECK(r2(hi) >= 0.95);
    CHECK(r2(lo) >= 0.95);
}
