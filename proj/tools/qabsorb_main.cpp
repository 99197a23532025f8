// qabsorb: steady-state thermodynamics of an absorption machine driving a
// ring of qubits near a hot slab.
//
//   qabsorb simulate --config scenario.json [--out run.csv] [--format csv|json]
//                    [--jobs N] [--seed S] [--strict]
//   qabsorb validate --config scenario.json
//
// Exit codes: 0 ok, 2 configuration error, 3 solver error under --strict.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "qabsorb/errors.hpp"
#include "qabsorb/harness.hpp"

using namespace qabsorb;

namespace {

int do_validate(const std::string& path)
{
    const Scenario s = load_scenario(path);
    const std::vector<double> xs = s.sweep.enabled ? s.sweep.values() : std::vector<double>{s.z_um};
    for (double x : xs) {
        const Layout l = scenario_layout(s, x);
        SystemSpec spec = s.system;
        spec.n_q = l.n_qubits();
        const EnvConfig env = scenario_environment(s, x);
        const auto ts = build_transitions(spec, l);
        const RateSet rs = compute_rates(ts, env, l);
        const double margin = kossakowski_margin(rs, ts);
        if (margin < -1e-12)
            throw ConfigError("rate matrix not positive semidefinite at sweep value " +
                              std::to_string(x));
    }
    std::cout << "ok: " << xs.size() << " point(s), config hash " << std::hex
              << fnv1a(s.canonical) << std::dec << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"absorption machine steady-state simulator"};
    app.require_subcommand(1);

    std::string config, out, format = "csv";
    int jobs = 1;
    std::uint64_t seed = 0;
    bool strict = false;

    auto* sim = app.add_subcommand("simulate", "run a scenario or Monte-Carlo ensemble");
    sim->add_option("--config", config, "scenario file (JSON)")->required();
    sim->add_option("--out", out, "output file, stdout if omitted");
    sim->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sim->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    auto* seed_opt = sim->add_option("--seed", seed, "master seed for Monte-Carlo draws");
    sim->add_flag("--strict", strict, "fail with exit code 3 on any solver error");

    std::string vconfig;
    auto* val = app.add_subcommand("validate", "parse the config and check rate positivity");
    val->add_option("--config", vconfig, "scenario file (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // a bad invocation is reported like a bad config; --help stays 0
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (*val) {
        try {
            return do_validate(vconfig);
        } catch (const Error& e) {
            std::cerr << e.kind() << " error: " << e.what() << "\n";
            return 2;
        }
    }

    try {

        const Scenario s = load_scenario(config);
        RunOptions opt;
        opt.jobs = jobs;
        opt.strict = strict;
        if (*seed_opt)
            opt.seed = seed;
        const RunResult r = s.montecarlo.samples > 0 ? run_montecarlo(s, opt) : run_scenario(s, opt);

        std::ofstream file;
        if (!out.empty()) {
            file.open(out);
            if (!file) {
                std::cerr << "error: cannot write " << out << "\n";
                return 1;
            }
        }
        std::ostream& os = out.empty() ? std::cout : file;
        if (format == "json")
            write_json(r, os);
        else
            write_csv(r, os);
        int failed = 0;
        for (const auto& row : r.rows)
            failed += row.ok ? 0 : 1;
        if (failed)
            std::cerr << "warning: " << failed << " point(s) failed, see the error column\n";
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const SolverFailure& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << e.kind() << " error: " << e.what() << "\n";
        return 3;
    }
}
