#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "qabsorb/errors.hpp"
#include "qabsorb/scenario.hpp"

namespace qabsorb {

inline constexpr const char* tool_version = "1.0.0";

struct RunOptions {
    int jobs = 1;
    bool strict = false;
    std::optional<std::uint64_t> seed; // overrides montecarlo.seed
};

struct OutputRow {
    double x = 0.0;           // sweep value (or base value without sweep)
    bool ok = true;
    std::string error;        // "<kind>: <message>" when !ok
    std::vector<double> values;
    double residual = 0.0;
    int n_ok = 1;
    int n_failed = 0;
};

struct RunResult {
    std::vector<std::string> columns; // numeric columns after x
    std::string x_column;
    std::vector<OutputRow> rows;
    nlohmann::json meta;

    // column index, -1 if absent
    int col(const std::string& name) const;
};

// Raised under --strict when any point fails.
class SolverFailure : public Error {
public:
    explicit SolverFailure(const std::string& m) : Error(m) {}
    const char* kind() const noexcept override { return "solver"; }
};

std::vector<std::string> output_columns(const Scenario& s);

// One deterministic evaluation at sweep value x on the given layout.
OutputRow evaluate_point(const Scenario& s, double x, const Layout* layout_override = nullptr);

// Base layout at sweep value x.
Layout scenario_layout(const Scenario& s, double x);
// Environment at sweep value x, temperatures already scaled by epsilon.
EnvConfig scenario_environment(const Scenario& s, double x);

RunResult run_scenario(const Scenario& s, const RunOptions& opt = {});
RunResult run_montecarlo(const Scenario& s, const RunOptions& opt = {});

void write_csv(const RunResult& r, std::ostream& os);
void write_json(const RunResult& r, std::ostream& os);

// Parse a CSV written by write_csv back into a RunResult (meta, header, rows).
RunResult read_csv(std::istream& is);

} // namespace qabsorb
