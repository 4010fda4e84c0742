#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "popdyn/basin.hpp"
#include "popdyn/control.hpp"
#include "popdyn/maps.hpp"
#include "popdyn/stability.hpp"

namespace popdyn {

/// Malformed configuration: unknown or missing key, wrong JSON type.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& key, const std::string& message)
        : std::runtime_error(key + ": " + message), key_(key) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

/// Well-formed configuration whose values violate a module invariant.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using BasinModel = std::variant<SingleParams, PairParams, GeneralMapParams, PolyMapParams>;

struct SimulateScenario {
    std::string name;
    Model model = SingleParams(1.0, 1.0);
    State initial;
    int horizon = 100;
};

struct EquilibriaScenario {
    std::string name;
    std::variant<SingleParams, PairParams> model = SingleParams(1.0, 1.0);
    double tolerance = 1e-9;
};

struct BasinScenario {
    std::string name;
    BasinModel model = PolyMapParams(1.0);
    State target;
    BasinConfig config;
    int fixed_point_seeds = 64;
};

struct OptimizeScenario {
    std::string name;
    ControlProblem problem;
    SweepConfig sweep;
};

struct Table1Side {
    ControlProblem problem;
    std::vector<double> constant_h;
};

struct Table1Scenario {
    std::string name;
    Table1Side single;
    Table1Side pair;
    SweepConfig sweep;
};

using Scenario = std::variant<SimulateScenario, EquilibriaScenario, BasinScenario, OptimizeScenario,
                              Table1Scenario>;

const std::string& scenario_name(const Scenario& s);
const char* scenario_kind(const Scenario& s);

struct ScenarioFile {
    std::optional<std::string> output_dir;
    std::vector<Scenario> scenarios;
    nlohmann::json raw;
};

/// Parses and validates a scenario document. Throws ConfigError or ValidationError.
ScenarioFile parse_scenarios(const nlohmann::json& doc);
ScenarioFile load_scenarios(const std::filesystem::path& path);

struct Table1Row {
    std::string model;          // "single" or "pair"
    std::optional<double> h;    // empty for the optimal-control row
    double objective = 0.0;
    std::optional<bool> dominated;  // optimum >= this row; empty for the optimum itself
};

/// Optimum row followed by one row per constant harvest, for each model.
std::vector<Table1Row> emit_table1(const Table1Side& single, const Table1Side& pair, const SweepConfig& sweep);

void write_table1_csv(const std::filesystem::path& path, const std::vector<Table1Row>& rows);
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj, bool two_species);
void write_solution_csv(const std::filesystem::path& path, const ControlSolution& sol, bool two_species);
void write_basin_csv(const std::filesystem::path& path, const BasinReport& rep, int dim);
void write_equilibria_csv(const std::filesystem::path& path, const std::vector<EquilibriumReport>& reports);

struct RunOptions {
    std::filesystem::path config;
    std::optional<std::filesystem::path> out_dir;  // overrides the file's output_dir
    std::optional<AdjointMode> adjoint_mode;       // overrides every control problem
    std::optional<std::uint64_t> seed;             // validate: run the randomized cross-check
};

/// Runs `command` (simulate, equilibria, basin, optimize, table1, validate)
/// against the config in `opts`. Prints one summary line per scenario to `out`
/// and diagnostics to `err`. Returns the process exit status.
int run_command(const std::string& command, const RunOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace popdyn
