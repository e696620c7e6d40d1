#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gradostat/scenario.hpp"

namespace gradostat {

enum ExitCode { kExitOk = 0, kExitInfeasible = 2, kExitSolverFailure = 3, kExitBadInput = 4 };

int exit_code_for(ErrorCode e);

struct RunOverrides {
    std::optional<RunMode> mode;
    std::optional<ModelKind> model;
    std::optional<double> gamma;
    std::optional<double> gap;
    std::optional<bool> deterministic;
    std::optional<std::string> out_dir;
};

void apply_overrides(Scenario& sc, const RunOverrides& o);

struct RunOutcome {
    int exit_code = kExitOk;
    std::string status;
    double objective = 0.0;
    double exactness = 0.0;
    std::vector<std::string> pipes; // chosen candidate pipes (design)
    std::vector<std::string> files; // written artifacts
    std::vector<std::pair<std::string, std::string>> report; // key/value rows of report.csv
    double seconds = 0.0;
};

// Solves, validates and writes the artifacts into sc.out_dir.
// Input errors propagate as Error; solver outcomes map to exit codes.
RunOutcome run_scenario(const Scenario& sc, std::ostream& log);

} // namespace gradostat
