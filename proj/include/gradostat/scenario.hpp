#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gradostat/bnb.hpp"
#include "gradostat/models.hpp"
#include "gradostat/network.hpp"

namespace gradostat {

enum class RunMode { Steady, Design, Dynamic };

const char* to_string(RunMode m);
RunMode parse_run_mode(const std::string& s);

// Everything one run needs. Units: litres, hours, grams per litre.
struct Scenario {
    static constexpr int kSchemaVersion = 1;

    std::string name;
    RunMode mode = RunMode::Steady;
    GradostatNetwork net;
    ModelOptions model;
    std::vector<double> activation; // steady runs on a network with candidates
    std::optional<DynamicSpec> dynamic;
    BnbSettings solver;
    std::string out_dir = "out";
};

// Throws Error(BadInput) with "line N:" prefixed messages.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);
std::string dump_scenario(const Scenario& s);
void save_scenario(const Scenario& s, const std::string& path);

bool operator==(const Scenario& a, const Scenario& b);

// four_tank, four_tank_modified, wheel, dynamic_four_tank.
// size and hard apply to the wheel only.
Scenario generate_example(const std::string& name, int size = 0, bool hard = false,
                          ModelKind kind = ModelKind::RC);
std::vector<std::string> example_names();

} // namespace gradostat
