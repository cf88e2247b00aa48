#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "frag/characteristic.hpp"
#include "frag/immigration.hpp"
#include "frag/measure.hpp"

namespace frag {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Named corpus measures: "binary" (1/2,1/2), "dissipative" (1/2,1/4),
// "mixture" (non-lattice 50/50 blend of (1/2,1/2) and (2/3,1/3)).
DislocationMeasure make_measure(const std::string& name);

// Either a registry name or {"atoms": [{"weight": w, "ratios": [...]}]}.
DislocationMeasure parse_measure(const nlohmann::json& j);

// Registry: "one" | "constant:c" | "indicator:a,b" | "power:q".
TestFunction make_test_function(const std::string& spec);

struct CharacteristicSpec {
    enum class Kind { Zero, Count, Adapter, Energy };
    Kind kind = Kind::Count;
    std::string f_spec;         // Adapter: the wrapped test function
    double p = 0.0;             // Energy exponent
    std::string psi_name = "one";  // Energy: "one" is the only registered psi
};

// Registry: "zero" | "count" | "adapter:<f-spec>" | "energy:<p>,<psi-name>".
CharacteristicSpec parse_characteristic_spec(const std::string& spec);

// Builds the evaluable characteristic; Energy specs are handled by the
// experiment layer through energy() and are rejected here.
Characteristic make_characteristic(const CharacteristicSpec& spec, double p_star);

EnergySpec make_energy_spec(const CharacteristicSpec& spec);

// {"u": [...], "rate": r, "theta": th, "horizon": T,
//  "mark": [...] | {"choices": [{"weight": w, "ratios": [...]}]}}
ImmigrationSchedule parse_schedule(const nlohmann::json& j);

struct ExperimentConfig {
    std::string kind;  // phi | simulate | stopline | characteristic | immigration | decay | spine | verify
    DislocationMeasure measure = make_measure("binary");
    SimulationParams sim;
    std::optional<ImmigrationSchedule> schedule;
    std::vector<double> eta_grid;
    std::vector<double> t_grid;
    std::vector<double> p_grid;
    std::vector<double> q_grid;
    MCParams mc;
    std::string output_dir = "out";
    std::string f_spec = "one";
    std::string characteristic_spec = "count";
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

// Human-readable description of the config format for the `schema` subcommand.
std::string config_schema();

}  // namespace frag
