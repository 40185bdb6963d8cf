#pragma once

#include "json.hpp"

#include <string>

#include "ffbs/pipeline.hpp"
#include "ffbs/sim.hpp"

namespace ffbs {

struct BuiltScenario {
    ControlStack stack;
    SimOptions opts;
    std::string out_dir;
    bool plots = true;
};

// Fully-populated default configuration: the inverted-pendulum scenario with
// the developed controller.
nlohmann::json default_config();

// Merges a user config onto the defaults (element-wise for the steps array)
// and rejects unknown keys with their path. The result round-trips through
// serialize_config/parse unchanged.
nlohmann::json resolve_config(const nlohmann::json& user);

// Reads, parses and resolves a config file.
nlohmann::json load_config_file(const std::string& path);

// Constructs and validates the runnable scenario from a resolved config.
BuiltScenario build_scenario(const nlohmann::json& resolved);

std::string serialize_config(const nlohmann::json& resolved);

}  // namespace ffbs
