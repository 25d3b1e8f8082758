#pragma once

#include <string>
#include <vector>

#include "elastipinn/driver/config.hpp"

namespace elastipinn::driver {

struct PresetInfo {
    std::string name;
    std::string description;
};

const std::vector<PresetInfo>& preset_list();
bool is_preset(const std::string& name);
// Throws ConfigError for an unknown name.
ExperimentConfig preset(const std::string& name);

}  // namespace elastipinn::driver
