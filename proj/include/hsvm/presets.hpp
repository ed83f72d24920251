#pragma once

#include <string>
#include <vector>

#include "hsvm/config.hpp"

namespace hsvm {

std::vector<std::string> list_presets();
// throws ConfigError for unknown names
RunConfig preset_config(const std::string& name);
// machine-readable parameter documentation
json describe_preset(const std::string& name);

}  // namespace hsvm
