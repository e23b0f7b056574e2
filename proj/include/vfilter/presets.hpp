#pragma once

#include <string>
#include <vector>

#include "vfilter/experiments.hpp"
#include "vfilter/toml_lite.hpp"

namespace vfilter {

std::vector<std::string> preset_names();
StabilityConfig make_preset(const std::string& name);

// A config file either names a preset (optionally overriding fields) or
// spells out the run from scratch via [model]/[weight]/[grid]/[experiment].
StabilityConfig config_from_toml(const toml::Document& doc);
StabilityConfig config_from_toml_file(const std::string& path);

}  // namespace vfilter
