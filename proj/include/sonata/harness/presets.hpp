#pragma once

#include <string_view>
#include <vector>

#include "sonata/harness/config.hpp"

namespace sonata {

/// huber-sca, huber-lin, localization-lin, localization-pl, quadratic-oracle.
ExperimentConfig preset(std::string_view name);
const std::vector<std::string_view>& preset_names();

}  // namespace sonata
