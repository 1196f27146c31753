#pragma once
// Single include point for nlohmann/json from vendor/.
#include "json.hpp"
