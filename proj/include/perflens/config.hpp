#pragma once

// Project configuration read from `.perflens/config.json` (or the file named
// by PERFLENS_CONFIG):
//
//   {
//     "external_command": "./gradlew infer",     // run by analyze in external mode
//     "report_path": "infer-out/costs-report.json",
//     "significance_threshold": 2,
//     "weights": {"loop": 3, "nesting": 3, "call_moved": 2, "call": 1},
//     "risky_constant": false,
//     "history_limit": 0
//   }

#include "perflens/change_analyzer.hpp"
#include "perflens/error.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace perflens {

struct Config {
    std::optional<std::string> external_command;
    std::string report_path = "infer-out/costs-report.json";
    change::Weights weights;
    bool risky_constant = false;
    std::size_t history_limit = 0;
};

/// Location honoring PERFLENS_CONFIG.
[[nodiscard]] std::filesystem::path config_path(const std::filesystem::path& root);

/// Missing file gives defaults. Throws IoError / FormatError for unreadable or
/// malformed files; unknown keys become warnings.
[[nodiscard]] Config load_config(const std::filesystem::path& root, Diagnostics& diagnostics);

}  // namespace perflens
