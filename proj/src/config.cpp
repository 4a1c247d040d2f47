#include "perflens/config.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace perflens {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path config_path(const fs::path& root) {
    if (const char* env = std::getenv("PERFLENS_CONFIG"); env != nullptr && *env != '\0') return fs::path(env);
    return root / ".perflens" / "config.json";
}

namespace {

int positive_int(const json& v, const std::string& key) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 1) {
        throw FormatError("config: '" + key + "' must be a positive integer");
    }
    return static_cast<int>(v.get<std::int64_t>());
}

}  // namespace

Config load_config(const fs::path& root, Diagnostics& diagnostics) {
    Config config;
    const fs::path path = config_path(root);
    std::error_code ec;
    if (!fs::exists(path, ec)) return config;

    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read config '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    json j;
    try {
        j = json::parse(buf.str());
    } catch (const json::parse_error& e) {
        throw FormatError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw FormatError("config '" + path.string() + "' must be a JSON object");

    for (const auto& [key, value] : j.items()) {
        if (key == "external_command") {
            if (!value.is_string()) throw FormatError("config: 'external_command' must be a string");
            config.external_command = value.get<std::string>();
        } else if (key == "report_path") {
            if (!value.is_string()) throw FormatError("config: 'report_path' must be a string");
            config.report_path = value.get<std::string>();
        } else if (key == "significance_threshold") {
            config.weights.threshold = positive_int(value, key);
        } else if (key == "weights") {
            if (!value.is_object()) throw FormatError("config: 'weights' must be an object");
            for (const auto& [wk, wv] : value.items()) {
                if (wk == "loop") config.weights.loop = positive_int(wv, "weights.loop");
                else if (wk == "nesting") config.weights.nesting = positive_int(wv, "weights.nesting");
                else if (wk == "call_moved") config.weights.call_moved = positive_int(wv, "weights.call_moved");
                else if (wk == "call") config.weights.call = positive_int(wv, "weights.call");
                else diagnostics.warn("config: unknown weight '" + wk + "' ignored");
            }
        } else if (key == "risky_constant") {
            if (!value.is_boolean()) throw FormatError("config: 'risky_constant' must be a boolean");
            config.risky_constant = value.get<bool>();
        } else if (key == "history_limit") {
            if (!value.is_number_integer() || value.get<std::int64_t>() < 0) {
                throw FormatError("config: 'history_limit' must be a non-negative integer");
            }
            config.history_limit = static_cast<std::size_t>(value.get<std::int64_t>());
        } else {
            diagnostics.warn("config: unknown key '" + key + "' ignored");
        }
    }
    return config;
}

}  // namespace perflens
