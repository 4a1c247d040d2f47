#pragma once

#include <random>
#include <string>

namespace perflens::testing {

// Inserts loop- and call-shaped comments and extra whitespace.
inline std::string decorate(const std::string& body, std::mt19937& rng) {
    std::string out;
    for (const char c : body) {
        out += c;
        if (c == '\n' && rng() % 3 == 0) out += "  // for (;;) { call(); }\n";
        if ((c == ';' || c == '{') && rng() % 4 == 0) out += " /* while(x) g(); */ ";
        if (c == ' ' && rng() % 3 == 0) out += "\t  ";
    }
    return out;
}

}  // namespace perflens::testing
