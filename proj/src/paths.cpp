#include "perflens/paths.hpp"

#include <vector>

namespace perflens {

std::string normalize_path(std::string_view path) {
    std::string unified(path);
    for (char& c : unified) {
        if (c == '\\') c = '/';
    }
    const bool absolute = !unified.empty() && unified.front() == '/';

    std::vector<std::string_view> parts;
    std::string_view rest(unified);
    while (!rest.empty()) {
        const auto slash = rest.find('/');
        const auto part = rest.substr(0, slash);
        if (!part.empty() && part != ".") parts.push_back(part);
        if (slash == std::string_view::npos) break;
        rest.remove_prefix(slash + 1);
    }

    std::string out = absolute ? "/" : "";
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i != 0) out += '/';
        out += parts[i];
    }
    return out;
}

bool paths_match(std::string_view a, std::string_view b) {
    const std::string na = normalize_path(a);
    const std::string nb = normalize_path(b);
    if (na == nb) return true;
    if (na.empty() || nb.empty()) return false;
    const std::string& shorter = na.size() < nb.size() ? na : nb;
    const std::string& longer = na.size() < nb.size() ? nb : na;
    if (shorter.front() == '/') return false;
    if (longer.compare(longer.size() - shorter.size(), shorter.size(), shorter) != 0) return false;
    return longer[longer.size() - shorter.size() - 1] == '/';
}

std::string path_stem(std::string_view path) {
    const std::string norm = normalize_path(path);
    const auto slash = norm.rfind('/');
    std::string name = slash == std::string::npos ? norm : norm.substr(slash + 1);
    const auto dot = name.rfind('.');
    if (dot != std::string::npos && dot != 0) name.resize(dot);
    return name;
}

}  // namespace perflens
