#pragma once

#include <string>
#include <string_view>

namespace perflens {

/// Lexical normalization without touching the filesystem: backslashes become
/// '/', empty and "." segments are dropped. ".." is kept as written and
/// comparison stays case-sensitive.
[[nodiscard]] std::string normalize_path(std::string_view path);

/// Normalized equality, or one path being a suffix of the other on a '/'
/// boundary ("src/p/C.java" matches "/abs/root/src/p/C.java").
[[nodiscard]] bool paths_match(std::string_view a, std::string_view b);

/// Final path component without its extension ("a/b/Foo.mini" -> "Foo").
[[nodiscard]] std::string path_stem(std::string_view path);

}  // namespace perflens
