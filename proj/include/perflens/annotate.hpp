#pragma once

// Whole-tree indexing and lens building for `perflens annotate`.

#include "perflens/lenses.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace perflens {

/// `*.java` and `*.mini` files below `dir`, relative and sorted.
[[nodiscard]] std::vector<std::string> list_sources(const std::filesystem::path& dir);

/// Reads and indexes every file (OpenMP over files unless `parallel` is
/// false). Unreadable or unscannable files give empty indexes plus a
/// diagnostic. Output order follows `files`.
[[nodiscard]] std::vector<source::SourceIndex> index_files(const std::filesystem::path& dir,
                                                           const std::vector<std::string>& files,
                                                           Diagnostics& diagnostics, bool parallel = true);

/// Lens items of the whole tree, by file then line.
[[nodiscard]] std::vector<LensItem> annotate_tree(const std::filesystem::path& dir, const ingest::CostDatabase& db,
                                                  const history::HistoryStore* history, Diagnostics& diagnostics,
                                                  bool parallel = true);

}  // namespace perflens
