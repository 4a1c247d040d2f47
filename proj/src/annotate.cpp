#include "perflens/annotate.hpp"

#include "perflens/paths.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace perflens {

namespace fs = std::filesystem;

std::vector<std::string> list_sources(const fs::path& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw IoError("not a directory: '" + dir.string() + "'");
    std::vector<std::string> out;
    for (auto it = fs::recursive_directory_iterator(dir, ec); !ec && it != fs::recursive_directory_iterator();
         it.increment(ec)) {
        if (!it->is_regular_file()) continue;
        const auto ext = it->path().extension();
        if (ext != ".java" && ext != ".mini") continue;
        out.push_back(normalize_path(fs::relative(it->path(), dir).generic_string()));
    }
    if (ec) throw IoError("cannot list '" + dir.string() + "': " + ec.message());
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

source::SourceIndex index_one(const fs::path& dir, const std::string& rel, Diagnostics& diag) {
    std::ifstream in(dir / rel, std::ios::binary);
    if (!in) {
        diag.error("cannot read '" + rel + "'");
        source::SourceIndex empty;
        empty.path = rel;
        return empty;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return source::index_source(rel, buf.str(), diag);
}

}  // namespace

std::vector<source::SourceIndex> index_files(const fs::path& dir, const std::vector<std::string>& files,
                                             Diagnostics& diagnostics, bool parallel) {
    std::vector<source::SourceIndex> out(files.size());
    std::vector<Diagnostics> local(files.size());
    const auto count = static_cast<std::ptrdiff_t>(files.size());
    if (parallel) {
#pragma omp parallel for schedule(dynamic, 4)
        for (std::ptrdiff_t i = 0; i < count; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            out[idx] = index_one(dir, files[idx], local[idx]);
        }
    } else {
        for (std::ptrdiff_t i = 0; i < count; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            out[idx] = index_one(dir, files[idx], local[idx]);
        }
    }
    for (const auto& d : local) diagnostics.append(d);
    return out;
}

std::vector<LensItem> annotate_tree(const fs::path& dir, const ingest::CostDatabase& db,
                                    const history::HistoryStore* history, Diagnostics& diagnostics, bool parallel) {
    std::vector<LensItem> items;
    for (const auto& index : index_files(dir, list_sources(dir), diagnostics, parallel)) {
        auto part = build_lenses(index, db, history);
        items.insert(items.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    return items;
}

}  // namespace perflens
