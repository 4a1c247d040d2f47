#pragma once

// Per-declaration view data shared by the server and the CLI.

#include "perflens/cost_model.hpp"
#include "perflens/history_store.hpp"
#include "perflens/report_ingest.hpp"
#include "perflens/source_matcher.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace perflens {

struct LensItem {
    std::string fqn;  // report key
    std::string file;
    source::Span range;  // declaration
    std::string exact_cost_text;
    std::string big_o_text;
    cost::Severity severity = cost::Severity::Unknown;
    bool stale = false;
    std::optional<cost::EvolutionStep> evolution;  // set iff verdict != Same
};

/// One item per matched declaration, ordered by line. `history` may be null.
[[nodiscard]] std::vector<LensItem> build_lenses(const source::SourceIndex& index, const ingest::CostDatabase& db,
                                                 const history::HistoryStore* history);

/// Severity descending (unknown, polynomial, linear, constant), then line.
void sort_for_overview(std::vector<LensItem>& items);

[[nodiscard]] nlohmann::json span_to_json(const source::Span& span);
[[nodiscard]] nlohmann::json lens_to_json(const LensItem& item);
[[nodiscard]] nlohmann::json change_to_json(const change::SensitiveChange& c);
[[nodiscard]] nlohmann::json trace_to_json(const ingest::TraceItem& t);

}  // namespace perflens
