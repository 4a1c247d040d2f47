#include "perflens/lenses.hpp"

#include <algorithm>

namespace perflens {

using nlohmann::json;

std::vector<LensItem> build_lenses(const source::SourceIndex& index, const ingest::CostDatabase& db,
                                   const history::HistoryStore* history) {
    std::vector<LensItem> items;
    for (const auto& m : source::match_decls(index, db)) {
        if (m.entry == nullptr) continue;
        LensItem item;
        item.fqn = m.entry->fqn;
        item.file = index.path;
        item.range = m.decl.decl_span;
        item.exact_cost_text = m.entry->exact_cost.render();
        item.big_o_text = cost::big_o_text(m.entry->exact_cost);
        item.severity = cost::severity(m.entry->exact_cost);
        if (history != nullptr) {
            item.stale = history->is_stale(item.fqn);
            if (auto step = history->latest_evolution(item.fqn); step && step->verdict != cost::Verdict::Same) {
                item.evolution = std::move(step);
            }
        }
        items.push_back(std::move(item));
    }
    std::stable_sort(items.begin(), items.end(),
                     [](const LensItem& a, const LensItem& b) { return a.range.start_line < b.range.start_line; });
    return items;
}

void sort_for_overview(std::vector<LensItem>& items) {
    std::stable_sort(items.begin(), items.end(), [](const LensItem& a, const LensItem& b) {
        if (a.severity != b.severity) return static_cast<int>(a.severity) > static_cast<int>(b.severity);
        return a.range.start_line < b.range.start_line;
    });
}

json span_to_json(const source::Span& span) {
    return {{"start", {{"line", span.start_line}, {"col", span.start_col}}},
            {"end", {{"line", span.end_line}, {"col", span.end_col}}}};
}

json lens_to_json(const LensItem& item) {
    json j{{"fqn", item.fqn},
           {"file", item.file},
           {"range", span_to_json(item.range)},
           {"big_o_text", item.big_o_text},
           {"severity", cost::severity_name(item.severity)},
           {"stale", item.stale},
           {"commands",
            {{"detail", {{"method", "perf/detail"}, {"params", {{"fqn", item.fqn}}}}},
             {"overview", {{"method", "perf/overview"}, {"params", {{"file", item.file}}}}}}}};
    if (item.evolution) {
        j["evolution_text"] = item.evolution->text();
        j["evolution_verdict"] = cost::verdict_name(item.evolution->verdict);
    }
    return j;
}

json change_to_json(const change::SensitiveChange& c) {
    return {{"kind", change::change_kind_name(c.kind)}, {"detail", c.detail}, {"weight", c.weight}};
}

json trace_to_json(const ingest::TraceItem& t) {
    json j{{"description", t.description}, {"file", t.file}, {"line", t.line}};
    if (t.inline_cost) j["cost"] = t.inline_cost->render();
    return j;
}

}  // namespace perflens
