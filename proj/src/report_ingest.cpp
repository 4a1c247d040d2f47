#include "perflens/report_ingest.hpp"

#include "perflens/paths.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

namespace perflens::ingest {

using nlohmann::json;

std::string_view base_fqn(std::string_view fqn) noexcept {
    const auto paren = fqn.find('(');
    return paren == std::string_view::npos ? fqn : fqn.substr(0, paren);
}

std::string_view simple_name(std::string_view fqn) noexcept {
    const auto base = base_fqn(fqn);
    const auto dot = base.rfind('.');
    return dot == std::string_view::npos ? base : base.substr(dot + 1);
}

std::optional<std::vector<std::string>> signature_params(std::string_view fqn) {
    const auto open = fqn.find('(');
    if (open == std::string_view::npos) return std::nullopt;
    const auto close = fqn.rfind(')');
    if (close == std::string_view::npos || close < open) return std::nullopt;

    std::vector<std::string> params;
    std::string current;
    int depth = 0;
    auto flush = [&] {
        const auto first = current.find_first_not_of(" \t");
        const auto last = current.find_last_not_of(" \t");
        if (first != std::string::npos) params.push_back(current.substr(first, last - first + 1));
        current.clear();
    };
    for (const char c : fqn.substr(open + 1, close - open - 1)) {
        if (c == '<') ++depth;
        if (c == '>') --depth;
        if (c == ',' && depth == 0) {
            flush();
            continue;
        }
        current += c;
    }
    flush();
    return params;
}

bool CostDatabase::insert(CostReportEntry entry) {
    entry.file = normalize_path(entry.file);
    if (entries_.contains(entry.fqn)) return false;
    auto& files = by_file_[entry.file];
    const auto key = std::make_pair(entry.line, entry.fqn);
    const auto pos = std::upper_bound(files.begin(), files.end(), key, [this](const auto& k, const std::string& f) {
        const auto& other = entries_.at(f);
        return k < std::make_pair(other.line, other.fqn);
    });
    files.insert(pos, entry.fqn);
    entries_.emplace(entry.fqn, std::move(entry));
    return true;
}

const CostReportEntry* CostDatabase::lookup(std::string_view fqn) const {
    const auto it = entries_.find(fqn);
    return it == entries_.end() ? nullptr : &it->second;
}

std::vector<const CostReportEntry*> CostDatabase::entries_for_file(std::string_view path) const {
    std::vector<const CostReportEntry*> out;
    const auto it = by_file_.find(normalize_path(path));
    if (it == by_file_.end()) return out;
    for (const auto& fqn : it->second) out.push_back(&entries_.at(fqn));
    return out;
}

namespace {

const json* find_path(const json& obj, std::initializer_list<const char*> keys) {
    const json* cur = &obj;
    for (const char* key : keys) {
        if (!cur->is_object()) return nullptr;
        const auto it = cur->find(key);
        if (it == cur->end()) return nullptr;
        cur = &*it;
    }
    return cur;
}

std::optional<std::string> string_at(const json& obj, std::initializer_list<const char*> keys) {
    const json* v = find_path(obj, keys);
    if (v == nullptr || !v->is_string()) return std::nullopt;
    return v->get<std::string>();
}

std::optional<std::int64_t> int_at(const json& obj, std::initializer_list<const char*> keys) {
    const json* v = find_path(obj, keys);
    if (v == nullptr || !v->is_number_integer()) return std::nullopt;
    return v->get<std::int64_t>();
}

// Converts one report object. Returns nullopt when the entry has to be dropped.
std::optional<CostReportEntry> convert_entry(const json& item, std::size_t index, Diagnostics& diag) {
    const std::string where = "entry " + std::to_string(index);
    if (!item.is_object()) {
        diag.warn(where + ": not an object, skipped");
        return std::nullopt;
    }
    CostReportEntry e;
    const auto fqn = string_at(item, {"procedure_id"});
    if (!fqn || fqn->empty()) {
        diag.warn(where + ": missing procedure_id, skipped");
        return std::nullopt;
    }
    e.fqn = *fqn;
    e.file = normalize_path(string_at(item, {"loc", "file"}).value_or(""));
    const auto lnum = int_at(item, {"loc", "lnum"});
    if (!lnum || *lnum < 1) {
        diag.warn(where + " (" + e.fqn + "): missing or invalid loc.lnum, using 1");
        e.line = 1;
    } else {
        e.line = static_cast<int>(*lnum);
    }

    const auto poly = string_at(item, {"exec_cost", "polynomial"});
    if (!poly) {
        diag.warn(where + " (" + e.fqn + "): no exec_cost.polynomial, cost unknown");
        e.exact_cost = cost::SymbolicCost::unknown();
    } else {
        try {
            e.exact_cost = cost::parse_polynomial(*poly);
        } catch (const std::exception& ex) {
            diag.warn(where + " (" + e.fqn + "): unparseable cost '" + *poly + "': " + ex.what());
            e.exact_cost = cost::SymbolicCost::unknown();
        }
    }

    if (const auto declared = int_at(item, {"exec_cost", "degree"})) {
        const auto computed = cost::degree(e.exact_cost);
        if (computed) {
            if (static_cast<std::int64_t>(computed->poly_degree) != *declared) {
                diag.warn(where + " (" + e.fqn + "): declared degree " + std::to_string(*declared) +
                          " differs from computed " + std::to_string(computed->poly_degree) +
                          "; using computed");
            }
            e.declared_degree = computed;
        } else if (*declared >= 0) {
            e.declared_degree = cost::DegreePair{static_cast<unsigned>(*declared), 0};
        }
    }
    e.declared_big_o = string_at(item, {"exec_cost", "big_o"});

    if (const json* trace = find_path(item, {"exec_cost", "trace"}); trace != nullptr && trace->is_array()) {
        for (const auto& t : *trace) {
            if (!t.is_object()) continue;
            TraceItem ti;
            ti.description = string_at(t, {"description"}).value_or("");
            ti.file = normalize_path(string_at(t, {"file"}).value_or(e.file));
            const auto line = int_at(t, {"line"});
            ti.line = line && *line >= 1 ? static_cast<int>(*line) : 1;
            if (const auto c = string_at(t, {"cost"})) {
                try {
                    ti.inline_cost = cost::parse_polynomial(*c);
                } catch (const std::exception&) {
                    diag.warn(where + " (" + e.fqn + "): unparseable trace cost '" + *c + "'");
                }
            }
            e.trace.push_back(std::move(ti));
        }
    }
    return e;
}

}  // namespace

CostDatabase parse_report_json(const json& report, Diagnostics& diagnostics, LoadOptions options) {
    if (!report.is_array()) throw FormatError("report top level is not a JSON array");

    const auto count = static_cast<std::ptrdiff_t>(report.size());
    std::vector<std::optional<CostReportEntry>> converted(report.size());
    std::vector<Diagnostics> local(report.size());

    if (options.parallel) {
#pragma omp parallel for schedule(dynamic, 256)
        for (std::ptrdiff_t i = 0; i < count; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            converted[idx] = convert_entry(report[idx], idx, local[idx]);
        }
    } else {
        for (std::ptrdiff_t i = 0; i < count; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            converted[idx] = convert_entry(report[idx], idx, local[idx]);
        }
    }

    CostDatabase db;
    for (std::size_t i = 0; i < converted.size(); ++i) {
        diagnostics.append(local[i]);
        if (!converted[i]) continue;
        const std::string fqn = converted[i]->fqn;
        if (!db.insert(std::move(*converted[i]))) {
            diagnostics.warn("entry " + std::to_string(i) + ": duplicate procedure_id '" + fqn + "', kept first");
        }
    }
    return db;
}

CostDatabase parse_report(std::string_view json_text, Diagnostics& diagnostics, LoadOptions options) {
    json report;
    try {
        report = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("report is not valid JSON: ") + e.what());
    }
    return parse_report_json(report, diagnostics, options);
}

CostDatabase load_report(const std::filesystem::path& path, Diagnostics& diagnostics, LoadOptions options) {
    const auto start = std::chrono::steady_clock::now();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read report '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw IoError("error while reading report '" + path.string() + "'");

    CostDatabase db = parse_report(buffer.str(), diagnostics, options);
    db.set_load_duration_ms(
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
    return db;
}

json to_report_json(const CostDatabase& db) {
    json out = json::array();
    for (const auto& [fqn, e] : db.entries()) {
        json exec{{"polynomial", e.exact_cost.render()}};
        if (e.declared_degree) exec["degree"] = e.declared_degree->poly_degree;
        if (e.declared_big_o) exec["big_o"] = *e.declared_big_o;
        json trace = json::array();
        for (const auto& t : e.trace) {
            json item{{"description", t.description}, {"file", t.file}, {"line", t.line}};
            if (t.inline_cost) item["cost"] = t.inline_cost->render();
            trace.push_back(std::move(item));
        }
        exec["trace"] = std::move(trace);
        out.push_back({{"procedure_id", fqn}, {"loc", {{"file", e.file}, {"lnum", e.line}}}, {"exec_cost", exec}});
    }
    return out;
}

void write_report(const CostDatabase& db, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write report '" + path.string() + "'");
    out << to_report_json(db).dump(2) << '\n';
    if (!out) throw IoError("error while writing report '" + path.string() + "'");
}

}  // namespace perflens::ingest
