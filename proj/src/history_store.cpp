#include "perflens/history_store.hpp"

#include "perflens/paths.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

namespace perflens::history {

namespace fs = std::filesystem;
using nlohmann::json;

json run_to_json(const RunRecord& run) {
    json costs = json::object();
    for (const auto& [fqn, c] : run.costs) costs[fqn] = c.render();
    return {{"run_id", run.run_id}, {"timestamp", run.timestamp}, {"source", run.source}, {"costs", costs}};
}

RunRecord run_from_json(const json& j) {
    if (!j.is_object()) throw FormatError("history record is not an object");
    RunRecord run;
    try {
        run.run_id = j.at("run_id").get<std::uint64_t>();
        run.timestamp = j.at("timestamp").get<std::int64_t>();
        run.source = j.at("source").get<std::string>();
        for (const auto& [fqn, text] : j.at("costs").items()) {
            run.costs.emplace(fqn, cost::parse_polynomial(text.get<std::string>()));
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("bad history record: ") + e.what());
    } catch (const ParseError& e) {
        throw FormatError(std::string("bad cost in history record: ") + e.what());
    }
    return run;
}

fs::path HistoryStore::file_for(const fs::path& root) { return root / ".perflens" / "history.jsonl"; }

HistoryStore HistoryStore::open(const fs::path& root) {
    Diagnostics ignored;
    return open(root, ignored);
}

HistoryStore HistoryStore::open(const fs::path& root, Diagnostics& diagnostics) {
    HistoryStore store;
    store.path_ = file_for(root);
    std::error_code ec;
    if (!fs::exists(*store.path_, ec)) return store;

    std::ifstream in(*store.path_, std::ios::binary);
    if (!in) throw IoError("cannot read history '" + store.path_->string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    std::size_t start = 0;
    int line_no = 0;
    while (start < text.size()) {
        const auto nl = text.find('\n', start);
        if (nl == std::string::npos) break;  // partial trailing line from an interrupted append
        const std::string line = text.substr(start, nl - start);
        start = nl + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            RunRecord run = run_from_json(json::parse(line));
            if (run.run_id <= store.last_run_id_) {
                diagnostics.warn("history line " + std::to_string(line_no) + ": run_id not increasing, skipped");
                continue;
            }
            store.last_run_id_ = run.run_id;
            store.runs_.push_back(std::move(run));
        } catch (const std::exception& e) {
            diagnostics.warn("history line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return store;
}

std::uint64_t HistoryStore::record_run(const std::map<std::string, cost::SymbolicCost>& costs,
                                       const std::set<std::string>& files, std::string source,
                                       std::optional<std::int64_t> timestamp) {
    RunRecord run;
    run.run_id = ++last_run_id_;
    run.timestamp = timestamp.value_or(
        std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count());
    run.source = std::move(source);
    run.costs = costs;
    runs_.push_back(run);

    for (auto it = stale_.begin(); it != stale_.end();) {
        bool covered = false;
        for (const auto& f : files) {
            if (paths_match(f, it->second.path)) {
                covered = true;
                break;
            }
        }
        it = covered ? stale_.erase(it) : std::next(it);
    }

    const bool pruning = limit_ > 0 && runs_.size() > limit_;
    if (pruning) runs_.erase(runs_.begin(), runs_.end() - static_cast<std::ptrdiff_t>(limit_));
    if (path_) {
        if (pruning) persist_rewrite();
        else persist_append(run);
    }
    return run.run_id;
}

std::uint64_t HistoryStore::record_database(const ingest::CostDatabase& db, std::string source) {
    std::map<std::string, cost::SymbolicCost> costs;
    std::set<std::string> files;
    for (const auto& [fqn, e] : db.entries()) {
        costs.emplace(fqn, e.exact_cost);
        files.insert(e.file);
    }
    return record_run(costs, files, std::move(source));
}

void HistoryStore::persist_append(const RunRecord& run) {
    std::error_code ec;
    fs::create_directories(path_->parent_path(), ec);
    const std::string line = run_to_json(run).dump() + "\n";
    std::ofstream out(*path_, std::ios::binary | std::ios::app);
    if (out) {
        out.write(line.data(), static_cast<std::streamsize>(line.size()));
        out.flush();
    }
    if (!out) {
        degraded_ = true;
        throw IoError("cannot append to history '" + path_->string() + "'");
    }
}

void HistoryStore::persist_rewrite() {
    std::error_code ec;
    fs::create_directories(path_->parent_path(), ec);
    fs::path tmp = *path_;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        for (const auto& r : runs_) out << run_to_json(r).dump() << '\n';
        out.flush();
        if (!out) {
            degraded_ = true;
            throw IoError("cannot write history '" + tmp.string() + "'");
        }
    }
    fs::rename(tmp, *path_, ec);
    if (ec) {
        degraded_ = true;
        throw IoError("cannot replace history '" + path_->string() + "': " + ec.message());
    }
}

void HistoryStore::set_history_limit(std::size_t limit) {
    limit_ = limit;
    if (limit_ == 0 || runs_.size() <= limit_) return;
    runs_.erase(runs_.begin(), runs_.end() - static_cast<std::ptrdiff_t>(limit_));
    if (path_) persist_rewrite();
}

CostHistory HistoryStore::history(std::string_view fqn) const {
    CostHistory h;
    h.fqn = std::string(fqn);
    for (const auto& run : runs_) {
        const auto it = run.costs.find(h.fqn);
        if (it != run.costs.end()) h.steps.emplace_back(run.run_id, it->second);
    }
    return h;
}

std::optional<cost::EvolutionStep> HistoryStore::latest_evolution(std::string_view fqn) const {
    const auto h = history(fqn);
    if (h.steps.size() < 2) return std::nullopt;
    return cost::compare_evolution(h.steps[h.steps.size() - 2].second, h.steps.back().second);
}

void HistoryStore::mark_stale(const change::StalenessReport& report) {
    for (const auto& f : report.per_function) {
        if (!f.significant) continue;
        stale_[f.fqn_guess] = StaleFlag{report.path, f.changes};
    }
}

const StaleFlag* HistoryStore::stale_flag(std::string_view fqn) const {
    const auto it = stale_.find(ingest::base_fqn(fqn));
    return it == stale_.end() ? nullptr : &it->second;
}

bool HistoryStore::is_stale(std::string_view fqn) const { return stale_flag(fqn) != nullptr; }

}  // namespace perflens::history
