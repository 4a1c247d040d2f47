#pragma once

// Per-function cost snapshots across analysis runs, persisted as JSON lines
// in `<root>/.perflens/history.jsonl`, plus in-memory staleness flags.

#include "perflens/change_analyzer.hpp"
#include "perflens/cost_model.hpp"
#include "perflens/error.hpp"
#include "perflens/report_ingest.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace perflens::history {

struct RunRecord {
    std::uint64_t run_id = 0;
    std::int64_t timestamp = 0;  // UTC seconds
    std::string source;          // "report-load", "microlang" or "external"
    std::map<std::string, cost::SymbolicCost> costs;

    friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

struct CostHistory {
    std::string fqn;
    std::vector<std::pair<std::uint64_t, cost::SymbolicCost>> steps;  // ascending run_id
};

struct StaleFlag {
    std::string path;
    std::vector<change::SensitiveChange> changes;
};

class HistoryStore {
public:
    /// Memory-only store.
    HistoryStore() = default;

    /// Loads `<root>/.perflens/history.jsonl` if present. A trailing partial
    /// line is ignored; other malformed lines are skipped with a warning.
    /// Throws IoError when an existing file cannot be read.
    static HistoryStore open(const std::filesystem::path& root, Diagnostics& diagnostics);
    static HistoryStore open(const std::filesystem::path& root);

    [[nodiscard]] static std::filesystem::path file_for(const std::filesystem::path& root);

    /// Appends a run and clears stale flags of every file in `files`. The
    /// in-memory state is always updated; if persisting fails the store is
    /// marked degraded and IoError is thrown.
    std::uint64_t record_run(const std::map<std::string, cost::SymbolicCost>& costs,
                             const std::set<std::string>& files, std::string source,
                             std::optional<std::int64_t> timestamp = std::nullopt);
    std::uint64_t record_database(const ingest::CostDatabase& db, std::string source);

    [[nodiscard]] const std::vector<RunRecord>& runs() const noexcept { return runs_; }
    [[nodiscard]] std::uint64_t last_run_id() const noexcept { return last_run_id_; }

    [[nodiscard]] CostHistory history(std::string_view fqn) const;
    /// compare_evolution over the last two runs containing `fqn`.
    [[nodiscard]] std::optional<cost::EvolutionStep> latest_evolution(std::string_view fqn) const;

    /// Flags the significant functions of `report`; others are left alone.
    void mark_stale(const change::StalenessReport& report);
    /// Accepts fqns with or without a "(...)" signature.
    [[nodiscard]] bool is_stale(std::string_view fqn) const;
    [[nodiscard]] const StaleFlag* stale_flag(std::string_view fqn) const;
    [[nodiscard]] const std::map<std::string, StaleFlag, std::less<>>& stale_flags() const noexcept { return stale_; }

    /// 0 keeps everything. Pruning rewrites the file atomically.
    void set_history_limit(std::size_t limit);
    [[nodiscard]] std::size_t history_limit() const noexcept { return limit_; }

    [[nodiscard]] bool degraded() const noexcept { return degraded_; }
    [[nodiscard]] const std::optional<std::filesystem::path>& path() const noexcept { return path_; }

private:
    void prune();
    void persist_append(const RunRecord& run);
    void persist_rewrite();

    std::optional<std::filesystem::path> path_;
    std::vector<RunRecord> runs_;
    std::uint64_t last_run_id_ = 0;
    std::size_t limit_ = 0;
    bool degraded_ = false;
    std::map<std::string, StaleFlag, std::less<>> stale_;
};

[[nodiscard]] nlohmann::json run_to_json(const RunRecord& run);
/// Throws FormatError on schema violations.
[[nodiscard]] RunRecord run_from_json(const nlohmann::json& j);

}  // namespace perflens::history
