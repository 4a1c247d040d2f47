#pragma once

// Reading Infer-style cost reports into a database keyed by fully-qualified
// procedure name.
//
// Accepted schema: a JSON array of objects with
//   procedure_id           fully-qualified name, optionally with a "(T1,T2)" signature
//   loc.file, loc.lnum     declaration site
//   exec_cost.polynomial   exact cost text (see cost_model grammar)
//   exec_cost.degree       integer polynomial degree (optional)
//   exec_cost.big_o        display string (optional)
//   exec_cost.trace        array of {description, file, line, cost?}
// Unknown extra fields are ignored.

#include "perflens/cost_model.hpp"
#include "perflens/error.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace perflens::ingest {

struct TraceItem {
    std::string description;
    std::string file;
    int line = 1;
    std::optional<cost::SymbolicCost> inline_cost;

    friend bool operator==(const TraceItem&, const TraceItem&) = default;
};

struct CostReportEntry {
    std::string fqn;
    std::string file;  // normalized
    int line = 1;
    cost::SymbolicCost exact_cost;
    std::optional<cost::DegreePair> declared_degree;
    std::optional<std::string> declared_big_o;
    std::vector<TraceItem> trace;

    friend bool operator==(const CostReportEntry&, const CostReportEntry&) = default;
};

/// "p.C.f(int,int)" -> "p.C.f"
[[nodiscard]] std::string_view base_fqn(std::string_view fqn) noexcept;
/// "p.C.f(int,int)" -> "f"
[[nodiscard]] std::string_view simple_name(std::string_view fqn) noexcept;
/// Parameter types from the signature part, or nullopt when the fqn carries
/// no signature. "p.C.f()" gives an empty list.
[[nodiscard]] std::optional<std::vector<std::string>> signature_params(std::string_view fqn);

class CostDatabase {
public:
    /// Returns false (and leaves the database untouched) if the fqn exists.
    bool insert(CostReportEntry entry);

    /// Exact, case-sensitive match.
    [[nodiscard]] const CostReportEntry* lookup(std::string_view fqn) const;
    /// Entries of one file in ascending line order; the path is normalized
    /// before comparison.
    [[nodiscard]] std::vector<const CostReportEntry*> entries_for_file(std::string_view path) const;

    [[nodiscard]] const std::map<std::string, CostReportEntry, std::less<>>& entries() const noexcept {
        return entries_;
    }
    [[nodiscard]] const std::map<std::string, std::vector<std::string>, std::less<>>& by_file() const noexcept {
        return by_file_;
    }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] std::size_t file_count() const noexcept { return by_file_.size(); }

    [[nodiscard]] double load_duration_ms() const noexcept { return load_duration_ms_; }
    void set_load_duration_ms(double ms) noexcept { load_duration_ms_ = ms; }

    /// Content equality, ignoring load_duration.
    friend bool operator==(const CostDatabase& a, const CostDatabase& b) {
        return a.entries_ == b.entries_ && a.by_file_ == b.by_file_;
    }

private:
    std::map<std::string, CostReportEntry, std::less<>> entries_;
    std::map<std::string, std::vector<std::string>, std::less<>> by_file_;
    double load_duration_ms_ = 0.0;
};

struct LoadOptions {
    /// Convert entries with OpenMP; false selects the serial reference path.
    bool parallel = true;
};

/// Throws IoError when the file cannot be read and FormatError when the text
/// is not a JSON array. Per-entry problems become warnings in `diagnostics`.
[[nodiscard]] CostDatabase load_report(const std::filesystem::path& path, Diagnostics& diagnostics,
                                       LoadOptions options = {});
[[nodiscard]] CostDatabase parse_report(std::string_view json_text, Diagnostics& diagnostics,
                                        LoadOptions options = {});
[[nodiscard]] CostDatabase parse_report_json(const nlohmann::json& report, Diagnostics& diagnostics,
                                        LoadOptions options = {});

/// Inverse of parse_report: emits the accepted schema, entries ordered by fqn.
[[nodiscard]] nlohmann::json to_report_json(const CostDatabase& db);
void write_report(const CostDatabase& db, const std::filesystem::path& path);

}  // namespace perflens::ingest
