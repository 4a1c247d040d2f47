#pragma once

// Structural diffing of function bodies across two versions of a file, used
// to flag cost results that an edit has probably invalidated.

#include "perflens/source_matcher.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace perflens::change {

struct BodyFeatures {
    int loop_count = 0;
    int max_loop_nesting = 0;
    int call_count = 0;
    int calls_in_loops = 0;
    std::map<std::string, int> callee_names;  // multiset: name -> occurrences

    friend bool operator==(const BodyFeatures&, const BodyFeatures&) = default;
};

enum class ChangeKind {
    LoopAdded,
    LoopRemoved,
    NestingChanged,
    CallAdded,
    CallRemoved,
    CallMovedIntoLoop,
    CallMovedOutOfLoop,
};

[[nodiscard]] std::string_view change_kind_name(ChangeKind k) noexcept;

struct SensitiveChange {
    ChangeKind kind = ChangeKind::CallAdded;
    std::string detail;
    int weight = 1;

    friend bool operator==(const SensitiveChange&, const SensitiveChange&) = default;
};

struct Weights {
    int loop = 3;
    int nesting = 3;
    int call_moved = 2;
    int call = 1;
    int threshold = 2;

    [[nodiscard]] int weight_of(ChangeKind k) const noexcept;
};

struct FunctionStaleness {
    std::string fqn_guess;
    std::string simple_name;
    source::Span span;  // declaration in the new version (old one if removed)
    int score = 0;
    std::vector<SensitiveChange> changes;
    bool significant = false;
};

struct StalenessReport {
    std::string path;
    std::vector<FunctionStaleness> per_function;
    double elapsed_ms = 0.0;

    [[nodiscard]] bool any_significant() const noexcept;
};

/// `body_text` may contain comments and string literals; they are blanked first.
[[nodiscard]] BodyFeatures extract_features(std::string_view body_text);

struct FeatureDiff {
    std::vector<SensitiveChange> changes;
    int score = 0;
};

[[nodiscard]] FeatureDiff diff_features(const BodyFeatures& before, const BodyFeatures& after,
                                        const Weights& weights = {});

[[nodiscard]] bool is_significant(const FeatureDiff& diff, const Weights& weights = {}) noexcept;

/// Returns nullopt when `cancelled` reports true at one of the checkpoints.
/// If the new version cannot be scanned the report has no functions.
[[nodiscard]] std::optional<StalenessReport> assess_file(std::string_view old_content, std::string_view new_content,
                                                         std::string_view path, const Weights& weights = {},
                                                         const std::function<bool()>& cancelled = {});

}  // namespace perflens::change
