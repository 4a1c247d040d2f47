#pragma once

// Synthetic inputs and timing loops behind `perflens bench` and perflens_bench.

#include "perflens/report_ingest.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace perflens::bench {

struct Timing {
    std::vector<double> runs_ms;
    double median_ms = 0.0;
};

[[nodiscard]] double median(std::vector<double> values);

/// Report JSON with `entries` procedures spread over files of 25 entries.
[[nodiscard]] std::string synthetic_report(std::size_t entries, std::uint32_t seed = 1);

/// A Java file of roughly `lines` lines and a copy with one loop appended to
/// the last method's body.
[[nodiscard]] std::pair<std::string, std::string> synthetic_source_pair(std::size_t lines);

/// Writes the synthetic report to a temporary file and times load_report.
[[nodiscard]] Timing bench_load(std::size_t entries, int runs = 5, ingest::LoadOptions options = {});

/// Times assess_file over synthetic_source_pair; `significant` receives the
/// number of significant functions found in the last run.
[[nodiscard]] Timing bench_staleness(std::size_t lines, int runs = 5, std::size_t* significant = nullptr);

}  // namespace perflens::bench
