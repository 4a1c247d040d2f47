#include "perflens/bench.hpp"

#include "perflens/change_analyzer.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>

namespace perflens::bench {

namespace fs = std::filesystem;

double median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    return values.size() % 2 == 1 ? values[mid] : (values[mid - 1] + values[mid]) / 2.0;
}

std::string synthetic_report(std::size_t entries, std::uint32_t seed) {
    std::mt19937 rng(seed);
    static const char* shapes[] = {"3",
                                   "2 ⋅ n + 1",
                                   "7 ⋅ items.length × groups[*].length + 4 ⋅ items.length + 3",
                                   "n ^ 2 + 5",
                                   "4 ⋅ m × log(m) + 2",
                                   "unknown",
                                   "1/2 ⋅ size + 9"};
    static const int degrees[] = {0, 1, 2, 2, 1, -1, 1};
    static const char* big_os[] = {"O(1)", "O(n)", "O(groups[*].length × items.length)", "O(n ^ 2)",
                                   "O(m × log(m))", "Top", "O(size)"};
    std::string out = "[\n";
    for (std::size_t i = 0; i < entries; ++i) {
        const std::size_t shape = rng() % 7;
        const std::size_t file = i / 25;
        const int line = static_cast<int>(10 + (i % 25) * 12);
        const std::string path = "src/main/java/org/synth/pkg" + std::to_string(file % 40) + "/Type" +
                                 std::to_string(file) + ".java";
        out += "  {\"procedure_id\": \"org.synth.pkg" + std::to_string(file % 40) + ".Type" + std::to_string(file) +
               ".method" + std::to_string(i) + "(int,java.lang.String)\", ";
        out += "\"loc\": {\"file\": \"" + path + "\", \"lnum\": " + std::to_string(line) + "}, ";
        out += "\"exec_cost\": {\"polynomial\": \"" + std::string(shapes[shape]) + "\", ";
        if (degrees[shape] >= 0) out += "\"degree\": " + std::to_string(degrees[shape]) + ", ";
        out += "\"big_o\": \"" + std::string(big_os[shape]) + "\", \"trace\": [";
        out += "{\"description\": \"Loop at line " + std::to_string(line + 2) + "\", \"file\": \"" + path +
               "\", \"line\": " + std::to_string(line + 2) + "}, ";
        out += "{\"description\": \"Call to helper\", \"file\": \"" + path + "\", \"line\": " +
               std::to_string(line + 3) + ", \"cost\": \"5\"}]}}";
        out += i + 1 < entries ? ",\n" : "\n";
    }
    return out + "]\n";
}

std::pair<std::string, std::string> synthetic_source_pair(std::size_t lines) {
    std::string head = "package org.synth;\n\nimport java.util.List;\n\npublic class Generated {\n";
    std::size_t count = 5;
    int method = 0;
    std::string body;
    while (count + 12 < lines || method == 0) {
        body += "    // helper number " + std::to_string(method) + "\n";
        body += "    public int method" + std::to_string(method) + "(List<String> items, int n) {\n";
        body += "        int total = 0;\n";
        body += "        for (int i = 0; i < n; i++) {\n";
        body += "            total += items.get(i).length();\n";
        body += "        }\n";
        body += "        if (total > n) {\n";
        body += "            total = Math.max(total, compute(n));\n";
        body += "        }\n";
        body += "        String s = \"for (;;) {}\";\n";
        body += "        return total;\n";
        body += "    }\n";
        count += 12;
        ++method;
    }
    const std::string last_head = "    public int last(List<String> items, int n) {\n        int total = 0;\n";
    const std::string last_tail = "        return total;\n    }\n}\n";
    const std::string loop = "        for (String item : items) {\n            total += item.hashCode();\n        }\n";
    return {head + body + last_head + last_tail, head + body + last_head + loop + last_tail};
}

Timing bench_load(std::size_t entries, int runs, ingest::LoadOptions options) {
    const std::string text = synthetic_report(entries);
    std::mt19937_64 rng(std::random_device{}());
    const fs::path file = fs::temp_directory_path() / ("perflens-bench-" + std::to_string(rng()) + ".json");
    {
        std::ofstream out(file, std::ios::binary);
        out << text;
        if (!out) throw IoError("cannot write benchmark input '" + file.string() + "'");
    }
    Timing t;
    try {
        for (int r = 0; r < runs; ++r) {
            Diagnostics diag;
            const auto start = std::chrono::steady_clock::now();
            const auto db = ingest::load_report(file, diag, options);
            t.runs_ms.push_back(
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
            if (db.size() != entries) throw FormatError("benchmark report lost entries");
        }
    } catch (...) {
        std::error_code ec;
        fs::remove(file, ec);
        throw;
    }
    std::error_code ec;
    fs::remove(file, ec);
    t.median_ms = median(t.runs_ms);
    return t;
}

Timing bench_staleness(std::size_t lines, int runs, std::size_t* significant) {
    const auto [before, after] = synthetic_source_pair(lines);
    Timing t;
    for (int r = 0; r < runs; ++r) {
        const auto start = std::chrono::steady_clock::now();
        const auto report = change::assess_file(before, after, "src/org/synth/Generated.java");
        t.runs_ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
        if (significant != nullptr && report) {
            *significant = static_cast<std::size_t>(std::count_if(report->per_function.begin(), report->per_function.end(),
                                                                  [](const auto& f) { return f.significant; }));
        }
    }
    t.median_ms = median(t.runs_ms);
    return t;
}

}  // namespace perflens::bench
