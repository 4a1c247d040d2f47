// Serial reference vs OpenMP paths: report loading and tree indexing.

#include "perflens/annotate.hpp"
#include "perflens/bench.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>

#include <omp.h>

namespace fs = std::filesystem;
using namespace perflens;

namespace {

bench::Timing time_indexing(const fs::path& dir, const std::vector<std::string>& files, bool parallel, int runs) {
    bench::Timing t;
    for (int r = 0; r < runs; ++r) {
        Diagnostics diag;
        const auto start = std::chrono::steady_clock::now();
        const auto idx = index_files(dir, files, diag, parallel);
        t.runs_ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
        if (idx.size() != files.size()) std::abort();
    }
    t.median_ms = bench::median(t.runs_ms);
    return t;
}

void row(const char* what, const bench::Timing& serial, const bench::Timing& parallel) {
    std::cout << std::left << std::setw(22) << what << std::right << std::fixed << std::setprecision(2)
              << std::setw(12) << serial.median_ms << std::setw(12) << parallel.median_ms << std::setw(9)
              << (parallel.median_ms > 0 ? serial.median_ms / parallel.median_ms : 0.0) << "x\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"perflens_bench: serial vs parallel kernels"};
    std::size_t entries = 50000;
    std::size_t files = 400;
    std::size_t lines = 600;
    int runs = 5;
    app.add_option("--entries", entries, "Report entries");
    app.add_option("--files", files, "Source files for indexing");
    app.add_option("--lines", lines, "Lines per source file");
    app.add_option("--runs", runs, "Iterations (median reported)")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    std::cout << "threads: " << omp_get_max_threads() << "\n";
    std::cout << std::left << std::setw(22) << "kernel" << std::right << std::setw(12) << "serial ms" << std::setw(12)
              << "parallel ms" << std::setw(10) << "speedup" << "\n";

    row(("load " + std::to_string(entries)).c_str(), bench::bench_load(entries, runs, {.parallel = false}),
        bench::bench_load(entries, runs, {.parallel = true}));

    std::mt19937_64 rng(std::random_device{}());
    const fs::path dir = fs::temp_directory_path() / ("perflens-bench-tree-" + std::to_string(rng()));
    std::vector<std::string> names;
    const auto [source, unused] = bench::synthetic_source_pair(lines);
    for (std::size_t i = 0; i < files; ++i) {
        const std::string rel = "pkg" + std::to_string(i % 20) + "/Generated" + std::to_string(i) + ".java";
        fs::create_directories((dir / rel).parent_path());
        std::ofstream(dir / rel) << source;
        names.push_back(rel);
    }
    row(("index " + std::to_string(files) + " files").c_str(), time_indexing(dir, names, false, runs),
        time_indexing(dir, names, true, runs));
    std::error_code ec;
    fs::remove_all(dir, ec);
    return 0;
}
