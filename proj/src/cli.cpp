#include "perflens/cli.hpp"

#include "perflens/annotate.hpp"
#include "perflens/bench.hpp"
#include "perflens/config.hpp"
#include "perflens/history_store.hpp"
#include "perflens/microlang.hpp"
#include "perflens/report_ingest.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

namespace perflens::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string plural(std::size_t n, const char* word) {
    return std::to_string(n) + " " + word + (n == 1 ? "" : "s");
}

std::string fixed(double v, int digits) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

void print_diagnostics(const Diagnostics& diag, std::ostream& err) {
    for (const auto& d : diag.items()) {
        const char* level = d.level == DiagnosticLevel::Error ? "error" : d.level == DiagnosticLevel::Warning ? "warning" : "info";
        err << level << ": " << d.message << '\n';
    }
}

// Display width in code points, so "×" counts once.
std::size_t width(const std::string& s) {
    return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

std::string severity_tag(cost::Severity s) { return "[" + std::string(cost::severity_color(s)) + "]"; }

int cmd_load(const std::string& report, const std::string& root, std::ostream& out, std::ostream& err) {
    Diagnostics diag;
    const auto db = ingest::load_report(report, diag);
    print_diagnostics(diag, err);
    out << plural(db.size(), "procedure") << ", " << plural(db.file_count(), "file") << ", "
        << fixed(db.load_duration_ms(), 2) << " ms\n";
    if (!root.empty()) {
        Diagnostics cfg_diag;
        const Config config = load_config(root, cfg_diag);
        print_diagnostics(cfg_diag, err);
        auto store = history::HistoryStore::open(root, cfg_diag);
        store.set_history_limit(config.history_limit);
        out << "recorded run " << store.record_database(db, "report-load") << '\n';
    }
    return 0;
}

int cmd_annotate(const std::string& dir, const std::string& report, const std::string& format,
                 const std::string& root_opt, bool serial, std::ostream& out, std::ostream& err) {
    Diagnostics diag;
    const auto db = ingest::load_report(report, diag);
    const fs::path root = root_opt.empty() ? fs::path(dir) : fs::path(root_opt);
    std::optional<history::HistoryStore> store;
    std::error_code ec;
    if (fs::exists(history::HistoryStore::file_for(root), ec)) store = history::HistoryStore::open(root, diag);
    const auto items = annotate_tree(dir, db, store ? &*store : nullptr, diag, !serial);
    print_diagnostics(diag, err);

    if (format == "json") {
        json arr = json::array();
        for (const auto& item : items) arr.push_back(lens_to_json(item));
        out << arr.dump(2) << '\n';
        return 0;
    }
    for (const auto& item : items) {
        out << item.file << ':' << item.range.start_line << ' ' << item.fqn << ' ' << item.big_o_text << ' '
            << severity_tag(item.severity);
        if (item.evolution) {
            out << " [" << cost::big_o_text(item.evolution->old_cost) << " -> "
                << cost::big_o_text(item.evolution->new_cost) << ']';
        }
        if (item.stale) out << " (stale)";
        out << '\n';
    }
    return 0;
}

int cmd_diff(const std::string& old_path, const std::string& new_path, const std::string& format, std::ostream& out,
             std::ostream& err) {
    Diagnostics diag;
    const auto old_db = ingest::load_report(old_path, diag);
    const auto new_db = ingest::load_report(new_path, diag);
    print_diagnostics(diag, err);

    std::set<std::string> fqns;
    for (const auto& [fqn, e] : old_db.entries()) fqns.insert(fqn);
    for (const auto& [fqn, e] : new_db.entries()) fqns.insert(fqn);

    struct Row {
        std::string fqn, old_text, new_text, verdict;
    };
    std::vector<Row> rows;
    bool regressed = false;
    for (const auto& fqn : fqns) {
        const auto* a = old_db.lookup(fqn);
        const auto* b = new_db.lookup(fqn);
        Row row{fqn, a ? cost::big_o_text(a->exact_cost) : "-", b ? cost::big_o_text(b->exact_cost) : "-", ""};
        if (a && b) {
            const auto v = cost::compare_evolution(a->exact_cost, b->exact_cost).verdict;
            row.verdict = cost::verdict_name(v);
            regressed = regressed || v == cost::Verdict::Regressed;
        } else {
            row.verdict = a ? "Removed" : "Added";
        }
        rows.push_back(std::move(row));
    }

    if (format == "json") {
        json arr = json::array();
        for (const auto& r : rows) arr.push_back({{"fqn", r.fqn}, {"old", r.old_text}, {"new", r.new_text}, {"verdict", r.verdict}});
        out << arr.dump(2) << '\n';
    } else {
        std::size_t w_fqn = 3, w_old = 3, w_new = 3;
        for (const auto& r : rows) {
            w_fqn = std::max(w_fqn, width(r.fqn));
            w_old = std::max(w_old, width(r.old_text));
            w_new = std::max(w_new, width(r.new_text));
        }
        auto cell = [](const std::string& s, std::size_t w) { return s + std::string(w - std::min(w, width(s)) + 2, ' '); };
        out << cell("fqn", w_fqn) << cell("old", w_old) << cell("new", w_new) << "verdict\n";
        for (const auto& r : rows) {
            out << cell(r.fqn, w_fqn) << cell(r.old_text, w_old) << cell(r.new_text, w_new) << r.verdict << '\n';
        }
    }
    return regressed ? 2 : 0;
}

int cmd_analyze(const std::string& dir, bool risky_flag, const std::string& format, bool record, std::ostream& out,
                std::ostream& err) {
    Diagnostics diag;
    const Config config = load_config(dir, diag);
    print_diagnostics(diag, err);
    const auto program = mini::load_workspace(dir);
    mini::AnalyzeOptions opts;
    opts.risky_constant = risky_flag || config.risky_constant;
    const auto result = mini::analyze_costs(program, opts);
    const auto db = mini::to_cost_database(program, result);

    if (format == "json") {
        out << ingest::to_report_json(db).dump(2) << '\n';
    } else {
        for (const auto& [fqn, e] : db.entries()) {
            out << fqn << "  " << e.exact_cost.render() << "  " << cost::big_o_text(e.exact_cost) << ' '
                << severity_tag(cost::severity(e.exact_cost)) << '\n';
        }
    }
    if (record) {
        auto store = history::HistoryStore::open(dir);
        store.set_history_limit(config.history_limit);
        const auto run_id = store.record_database(db, "microlang");
        err << "recorded run " << run_id << '\n';
    }
    return 0;
}

int cmd_bench_load(std::size_t entries, int runs, std::ostream& out) {
    const auto t = bench::bench_load(entries, runs);
    out << "bench load: entries=" << entries << " runs=" << runs;
    for (const double ms : t.runs_ms) out << ' ' << fixed(ms, 2);
    out << "\nmedian_ms=" << fixed(t.median_ms, 3) << '\n';
    return 0;
}

int cmd_bench_staleness(std::size_t lines, int runs, std::ostream& out) {
    std::size_t significant = 0;
    const auto t = bench::bench_staleness(lines, runs, &significant);
    out << "bench staleness: lines=" << lines << " runs=" << runs << " significant=" << significant;
    for (const double ms : t.runs_ms) out << ' ' << fixed(ms, 2);
    out << "\nmedian_ms=" << fixed(t.median_ms, 3) << '\n';
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"perflens: static performance feedback from cost reports", "perflens"};
    app.require_subcommand(1);

    std::string report, root, dir, format = "text", old_path, new_path;
    bool risky = false, record = false, serial = false;
    std::size_t entries = 10000, lines = 5000;
    int runs = 5;

    auto* load = app.add_subcommand("load", "Load a cost report and print a summary");
    load->add_option("report", report, "Report JSON file")->required();
    load->add_option("--root", root, "Project root; records the run in its history");

    auto* annotate = app.add_subcommand("annotate", "List matched functions with Big-O and severity");
    annotate->add_option("src-dir", dir, "Source tree")->required();
    annotate->add_option("--report", report, "Report JSON file")->required();
    annotate->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));
    annotate->add_option("--root", root, "Project root holding .perflens/history.jsonl (default: src-dir)");
    annotate->add_flag("--serial", serial, "Index files on one thread");

    auto* diff = app.add_subcommand("diff", "Compare two reports; exit 2 on any regression");
    diff->add_option("old-report", old_path)->required();
    diff->add_option("new-report", new_path)->required();
    diff->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));

    auto* analyze = app.add_subcommand("analyze", "Analyze the MiniLang files of a directory");
    analyze->add_option("dir", dir, "Workspace directory")->required();
    analyze->add_flag("--risky-constant", risky, "Treat while loops as running once");
    analyze->add_option("--format", format, "text or json (report schema)")->check(CLI::IsMember({"text", "json"}));
    analyze->add_flag("--record", record, "Record the run in <dir>/.perflens/history.jsonl");

    auto* bench = app.add_subcommand("bench", "Timing harness (median of runs)");
    bench->require_subcommand(1);
    auto* bench_load = bench->add_subcommand("load", "Time report loading");
    bench_load->add_option("--entries", entries, "Synthetic report size")->check(CLI::NonNegativeNumber);
    bench_load->add_option("--runs", runs, "Iterations")->check(CLI::PositiveNumber);
    auto* bench_stale = bench->add_subcommand("staleness", "Time change assessment");
    bench_stale->add_option("--lines", lines, "Synthetic file size")->check(CLI::NonNegativeNumber);
    bench_stale->add_option("--runs", runs, "Iterations")->check(CLI::PositiveNumber);

    std::vector<std::string> argv_storage{"perflens"};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_storage) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*load) return cmd_load(report, root, out, err);
        if (*annotate) return cmd_annotate(dir, report, format, root, serial, out, err);
        if (*diff) return cmd_diff(old_path, new_path, format, out, err);
        if (*analyze) return cmd_analyze(dir, risky, format, record, out, err);
        if (*bench_load) return cmd_bench_load(entries, runs, out);
        if (*bench_stale) return cmd_bench_staleness(lines, runs, out);
    } catch (const Error& e) {
        err << "error: " << e.kind() << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace perflens::cli
