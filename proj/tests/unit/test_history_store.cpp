#include "perflens/history_store.hpp"

#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace perflens;
using namespace perflens::history;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static std::mt19937_64 rng(std::random_device{}());
        path = fs::temp_directory_path() / ("perflens-history-" + std::to_string(rng()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

std::map<std::string, cost::SymbolicCost> costs(std::initializer_list<std::pair<const char*, const char*>> items) {
    std::map<std::string, cost::SymbolicCost> out;
    for (const auto& [k, v] : items) out.emplace(k, cost::parse_polynomial(v));
    return out;
}

change::StalenessReport report(const std::string& path, const std::string& fqn, bool significant) {
    change::StalenessReport r;
    r.path = path;
    change::FunctionStaleness f;
    f.fqn_guess = fqn;
    f.significant = significant;
    f.score = significant ? 3 : 1;
    f.changes.push_back({significant ? change::ChangeKind::LoopAdded : change::ChangeKind::CallAdded, "x",
                         significant ? 3 : 1});
    r.per_function.push_back(f);
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("run ids increase from 1") {
    HistoryStore store;
    CHECK(store.record_run(costs({{"a.f", "n"}}), {"a.java"}, "report-load") == 1);
    CHECK(store.record_run(costs({{"a.f", "n"}}), {"a.java"}, "report-load") == 2);
    CHECK(store.runs().size() == 2);
    CHECK(store.last_run_id() == 2);
    CHECK_FALSE(store.path().has_value());
}

TEST_CASE("latest_evolution") {
    HistoryStore store;
    store.record_run(costs({{"p.C.f", "7 × n × m + 4 × n + 3"}, {"p.C.g", "n"}}), {}, "external");
    CHECK_FALSE(store.latest_evolution("p.C.f").has_value());
    store.record_run(costs({{"p.C.f", "6 × n + 3"}, {"p.C.g", "n"}}), {}, "external");
    store.record_run(costs({{"p.C.other", "1"}}), {}, "external");
    const auto f = store.latest_evolution("p.C.f");
    REQUIRE(f.has_value());
    CHECK(f->verdict == cost::Verdict::Improved);
    CHECK(f->text() == "O(m × n) → O(n)");
    CHECK(store.latest_evolution("p.C.g")->verdict == cost::Verdict::Same);
    CHECK_FALSE(store.latest_evolution("p.C.none").has_value());
    const auto h = store.history("p.C.f");
    REQUIRE(h.steps.size() == 2);
    CHECK(h.steps[0].first == 1);
    CHECK(h.steps[1].first == 2);
}

TEST_CASE("persistence round trip") {
    TempDir dir;
    {
        auto store = HistoryStore::open(dir.path);
        store.record_run(costs({{"a.f", "n ^ 2 + log(n)"}, {"a.g", "unknown"}, {"a.h", "1/2 × k"}}), {"a.java"},
                         "microlang", 1700000000);
        store.record_run(costs({{"a.f", "n"}}), {"a.java"}, "report-load", 1700000100);
    }
    const auto reopened = HistoryStore::open(dir.path);
    REQUIRE(reopened.runs().size() == 2);
    CHECK(reopened.runs()[0].costs.at("a.g").is_unknown());
    CHECK(reopened.runs()[0].costs.at("a.f") == cost::parse_polynomial("n ^ 2 + log(n)"));
    CHECK(reopened.runs()[0].timestamp == 1700000000);
    CHECK(reopened.runs()[1].source == "report-load");
    CHECK(reopened.last_run_id() == 2);

    auto again = HistoryStore::open(dir.path);
    CHECK(again.record_run({}, {}, "external") == 3);
    const auto text = slurp(HistoryStore::file_for(dir.path));
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}

TEST_CASE("partial trailing line and junk lines") {
    TempDir dir;
    {
        auto store = HistoryStore::open(dir.path);
        store.record_run(costs({{"a.f", "n"}}), {}, "external");
    }
    {
        std::ofstream out(HistoryStore::file_for(dir.path), std::ios::app);
        out << "not json\n";
        out << R"({"run_id": 2, "timestamp": 5, "source": "external", "costs": {"a.f": "n ^ 2"}})";
    }
    Diagnostics diag;
    const auto store = HistoryStore::open(dir.path, diag);
    CHECK(store.runs().size() == 1);
    CHECK(diag.warning_count() == 1);
}

TEST_CASE("history limit prunes oldest runs") {
    TempDir dir;
    auto store = HistoryStore::open(dir.path);
    for (int i = 0; i < 5; ++i) store.record_run(costs({{"a.f", "n"}}), {}, "external");
    store.set_history_limit(3);
    CHECK(store.runs().size() == 3);
    CHECK(store.runs().front().run_id == 3);
    CHECK(store.record_run({}, {}, "external") == 6);
    CHECK(store.runs().size() == 3);
    const auto reopened = HistoryStore::open(dir.path);
    REQUIRE(reopened.runs().size() == 3);
    CHECK(reopened.runs().front().run_id == 4);
    CHECK(reopened.runs().back().run_id == 6);
}

TEST_CASE("stale flags") {
    HistoryStore store;
    store.mark_stale(report("src/p/C.java", "p.C.f", true));
    store.mark_stale(report("src/p/C.java", "p.C.g", false));
    CHECK(store.is_stale("p.C.f"));
    CHECK(store.is_stale("p.C.f(int)"));
    CHECK_FALSE(store.is_stale("p.C.g"));
    REQUIRE(store.stale_flag("p.C.f") != nullptr);
    CHECK(store.stale_flag("p.C.f")->changes.size() == 1);
    store.record_run({}, {"other/D.java"}, "external");
    CHECK(store.is_stale("p.C.f"));
    store.record_run({}, {"/abs/root/src/p/C.java"}, "external");
    CHECK_FALSE(store.is_stale("p.C.f"));
}

TEST_CASE("stale flags never survive a covering run (random sequences)") {
    std::mt19937 rng(11);
    const std::vector<std::string> files = {"a/A.java", "b/B.java", "c/C.java"};
    for (int round = 0; round < 200; ++round) {
        HistoryStore store;
        std::map<std::string, std::string> model;  // fqn -> file
        for (int step = 0; step < 20; ++step) {
            const auto& file = files[rng() % files.size()];
            const std::string fqn = "x." + file.substr(0, 1) + std::to_string(rng() % 3);
            if (rng() % 3 == 0) {
                std::set<std::string> covered;
                for (const auto& f : files) {
                    if (rng() % 2) covered.insert(f);
                }
                store.record_run({}, covered, "external");
                for (auto it = model.begin(); it != model.end();) {
                    it = covered.contains(it->second) ? model.erase(it) : std::next(it);
                }
                for (const auto& f : covered) {
                    for (const auto& [flagged, flag] : store.stale_flags()) CHECK(flag.path != f);
                }
            } else {
                const bool significant = rng() % 2;
                store.mark_stale(report(file, fqn, significant));
                if (significant) model[fqn] = file;
            }
            for (const auto& [fqn2, f] : model) CHECK(store.is_stale(fqn2));
            CHECK(store.stale_flags().size() == model.size());
        }
    }
}

TEST_CASE("persistence failure degrades but keeps memory state") {
    TempDir dir;
    const fs::path blocker = dir.path / "root";
    { std::ofstream(blocker) << "a file, not a directory"; }
    auto store = HistoryStore::open(blocker);
    store.mark_stale(report("a/A.java", "x.f", true));
    CHECK_THROWS_AS(store.record_run(costs({{"x.f", "n"}}), {"a/A.java"}, "external"), IoError);
    CHECK(store.degraded());
    CHECK(store.runs().size() == 1);
    CHECK_FALSE(store.is_stale("x.f"));
}

TEST_CASE("record_database covers the database files") {
    ingest::CostDatabase db;
    ingest::CostReportEntry e;
    e.fqn = "p.C.f(int)";
    e.file = "src/p/C.java";
    e.exact_cost = cost::parse_polynomial("n");
    db.insert(e);
    HistoryStore store;
    store.mark_stale(report("src/p/C.java", "p.C.f", true));
    CHECK(store.record_database(db, "report-load") == 1);
    CHECK_FALSE(store.is_stale("p.C.f(int)"));
    CHECK(store.history("p.C.f(int)").steps.size() == 1);
}
