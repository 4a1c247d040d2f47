#include "perflens/report_ingest.hpp"
#include "perflens/source_matcher.hpp"

#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

using namespace perflens;
using namespace perflens::source;

namespace {

const std::filesystem::path kCase = std::filesystem::path(PERFLENS_FIXTURES) / "case_study" / "java";

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

ingest::CostReportEntry entry(std::string fqn, std::string file, int line, const char* cost = "n + 1") {
    ingest::CostReportEntry e;
    e.fqn = std::move(fqn);
    e.file = std::move(file);
    e.line = line;
    e.exact_cost = cost::parse_polynomial(cost);
    return e;
}

const FunctionDecl* find_decl(const SourceIndex& idx, std::string_view fqn) {
    for (const auto& d : idx.decls) {
        if (d.fqn_guess == fqn) return &d;
    }
    return nullptr;
}

}  // namespace

TEST_CASE("single method with package") {
    const auto idx = index_source("p/C.java", "package p; class C { int f(int n) { return n; } }");
    REQUIRE(idx.decls.size() == 1);
    CHECK(idx.decls[0].fqn_guess == "p.C.f");
    CHECK(idx.decls[0].simple_name == "f");
    CHECK(idx.decls[0].arity == 1);
    CHECK(idx.decls[0].param_types == std::vector<std::string>{"int"});
    CHECK(idx.decls[0].decl_span.start_line == 1);
}

TEST_CASE("empty file and unbalanced braces") {
    Diagnostics diag;
    CHECK(index_source("E.java", "", diag).decls.empty());
    CHECK(diag.empty());
    const auto broken = index_source("B.java", "class B { void f() { ", diag);
    CHECK(broken.decls.empty());
    CHECK_FALSE(diag.empty());
    CHECK(broken.path == "B.java");
}

TEST_CASE("java constructs") {
    const char* src = R"(package a.b;
import java.util.*;

@SuppressWarnings("x")
public final class Outer<T extends Comparable<T>> {
    private final Map<String, List<T>> cache = new HashMap<>();
    private Runnable r = () -> { helper(); };
    static { init(); }

    public Outer(int size) { }

    @Override
    public <U> List<U> map(Function<? super T, U> fn, final String... rest) throws IOException, X {
        // } stray brace in comment
        String s = "}{";
        return null;
    }

    int arr(int a[], char c) { return 0; }

    abstract void nobody(int x);

    interface Inner {
        default void g() { }
    }

    enum Mode {
        A(1) { void z() {} }, B(2);
        Mode(int v) { }
        int weight() { return 1; }
    }

    record Pair(int l, int r) {
        int sum() { return l + r; }
    }
}
)";
    Diagnostics diag;
    const auto idx = index_source("a/b/Outer.java", src, diag);
    CHECK(diag.empty());
    std::set<std::string> names;
    for (const auto& d : idx.decls) names.insert(d.fqn_guess);
    CHECK(names == std::set<std::string>{"a.b.Outer.<clinit>", "a.b.Outer.Outer", "a.b.Outer.map", "a.b.Outer.arr",
                                         "a.b.Outer.Inner.g", "a.b.Outer.Mode.Mode", "a.b.Outer.Mode.weight",
                                         "a.b.Outer.Pair.sum"});
    const auto* map = find_decl(idx, "a.b.Outer.map");
    REQUIRE(map != nullptr);
    CHECK(map->arity == 2);
    CHECK(normalize_type(map->param_types[1]) == "String[]");
    CHECK(map->body_span.start_line == 13);
    CHECK(map->body_span.end_line == 17);
    const auto* arr = find_decl(idx, "a.b.Outer.arr");
    REQUIRE(arr != nullptr);
    CHECK(arr->param_types == std::vector<std::string>{"int[]", "char"});
    for (std::size_t i = 1; i < idx.decls.size(); ++i) CHECK(idx.decls[i - 1].decl_span < idx.decls[i].decl_span);
}

TEST_CASE("normalize_type") {
    CHECK(normalize_type("java.util.List<String>") == "List");
    CHECK(normalize_type("String...") == "String[]");
    CHECK(normalize_type("java.lang.String[][]") == "String[][]");
    CHECK(normalize_type("Map<K, List<V>>") == "Map");
    CHECK(normalize_type("int") == "int");
}

TEST_CASE("mini files") {
    const auto idx = index_source("progs/Demo.mini", "// header\nfn a(n, m) {\n  loop i in 0..n { }\n}\nfn b() { a(3, 4); }\n");
    REQUIRE(idx.decls.size() == 2);
    CHECK(idx.decls[0].fqn_guess == "Demo.a");
    CHECK(idx.decls[0].arity == 2);
    CHECK(idx.decls[0].body_span.end_line == 4);
    CHECK(idx.decls[1].fqn_guess == "Demo.b");
    CHECK(idx.decls[1].arity == 0);
}

TEST_CASE("exact fqn match and overload disambiguation") {
    const auto idx = index_source("src/p/C.java",
                                  "package p;\nclass C {\n  void f(int a) {}\n  void f(String s, int b) {}\n  void g() {}\n}\n");
    ingest::CostDatabase db;
    db.insert(entry("p.C.f(int)", "src/p/C.java", 3));
    db.insert(entry("p.C.f(java.lang.String,int)", "src/p/C.java", 4, "m × n"));
    db.insert(entry("p.C.g()", "elsewhere/C.java", 5, "1"));
    const auto results = match_decls(idx, db);
    REQUIRE(results.size() == 3);
    CHECK(results[0].matched_by == MatchKind::ExactFqn);
    CHECK(results[0].entry->fqn == "p.C.f(int)");
    CHECK(results[1].entry->fqn == "p.C.f(java.lang.String,int)");
    CHECK(results[2].matched_by == MatchKind::ExactFqn);
}

TEST_CASE("fallback by name and arity when the package is missing") {
    const auto idx = index_source("src/p/C.java", "class C {\n  void f(int a) {}\n  void f(int a, int b) {}\n}\n");
    ingest::CostDatabase db;
    db.insert(entry("p.C.f(int)", "src/p/C.java", 2));
    db.insert(entry("p.C.f(int,int)", "src/p/C.java", 3));
    const auto results = match_decls(idx, db);
    REQUIRE(results.size() == 2);
    CHECK(results[0].matched_by == MatchKind::NameArityFile);
    CHECK(results[0].entry->fqn == "p.C.f(int)");
    CHECK(results[1].matched_by == MatchKind::NameArityFile);
    CHECK(results[1].entry->fqn == "p.C.f(int,int)");
}

TEST_CASE("name-only fallback and ambiguity refusal") {
    const auto idx = index_source("C.java", "class C {\n  void f(int a) {}\n  void f(int a, int b) {}\n  void h() {}\n}\n");
    ingest::CostDatabase db;
    db.insert(entry("q.C.f", "C.java", 2));
    db.insert(entry("q.C.h", "C.java", 4));
    const auto results = match_decls(idx, db);
    REQUIRE(results.size() == 3);
    CHECK(results[0].matched_by == MatchKind::Unmatched);
    CHECK(results[1].matched_by == MatchKind::Unmatched);
    CHECK(results[0].entry == nullptr);
    CHECK(results[2].matched_by == MatchKind::NameFile);
    CHECK(results[2].entry->fqn == "q.C.h");
}

TEST_CASE("different file never matches by name") {
    const auto idx = index_source("a/C.java", "class C { void h() {} }");
    ingest::CostDatabase db;
    db.insert(entry("q.C.h", "b/C.java", 1));
    CHECK(match_decls(idx, db)[0].matched_by == MatchKind::Unmatched);
    CHECK(match_kind_name(MatchKind::NameArityFile) == "NameArityFile");
}

TEST_CASE("case study source matches its report") {
    for (const char* variant : {"buggy", "fixed"}) {
        Diagnostics diag;
        const auto db = ingest::load_report(kCase / variant / "report.json", diag);
        const std::string rel = "src/org/elasticsearch/cluster/metadata/IndexNameMatcher.java";
        const auto idx = index_source(rel, read_file(kCase / variant / rel));
        const auto results = match_decls(idx, db);
        REQUIRE(results.size() == 2);
        for (const auto& r : results) {
            CHECK(r.matched_by == MatchKind::ExactFqn);
            REQUIRE(r.entry != nullptr);
            CHECK(r.entry->line == r.decl.decl_span.start_line);
        }
        CHECK(results[1].decl.fqn_guess == "org.elasticsearch.cluster.metadata.IndexNameMatcher.matchesIndices");
        CHECK(results[1].decl.arity == 3);
    }
}

TEST_CASE("matching is injective and deterministic on random databases") {
    std::mt19937 rng(7);
    const char* names[] = {"f", "g", "h"};
    for (int round = 0; round < 200; ++round) {
        std::string src = "package p;\nclass C {\n";
        const int n = 1 + static_cast<int>(rng() % 6);
        for (int i = 0; i < n; ++i) {
            src += "  void " + std::string(names[rng() % 3]) + "(";
            const int arity = static_cast<int>(rng() % 3);
            for (int a = 0; a < arity; ++a) src += (a ? ", int x" : "int x") + std::to_string(a);
            src += ") {}\n";
        }
        src += "}\n";
        const auto idx = index_source("p/C.java", src);
        ingest::CostDatabase db;
        const int m = static_cast<int>(rng() % 8);
        for (int i = 0; i < m; ++i) {
            std::string fqn = (rng() % 2 ? "p.C." : "z.C.") + std::string(names[rng() % 3]);
            const int mode = static_cast<int>(rng() % 3);
            if (mode > 0) {
                fqn += "(";
                const int arity = static_cast<int>(rng() % 3);
                for (int a = 0; a < arity; ++a) fqn += a ? ",int" : "int";
                fqn += ")";
            }
            db.insert(entry(fqn, rng() % 4 ? "p/C.java" : "q/C.java", i + 1));
        }
        const auto first = match_decls(idx, db);
        const auto second = match_decls(idx, db);
        std::set<const ingest::CostReportEntry*> used;
        for (std::size_t i = 0; i < first.size(); ++i) {
            CHECK(first[i].entry == second[i].entry);
            CHECK((first[i].entry == nullptr) == (first[i].matched_by == MatchKind::Unmatched));
            if (first[i].entry == nullptr) continue;
            CHECK(used.insert(first[i].entry).second);
            CHECK(ingest::simple_name(first[i].entry->fqn) == first[i].decl.simple_name);
        }
    }
}
