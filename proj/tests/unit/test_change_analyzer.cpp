#include "perflens/change_analyzer.hpp"

#include "../support/decorate.hpp"

#include "doctest.h"

#include <chrono>
#include <random>
#include <string>

using namespace perflens;
using namespace perflens::change;
using perflens::testing::decorate;

namespace {

// Builds random statement lists and tracks the features they must have.
struct BodyGen {
    std::mt19937& rng;
    BodyFeatures truth;
    int budget = 12;

    int pick(int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); }

    std::string call(int depth) {
        static const char* names[] = {"foo", "bar", "compute", "list.size", "helper"};
        std::string name = names[pick(5)];
        const auto dot = name.rfind('.');
        const std::string callee = dot == std::string::npos ? name : name.substr(dot + 1);
        ++truth.call_count;
        if (depth > 0) ++truth.calls_in_loops;
        ++truth.callee_names[callee];
        return name + "(" + (pick(3) == 0 ? "1, x" : "") + ")";
    }

    std::string loop_header(int depth) {
        switch (pick(3)) {
            case 0: return "for (int i = 0; i < n; i++)";
            case 1: return "for (String s : items)";
            default: return pick(2) ? "while (k < " + call(depth) + ")" : "while (k-- > 0)";
        }
    }

    std::string statements(int depth, int count) {
        std::string out;
        for (int k = 0; k < count; ++k) out += statement(depth);
        return out;
    }

    std::string statement(int depth) {
        --budget;
        const int choice = budget <= 0 ? pick(2) : pick(8);
        switch (choice) {
            case 0: return "x = " + call(depth) + ";\n";
            case 1: return "int y = a + b;\n";
            case 2:
            case 3: {
                ++truth.loop_count;
                truth.max_loop_nesting = std::max(truth.max_loop_nesting, depth + 1);
                if (pick(4) == 0) {
                    std::string body = "{\n" + statements(depth + 1, 1 + pick(2)) + "}";
                    std::string cond = pick(2) ? call(depth + 1) : "ok";
                    return "do " + body + " while (" + cond + ");\n";
                }
                const std::string header = loop_header(depth + 1);
                if (pick(3) == 0) return header + "\n    " + statement(depth + 1);
                return header + " {\n" + statements(depth + 1, 1 + pick(3)) + "}\n";
            }
            case 4: {
                std::string s = "if (" + (pick(2) ? call(depth) : std::string("a > b")) + ") {\n" +
                                statements(depth, 1 + pick(2)) + "}";
                if (pick(2)) s += " else " + statement(depth);
                return s + "\n";
            }
            case 5: return "try {\n" + statements(depth, 1) + "} catch (Exception e) {\n" + statements(depth, 1) + "}\n";
            case 6: return "return " + call(depth) + ";\n";
            default: return "Runnable r = () -> { " + statements(depth, 1) + "};\n";
        }
    }
};

std::string wrap(const std::string& body, const char* name = "f") {
    return std::string("class C {\n  void ") + name + "() {\n" + body + "  }\n}\n";
}

}  // namespace

TEST_CASE("extract_features basics") {
    CHECK(extract_features("{}") == BodyFeatures{});
    const auto one = extract_features("{ for (int i = 0; i < n; i++) { work(i); } }");
    CHECK(one.loop_count == 1);
    CHECK(one.max_loop_nesting == 1);
    CHECK(one.call_count == 1);
    CHECK(one.calls_in_loops == 1);
    const auto nested = extract_features("{ for (A a : as) { for (B b : bs) { check(a, b); } } }");
    CHECK(nested.max_loop_nesting == 2);
    CHECK(nested.loop_count == 2);
    CHECK(nested.calls_in_loops == 1);
}

TEST_CASE("control keywords are not calls, constructors are") {
    const auto f = extract_features(
        "{ if (a) { return (b); } switch (c) { case 1: break; } synchronized (l) { } "
        "List<String> x = new ArrayList<>(); Foo y = new Foo(); try { } catch (E e) { } }");
    CHECK(f.call_count == 2);
    CHECK(f.callee_names.at("ArrayList") == 1);
    CHECK(f.callee_names.at("Foo") == 1);
    CHECK(f.loop_count == 0);
}

TEST_CASE("loops hidden in comments and strings are ignored") {
    const auto f = extract_features("{ // for (;;) {}\n /* while (x) y(); */ String s = \"for (;;) g();\"; }");
    CHECK(f == BodyFeatures{});
}

TEST_CASE("braceless and do-while loops") {
    const auto f = extract_features("{ for (;;) while (x) step(); do { tick(); } while (more()); after(); }");
    CHECK(f.loop_count == 3);
    CHECK(f.max_loop_nesting == 2);
    CHECK(f.call_count == 4);
    CHECK(f.calls_in_loops == 3);
}

TEST_CASE("diff_features weight table") {
    const BodyFeatures empty;
    BodyFeatures loop;
    loop.loop_count = 1;
    loop.max_loop_nesting = 1;
    auto d = diff_features(empty, loop);
    REQUIRE(d.changes.size() == 1);
    CHECK(d.changes[0].kind == ChangeKind::LoopAdded);
    CHECK(d.score == 3);
    CHECK(is_significant(d));

    CHECK(diff_features(loop, loop).changes.empty());
    CHECK(diff_features(loop, loop).score == 0);

    BodyFeatures two;
    two.call_count = 2;
    two.callee_names = {{"a", 1}, {"b", 1}};
    BodyFeatures three = two;
    three.call_count = 3;
    three.callee_names["c"] = 1;
    d = diff_features(two, three);
    REQUIRE(d.changes.size() == 1);
    CHECK(d.changes[0].kind == ChangeKind::CallAdded);
    CHECK(d.score == 1);
    CHECK_FALSE(is_significant(d));

    BodyFeatures moved = two;
    moved.calls_in_loops = 1;
    moved.loop_count = 1;
    moved.max_loop_nesting = 1;
    BodyFeatures loop_only = two;
    loop_only.loop_count = 1;
    loop_only.max_loop_nesting = 1;
    d = diff_features(loop_only, moved);
    REQUIRE(d.changes.size() == 1);
    CHECK(d.changes[0].kind == ChangeKind::CallMovedIntoLoop);
    CHECK(d.score == 2);
    CHECK(is_significant(d));

    BodyFeatures deeper = loop;
    deeper.loop_count = 1;
    deeper.max_loop_nesting = 1;
    BodyFeatures nested;
    nested.loop_count = 2;
    nested.max_loop_nesting = 2;
    BodyFeatures flat2;
    flat2.loop_count = 2;
    flat2.max_loop_nesting = 1;
    d = diff_features(flat2, nested);
    REQUIRE(d.changes.size() == 1);
    CHECK(d.changes[0].kind == ChangeKind::NestingChanged);
    CHECK(d.changes[0].weight == 3);
}

TEST_CASE("custom weights and threshold") {
    Weights w;
    w.call = 5;
    w.threshold = 10;
    BodyFeatures a;
    BodyFeatures b;
    b.call_count = 1;
    b.callee_names["x"] = 1;
    const auto d = diff_features(a, b, w);
    CHECK(d.score == 5);
    CHECK_FALSE(is_significant(d, w));
    CHECK(d.changes[0].weight == w.weight_of(ChangeKind::CallAdded));
}

TEST_CASE("generated bodies: features match construction and survive decoration") {
    std::mt19937 rng(20240);
    for (int round = 0; round < 400; ++round) {
        BodyGen gen{rng, {}, 4 + static_cast<int>(rng() % 14)};
        const std::string body = "{\n" + gen.statements(0, 1 + static_cast<int>(rng() % 4)) + "}\n";
        const auto got = extract_features(body);
        CHECK_MESSAGE(got == gen.truth, body);
        CHECK(got.calls_in_loops <= got.call_count);
        CHECK(got.max_loop_nesting <= got.loop_count);
        CHECK(extract_features(decorate(body, rng)) == got);
    }
}

TEST_CASE("assess_file: appended loop flags only that function") {
    const std::string before =
        "package p;\nclass C {\n  void a() { x(); }\n  void b(int n) { y(); }\n  void c() { }\n}\n";
    const std::string after =
        "package p;\nclass C {\n  void a() { x(); }\n  void b(int n) { y();\n    for (int i = 0; i < n; i++) { z(); }\n  }\n"
        "  void c() { }\n}\n";
    const auto report = assess_file(before, after, "p/C.java");
    REQUIRE(report);
    REQUIRE(report->per_function.size() == 3);
    for (const auto& f : report->per_function) {
        if (f.fqn_guess == "p.C.b") {
            CHECK(f.significant);
            CHECK(f.score == 3 + 1);
            CHECK(f.span.start_line == 4);
        } else {
            CHECK(f.score == 0);
            CHECK_FALSE(f.significant);
        }
    }
    CHECK(report->elapsed_ms >= 0.0);
    CHECK(report->any_significant());
}

TEST_CASE("assess_file: reflexive, symmetric, formatting-invariant") {
    std::mt19937 rng(99);
    for (int round = 0; round < 100; ++round) {
        BodyGen g1{rng, {}, 8};
        BodyGen g2{rng, {}, 8};
        const std::string b1 = g1.statements(0, 2);
        const std::string b2 = g2.statements(0, 2);
        const std::string v1 = wrap(b1) + "class D {\n  void g() {\n" + b2 + "  }\n}\n";
        BodyGen g3{rng, {}, 8};
        const std::string v2 = wrap(b1 + g3.statements(0, 1)) + "class D {\n  void g() {\n" + b2 + "  }\n}\n";

        const auto same = assess_file(v1, v1, "C.java");
        REQUIRE(same);
        for (const auto& f : same->per_function) CHECK(f.score == 0);

        const auto reformatted = assess_file(v1, decorate(v1, rng), "C.java");
        REQUIRE(reformatted);
        CHECK_FALSE(reformatted->any_significant());
        for (const auto& f : reformatted->per_function) CHECK(f.score == 0);

        const auto fwd = assess_file(v1, v2, "C.java");
        const auto back = assess_file(v2, v1, "C.java");
        REQUIRE(fwd);
        REQUIRE(back);
        REQUIRE(fwd->per_function.size() == back->per_function.size());
        for (std::size_t i = 0; i < fwd->per_function.size(); ++i) {
            CHECK(fwd->per_function[i].fqn_guess == back->per_function[i].fqn_guess);
            CHECK(fwd->per_function[i].score == back->per_function[i].score);
        }
    }
}

TEST_CASE("assess_file: added and removed functions, overload pairing") {
    const std::string before = "class C {\n  void f(int a) { for (;;) {} }\n  void f() { }\n  void gone() { g(); }\n}\n";
    const std::string after = "class C {\n  void f(int a) { for (;;) {} }\n  void f() { }\n  void fresh() { while (p()) {} }\n}\n";
    const auto r = assess_file(before, after, "C.java");
    REQUIRE(r);
    REQUIRE(r->per_function.size() == 4);
    CHECK(r->per_function[0].score == 0);
    CHECK(r->per_function[1].score == 0);
    CHECK(r->per_function[2].fqn_guess == "C.fresh");
    CHECK(r->per_function[2].significant);
    CHECK(r->per_function[2].score == 3 + 1);
    CHECK(r->per_function[3].fqn_guess == "C.gone");
    REQUIRE(r->per_function[3].changes.size() == 1);
    CHECK(r->per_function[3].changes[0].kind == ChangeKind::CallRemoved);
}

TEST_CASE("assess_file: edits outside bodies and unscannable input") {
    const std::string before = "class C {\n  int x = 1;\n  void f() { for (;;) { g(); } }\n}\n";
    const std::string after = "class C {\n  int x = 2; int y = h();\n\n  void f() { for (;;) { g(); } }\n}\n";
    const auto r = assess_file(before, after, "C.java");
    REQUIRE(r);
    CHECK_FALSE(r->any_significant());

    const auto broken = assess_file(before, "class C { void f() { ", "C.java");
    REQUIRE(broken);
    CHECK(broken->per_function.empty());
}

TEST_CASE("assess_file: cancellation") {
    const std::string src = "class C { void f() { } }";
    CHECK_FALSE(assess_file(src, src, "C.java", {}, [] { return true; }).has_value());
    int calls = 0;
    CHECK(assess_file(src, src, "C.java", {}, [&] { return ++calls > 100; }).has_value());
}

TEST_CASE("assess_file: mini files") {
    const auto r = assess_file("fn f(n) {\n  call g();\n}\nfn g() { }\n",
                               "fn f(n) {\n  for i in 0..n {\n    call g();\n    while more {\n      tick;\n    }\n  }\n}\n"
                               "fn g() { }\n",
                               "w/Prog.mini");
    REQUIRE(r);
    REQUIRE(r->per_function.size() == 2);
    CHECK(r->per_function[0].fqn_guess == "Prog.f");
    CHECK(r->per_function[0].score == 3 + 3 + 2);
    CHECK(r->per_function[1].score == 0);
    const auto f = extract_features("{ for i in 0..n { for j in 0..m { call g(i); } } while x { tick; } }");
    CHECK(f.loop_count == 3);
    CHECK(f.max_loop_nesting == 2);
    CHECK(f.calls_in_loops == 1);
}
