#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <set>

#include <unistd.h>

#include "mutsum/error.hpp"
#include "mutsum/fsutil.hpp"
#include "mutsum/mutation.hpp"
#include "support/fuzz_programs.hpp"
#include "support/paths.hpp"

using namespace mutsum;

namespace {

Program demo(const std::string& name) {
    return make_program(name, fsutil::read_file(testing::demo_corpus_dir() / (name + ".py")), Origin::Synthetic);
}

Program snippet(const std::string& source) { return make_program("snippet", source, Origin::Custom); }

/// Mutant produced by replacing `from` with `to` at the first site whose
/// fragment is `from` and whose mutated source contains `expect`.
std::optional<Mutant> find_mutation(const Program& p, MutationType type, const std::string& op_id,
                                    const std::string& from, const std::string& to, const std::string& expect) {
    for (const MutationSite& s : enumerate_sites(p, type)) {
        if (s.operator_id != op_id || s.original_fragment != from) continue;
        if (std::find(s.replacements.begin(), s.replacements.end(), to) == s.replacements.end()) continue;
        Mutant m = apply(p, s, to);
        if (m.mutated_source.find(expect) != std::string::npos) return m;
    }
    return std::nullopt;
}

bool python_available() { return std::system("python3 -c pass >/dev/null 2>&1") == 0; }

}  // namespace

TEST_CASE("reference mutations are reproduced verbatim") {
    SUBCASE("index flip on heap[0]") {
        const auto m = find_mutation(demo("min_heap"), MutationType::Value, "flip-index", "0", "-1",
                                     "return self.heap[-1]");
        REQUIRE(m);
        CHECK(m->site.line == 50);
    }
    SUBCASE("literal +1 in the length guard") {
        const auto m = find_mutation(demo("merge_sort"), MutationType::Value, "perturb-literal", "1", "2",
                                     "if len(arr) > 2:");
        REQUIRE(m);
        CHECK(m->bucket == LocationBucket::Beginning);
    }
    SUBCASE("flip comparator in find") {
        const auto m = find_mutation(demo("kruskal"), MutationType::Decision, "flip-comparator", "==", "!=",
                                     "if parent[i] != i:");
        REQUIRE(m);
    }
    SUBCASE("drop the return value in find") {
        const auto m = find_mutation(demo("kruskal"), MutationType::Statement, "drop-return-value", "return i",
                                     "return", "        return\n    return find(parent, parent[i])");
        REQUIRE(m);
    }
}

TEST_CASE("decision sites cover comparison, arithmetic and boolean operators") {
    const Program p = snippet("def f(a, b):\n    x = a + b * 2\n    x //= 3\n    return a < b and x >= 1\n");
    std::vector<std::string> ops;
    for (const auto& s : enumerate_sites(p, MutationType::Decision)) ops.push_back(s.original_fragment);
    CHECK(ops == std::vector<std::string>{"+", "*", "//=", "<", "and", ">="});
    const auto sites = enumerate_sites(p, MutationType::Decision);
    CHECK(sites[1].replacements == std::vector<std::string>{"//"});
    CHECK(sites[2].replacements == std::vector<std::string>{"*=", "/="});
}

TEST_CASE("value sites: literals, defaults, indexes, booleans") {
    const Program p = snippet("def f(xs, k=3, on=True):\n    y = xs[0] * 2.5\n    return xs[-1] + k - 7\n");
    const auto sites = enumerate_sites(p, MutationType::Value);
    REQUIRE(sites.size() == 6);
    CHECK(sites[0].operator_id == "perturb-default");
    CHECK(sites[0].replacements == std::vector<std::string>{"4", "2", "6"});
    CHECK(sites[1].operator_id == "flip-boolean");
    CHECK(sites[1].replacements == std::vector<std::string>{"False"});
    CHECK(sites[2].operator_id == "flip-index");
    CHECK(sites[2].replacements == std::vector<std::string>{"-1", "1"});
    CHECK(sites[3].replacements == std::vector<std::string>{"3.5", "1.5", "5.0"});
    CHECK(sites[4].original_fragment == "-1");
    CHECK(sites[4].replacements == std::vector<std::string>{"0", "-2"});
    CHECK(sites[5].replacements == std::vector<std::string>{"8", "6", "14"});
}

TEST_CASE("comments, docstrings and strings are never mutated by default") {
    const Program p = snippet(
        "def f(a):\n"
        "    \"\"\"Return a + 1 when a > 0.\"\"\"\n"
        "    # a - 1 == 2\n"
        "    s = \"x > 1\"\n"
        "    return a\n");
    for (MutationType t : kMutationTypes)
        for (const auto& s : enumerate_sites(p, t)) {
            CHECK(s.line != 2);
            CHECK(s.line != 3);
            if (t != MutationType::Statement) CHECK(s.line != 4);
        }
    CHECK(enumerate_sites(p, MutationType::Decision).empty());
}

TEST_CASE("string literal operator is opt-in") {
    const Program p = snippet("def f():\n    \"\"\"Doc.\"\"\"\n    return \"abc\" + f\"{1}\" + ''\n");
    CHECK(enumerate_sites(p, MutationType::Value).empty());
    const auto sites = enumerate_sites(p, MutationType::Value, EngineOptions{true});
    REQUIRE(sites.size() == 2);
    CHECK(sites[0].operator_id == "perturb-string");
    CHECK(sites[0].replacements == std::vector<std::string>{"ab"});
    CHECK(sites[1].replacements == std::vector<std::string>{"x"});
}

TEST_CASE("statement operators") {
    const Program p = snippet(
        "def f(xs):\n"
        "    total = 0\n"
        "    total = total + len(xs)\n"
        "    xs.append(total)\n"
        "    return total\n"
        "\n"
        "def g():\n"
        "    return 1\n");
    const auto sites = enumerate_sites(p, MutationType::Statement);
    auto count = [&](std::string_view op) {
        return std::count_if(sites.begin(), sites.end(), [&](const auto& s) { return s.operator_id == op; });
    };
    CHECK(count("delete-statement") == 5);
    CHECK(count("drop-return-value") == 2);
    CHECK(count("duplicate-statement") == 2);
    CHECK(count("swap-statements") == 3);

    SUBCASE("sole statement deletion keeps the block parseable") {
        const auto it = std::find_if(sites.begin(), sites.end(), [](const auto& s) {
            return s.operator_id == "delete-statement" && s.line == 8;
        });
        REQUIRE(it != sites.end());
        CHECK(it->replacements == std::vector<std::string>{"    pass\n"});
    }
    SUBCASE("swap exchanges adjacent lines") {
        const auto it = std::find_if(sites.begin(), sites.end(), [](const auto& s) {
            return s.operator_id == "swap-statements" && s.line == 3;
        });
        REQUIRE(it != sites.end());
        const Mutant m = apply(p, *it, it->replacements[0]);
        CHECK(m.mutated_source.find("    xs.append(total)\n    total = total + len(xs)\n") != std::string::npos);
        CHECK(check_mutant(p, m).empty());
    }
    SUBCASE("duplicate inserts a copy right after") {
        const auto it = std::find_if(sites.begin(), sites.end(), [](const auto& s) {
            return s.operator_id == "duplicate-statement" && s.line == 4;
        });
        REQUIRE(it != sites.end());
        const Mutant m = apply(p, *it, it->replacements[0]);
        CHECK(m.mutated_source.find("    xs.append(total)\n    xs.append(total)\n") != std::string::npos);
        CHECK(check_mutant(p, m).empty());
    }
}

TEST_CASE("statement at end of file without trailing newline") {
    const Program p = snippet("x = 1\ny = x + 2\nprint(y)");
    for (const auto& s : enumerate_sites(p, MutationType::Statement))
        for (const auto& r : s.replacements) CHECK(check_mutant(p, apply(p, s, r)).empty());
}

TEST_CASE("empty program bodies have no sites") {
    Program empty;
    empty.id = "empty";
    for (MutationType t : kMutationTypes) CHECK(enumerate_sites(empty, t).empty());
    const Program only_pass = snippet("def f():\n    pass\n");
    for (MutationType t : kMutationTypes) CHECK(enumerate_sites(only_pass, t).empty());
}

TEST_CASE("unparseable program is rejected") {
    Program broken;
    broken.id = "broken";
    broken.source_text = "def f(:\n";
    CHECK_THROWS_AS(enumerate_sites(broken, MutationType::Value), ParseError);
}

TEST_CASE("bucket_of_line over thirds of effective lines") {
    std::string src;
    for (int i = 1; i <= 30; ++i) src += "x" + std::to_string(i) + " = " + std::to_string(i) + "\n";
    const Program p = snippet(src);
    CHECK(bucket_of_line(2, p) == LocationBucket::Beginning);
    CHECK(bucket_of_line(10, p) == LocationBucket::Beginning);
    CHECK(bucket_of_line(11, p) == LocationBucket::Middle);
    CHECK(bucket_of_line(15, p) == LocationBucket::Middle);
    CHECK(bucket_of_line(21, p) == LocationBucket::End);
    CHECK(bucket_of_line(30, p) == LocationBucket::End);
    CHECK_THROWS_AS(bucket_of_line(0, p), MutationError);
    CHECK_THROWS_AS(bucket_of_line(31, p), MutationError);

    SUBCASE("blank and comment lines do not shift boundaries") {
        std::string padded;
        for (int i = 1; i <= 30; ++i) {
            padded += "x" + std::to_string(i) + " = " + std::to_string(i) + "\n";
            padded += (i % 2) ? "\n" : "# c\n";
        }
        const Program q = snippet(padded);
        // line 2k-1 holds statement k
        CHECK(bucket_of_line(19, q) == LocationBucket::Beginning);
        CHECK(bucket_of_line(21, q) == LocationBucket::Middle);
        CHECK(bucket_of_line(20, q) == LocationBucket::Middle);
        CHECK(bucket_of_line(41, q) == LocationBucket::End);
    }
}

TEST_CASE("apply rejects fragments no operator produces") {
    const Program p = snippet("def f(a, b):\n    return a < b\n");
    const auto sites = enumerate_sites(p, MutationType::Decision);
    REQUIRE(sites.size() == 1);
    CHECK_THROWS_AS(apply(p, sites[0], "<="), MutationError);
    CHECK_THROWS_AS(apply(p, sites[0], "=="), MutationError);
    CHECK_NOTHROW(apply(p, sites[0], ">"));
    MutationSite stale = sites[0];
    stale.begin += 1;
    CHECK_THROWS_AS(apply(p, stale, ">"), MutationError);
}

TEST_CASE("flip-comparator is an involution") {
    const Program p = demo("kruskal");
    for (const auto& s : enumerate_sites(p, MutationType::Decision)) {
        if (s.operator_id != "flip-comparator") continue;
        const Mutant m = apply(p, s, s.replacements[0]);
        MutationSite back = s;
        back.original_fragment = s.replacements[0];
        CHECK(splice(m.mutated_source, back, s.original_fragment) == p.source_text);
    }
}

TEST_CASE("plans are deterministic and respect the quota") {
    const Program p = demo("kruskal");
    const MutationPlan a = generate_plan(p, uniform_quota(1), 7);
    const MutationPlan b = generate_plan(p, uniform_quota(1), 7);
    REQUIRE(a.mutants.size() == b.mutants.size());
    for (std::size_t i = 0; i < a.mutants.size(); ++i) CHECK(a.mutants[i] == b.mutants[i]);
    CHECK(a.mutants.size() == 9);
    CHECK(a.shortfalls.empty());

    const MutationPlan c = generate_plan(p, uniform_quota(1), 8);
    bool differs = false;
    for (std::size_t i = 0; i < c.mutants.size() && i < a.mutants.size(); ++i)
        differs = differs || c.mutants[i].mutated_source != a.mutants[i].mutated_source;
    CHECK(differs);

    std::set<std::string> names;
    for (const Mutant& m : a.mutants) {
        CHECK(names.insert(m.name).second);
        CHECK(m.id == "kruskal/" + m.name);
        CHECK(check_mutant(p, m).empty());
    }
    CHECK(names.count("stmt_b_1") == 1);
    CHECK(names.count("desc_e_1") == 1);
}

TEST_CASE("quota of 3 per cell yields 27 distinct mutants per program") {
    for (const std::string name : {"merge_sort", "min_heap", "kruskal"}) {
        const Program p = demo(name);
        const MutationPlan plan = generate_plan(p, uniform_quota(3), 11);
        std::string gaps;
        for (const Shortfall& s : plan.shortfalls)
            gaps += std::string(short_code(s.type)) + "_" + std::string(short_code(s.bucket)) + ":" +
                    std::to_string(s.produced) + " ";
        CHECK_MESSAGE(plan.mutants.size() == 27, name, " ", gaps);
        std::set<std::string> sources;
        for (const Mutant& m : plan.mutants) sources.insert(m.mutated_source);
        CHECK(sources.size() == plan.mutants.size());
    }
    CHECK(quota_total(uniform_quota(3)) * 12 == 324);
}

TEST_CASE("empty cells are reported as shortfalls, not padded") {
    const Program p = snippet(
        "def f(a, b):\n"
        "    if a < b:\n"
        "        return a\n"
        "    return b\n"
        "\n"
        "\n"
        "print(f(1, 2))\n"
        "print('done')\n"
        "print('bye')\n");
    Quota q = uniform_quota(0);
    q[{MutationType::Decision, LocationBucket::End}] = 1;
    const MutationPlan plan = generate_plan(p, q, 1);
    CHECK(plan.mutants.empty());
    REQUIRE(plan.shortfalls.size() == 1);
    CHECK(plan.shortfalls[0].type == MutationType::Decision);
    CHECK(plan.shortfalls[0].bucket == LocationBucket::End);
    CHECK(plan.shortfalls[0].requested == 1);
    CHECK(plan.shortfalls[0].produced == 0);
}

TEST_CASE("quota parsing and serialization") {
    const Quota q = parse_quota("stmt_b=2,val_e=1,desc_middle=4");
    CHECK(quota_total(q) == 7);
    CHECK(q.at({MutationType::Decision, LocationBucket::Middle}) == 4);
    CHECK(quota_from_json(to_json(q)) == q);
    CHECK(quota_total(parse_quota("3")) == 27);
    CHECK_THROWS_AS(parse_quota("stmt=2"), ConfigError);
    CHECK_THROWS_AS(parse_quota("stmt_x=2"), ConfigError);
    CHECK_THROWS_AS(parse_quota("stmt_b=-1"), ConfigError);
}

TEST_CASE("mutant JSON round trip") {
    const Program p = demo("min_heap");
    for (Mutant m : generate_plan(p, uniform_quota(1), 3).mutants) {
        Mutant back = mutant_from_json(to_json(m));
        back.mutated_source = m.mutated_source;
        CHECK(back == m);
    }
}

TEST_CASE("check_mutant flags tampering") {
    const Program p = demo("merge_sort");
    Mutant m = generate_plan(p, uniform_quota(1), 5).mutants.front();
    REQUIRE(check_mutant(p, m).empty());
    Mutant wrong_bucket = m;
    wrong_bucket.bucket = m.bucket == LocationBucket::End ? LocationBucket::Beginning : LocationBucket::End;
    CHECK_FALSE(check_mutant(p, wrong_bucket).empty());
    Mutant two_edits = m;
    two_edits.mutated_source += "x = 1\n";
    CHECK_FALSE(check_mutant(p, two_edits).empty());
    Mutant broken = m;
    broken.mutated_source = "def (:\n";
    CHECK_FALSE(check_mutant(p, broken).empty());
}

TEST_CASE("fuzz programs: every planned mutant satisfies the invariants") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const Program p = testing::fuzz_program(seed);
        const MutationPlan plan = generate_plan(p, uniform_quota(2), seed);
        for (const Mutant& m : plan.mutants) {
            const auto findings = check_mutant(p, m);
            CHECK_MESSAGE(findings.empty(), seed, " ", m.id, " ", (findings.empty() ? "" : findings[0]));
        }
    }
}

TEST_CASE("smoke check") {
    const Program p = demo("kruskal");
    auto m = find_mutation(p, MutationType::Statement, "drop-return-value", "return i", "return", "return\n");
    REQUIRE(m);

    SUBCASE("no runner") {
        CHECK(smoke_check(p, *m, std::nullopt).outcome == SmokeOutcome::NotRun);
        CHECK(m->smoke == "not-run");
        CHECK_FALSE(m->suspected_equivalent);
    }
    if (!python_available()) return;
    const RunnerConfig runner{{"python3", "{file}"}, "", std::chrono::milliseconds(10000)};
    SUBCASE("dropping find's return value breaks the driver") {
        CHECK(smoke_check(p, *m, runner).outcome == SmokeOutcome::Diverged);
        CHECK_FALSE(m->suspected_equivalent);
    }
    SUBCASE("an unobservable edit is flagged") {
        const Program q = snippet("def f():\n    x = 1\n    return 0\n\n\nprint(f())\n");
        auto eq = find_mutation(q, MutationType::Value, "perturb-literal", "1", "2", "x = 2");
        REQUIRE(eq);
        CHECK(smoke_check(q, *eq, runner).outcome == SmokeOutcome::NoDifferenceObserved);
        CHECK(eq->suspected_equivalent);
    }
    SUBCASE("a hang counts as divergence") {
        const Program q = snippet("i = 0\nwhile i < 3:\n    i += 1\nprint(i)\n");
        auto hang = find_mutation(q, MutationType::Decision, "swap-arithmetic", "+=", "-=", "i -= 1");
        REQUIRE(hang);
        const RunnerConfig quick{{"python3", "{file}"}, "", std::chrono::milliseconds(1500)};
        const SmokeReport r = smoke_check(q, *hang, quick);
        CHECK(r.outcome == SmokeOutcome::Diverged);
        CHECK(r.mutant_timed_out);
        CHECK_FALSE(r.original_timed_out);
    }
}

TEST_CASE("mutants compile under the reference interpreter") {
    if (!python_available()) return;
    const auto dir = std::filesystem::temp_directory_path() / ("mutsum-compile-" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    std::size_t n = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Program p = testing::fuzz_program(seed);
        fsutil::atomic_write(dir / ("p" + std::to_string(n++) + ".py"), p.source_text);
        for (const Mutant& m : generate_plan(p, uniform_quota(2), seed).mutants)
            fsutil::atomic_write(dir / ("p" + std::to_string(n++) + ".py"), m.mutated_source);
    }
    const std::string cmd = "python3 -m py_compile " + (dir / "*.py").string() + " 2>&1";
    CHECK(std::system(cmd.c_str()) == 0);
    std::filesystem::remove_all(dir);
}
