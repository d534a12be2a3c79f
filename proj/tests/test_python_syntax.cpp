#include <doctest.h>

#include <random>

#include "mutsum/python_syntax.hpp"
#include "support/fuzz_programs.hpp"

using namespace mutsum;

namespace {

std::string sexp(const syntax::Tree& t) {
    char* raw = ts_node_string(t.root().raw());
    std::string s(raw);
    std::free(raw);
    return s;
}

}  // namespace

TEST_CASE("incremental reparse agrees with a full parse") {
    const auto& py = syntax::python();
    const std::vector<std::string> fragments{"", "x", "-1", " != ", "(", ")", ":", "\n", "\n    pass\n", "not ", "return"};
    std::mt19937_64 rng(99);
    int edits = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const std::string src = testing::fuzz_python_source(seed);
        const syntax::Tree base = py.parse(src);
        for (int i = 0; i < 40; ++i) {
            const std::size_t begin = rng() % (src.size() + 1);
            const std::size_t end = std::min(src.size(), begin + rng() % 12);
            const std::string& frag = fragments[rng() % fragments.size()];
            const syntax::Tree inc = py.reparse(base, begin, end, frag);
            const syntax::Tree full = py.parse(src.substr(0, begin) + frag + src.substr(end));
            REQUIRE(inc.source() == full.source());
            CHECK(sexp(inc) == sexp(full));
            CHECK(py.accepts(inc) == py.accepts(full));
            CHECK(py.parses_edit(base, begin, end, frag) == py.parses(full.source()));
            ++edits;
        }
    }
    CHECK(edits == 800);
}

TEST_CASE("accepts rejects comment-only blocks") {
    const auto& py = syntax::python();
    CHECK(py.parses("def f():\n    return 1\n"));
    CHECK_FALSE(py.parses("def f():\n    # nothing\n"));
    CHECK_FALSE(py.parses("def f(:\n    pass\n"));
    CHECK(py.parses("if x:\n    # note\n    pass\n"));
}
