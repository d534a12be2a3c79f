#include <doctest.h>

#include <random>

#include "mutsum/text_diff.hpp"

using namespace mutsum::diff;

namespace {

std::string side(const std::vector<Chunk>& chunks, Op skip) {
    std::string out;
    for (const Chunk& c : chunks)
        if (c.op != skip) out += c.text;
    return out;
}

std::string squash(const std::string& s) {
    std::string out;
    bool space = false;
    for (char c : s) {
        const bool ws = c == ' ' || c == '\n' || c == '\t' || c == '\r';
        if (ws) {
            space = !out.empty();
            continue;
        }
        if (space) out.push_back(' ');
        space = false;
        out.push_back(c);
    }
    return out;
}

}  // namespace

TEST_CASE("split_lines") {
    CHECK(split_lines("").empty());
    CHECK(split_lines("a\nb\n") == std::vector<std::string>{"a", "b"});
    CHECK(split_lines("a\n\nb") == std::vector<std::string>{"a", "", "b"});
}

TEST_CASE("unified diff") {
    CHECK(unified("a\n", "a\n", "x", "y").empty());
    const std::string d = unified("a\nb\nc\n", "a\nB\nc\n", "orig", "mut");
    CHECK(d == "--- orig\n+++ mut\n@@ -1,3 +1,3 @@\n a\n-b\n+B\n c\n");
    const std::string ins = unified("a\n", "a\nb\n", "o", "m", 0);
    CHECK(ins == "--- o\n+++ m\n@@ -1,0 +2,1 @@\n+b\n");
}

TEST_CASE("word diff on summaries") {
    const auto chunks = words("checks if the length is greater than 1.", "checks if the length is greater than 2.");
    REQUIRE(chunks.size() == 3);
    CHECK(chunks[0].op == Op::Equal);
    CHECK(chunks[1].op == Op::Delete);
    CHECK(chunks[1].text == " 1.");
    CHECK(chunks[2].op == Op::Insert);
    CHECK(chunks[2].text == " 2.");
    const auto j = to_json(chunks);
    CHECK(j[1]["op"] == "delete");
}

TEST_CASE("word diff reconstructs both sides") {
    std::mt19937_64 rng(42);
    const std::vector<std::string> vocab = {"the", "heap", "returns", "smallest", "last", "element", "a", "b"};
    auto sentence = [&] {
        std::string s;
        const int n = static_cast<int>(rng() % 12);
        for (int i = 0; i < n; ++i) s += (i ? (rng() % 5 ? " " : "\n  ") : "") + vocab[rng() % vocab.size()];
        return s;
    };
    for (int trial = 0; trial < 300; ++trial) {
        const std::string a = sentence(), b = sentence();
        const auto chunks = words(a, b);
        CHECK(squash(side(chunks, Op::Insert)) == squash(a));
        CHECK(squash(side(chunks, Op::Delete)) == squash(b));
        for (std::size_t i = 1; i < chunks.size(); ++i) CHECK(chunks[i].op != chunks[i - 1].op);
    }
}

TEST_CASE("changed window and hunks") {
    const auto w = changed_window("a\nb\nc\n", "a\nX\nc\n");
    CHECK(w.changed);
    CHECK(w.first == 2);
    CHECK(w.last == 2);
    CHECK_FALSE(changed_window("a\n", "a\n").changed);
    CHECK(hunk_count("a\nb\nc\n", "a\nX\nc\n") == 1);
    CHECK(hunk_count("a\nb\nc\n", "X\nb\nY\n") == 2);
}
