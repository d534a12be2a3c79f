#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace mutsum::diff {

enum class Op { Equal, Insert, Delete };

struct Chunk {
    Op op;
    std::string text;
};

std::vector<std::string> split_lines(std::string_view text);

/// LCS-based unified diff with `context` lines around each hunk.
/// Empty string when the inputs are equal.
std::string unified(std::string_view a, std::string_view b, std::string_view a_label,
                    std::string_view b_label, std::size_t context = 3);

/// Word-level diff: whitespace-separated tokens, whitespace kept attached to
/// the following Equal/Insert/Delete chunk so concatenating either side's
/// chunks reproduces that side's token sequence.
std::vector<Chunk> words(std::string_view a, std::string_view b);

nlohmann::json to_json(const std::vector<Chunk>& chunks);

/// Inclusive 1-based line range of `a` that differs from `b` after trimming
/// the common leading and trailing lines. `changed` is false when a == b.
struct LineWindow {
    bool changed = false;
    std::size_t first = 0;  ///< first differing line in a
    std::size_t last = 0;   ///< last differing line in a (first - 1 for pure insertions)
};
LineWindow changed_window(std::string_view a, std::string_view b);

/// Number of hunks in a zero-context line diff.
std::size_t hunk_count(std::string_view a, std::string_view b);

}  // namespace mutsum::diff
