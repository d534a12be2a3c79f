#pragma once

#include <cstdint>
#include <string>

#include "mutsum/corpus.hpp"

namespace mutsum::testing {

/// Random but syntactically valid Python module: functions, classes, loops,
/// comparisons, arithmetic, literals, subscripts, defaults, comments and
/// docstrings. Same seed, same text.
std::string fuzz_python_source(std::uint64_t seed);

/// fuzz_python_source wrapped as a Program with id "fuzz_{seed}".
Program fuzz_program(std::uint64_t seed);

}  // namespace mutsum::testing
