#pragma once

#include <filesystem>

namespace mutsum::testing {

inline std::filesystem::path source_dir() { return MUTSUM_SOURCE_DIR; }
inline std::filesystem::path demo_dir() { return source_dir() / "demo"; }
inline std::filesystem::path demo_corpus_dir() { return demo_dir() / "corpus"; }
inline std::filesystem::path fixtures_dir() { return source_dir() / "tests" / "fixtures"; }

}  // namespace mutsum::testing
