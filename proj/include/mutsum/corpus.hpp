#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mutsum/python_syntax.hpp"

namespace mutsum {

enum class Origin { Synthetic, Corpus, Custom };

/// Structural complexity: single function, single class, multiple classes,
/// multiple classes with multithreading.
enum class ComplexityCategory { SF, SC, MC, MT };

std::string_view to_string(Origin o) noexcept;
std::string_view to_string(ComplexityCategory c) noexcept;
Origin parse_origin(std::string_view s);
ComplexityCategory parse_complexity(std::string_view s);

struct Program {
    std::string id;
    std::string source_text;
    std::string language = "python";
    Origin origin = Origin::Custom;
    ComplexityCategory complexity = ComplexityCategory::SF;
    std::size_t loc = 0;
    std::optional<std::string> title;

    bool operator==(const Program&) const = default;
};

void to_json(nlohmann::json& j, const Program& p);
void from_json(const nlohmann::json& j, Program& p);

/// Metadata only (no source); the form stored in manifests.
nlohmann::json program_metadata(const Program& p);

/// Lines that are neither blank nor comment-only.
std::size_t count_loc(std::string_view source, std::string_view line_comment = "#");

/// 1-based numbers of the lines count_loc counts, ascending.
std::vector<std::size_t> effective_lines(std::string_view source,
                                         std::string_view line_comment = "#");

/// Throws ParseError when the source does not parse.
ComplexityCategory classify_complexity(std::string_view source,
                                       const syntax::LanguageAdapter& lang = syntax::python());

/// Maps any character outside [A-Za-z0-9._-] to '_' so ids double as file names.
std::string sanitize_id(std::string_view raw);

/// Validates and fills derived fields. Throws ParseError on unparseable
/// source and IngestError on an empty id or zero effective lines.
Program make_program(std::string id, std::string source, Origin origin,
                     std::optional<std::string> title = std::nullopt,
                     const syntax::LanguageAdapter& lang = syntax::python());

struct Rejection {
    std::string source;               ///< file path or corpus path
    std::optional<std::size_t> line;  ///< 1-based record line for JSONL corpora
    std::string reason;
};

struct IngestResult {
    std::vector<Program> programs;
    std::vector<Rejection> rejected;

    nlohmann::json manifest() const;
};

/// Key names inside each JSONL record. An empty title key means "no title".
struct FieldMap {
    std::string id = "id";
    std::string source = "source";
    std::string title = "title";
};

/// Parses "id=task_id,source=solution,title=name"; unspecified keys keep defaults.
FieldMap parse_field_map(std::string_view spec);

IngestResult ingest_directory(const std::filesystem::path& dir, Origin origin,
                              const syntax::LanguageAdapter& lang = syntax::python());

IngestResult ingest_jsonl(const std::filesystem::path& file, const FieldMap& fields,
                          const syntax::LanguageAdapter& lang = syntax::python());

}  // namespace mutsum
