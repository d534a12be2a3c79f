#include "mutsum/corpus.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>

#include "mutsum/error.hpp"
#include "mutsum/fsutil.hpp"

namespace mutsum {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Origin o) noexcept {
    switch (o) {
        case Origin::Synthetic: return "synthetic";
        case Origin::Corpus: return "corpus";
        case Origin::Custom: return "custom";
    }
    return "custom";
}

std::string_view to_string(ComplexityCategory c) noexcept {
    switch (c) {
        case ComplexityCategory::SF: return "SF";
        case ComplexityCategory::SC: return "SC";
        case ComplexityCategory::MC: return "MC";
        case ComplexityCategory::MT: return "MT";
    }
    return "SF";
}

Origin parse_origin(std::string_view s) {
    if (s == "synthetic") return Origin::Synthetic;
    if (s == "corpus") return Origin::Corpus;
    if (s == "custom") return Origin::Custom;
    throw ConfigError("unknown origin: " + std::string(s));
}

ComplexityCategory parse_complexity(std::string_view s) {
    if (s == "SF") return ComplexityCategory::SF;
    if (s == "SC") return ComplexityCategory::SC;
    if (s == "MC") return ComplexityCategory::MC;
    if (s == "MT") return ComplexityCategory::MT;
    throw ConfigError("unknown complexity category: " + std::string(s));
}

void to_json(json& j, const Program& p) {
    j = program_metadata(p);
    j["source_text"] = p.source_text;
}

void from_json(const json& j, Program& p) {
    p.id = j.at("id").get<std::string>();
    p.source_text = j.value("source_text", std::string());
    p.language = j.value("language", std::string("python"));
    p.origin = parse_origin(j.at("origin").get<std::string>());
    p.complexity = parse_complexity(j.at("complexity").get<std::string>());
    p.loc = j.at("loc").get<std::size_t>();
    if (j.contains("title") && !j["title"].is_null())
        p.title = j["title"].get<std::string>();
    else
        p.title.reset();
}

json program_metadata(const Program& p) {
    json j{{"id", p.id},
           {"language", p.language},
           {"origin", to_string(p.origin)},
           {"complexity", to_string(p.complexity)},
           {"loc", p.loc}};
    j["title"] = p.title ? json(*p.title) : json(nullptr);
    return j;
}

namespace {

template <typename Fn>
void for_each_line(std::string_view source, Fn&& fn) {
    std::size_t line_no = 1;
    std::size_t pos = 0;
    while (pos < source.size()) {
        std::size_t nl = source.find('\n', pos);
        std::size_t end = nl == std::string_view::npos ? source.size() : nl;
        fn(line_no, source.substr(pos, end - pos));
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
        ++line_no;
    }
}

bool is_effective(std::string_view line, std::string_view comment) {
    const auto first = line.find_first_not_of(" \t\r\f\v");
    if (first == std::string_view::npos) return false;
    return line.substr(first, comment.size()) != comment;
}

}  // namespace

std::size_t count_loc(std::string_view source, std::string_view line_comment) {
    std::size_t n = 0;
    for_each_line(source, [&](std::size_t, std::string_view line) {
        if (is_effective(line, line_comment)) ++n;
    });
    return n;
}

std::vector<std::size_t> effective_lines(std::string_view source, std::string_view line_comment) {
    std::vector<std::size_t> out;
    for_each_line(source, [&](std::size_t no, std::string_view line) {
        if (is_effective(line, line_comment)) out.push_back(no);
    });
    return out;
}

namespace {

constexpr std::array<std::string_view, 3> kThreadModules = {"threading", "_thread",
                                                            "concurrent.futures"};
constexpr std::array<std::string_view, 10> kThreadCallees = {
    "Thread",    "Lock",    "RLock",     "Semaphore",          "BoundedSemaphore",
    "Condition", "Barrier", "Event",     "ThreadPoolExecutor", "start_new_thread"};

bool names_thread_module(std::string_view dotted) {
    for (std::string_view m : kThreadModules) {
        if (dotted == m) return true;
        if (dotted.size() > m.size() && dotted.substr(0, m.size()) == m && dotted[m.size()] == '.')
            return true;
    }
    return false;
}

std::string_view callee_name(syntax::Node fn, std::string_view src) {
    if (fn.kind() == "identifier") return fn.text(src);
    if (fn.kind() == "attribute") {
        syntax::Node attr = fn.child_by_field("attribute");
        if (!attr.is_null()) return attr.text(src);
    }
    return {};
}

bool is_class_definition(syntax::Node n) {
    if (n.kind() == "class_definition") return true;
    if (n.kind() == "decorated_definition") {
        syntax::Node def = n.child_by_field("definition");
        return !def.is_null() && def.kind() == "class_definition";
    }
    return false;
}

}  // namespace

ComplexityCategory classify_complexity(std::string_view source,
                                       const syntax::LanguageAdapter& lang) {
    const syntax::Tree tree = lang.parse(source);
    if (!lang.accepts(tree)) throw ParseError("cannot classify unparseable source");
    const std::string& src = tree.source();
    const syntax::Node root = tree.root();

    std::size_t classes = 0;
    for (std::uint32_t i = 0; i < root.named_child_count(); ++i)
        if (is_class_definition(root.named_child(i))) ++classes;

    bool threaded = false;
    tree.walk([&](syntax::Node n) {
        if (threaded) return;
        const std::string_view k = n.kind();
        if (k == "import_statement" || k == "import_from_statement") {
            if (k == "import_from_statement") {
                syntax::Node mod = n.child_by_field("module_name");
                if (!mod.is_null() && names_thread_module(mod.text(src))) threaded = true;
                return;
            }
            for (std::uint32_t i = 0; i < n.named_child_count(); ++i) {
                syntax::Node c = n.named_child(i);
                syntax::Node name = c.kind() == "aliased_import" ? c.child_by_field("name") : c;
                if (!name.is_null() && names_thread_module(name.text(src))) threaded = true;
            }
        } else if (k == "call") {
            const std::string_view callee = callee_name(n.child_by_field("function"), src);
            if (std::find(kThreadCallees.begin(), kThreadCallees.end(), callee) !=
                kThreadCallees.end())
                threaded = true;
        }
    });

    if (classes >= 2) return threaded ? ComplexityCategory::MT : ComplexityCategory::MC;
    if (classes == 1) return ComplexityCategory::SC;
    return ComplexityCategory::SF;
}

std::string sanitize_id(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                        c == '-' || c == '_' || c == '.';
        out.push_back(ok ? c : '_');
    }
    if (out.find_first_not_of('.') == std::string::npos) out.assign(out.size(), '_');
    return out;
}

Program make_program(std::string id, std::string source, Origin origin,
                     std::optional<std::string> title, const syntax::LanguageAdapter& lang) {
    if (id.empty()) throw IngestError("program id must not be empty");
    if (sanitize_id(id) != id) throw IngestError("program id is not filename-safe: " + id);
    if (!lang.parses(source)) throw ParseError("source does not parse as " + std::string(lang.name()));
    Program p;
    p.loc = count_loc(source, lang.line_comment());
    if (p.loc == 0) throw IngestError("program " + id + " has no effective lines");
    p.complexity = classify_complexity(source, lang);
    p.id = std::move(id);
    p.source_text = std::move(source);
    p.language = std::string(lang.name());
    p.origin = origin;
    p.title = std::move(title);
    return p;
}

json IngestResult::manifest() const {
    json accepted = json::array();
    for (const Program& p : programs) accepted.push_back(program_metadata(p));
    json rejected_j = json::array();
    for (const Rejection& r : rejected) {
        json e{{"source", r.source}, {"reason", r.reason}};
        e["line"] = r.line ? json(*r.line) : json(nullptr);
        rejected_j.push_back(std::move(e));
    }
    return json{{"accepted", std::move(accepted)}, {"rejected", std::move(rejected_j)}};
}

FieldMap parse_field_map(std::string_view spec) {
    FieldMap map;
    while (!spec.empty()) {
        const auto comma = spec.find(',');
        std::string_view item = spec.substr(0, comma);
        spec = comma == std::string_view::npos ? std::string_view() : spec.substr(comma + 1);
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("field map entry needs role=key: " + std::string(item));
        const std::string_view role = item.substr(0, eq);
        const std::string key(item.substr(eq + 1));
        if (role == "id") map.id = key;
        else if (role == "source") map.source = key;
        else if (role == "title") map.title = key;
        else throw ConfigError("unknown field role: " + std::string(role));
    }
    return map;
}

IngestResult ingest_directory(const fs::path& dir, Origin origin,
                              const syntax::LanguageAdapter& lang) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw IngestError("not a readable directory: " + dir.string());

    std::vector<fs::path> files;
    fs::directory_iterator it(dir, ec);
    if (ec) throw IngestError("cannot list " + dir.string() + ": " + ec.message());
    for (const auto& entry : it) {
        if (entry.is_regular_file() && entry.path().extension() == lang.file_extension())
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });

    IngestResult result;
    for (const fs::path& f : files) {
        try {
            result.programs.push_back(
                make_program(sanitize_id(f.stem().string()), fsutil::read_file(f), origin, std::nullopt, lang));
        } catch (const Error& e) {
            result.rejected.push_back({f.string(), std::nullopt, e.what()});
        }
    }
    return result;
}

IngestResult ingest_jsonl(const fs::path& file, const FieldMap& fields,
                          const syntax::LanguageAdapter& lang) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IngestError("cannot read corpus " + file.string());

    IngestResult result;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto reject = [&](std::string reason) {
            result.rejected.push_back({file.string(), line_no, std::move(reason)});
        };
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            reject(std::string("malformed record: ") + e.what());
            continue;
        }
        if (!rec.is_object()) {
            reject("record is not a JSON object");
            continue;
        }
        auto string_field = [&](const std::string& key) -> std::optional<std::string> {
            if (!rec.contains(key)) return std::nullopt;
            const json& v = rec[key];
            if (v.is_string()) return v.get<std::string>();
            if (v.is_number_integer()) return std::to_string(v.get<long long>());
            return std::nullopt;
        };
        const auto id = string_field(fields.id);
        if (!id) {
            reject("missing key '" + fields.id + "'");
            continue;
        }
        const auto source = string_field(fields.source);
        if (!source) {
            reject("missing key '" + fields.source + "'");
            continue;
        }
        const std::string safe_id = sanitize_id(*id);
        if (!seen.insert(safe_id).second) {
            reject("duplicate id '" + safe_id + "'");
            continue;
        }
        std::optional<std::string> title;
        if (!fields.title.empty()) title = string_field(fields.title);
        try {
            result.programs.push_back(make_program(safe_id, *source, Origin::Corpus, title, lang));
        } catch (const Error& e) {
            reject(e.what());
        }
    }
    return result;
}

}  // namespace mutsum
