#include "mutsum/mutation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <random>
#include <set>

#include <unistd.h>

#include "mutsum/digest.hpp"
#include "mutsum/error.hpp"
#include "mutsum/fsutil.hpp"
#include "mutsum/process.hpp"
#include "mutsum/text_diff.hpp"

namespace mutsum {

namespace fs = std::filesystem;
using nlohmann::json;
using syntax::Node;

std::string_view to_string(MutationType t) noexcept {
    switch (t) {
        case MutationType::Statement: return "statement";
        case MutationType::Value: return "value";
        case MutationType::Decision: return "decision";
    }
    return "decision";
}

std::string_view short_code(MutationType t) noexcept {
    switch (t) {
        case MutationType::Statement: return "stmt";
        case MutationType::Value: return "val";
        case MutationType::Decision: return "desc";
    }
    return "desc";
}

std::string_view to_string(LocationBucket b) noexcept {
    switch (b) {
        case LocationBucket::Beginning: return "beginning";
        case LocationBucket::Middle: return "middle";
        case LocationBucket::End: return "end";
    }
    return "end";
}

std::string_view short_code(LocationBucket b) noexcept {
    switch (b) {
        case LocationBucket::Beginning: return "b";
        case LocationBucket::Middle: return "m";
        case LocationBucket::End: return "e";
    }
    return "e";
}

MutationType parse_mutation_type(std::string_view s) {
    for (MutationType t : kMutationTypes)
        if (s == to_string(t) || s == short_code(t)) return t;
    throw ConfigError("unknown mutation type: " + std::string(s));
}

LocationBucket parse_bucket(std::string_view s) {
    for (LocationBucket b : kBuckets)
        if (s == to_string(b) || s == short_code(b)) return b;
    throw ConfigError("unknown location bucket: " + std::string(s));
}

std::string_view to_string(SmokeOutcome o) noexcept {
    switch (o) {
        case SmokeOutcome::Diverged: return "diverged";
        case SmokeOutcome::NoDifferenceObserved: return "no-difference-observed";
        case SmokeOutcome::NotRun: return "not-run";
    }
    return "not-run";
}

// ---------------------------------------------------------------------------
// JSON

json to_json(const MutationSite& s) {
    return json{{"operator_id", s.operator_id},
                {"type", to_string(s.type)},
                {"line", s.line},
                {"end_line", s.end_line},
                {"span", {s.column_begin, s.column_end}},
                {"begin", s.begin},
                {"end", s.end},
                {"original_fragment", s.original_fragment},
                {"replacements", s.replacements}};
}

MutationSite site_from_json(const json& j) {
    MutationSite s;
    s.operator_id = j.at("operator_id").get<std::string>();
    s.type = parse_mutation_type(j.at("type").get<std::string>());
    s.line = j.at("line").get<std::size_t>();
    s.end_line = j.at("end_line").get<std::size_t>();
    s.column_begin = j.at("span").at(0).get<std::size_t>();
    s.column_end = j.at("span").at(1).get<std::size_t>();
    s.begin = j.at("begin").get<std::size_t>();
    s.end = j.at("end").get<std::size_t>();
    s.original_fragment = j.at("original_fragment").get<std::string>();
    s.replacements = j.at("replacements").get<std::vector<std::string>>();
    return s;
}

json to_json(const Mutant& m) {
    json j{{"id", m.id},
           {"name", m.name},
           {"program_id", m.program_id},
           {"mutation_type", to_string(m.mutation_type)},
           {"bucket", to_string(m.bucket)},
           {"operator_id", m.site.operator_id},
           {"site", to_json(m.site)},
           {"mutated_fragment", m.mutated_fragment},
           {"suspected_equivalent", m.suspected_equivalent},
           {"seed", m.seed}};
    j["smoke"] = m.smoke ? json(*m.smoke) : json(nullptr);
    return j;
}

Mutant mutant_from_json(const json& j) {
    Mutant m;
    m.id = j.at("id").get<std::string>();
    m.name = j.at("name").get<std::string>();
    m.program_id = j.at("program_id").get<std::string>();
    m.mutation_type = parse_mutation_type(j.at("mutation_type").get<std::string>());
    m.bucket = parse_bucket(j.at("bucket").get<std::string>());
    m.site = site_from_json(j.at("site"));
    m.mutated_fragment = j.at("mutated_fragment").get<std::string>();
    m.suspected_equivalent = j.value("suspected_equivalent", false);
    m.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("smoke") && !j["smoke"].is_null()) m.smoke = j["smoke"].get<std::string>();
    if (j.contains("mutated_source")) m.mutated_source = j["mutated_source"].get<std::string>();
    return m;
}

// ---------------------------------------------------------------------------
// Site construction

namespace {

class LineIndex {
public:
    explicit LineIndex(std::string_view src) : src_(src) {
        starts_.push_back(0);
        for (std::size_t i = 0; i < src.size(); ++i)
            if (src[i] == '\n') starts_.push_back(i + 1);
    }

    /// 0-based row containing byte offset `pos`.
    std::size_t row_of(std::size_t pos) const {
        return static_cast<std::size_t>(std::upper_bound(starts_.begin(), starts_.end(), pos) -
                                        starts_.begin()) -
               1;
    }
    std::size_t line_start(std::size_t row) const { return starts_[row]; }
    /// Offset just past the row's '\n', or the end of the source.
    std::size_t line_after(std::size_t row) const {
        return row + 1 < starts_.size() ? starts_[row + 1] : src_.size();
    }
    /// Offset of the row's '\n' (or end of source).
    std::size_t line_content_end(std::size_t row) const {
        const std::size_t after = line_after(row);
        return after > starts_[row] && src_[after - 1] == '\n' ? after - 1 : after;
    }

private:
    std::string_view src_;
    std::vector<std::size_t> starts_;
};

MutationSite make_site(std::string_view op_id, MutationType type, std::size_t begin, std::size_t end,
                       std::string_view src, const LineIndex& lines) {
    MutationSite s;
    s.operator_id = std::string(op_id);
    s.type = type;
    s.begin = begin;
    s.end = end;
    const std::size_t row = lines.row_of(begin);
    const std::size_t end_row = end > begin ? lines.row_of(end - 1) : row;
    s.line = row + 1;
    s.end_line = end_row + 1;
    s.column_begin = begin - lines.line_start(row);
    s.column_end = end_row == row ? end - lines.line_start(row)
                                  : lines.line_content_end(row) - lines.line_start(row);
    s.original_fragment = std::string(src.substr(begin, end - begin));
    return s;
}

bool inside_string(Node n) {
    for (Node p = n.parent(); !p.is_null(); p = p.parent()) {
        const auto k = p.kind();
        if (k == "string" || k == "concatenated_string") return true;
    }
    return false;
}

bool is_bare_string_statement(Node stmt) {
    if (stmt.kind() != "expression_statement" || stmt.named_child_count() != 1) return false;
    const auto k = stmt.named_child(0).kind();
    return k == "string" || k == "concatenated_string";
}

/// Child index of `child` under `parent`, or -1.
int index_in_parent(Node parent, Node child) {
    for (std::uint32_t i = 0; i < parent.child_count(); ++i)
        if (parent.child(i) == child) return static_cast<int>(i);
    return -1;
}

std::string_view field_of(Node n) {
    Node p = n.parent();
    if (p.is_null()) return {};
    const int idx = index_in_parent(p, n);
    return idx < 0 ? std::string_view() : p.field_name_for_child(static_cast<std::uint32_t>(idx));
}

const std::vector<std::string>* lookup(const std::vector<std::pair<std::string_view, std::vector<std::string>>>& table,
                                       std::string_view key) {
    for (const auto& [k, v] : table)
        if (k == key) return &v;
    return nullptr;
}

const std::vector<std::pair<std::string_view, std::vector<std::string>>> kComparators = {
    {"==", {"!="}}, {"!=", {"=="}}, {"<", {">"}}, {">", {"<"}}, {"<=", {">="}}, {">=", {"<="}}};

const std::vector<std::pair<std::string_view, std::vector<std::string>>> kArithmetic = {
    {"+", {"-"}}, {"-", {"+"}}, {"*", {"//"}}, {"/", {"//"}}, {"//", {"*", "/"}}};

const std::vector<std::pair<std::string_view, std::vector<std::string>>> kAugmented = {
    {"+=", {"-="}}, {"-=", {"+="}}, {"*=", {"//="}}, {"/=", {"//="}}, {"//=", {"*=", "/="}}};

const std::vector<std::pair<std::string_view, std::vector<std::string>>> kBoolean = {
    {"and", {"or"}}, {"or", {"and"}}};

void push_unique(std::vector<std::string>& out, std::string s, std::string_view original) {
    if (s == original) return;
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(std::move(s));
}

bool is_plain_decimal_int(std::string_view t) {
    if (t.empty() || t.size() > 15) return false;
    if (t.size() > 1 && t[0] == '0') return false;
    return std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; });
}

bool is_plain_float(std::string_view t, std::size_t& decimals) {
    const auto dot = t.find('.');
    if (dot == std::string_view::npos || t.size() > 20) return false;
    const auto int_part = t.substr(0, dot), frac = t.substr(dot + 1);
    auto digits = [](std::string_view s) {
        return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
    };
    if (!digits(int_part) || !digits(frac) || (int_part.empty() && frac.empty())) return false;
    decimals = std::max<std::size_t>(1, frac.size());
    return true;
}

std::string format_fixed(double v, std::size_t decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", static_cast<int>(decimals), v);
    return buf;
}

std::vector<std::string> numeric_replacements(std::string_view digits_text, bool negative,
                                              std::string_view op_id, std::string_view original) {
    std::vector<std::string> out;
    if (is_plain_decimal_int(digits_text)) {
        long long v = std::stoll(std::string(digits_text));
        if (negative) v = -v;
        std::vector<long long> candidates;
        if (op_id == op::kFlipIndex) {
            if (v == 0) candidates = {-1, 1};
            else if (v == -1) candidates = {0, -2};
            else candidates = {v + 1, v - 1};
        } else {
            candidates = {v + 1, v - 1, v * 2};
        }
        for (long long c : candidates)
            if (c != v) push_unique(out, std::to_string(c), original);
        return out;
    }
    std::size_t decimals = 0;
    if (op_id != op::kFlipIndex && is_plain_float(digits_text, decimals)) {
        double v = std::strtod(std::string(digits_text).c_str(), nullptr);
        if (negative) v = -v;
        const std::string self = format_fixed(v, decimals);
        for (double c : {v + 1.0, v - 1.0, v * 2.0}) {
            std::string s = format_fixed(c, decimals);
            if (s != self && s != "-" + format_fixed(0.0, decimals)) push_unique(out, s, original);
        }
    }
    return out;
}

std::string drop_last_codepoint(std::string_view s) {
    std::size_t n = s.size();
    if (n == 0) return {};
    --n;
    while (n > 0 && (static_cast<unsigned char>(s[n]) & 0xC0) == 0x80) --n;
    return std::string(s.substr(0, n));
}

struct Enumerator {
    const Program& program;
    const syntax::Tree& tree;
    std::string_view src;
    LineIndex lines;
    EngineOptions options;
    std::vector<MutationSite> sites;

    Enumerator(const Program& p, const syntax::Tree& t, const EngineOptions& o)
        : program(p), tree(t), src(t.source()), lines(t.source()), options(o) {}

    void add(MutationSite site) {
        // Keep only replacements that leave the program parseable.
        std::vector<std::string> ok;
        for (std::string& r : site.replacements) {
            if (syntax::adapter_for(program.language).parses_edit(tree, site.begin, site.end, r))
                ok.push_back(std::move(r));
        }
        site.replacements = std::move(ok);
        if (!site.replacements.empty()) sites.push_back(std::move(site));
    }

    void add_token_site(std::string_view op_id, MutationType type, Node tok,
                        const std::vector<std::pair<std::string_view, std::vector<std::string>>>& table) {
        if (tok.is_null()) return;
        const std::string_view text = tok.text(src);
        const auto* reps = lookup(table, text);
        if (!reps) return;
        MutationSite s = make_site(op_id, type, tok.start_byte(), tok.end_byte(), src, lines);
        s.replacements = *reps;
        add(std::move(s));
    }

    // -- decision ----------------------------------------------------------
    void decisions() {
        tree.walk([&](Node n) {
            const auto k = n.kind();
            if (k != "comparison_operator" && k != "binary_operator" && k != "augmented_assignment" &&
                k != "boolean_operator")
                return;
            if (inside_string(n)) return;
            if (k == "comparison_operator") {
                for (std::uint32_t i = 0; i < n.child_count(); ++i)
                    if (n.field_name_for_child(i) == "operators")
                        add_token_site(op::kFlipComparator, MutationType::Decision, n.child(i), kComparators);
            } else if (k == "binary_operator") {
                add_token_site(op::kSwapArithmetic, MutationType::Decision, n.child_by_field("operator"),
                               kArithmetic);
            } else if (k == "augmented_assignment") {
                add_token_site(op::kSwapArithmetic, MutationType::Decision, n.child_by_field("operator"),
                               kAugmented);
            } else {
                add_token_site(op::kSwapBoolean, MutationType::Decision, n.child_by_field("operator"), kBoolean);
            }
        });
    }

    // -- value -------------------------------------------------------------
    void numeric(Node lit) {
        Node target = lit;
        bool negative = false;
        Node parent = lit.parent();
        if (!parent.is_null() && parent.kind() == "unary_operator") {
            Node opnode = parent.child_by_field("operator");
            if (!opnode.is_null() && opnode.text(src) == "-") {
                target = parent;
                negative = true;
            } else {
                return;  // unary '+' or '~': leave alone
            }
        }
        std::string_view op_id = op::kPerturbLiteral;
        Node holder = target.parent();
        const std::string_view field = field_of(target);
        if (!holder.is_null() && holder.kind() == "subscript" && field == "subscript")
            op_id = op::kFlipIndex;
        else if (!holder.is_null() &&
                 (holder.kind() == "default_parameter" || holder.kind() == "typed_default_parameter") &&
                 field == "value")
            op_id = op::kPerturbDefault;

        MutationSite s = make_site(op_id, MutationType::Value, target.start_byte(), target.end_byte(), src, lines);
        s.replacements = numeric_replacements(lit.text(src), negative, op_id, s.original_fragment);
        if (!s.replacements.empty()) add(std::move(s));
    }

    void values() {
        tree.walk([&](Node n) {
            const auto k = n.kind();
            if (k == "string" && options.string_literals) {
                string_literal(n);
                return;
            }
            if (k != "integer" && k != "float" && k != "true" && k != "false") return;
            if (inside_string(n)) return;
            if (k == "true" || k == "false") {
                MutationSite s = make_site(op::kFlipBoolean, MutationType::Value, n.start_byte(), n.end_byte(),
                                           src, lines);
                s.replacements = {k == "true" ? "False" : "True"};
                add(std::move(s));
                return;
            }
            numeric(n);
        });
    }

    void string_literal(Node str) {
        if (inside_string(str)) return;
        Node parent = str.parent();
        if (!parent.is_null() && is_bare_string_statement(parent)) return;  // docstrings
        Node start, end;
        for (std::uint32_t i = 0; i < str.child_count(); ++i) {
            Node c = str.child(i);
            if (c.kind() == "interpolation") return;  // f-string with code inside
            if (c.kind() == "string_start") start = c;
            if (c.kind() == "string_end") end = c;
        }
        if (start.is_null() || end.is_null()) return;
        const std::size_t b = start.end_byte(), e = end.start_byte();
        MutationSite s = make_site(op::kPerturbString, MutationType::Value, b, e, src, lines);
        s.replacements = {s.original_fragment.empty() ? std::string("x") : drop_last_codepoint(s.original_fragment)};
        add(std::move(s));
    }

    // -- statement ---------------------------------------------------------
    struct Stmt {
        Node node;
        std::size_t lines_begin = 0;  // start of first physical line
        std::size_t lines_end = 0;    // just past last physical line
        bool whole_line = false;
    };

    bool rest_is_blank_or_comment(std::size_t from, std::size_t to) const {
        std::string_view tail = src.substr(from, to - from);
        const auto p = tail.find_first_not_of(" \t\r\f");
        return p == std::string_view::npos || tail[p] == '#';
    }

    Stmt describe(Node n) const {
        Stmt s{n};
        const std::size_t row = lines.row_of(n.start_byte());
        const std::size_t end_row = lines.row_of(n.end_byte() > n.start_byte() ? n.end_byte() - 1 : n.start_byte());
        s.lines_begin = lines.line_start(row);
        s.lines_end = lines.line_after(end_row);
        std::string_view lead = src.substr(s.lines_begin, n.start_byte() - s.lines_begin);
        s.whole_line = lead.find_first_not_of(" \t") == std::string_view::npos &&
                       rest_is_blank_or_comment(n.end_byte(), lines.line_content_end(end_row));
        return s;
    }

    static bool is_simple_mutable(Node n) {
        const auto k = n.kind();
        if (k == "expression_statement") return !is_bare_string_statement(n);
        return k == "return_statement" || k == "delete_statement" || k == "raise_statement" ||
               k == "assert_statement" || k == "break_statement" || k == "continue_statement";
    }

    bool duplicable(Node n) const {
        if (n.kind() != "expression_statement" || n.named_child_count() != 1) return false;
        Node e = n.named_child(0);
        const auto k = e.kind();
        if (k == "call" || k == "augmented_assignment" || k == "await") return true;
        if (k != "assignment") return false;
        Node left = e.child_by_field("left"), right = e.child_by_field("right");
        if (left.is_null() || right.is_null()) return false;
        const std::string_view target = left.text(src);
        bool depends = false;
        syntax::Tree::walk_nodes(right, [&](Node r) {
            if (r.kind() == "call") depends = true;
            if ((r.kind() == "identifier" || r.kind() == "attribute" || r.kind() == "subscript") &&
                r.text(src) == target)
                depends = true;
        });
        return depends;
    }

    std::vector<std::vector<Node>> statement_lists() const {
        std::vector<std::vector<Node>> out;
        tree.walk([&](Node n) {
            if (n.kind() != "module" && n.kind() != "block") return;
            if (inside_string(n)) return;
            std::vector<Node> list;
            for (std::uint32_t i = 0; i < n.named_child_count(); ++i) {
                Node c = n.named_child(i);
                if (c.kind() != "comment") list.push_back(c);
            }
            out.push_back(std::move(list));
        });
        return out;
    }

    void statements() {
        const std::string_view noop = syntax::adapter_for(program.language).noop_statement();
        for (const auto& list : statement_lists()) {
            std::vector<Stmt> described;
            for (Node n : list) described.push_back(describe(n));

            for (std::size_t i = 0; i < list.size(); ++i) {
                const Stmt& st = described[i];
                Node n = st.node;
                if (!is_simple_mutable(n) || !st.whole_line) continue;

                // delete
                {
                    MutationSite s = make_site(op::kDeleteStatement, MutationType::Statement, st.lines_begin,
                                               st.lines_end, src, lines);
                    if (list.size() == 1) {
                        const std::string indent(src.substr(st.lines_begin, n.start_byte() - st.lines_begin));
                        const bool nl = st.lines_end > st.lines_begin && src[st.lines_end - 1] == '\n';
                        s.replacements = {indent + std::string(noop) + (nl ? "\n" : "")};
                    } else {
                        s.replacements = {std::string()};
                    }
                    add(std::move(s));
                }

                // drop-return-value
                if (n.kind() == "return_statement" && n.named_child_count() > 0) {
                    Node value = n.named_child(0);
                    if (value.text(src) != "None") {
                        MutationSite s = make_site(op::kDropReturnValue, MutationType::Statement, n.start_byte(),
                                                   n.end_byte(), src, lines);
                        s.replacements = {"return"};
                        add(std::move(s));
                    }
                }

                // duplicate
                if (duplicable(n)) {
                    MutationSite s = make_site(op::kDuplicateStatement, MutationType::Statement, st.lines_begin,
                                               st.lines_end, src, lines);
                    const std::string& body = s.original_fragment;
                    const bool nl = !body.empty() && body.back() == '\n';
                    s.replacements = {nl ? body + body : body + "\n" + body};
                    add(std::move(s));
                }

                // swap with the next statement of the same block
                if (i + 1 < list.size()) {
                    const Stmt& next = described[i + 1];
                    if (!is_simple_mutable(next.node) || !next.whole_line) continue;
                    const std::string_view gap = src.substr(st.lines_end, next.lines_begin - st.lines_end);
                    if (gap.find_first_not_of(" \t\r\n") != std::string_view::npos) continue;
                    const std::string a(src.substr(st.lines_begin, st.lines_end - st.lines_begin));
                    const std::string b(src.substr(next.lines_begin, next.lines_end - next.lines_begin));
                    if (n.text(src) == next.node.text(src)) continue;
                    MutationSite s = make_site(op::kSwapStatements, MutationType::Statement, st.lines_begin,
                                               next.lines_end, src, lines);
                    const bool b_nl = !b.empty() && b.back() == '\n';
                    std::string a_body = a;
                    if (!b_nl && !a_body.empty() && a_body.back() == '\n') a_body.pop_back();
                    s.replacements = {(b_nl ? b : b + "\n") + std::string(gap) + a_body};
                    add(std::move(s));
                }
            }
        }
    }
};

}  // namespace

std::vector<MutationSite> enumerate_sites(const Program& program, MutationType type,
                                          const EngineOptions& options) {
    const syntax::Tree tree = syntax::adapter_for(program.language).parse(program.source_text);
    if (!syntax::adapter_for(program.language).accepts(tree))
        throw ParseError("program " + program.id + " does not parse");
    Enumerator e(program, tree, options);
    switch (type) {
        case MutationType::Decision: e.decisions(); break;
        case MutationType::Value: e.values(); break;
        case MutationType::Statement: e.statements(); break;
    }
    std::stable_sort(e.sites.begin(), e.sites.end(), [](const MutationSite& a, const MutationSite& b) {
        return a.begin != b.begin ? a.begin < b.begin : a.end < b.end;
    });
    return std::move(e.sites);
}

// ---------------------------------------------------------------------------
// Buckets, apply, invariants

namespace {

std::size_t physical_line_count(std::string_view src) { return diff::split_lines(src).size(); }

}  // namespace

LocationBucket bucket_of_line(std::size_t line, const Program& program) {
    const std::size_t total = physical_line_count(program.source_text);
    if (line < 1 || line > total)
        throw MutationError("line " + std::to_string(line) + " is outside program " + program.id + " (1.." +
                            std::to_string(total) + ")");
    const auto eff = effective_lines(program.source_text,
                                     syntax::adapter_for(program.language).line_comment());
    if (eff.empty()) throw MutationError("program " + program.id + " has no effective lines");
    std::size_t k = static_cast<std::size_t>(std::lower_bound(eff.begin(), eff.end(), line) - eff.begin());
    if (k >= eff.size()) k = eff.size() - 1;
    switch (3 * k / eff.size()) {
        case 0: return LocationBucket::Beginning;
        case 1: return LocationBucket::Middle;
        default: return LocationBucket::End;
    }
}

LocationBucket bucket_of(const MutationSite& site, const Program& program) {
    return bucket_of_line(site.line, program);
}

std::string splice(std::string_view source, const MutationSite& site, std::string_view fragment) {
    if (site.begin > site.end || site.end > source.size())
        throw MutationError("site range lies outside the source");
    std::string out;
    out.reserve(source.size() - (site.end - site.begin) + fragment.size());
    out.append(source.substr(0, site.begin));
    out.append(fragment);
    out.append(source.substr(site.end));
    return out;
}

Mutant apply(const Program& program, const MutationSite& site, std::string_view fragment) {
    if (site.end > program.source_text.size() ||
        std::string_view(program.source_text).substr(site.begin, site.end - site.begin) != site.original_fragment)
        throw MutationError("site does not match program " + program.id);
    if (std::find(site.replacements.begin(), site.replacements.end(), fragment) == site.replacements.end())
        throw MutationError("operator " + site.operator_id + " cannot produce '" + std::string(fragment) +
                            "' at line " + std::to_string(site.line));
    Mutant m;
    m.program_id = program.id;
    m.mutation_type = site.type;
    m.bucket = bucket_of(site, program);
    m.site = site;
    m.mutated_fragment = std::string(fragment);
    m.mutated_source = splice(program.source_text, site, fragment);
    if (!syntax::adapter_for(program.language).parses(m.mutated_source))
        throw MutationError("mutant at line " + std::to_string(site.line) + " does not parse");
    m.name = std::string(short_code(m.mutation_type)) + "_" + std::string(short_code(m.bucket));
    m.id = program.id + "/" + m.name;
    return m;
}

namespace {

MutationType type_of_operator(std::string_view op_id) {
    if (op_id == op::kFlipComparator || op_id == op::kSwapArithmetic || op_id == op::kSwapBoolean)
        return MutationType::Decision;
    if (op_id == op::kDeleteStatement || op_id == op::kDropReturnValue || op_id == op::kDuplicateStatement ||
        op_id == op::kSwapStatements)
        return MutationType::Statement;
    if (op_id == op::kPerturbLiteral || op_id == op::kFlipIndex || op_id == op::kPerturbDefault ||
        op_id == op::kFlipBoolean || op_id == op::kPerturbString)
        return MutationType::Value;
    throw MutationError("unknown operator " + std::string(op_id));
}

}  // namespace

std::vector<std::string> check_mutant(const Program& program, const Mutant& m) {
    std::vector<std::string> findings;
    auto fail = [&](std::string what) { findings.push_back(m.id + ": " + std::move(what)); };
    const auto& lang = syntax::adapter_for(program.language);

    if (!lang.parses(m.mutated_source)) fail("mutated source does not parse");
    if (m.mutated_source == program.source_text) fail("mutated source equals the original");
    try {
        if (type_of_operator(m.site.operator_id) != m.mutation_type) fail("operator/type mismatch");
    } catch (const MutationError& e) {
        fail(e.what());
    }
    try {
        if (splice(program.source_text, m.site, m.mutated_fragment) != m.mutated_source)
            fail("re-applying the recorded edit does not reproduce the mutant");
        if (bucket_of(m.site, program) != m.bucket) fail("stored bucket differs from recomputed bucket");
    } catch (const MutationError& e) {
        fail(e.what());
    }
    // Every line outside the site, aligned from either end, must be untouched.
    {
        const auto la = diff::split_lines(program.source_text), lb = diff::split_lines(m.mutated_source);
        const std::size_t before = m.site.line > 0 ? m.site.line - 1 : 0;
        const std::size_t after = la.size() >= m.site.end_line ? la.size() - m.site.end_line : 0;
        bool confined = lb.size() >= before + after;
        for (std::size_t i = 0; confined && i < before; ++i) confined = la[i] == lb[i];
        for (std::size_t j = 0; confined && j < after; ++j)
            confined = la[la.size() - 1 - j] == lb[lb.size() - 1 - j];
        if (!confined)
            fail("edit escapes the site (lines " + std::to_string(m.site.line) + "-" +
                 std::to_string(m.site.end_line) + ")");
    }

    if (m.site.operator_id != op::kPerturbString) {
        const auto lines = diff::split_lines(program.source_text);
        for (std::size_t l = m.site.line; l <= m.site.end_line && l <= lines.size(); ++l) {
            const std::string& text = lines[l - 1];
            const auto p = text.find_first_not_of(" \t\r");
            if (p != std::string::npos && text[p] == '#') fail("edits comment-only line " + std::to_string(l));
        }
        const syntax::Tree tree = lang.parse(program.source_text);
        tree.walk([&](Node n) {
            if (!is_bare_string_statement(n)) return;
            if (m.site.begin < n.end_byte() && n.start_byte() < m.site.end) fail("edits a docstring region");
        });
    }
    return findings;
}

// ---------------------------------------------------------------------------
// Plans

Quota uniform_quota(std::size_t per_cell) {
    Quota q;
    for (MutationType t : kMutationTypes)
        for (LocationBucket b : kBuckets) q[{t, b}] = per_cell;
    return q;
}

std::size_t quota_total(const Quota& quota) {
    std::size_t n = 0;
    for (const auto& [cell, count] : quota) n += count;
    return n;
}

Quota parse_quota(std::string_view spec) {
    if (!spec.empty() && std::all_of(spec.begin(), spec.end(), [](char c) { return c >= '0' && c <= '9'; }))
        return uniform_quota(static_cast<std::size_t>(std::stoul(std::string(spec))));
    Quota q = uniform_quota(0);
    while (!spec.empty()) {
        const auto comma = spec.find(',');
        const std::string_view item = spec.substr(0, comma);
        spec = comma == std::string_view::npos ? std::string_view() : spec.substr(comma + 1);
        if (item.empty()) continue;
        const auto eq = item.find('=');
        const auto us = item.find('_');
        if (eq == std::string_view::npos || us == std::string_view::npos || us > eq)
            throw ConfigError("quota entry must look like stmt_b=2: " + std::string(item));
        const MutationType t = parse_mutation_type(item.substr(0, us));
        const LocationBucket b = parse_bucket(item.substr(us + 1, eq - us - 1));
        const std::string count(item.substr(eq + 1));
        if (count.empty() || count.find_first_not_of("0123456789") != std::string::npos)
            throw ConfigError("quota count must be a non-negative integer: " + std::string(item));
        q[{t, b}] = static_cast<std::size_t>(std::stoul(count));
    }
    return q;
}

json to_json(const Quota& quota) {
    json j = json::object();
    for (MutationType t : kMutationTypes)
        for (LocationBucket b : kBuckets) {
            auto it = quota.find({t, b});
            j[std::string(short_code(t)) + "_" + std::string(short_code(b))] = it == quota.end() ? 0 : it->second;
        }
    return j;
}

Quota quota_from_json(const json& j) {
    Quota q = uniform_quota(0);
    for (const auto& [key, value] : j.items()) {
        const auto us = key.find('_');
        if (us == std::string::npos) throw ConfigError("bad quota key " + key);
        q[{parse_mutation_type(key.substr(0, us)), parse_bucket(key.substr(us + 1))}] = value.get<std::size_t>();
    }
    return q;
}

namespace {

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

}  // namespace

MutationPlan generate_plan(const Program& program, const Quota& quota, std::uint64_t seed,
                           const EngineOptions& options) {
    MutationPlan plan;
    std::set<std::string> seen_sources;

    for (MutationType type : kMutationTypes) {
        bool any = false;
        for (LocationBucket b : kBuckets) {
            auto it = quota.find({type, b});
            any = any || (it != quota.end() && it->second > 0);
        }
        if (!any) continue;

        const std::vector<MutationSite> sites = enumerate_sites(program, type, options);
        std::vector<LocationBucket> site_bucket;
        site_bucket.reserve(sites.size());
        for (const MutationSite& s : sites) site_bucket.push_back(bucket_of(s, program));

        for (LocationBucket bucket : kBuckets) {
            auto qit = quota.find({type, bucket});
            const std::size_t requested = qit == quota.end() ? 0 : qit->second;
            if (requested == 0) continue;

            std::vector<std::size_t> eligible;
            for (std::size_t i = 0; i < sites.size(); ++i)
                if (site_bucket[i] == bucket) eligible.push_back(i);

            const std::string seed_key = std::to_string(seed) + "|" + program.id + "|" +
                                         std::string(short_code(type)) + "|" + std::string(short_code(bucket));
            std::mt19937_64 rng(digest::fnv1a64(seed_key));
            for (std::size_t i = eligible.size(); i > 1; --i)
                std::swap(eligible[i - 1], eligible[bounded(rng, i)]);

            std::size_t produced = 0;
            std::set<std::pair<std::size_t, std::size_t>> used;
            auto take = [&](std::size_t site_idx, std::size_t rep_idx) {
                if (produced >= requested || used.count({site_idx, rep_idx})) return;
                used.insert({site_idx, rep_idx});
                const MutationSite& site = sites[site_idx];
                Mutant m = apply(program, site, site.replacements[rep_idx]);
                if (!seen_sources.insert(m.mutated_source).second) return;
                ++produced;
                m.seed = seed;
                m.name = std::string(short_code(type)) + "_" + std::string(short_code(bucket)) + "_" +
                         std::to_string(produced);
                m.id = program.id + "/" + m.name;
                plan.mutants.push_back(std::move(m));
            };
            // First pass: one replacement per distinct site.
            for (std::size_t s : eligible) take(s, bounded(rng, sites[s].replacements.size()));
            // Second pass: remaining replacements at already-visited sites.
            for (std::size_t s : eligible)
                for (std::size_t r = 0; r < sites[s].replacements.size(); ++r) take(s, r);

            if (produced < requested) plan.shortfalls.push_back({type, bucket, requested, produced});
        }
    }
    return plan;
}

// ---------------------------------------------------------------------------
// Smoke check

SmokeReport smoke_check(const Program& program, Mutant& mutant, const std::optional<RunnerConfig>& runner) {
    SmokeReport report;
    if (!runner || runner->command.empty()) {
        mutant.smoke = std::string(to_string(SmokeOutcome::NotRun));
        return report;
    }

    const fs::path dir = fs::temp_directory_path() /
                         ("mutsum-smoke-" + digest::sha256_hex(mutant.id + mutant.mutated_source).substr(0, 16) +
                          "-" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const fs::path file = dir / (program.id + std::string(syntax::adapter_for(program.language).file_extension()));

    auto run_with = [&](const std::string& source) {
        fsutil::atomic_write(file, source);
        std::vector<std::string> argv;
        for (const std::string& a : runner->command) {
            std::string arg = a;
            const auto pos = arg.find("{file}");
            if (pos != std::string::npos) arg.replace(pos, 6, file.string());
            argv.push_back(std::move(arg));
        }
        return process::run(argv, runner->input, runner->timeout);
    };

    process::RunResult orig, mut;
    try {
        orig = run_with(program.source_text);
        mut = run_with(mutant.mutated_source);
    } catch (...) {
        std::error_code ec;
        fs::remove_all(dir, ec);
        throw;
    }
    std::error_code ec;
    fs::remove_all(dir, ec);

    report.original_timed_out = orig.timed_out;
    report.mutant_timed_out = mut.timed_out;
    if (orig.timed_out && mut.timed_out) {
        report.outcome = SmokeOutcome::NoDifferenceObserved;
        report.detail = "both runs timed out";
    } else if (orig.timed_out != mut.timed_out) {
        report.outcome = SmokeOutcome::Diverged;
        report.detail = mut.timed_out ? "mutant hung while the original completed" : "original hung";
    } else if (orig.exit_status != mut.exit_status) {
        report.outcome = SmokeOutcome::Diverged;
        report.detail = "exit status " + std::to_string(orig.exit_status) + " vs " + std::to_string(mut.exit_status);
    } else if (orig.output != mut.output) {
        report.outcome = SmokeOutcome::Diverged;
        report.detail = "captured output differs";
    } else {
        report.outcome = SmokeOutcome::NoDifferenceObserved;
        report.detail = "identical exit status and output";
    }
    if (report.outcome == SmokeOutcome::NoDifferenceObserved) mutant.suspected_equivalent = true;
    mutant.smoke = std::string(to_string(report.outcome));
    return report;
}

}  // namespace mutsum
