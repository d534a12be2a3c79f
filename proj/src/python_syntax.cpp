#include "mutsum/python_syntax.hpp"

#include <algorithm>

#include "mutsum/error.hpp"

extern "C" const TSLanguage* tree_sitter_python();

namespace mutsum::syntax {

Tree::Tree(std::string source, TSTree* tree) : source_(std::move(source)), tree_(tree) {
    if (!tree_) throw ParseError("parser returned no tree");
}

Node Tree::root() const noexcept { return Node(ts_tree_root_node(tree_.get())); }

namespace {

std::string spliced(std::string_view src, std::size_t begin, std::size_t end, std::string_view fragment) {
    std::string out;
    out.reserve(src.size() - (end - begin) + fragment.size());
    out.append(src.substr(0, begin)).append(fragment).append(src.substr(end));
    return out;
}

/// Row/column of byte `offset`, counting from `from` at point `start`.
TSPoint advance(std::string_view text, std::size_t from, std::size_t offset, TSPoint start) {
    for (std::size_t i = from; i < offset; ++i) {
        if (text[i] == '\n') {
            ++start.row;
            start.column = 0;
        } else {
            ++start.column;
        }
    }
    return start;
}

}  // namespace

Tree LanguageAdapter::reparse(const Tree& base, std::size_t begin, std::size_t end, std::string_view fragment) const {
    return parse(spliced(base.source(), begin, end, fragment));
}

namespace {

struct ParserDeleter {
    void operator()(TSParser* p) const { ts_parser_delete(p); }
};

class PythonAdapter final : public LanguageAdapter {
public:
    std::string_view name() const override { return "python"; }
    std::string_view file_extension() const override { return ".py"; }
    std::string_view line_comment() const override { return "#"; }
    std::string_view noop_statement() const override { return "pass"; }

    Tree parse(std::string_view source) const override {
        // TSParser is not reentrant; one per call keeps the adapter stateless.
        std::unique_ptr<TSParser, ParserDeleter> parser(ts_parser_new());
        if (!parser || !ts_parser_set_language(parser.get(), tree_sitter_python()))
            throw ParseError("python grammar is incompatible with the tree-sitter runtime");
        std::string owned(source);
        TSTree* tree = ts_parser_parse_string(parser.get(), nullptr, owned.data(),
                                              static_cast<std::uint32_t>(owned.size()));
        return Tree(std::move(owned), tree);
    }

    Tree reparse(const Tree& base, std::size_t begin, std::size_t end, std::string_view fragment) const override {
        const std::string& old = base.source();
        std::string text = spliced(old, begin, end, fragment);
        std::size_t line_start = old.rfind('\n', begin == 0 ? std::string::npos : begin - 1);
        line_start = line_start == std::string::npos ? 0 : line_start + 1;
        TSPoint start{0, 0};
        start.row = static_cast<std::uint32_t>(std::count(old.begin(), old.begin() + static_cast<std::ptrdiff_t>(begin), '\n'));
        start.column = static_cast<std::uint32_t>(begin - line_start);
        TSInputEdit edit{};
        edit.start_byte = static_cast<std::uint32_t>(begin);
        edit.old_end_byte = static_cast<std::uint32_t>(end);
        edit.new_end_byte = static_cast<std::uint32_t>(begin + fragment.size());
        edit.start_point = start;
        edit.old_end_point = advance(old, begin, end, start);
        edit.new_end_point = advance(text, begin, begin + fragment.size(), start);

        std::unique_ptr<TSTree, void (*)(TSTree*)> edited(ts_tree_copy(base.raw()), ts_tree_delete);
        ts_tree_edit(edited.get(), &edit);
        std::unique_ptr<TSParser, ParserDeleter> parser(ts_parser_new());
        if (!parser || !ts_parser_set_language(parser.get(), tree_sitter_python()))
            throw ParseError("python grammar is incompatible with the tree-sitter runtime");
        TSTree* tree = ts_parser_parse_string(parser.get(), edited.get(), text.data(),
                                              static_cast<std::uint32_t>(text.size()));
        return Tree(std::move(text), tree);
    }

    bool accepts(const Tree& tree) const override {
        if (tree.has_error()) return false;
        // The grammar admits blocks holding only comments; CPython does not.
        static const TSSymbol block = ts_language_symbol_for_name(tree_sitter_python(), "block", 5, true);
        static const TSSymbol comment = ts_language_symbol_for_name(tree_sitter_python(), "comment", 7, true);
        TSTreeCursor cursor = ts_tree_cursor_new(tree.root().raw());
        bool ok = true;
        for (;;) {
            const TSNode n = ts_tree_cursor_current_node(&cursor);
            if (ts_node_symbol(n) == block) {
                bool has_statement = false;
                const std::uint32_t count = ts_node_named_child_count(n);
                for (std::uint32_t i = 0; i < count && !has_statement; ++i)
                    has_statement = ts_node_symbol(ts_node_named_child(n, i)) != comment;
                if (!has_statement) {
                    ok = false;
                    break;
                }
            }
            if (ts_tree_cursor_goto_first_child(&cursor)) continue;
            bool moved = false;
            while (!(moved = ts_tree_cursor_goto_next_sibling(&cursor)))
                if (!ts_tree_cursor_goto_parent(&cursor)) break;
            if (!moved) break;
        }
        ts_tree_cursor_delete(&cursor);
        return ok;
    }
};

}  // namespace

const LanguageAdapter& python() {
    static const PythonAdapter adapter;
    return adapter;
}

const LanguageAdapter& adapter_for(std::string_view language) {
    if (language == "python") return python();
    throw ConfigError("unsupported subject language: " + std::string(language));
}

}  // namespace mutsum::syntax
