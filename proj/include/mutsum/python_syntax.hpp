#pragma once

// Thin RAII layer over the tree-sitter C API plus the subject-language
// adapter. Only Python is registered today; other grammars plug in behind
// LanguageAdapter.

#include <tree_sitter/api.h>

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace mutsum::syntax {

class Node {
public:
    Node() : node_{} {}
    explicit Node(TSNode n) : node_(n) {}

    bool is_null() const noexcept { return ts_node_is_null(node_); }
    bool is_named() const noexcept { return ts_node_is_named(node_); }
    bool has_error() const noexcept { return ts_node_has_error(node_); }

    std::string_view kind() const noexcept {
        const char* t = ts_node_type(node_);
        return t ? std::string_view(t) : std::string_view();
    }

    std::uint32_t start_byte() const noexcept { return ts_node_start_byte(node_); }
    std::uint32_t end_byte() const noexcept { return ts_node_end_byte(node_); }
    /// 0-based row of the first byte.
    std::uint32_t start_row() const noexcept { return ts_node_start_point(node_).row; }
    std::uint32_t end_row() const noexcept { return ts_node_end_point(node_).row; }

    std::uint32_t child_count() const noexcept { return ts_node_child_count(node_); }
    std::uint32_t named_child_count() const noexcept { return ts_node_named_child_count(node_); }
    Node child(std::uint32_t i) const noexcept { return Node(ts_node_child(node_, i)); }
    Node named_child(std::uint32_t i) const noexcept { return Node(ts_node_named_child(node_, i)); }
    Node parent() const noexcept { return Node(ts_node_parent(node_)); }
    Node child_by_field(std::string_view field) const noexcept {
        return Node(ts_node_child_by_field_name(node_, field.data(),
                                                static_cast<std::uint32_t>(field.size())));
    }
    /// Field name under which child `i` hangs off this node, or empty.
    std::string_view field_name_for_child(std::uint32_t i) const noexcept {
        const char* f = ts_node_field_name_for_child(node_, i);
        return f ? std::string_view(f) : std::string_view();
    }

    std::string_view text(std::string_view source) const noexcept {
        return source.substr(start_byte(), end_byte() - start_byte());
    }

    bool operator==(const Node& other) const noexcept { return ts_node_eq(node_, other.node_); }

    TSNode raw() const noexcept { return node_; }

private:
    TSNode node_;
};

/// Parsed source. Owns both the tree and the text the nodes index into.
class Tree {
public:
    Tree(std::string source, TSTree* tree);
    Tree(Tree&&) noexcept = default;
    Tree& operator=(Tree&&) noexcept = default;

    Node root() const noexcept;
    const std::string& source() const noexcept { return source_; }
    bool has_error() const noexcept { return root().has_error(); }
    const TSTree* raw() const noexcept { return tree_.get(); }

    /// Document-order (pre-order) walk over every node.
    template <typename Fn>
    void walk(Fn&& fn) const {
        walk_from(root(), fn);
    }

    /// Same walk restricted to the subtree under `n`.
    template <typename Fn>
    static void walk_nodes(Node n, Fn&& fn) {
        walk_from(n, fn);
    }

private:
    template <typename Fn>
    static void walk_from(Node n, Fn& fn) {
        fn(n);
        const std::uint32_t count = n.child_count();
        for (std::uint32_t i = 0; i < count; ++i) walk_from(n.child(i), fn);
    }

    struct TreeDeleter {
        void operator()(TSTree* t) const { ts_tree_delete(t); }
    };

    std::string source_;
    std::unique_ptr<TSTree, TreeDeleter> tree_;
};

class LanguageAdapter {
public:
    virtual ~LanguageAdapter() = default;

    virtual std::string_view name() const = 0;
    virtual std::string_view file_extension() const = 0;
    /// Comment introducer for line-oriented metrics.
    virtual std::string_view line_comment() const = 0;
    /// The statement that does nothing; used when a block would become empty.
    virtual std::string_view noop_statement() const = 0;

    virtual Tree parse(std::string_view source) const = 0;

    /// Whether the interpreter would accept the tree. Grammars can be more
    /// lenient than the language itself, so this goes beyond has_error().
    virtual bool accepts(const Tree& tree) const { return !tree.has_error(); }

    bool parses(std::string_view source) const { return accepts(parse(source)); }

    /// Parse of `base` with bytes [begin, end) replaced by `fragment`. The
    /// default parses from scratch; adapters may reuse the base tree.
    virtual Tree reparse(const Tree& base, std::size_t begin, std::size_t end, std::string_view fragment) const;

    bool parses_edit(const Tree& base, std::size_t begin, std::size_t end, std::string_view fragment) const {
        return accepts(reparse(base, begin, end, fragment));
    }
};

const LanguageAdapter& python();

/// Looks up an adapter by language tag; throws ConfigError when unknown.
const LanguageAdapter& adapter_for(std::string_view language);

}  // namespace mutsum::syntax
