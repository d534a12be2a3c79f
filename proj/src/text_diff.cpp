#include "mutsum/text_diff.hpp"

#include <algorithm>
#include <sstream>

namespace mutsum::diff {

namespace {

struct Edit {
    Op op;
    std::size_t a;  // index into a (Equal/Delete)
    std::size_t b;  // index into b (Equal/Insert)
};

template <typename Eq>
std::vector<Edit> lcs_script(std::size_t n, std::size_t m, Eq&& eq) {
    // Trim common prefix/suffix first; the remaining core is usually tiny.
    std::size_t pre = 0;
    while (pre < n && pre < m && eq(pre, pre)) ++pre;
    std::size_t suf = 0;
    while (suf < n - pre && suf < m - pre && eq(n - 1 - suf, m - 1 - suf)) ++suf;

    const std::size_t cn = n - pre - suf, cm = m - pre - suf;
    std::vector<std::uint32_t> dp((cn + 1) * (cm + 1), 0);
    auto at = [&](std::size_t i, std::size_t j) -> std::uint32_t& { return dp[i * (cm + 1) + j]; };
    for (std::size_t i = cn; i-- > 0;)
        for (std::size_t j = cm; j-- > 0;)
            at(i, j) = eq(pre + i, pre + j) ? at(i + 1, j + 1) + 1 : std::max(at(i + 1, j), at(i, j + 1));

    std::vector<Edit> script;
    for (std::size_t i = 0; i < pre; ++i) script.push_back({Op::Equal, i, i});
    std::size_t i = 0, j = 0;
    while (i < cn || j < cm) {
        if (i < cn && j < cm && eq(pre + i, pre + j)) {
            script.push_back({Op::Equal, pre + i, pre + j});
            ++i;
            ++j;
        } else if (i < cn && (j == cm || at(i + 1, j) >= at(i, j + 1))) {
            script.push_back({Op::Delete, pre + i, pre + j});
            ++i;
        } else {
            script.push_back({Op::Insert, pre + i, pre + j});
            ++j;
        }
    }
    for (std::size_t k = 0; k < suf; ++k) script.push_back({Op::Equal, n - suf + k, m - suf + k});
    return script;
}

std::vector<Edit> line_script(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    return lcs_script(a.size(), b.size(), [&](std::size_t i, std::size_t j) { return a[i] == b[j]; });
}

}  // namespace

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            lines.emplace_back(text.substr(pos));
            break;
        }
        lines.emplace_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    return lines;
}

std::string unified(std::string_view a, std::string_view b, std::string_view a_label,
                    std::string_view b_label, std::size_t context) {
    const auto la = split_lines(a), lb = split_lines(b);
    const auto script = line_script(la, lb);

    std::vector<std::size_t> changes;
    for (std::size_t k = 0; k < script.size(); ++k)
        if (script[k].op != Op::Equal) changes.push_back(k);
    if (changes.empty()) return {};

    std::ostringstream os;
    os << "--- " << a_label << "\n+++ " << b_label << "\n";
    std::size_t c = 0;
    while (c < changes.size()) {
        std::size_t first = changes[c], last = changes[c];
        while (c + 1 < changes.size() && changes[c + 1] - last <= 2 * context + 1) last = changes[++c];
        ++c;
        const std::size_t lo = first > context ? first - context : 0;
        const std::size_t hi = std::min(script.size(), last + context + 1);

        std::size_t a_start = script[lo].a, b_start = script[lo].b;
        std::size_t a_count = 0, b_count = 0;
        for (std::size_t k = lo; k < hi; ++k) {
            if (script[k].op != Op::Insert) ++a_count;
            if (script[k].op != Op::Delete) ++b_count;
        }
        os << "@@ -" << (a_count ? a_start + 1 : a_start) << "," << a_count << " +"
           << (b_count ? b_start + 1 : b_start) << "," << b_count << " @@\n";
        for (std::size_t k = lo; k < hi; ++k) {
            switch (script[k].op) {
                case Op::Equal: os << ' ' << la[script[k].a] << '\n'; break;
                case Op::Delete: os << '-' << la[script[k].a] << '\n'; break;
                case Op::Insert: os << '+' << lb[script[k].b] << '\n'; break;
            }
        }
    }
    return os.str();
}

namespace {

struct Token {
    std::string lead;  // whitespace before the word
    std::string word;
};

std::vector<Token> tokenize(std::string_view s) {
    std::vector<Token> out;
    std::size_t i = 0;
    auto is_space = [](char c) { return c == ' ' || c == '\n' || c == '\t' || c == '\r'; };
    while (i < s.size()) {
        Token t;
        while (i < s.size() && is_space(s[i])) t.lead.push_back(s[i++]);
        while (i < s.size() && !is_space(s[i])) t.word.push_back(s[i++]);
        if (t.word.empty() && !out.empty()) {
            // trailing whitespace rides on a final empty token
            out.push_back(std::move(t));
            break;
        }
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace

std::vector<Chunk> words(std::string_view a, std::string_view b) {
    const auto ta = tokenize(a), tb = tokenize(b);
    const auto script =
        lcs_script(ta.size(), tb.size(), [&](std::size_t i, std::size_t j) { return ta[i].word == tb[j].word; });
    std::vector<Chunk> chunks;
    for (const Edit& e : script) {
        const Token& t = e.op == Op::Insert ? tb[e.b] : ta[e.a];
        // A side's first word has no lead; it still needs a separator when
        // the other side has already emitted text.
        std::string text = (t.lead.empty() && !chunks.empty() ? std::string(" ") : t.lead) + t.word;
        if (!chunks.empty() && chunks.back().op == e.op)
            chunks.back().text += text;
        else
            chunks.push_back({e.op, std::move(text)});
    }
    return chunks;
}

nlohmann::json to_json(const std::vector<Chunk>& chunks) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Chunk& c : chunks) {
        const char* op = c.op == Op::Equal ? "equal" : c.op == Op::Insert ? "insert" : "delete";
        arr.push_back({{"op", op}, {"text", c.text}});
    }
    return arr;
}

LineWindow changed_window(std::string_view a, std::string_view b) {
    const auto la = split_lines(a), lb = split_lines(b);
    LineWindow w;
    if (a == b) return w;
    std::size_t pre = 0;
    while (pre < la.size() && pre < lb.size() && la[pre] == lb[pre]) ++pre;
    std::size_t suf = 0;
    while (suf < la.size() - pre && suf < lb.size() - pre &&
           la[la.size() - 1 - suf] == lb[lb.size() - 1 - suf])
        ++suf;
    w.changed = true;
    w.first = pre + 1;
    w.last = la.size() - suf;
    if (la.size() == lb.size() && pre == la.size()) {
        // only the trailing newline differs
        w.first = w.last = la.size();
    }
    return w;
}

std::size_t hunk_count(std::string_view a, std::string_view b) {
    const auto script = line_script(split_lines(a), split_lines(b));
    std::size_t hunks = 0;
    bool in_change = false;
    for (const Edit& e : script) {
        const bool change = e.op != Op::Equal;
        if (change && !in_change) ++hunks;
        in_change = change;
    }
    return hunks;
}

}  // namespace mutsum::diff
