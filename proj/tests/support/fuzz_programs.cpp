#include "fuzz_programs.hpp"

#include <random>
#include <sstream>
#include <vector>

namespace mutsum::testing {

namespace {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    std::string module() {
        std::ostringstream os;
        if (coin(0.5)) os << "\"\"\"Module docstring " << pick_word() << ".\"\"\"\n\n";
        if (coin(0.3)) os << "import math\n\n";
        const int functions = range(1, 3);
        const int classes = range(0, 2);
        for (int f = 0; f < functions; ++f) {
            function(os, "", "func_" + std::to_string(f), false);
            os << "\n\n";
        }
        for (int c = 0; c < classes; ++c) {
            os << "class Thing" << c << ":\n";
            if (coin(0.5)) os << "    \"\"\"A " << pick_word() << " holder.\"\"\"\n\n";
            os << "    def __init__(self, size=" << range(0, 9) << "):\n";
            os << "        self.items = [" << range(0, 9) << ", " << range(0, 9) << "]\n";
            os << "        self.size = size\n\n";
            const int methods = range(1, 3);
            for (int m = 0; m < methods; ++m) {
                function(os, "    ", "method_" + std::to_string(m), true);
                if (m + 1 < methods) os << "\n";
            }
            os << "\n\n";
        }
        os << "if __name__ == \"__main__\":\n";
        os << "    total = " << range(0, 5) << "\n";
        const int lines = range(1, 3);
        for (int i = 0; i < lines; ++i)
            os << "    total += func_0(" << range(0, 9) << ")\n";
        os << "    print(total)\n";
        return os.str();
    }

private:
    std::mt19937_64 rng_;
    std::vector<std::string> vars_;

    int range(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool coin(double p) { return std::uniform_real_distribution<double>(0, 1)(rng_) < p; }
    template <typename T>
    const T& one_of(const std::vector<T>& v) {
        return v[static_cast<std::size_t>(range(0, static_cast<int>(v.size()) - 1))];
    }
    std::string pick_word() { return one_of<std::string>({"small", "odd", "plain", "sorted", "tiny"}); }

    std::string var() { return vars_.empty() ? std::string("n") : one_of(vars_); }

    std::string literal() {
        switch (range(0, 5)) {
            case 0: return std::to_string(range(0, 20));
            case 1: return "-" + std::to_string(range(1, 5));
            case 2: return std::to_string(range(0, 9)) + "." + std::to_string(range(0, 9));
            case 3: return coin(0.5) ? "True" : "False";
            case 4: return "\"" + pick_word() + "\"";
            default: return "data[" + std::to_string(range(0, 2)) + "]";
        }
    }

    std::string arith(int depth) {
        if (depth == 0 || coin(0.4)) return coin(0.5) ? var() : std::to_string(range(0, 12));
        static const std::vector<std::string> ops = {"+", "-", "*", "//", "/", "%"};
        std::string lhs = arith(depth - 1), rhs = arith(depth - 1);
        const std::string& o = one_of(ops);
        if (o == "//" || o == "/" || o == "%") rhs = std::to_string(range(1, 9));
        std::string e = lhs + " " + o + " " + rhs;
        return coin(0.3) ? "(" + e + ")" : e;
    }

    std::string condition() {
        static const std::vector<std::string> cmps = {"==", "!=", "<", ">", "<=", ">="};
        std::string c = arith(1) + " " + one_of(cmps) + " " + arith(1);
        if (coin(0.3)) c += std::string(coin(0.5) ? " and " : " or ") + var() + " " + one_of(cmps) + " " +
                            std::to_string(range(0, 9));
        if (coin(0.1)) c = "not " + c;
        return c;
    }

    void statement(std::ostringstream& os, const std::string& ind, int depth) {
        switch (range(0, depth > 0 ? 9 : 6)) {
            case 0:
            case 1: {
                std::string v = "v" + std::to_string(vars_.size());
                os << ind << v << " = " << arith(2) << "\n";
                vars_.push_back(v);
                break;
            }
            case 2: os << ind << var() << " += " << range(1, 4) << "\n"; break;
            case 3: os << ind << "print(" << var() << ", " << literal() << ")\n"; break;
            case 4:
                os << ind << "# note about " << pick_word() << " values\n";
                os << ind << var() << " = " << arith(1) << "\n";
                break;
            case 5: os << ind << "data.append(" << arith(1) << ")\n"; break;
            case 6: os << ind << "flag = " << (coin(0.5) ? "True" : "False") << "\n"; break;
            case 7:
                os << ind << "if " << condition() << ":\n";
                block(os, ind + "    ", depth - 1);
                if (coin(0.4)) {
                    os << ind << "else:\n";
                    block(os, ind + "    ", depth - 1);
                }
                break;
            case 8:
                os << ind << "for k in range(" << range(1, 5) << "):\n";
                block(os, ind + "    ", depth - 1);
                break;
            default:
                os << ind << "while " << var() << " > " << range(0, 3) << " and " << var() << " < "
                   << range(10, 50) << ":\n";
                os << ind << "    " << var() << " -= 1\n";
                os << ind << "    break\n";
                break;
        }
    }

    void block(std::ostringstream& os, const std::string& ind, int depth) {
        const int n = range(1, 3);
        for (int i = 0; i < n; ++i) statement(os, ind, depth);
    }

    void function(std::ostringstream& os, const std::string& ind, const std::string& name, bool method) {
        vars_ = {"n"};
        os << ind << "def " << name << "(" << (method ? "self, " : "") << "n";
        if (coin(0.5)) os << ", step=" << range(0, 5);
        if (coin(0.3)) os << ", scale=" << range(0, 3) << "." << range(0, 9);
        os << "):\n";
        const std::string body = ind + "    ";
        if (coin(0.4)) os << body << "\"\"\"Compute " << pick_word() << " things.\"\"\"\n";
        os << body << "data = [" << range(0, 9) << ", " << range(0, 9) << ", " << range(0, 9) << "]\n";
        if (coin(0.3)) os << "\n";
        const int stmts = range(2, 6);
        for (int i = 0; i < stmts; ++i) {
            statement(os, body, 2);
            if (coin(0.15)) os << "\n";
        }
        os << body << "return " << (coin(0.7) ? arith(1) : std::string("data[0]")) << "\n";
    }
};

}  // namespace

std::string fuzz_python_source(std::uint64_t seed) { return Gen(seed).module(); }

Program fuzz_program(std::uint64_t seed) {
    return make_program("fuzz_" + std::to_string(seed), fuzz_python_source(seed), Origin::Synthetic);
}

}  // namespace mutsum::testing
