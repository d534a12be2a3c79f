#include "mutsum/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "mutsum/error.hpp"

namespace mutsum::stats {

using nlohmann::json;

namespace {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 100000;

double log_prefactor(double a, double x) { return -x + a * std::log(x) - std::lgamma(a); }

double gamma_series(double a, double x) {
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    for (int i = 0; i < kMaxIter; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * kEps) break;
    }
    return sum * std::exp(log_prefactor(a, x));
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
double gamma_fraction(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return std::exp(log_prefactor(a, x)) * h;
}

void check_gamma_args(double a, double x) {
    if (!(a > 0.0) || std::isnan(x)) throw StatsError("incomplete gamma needs a > 0 and a numeric x");
}

}  // namespace

double gamma_p(double a, double x) {
    check_gamma_args(a, x);
    if (x <= 0.0) return 0.0;
    if (x < a + 1.0) return gamma_series(a, x);
    return 1.0 - gamma_fraction(a, x);
}

double gamma_q(double a, double x) {
    check_gamma_args(a, x);
    if (x <= 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_series(a, x);
    return gamma_fraction(a, x);
}

double chi_square_sf(double x, double df) {
    if (!(df > 0.0)) throw StatsError("chi-square needs df > 0");
    return std::clamp(gamma_q(df / 2.0, x / 2.0), 0.0, 1.0);
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

std::int64_t ContingencyTable::total() const {
    std::int64_t n = 0;
    for (const auto& row : counts)
        for (std::int64_t v : row) n += v;
    return n;
}

json StatResult::to_json() const {
    json j{{"test", test}, {"statistic", statistic}, {"p_value", p_value}, {"n", n}};
    j["df"] = df ? json(*df) : json(nullptr);
    j["effect_size"] = effect_size ? json(*effect_size) : json(nullptr);
    j["effect_name"] = effect_name;
    return j;
}

StatResult chi_square(const ContingencyTable& t) {
    const std::size_t r = t.counts.size();
    if (r < 2) throw StatsError("contingency table needs at least 2 rows");
    const std::size_t c = t.counts[0].size();
    if (c < 2) throw StatsError("contingency table needs at least 2 columns");
    std::vector<std::int64_t> row(r, 0), col(c, 0);
    for (std::size_t i = 0; i < r; ++i) {
        if (t.counts[i].size() != c) throw StatsError("contingency table rows differ in length");
        for (std::size_t j = 0; j < c; ++j) {
            if (t.counts[i][j] < 0) throw StatsError("negative count in contingency table");
            row[i] += t.counts[i][j];
            col[j] += t.counts[i][j];
        }
    }
    auto label = [](const std::vector<std::string>& labels, std::size_t i) {
        return i < labels.size() ? labels[i] : "#" + std::to_string(i);
    };
    for (std::size_t i = 0; i < r; ++i)
        if (row[i] == 0) throw StatsError("row total is zero: " + label(t.row_labels, i));
    for (std::size_t j = 0; j < c; ++j)
        if (col[j] == 0) throw StatsError("column total is zero: " + label(t.col_labels, j));

    const double n = static_cast<double>(t.total());
    double stat = 0.0;
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) {
            const double e = static_cast<double>(row[i]) * static_cast<double>(col[j]) / n;
            const double d = static_cast<double>(t.counts[i][j]) - e;
            stat += d * d / e;
        }
    StatResult out;
    out.test = "chi-square";
    out.statistic = stat;
    out.df = static_cast<double>((r - 1) * (c - 1));
    out.p_value = chi_square_sf(stat, *out.df);
    out.effect_size = std::sqrt(stat / (n * static_cast<double>(std::min(r, c) - 1)));
    out.effect_name = "cramers-v";
    out.n = t.total();
    return out;
}

double cramers_v(const ContingencyTable& t) { return *chi_square(t).effect_size; }

StatResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw StatsError("mann-whitney needs two non-empty samples");
    const std::size_t na = a.size(), nb = b.size(), n = na + nb;
    for (double v : a)
        if (std::isnan(v)) throw StatsError("NaN in sample");
    for (double v : b)
        if (std::isnan(v)) throw StatsError("NaN in sample");

    // Midranks over the pooled sample.
    std::vector<std::pair<double, std::size_t>> pooled;
    for (std::size_t i = 0; i < na; ++i) pooled.emplace_back(a[i], i);
    for (std::size_t i = 0; i < nb; ++i) pooled.emplace_back(b[i], na + i);
    std::sort(pooled.begin(), pooled.end());
    std::vector<double> rank(n);
    double tie_term = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && pooled[j].first == pooled[i].first) ++j;
        const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) rank[pooled[k].second] = mid;
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }

    const double dna = static_cast<double>(na), dnb = static_cast<double>(nb);
    double ra = 0.0;
    for (std::size_t i = 0; i < na; ++i) ra += rank[i];
    const double ua = ra - dna * (dna + 1.0) / 2.0;
    const double u = std::min(ua, dna * dnb - ua);
    const double mu = dna * dnb / 2.0;

    StatResult out;
    out.test = "mann-whitney-u";
    out.statistic = u;
    out.n = static_cast<std::int64_t>(n);
    out.effect_size = 1.0 - 2.0 * u / (dna * dnb);
    out.effect_name = "rank-biserial";

    if (n <= kExactLimit) {
        // Every way of choosing which pooled ranks belong to group a.
        const double observed = std::fabs(ua - mu);
        std::uint64_t hits = 0, all = 0;
        std::vector<std::size_t> pick(na);
        std::iota(pick.begin(), pick.end(), 0);
        while (true) {
            double r = 0.0;
            for (std::size_t k : pick) r += rank[k];
            const double uk = r - dna * (dna + 1.0) / 2.0;
            ++all;
            if (std::fabs(uk - mu) >= observed - 1e-9) ++hits;
            std::size_t i = na;
            while (i > 0 && pick[i - 1] == n - na + i - 1) --i;
            if (i == 0) break;
            ++pick[i - 1];
            for (std::size_t k = i; k < na; ++k) pick[k] = pick[k - 1] + 1;
        }
        out.p_value = static_cast<double>(hits) / static_cast<double>(all);
        return out;
    }

    const double dn = static_cast<double>(n);
    const double var = dna * dnb / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
    if (var <= 0.0) {
        out.p_value = 1.0;
        return out;
    }
    const double z = std::max(0.0, std::fabs(ua - mu) - 0.5) / std::sqrt(var);
    out.p_value = std::min(1.0, 2.0 * normal_sf(z));
    return out;
}

namespace {

std::int64_t confusion_total(const Confusion& c) {
    std::int64_t n = 0;
    for (const auto& row : c)
        for (std::int64_t v : row) {
            if (v < 0) throw StatsError("negative count in confusion matrix");
            n += v;
        }
    if (n == 0) throw StatsError("confusion matrix is empty");
    return n;
}

}  // namespace

double percent_agreement(const Confusion& c) {
    const std::int64_t n = confusion_total(c);
    return static_cast<double>(c[0][0] + c[1][1]) / static_cast<double>(n);
}

double cohens_kappa(const Confusion& c) {
    const std::int64_t n = confusion_total(c);
    const std::int64_t a_pos = c[0][0] + c[0][1], a_neg = c[1][0] + c[1][1];
    const std::int64_t b_pos = c[0][0] + c[1][0], b_neg = c[0][1] + c[1][1];
    if (a_pos * b_pos + a_neg * b_neg == n * n)
        throw StatsError("kappa undefined: degenerate marginals (expected agreement is 1)");
    const double dn = static_cast<double>(n);
    const double po = static_cast<double>(c[0][0] + c[1][1]) / dn;
    const double pe = (static_cast<double>(a_pos) * static_cast<double>(b_pos) +
                       static_cast<double>(a_neg) * static_cast<double>(b_neg)) /
                      (dn * dn);
    return (po - pe) / (1.0 - pe);
}

namespace {

/// round(1000 * num / den) with halves away from zero; den > 0.
std::int64_t tenths_of_percent(std::int64_t num, std::int64_t den) {
    const bool neg = num < 0;
    const std::int64_t m = neg ? -num : num;
    const std::int64_t q = (2000 * m + den) / (2 * den);
    return neg ? -q : q;
}

std::string render_tenths(std::int64_t t) {
    const std::int64_t m = t < 0 ? -t : t;
    return std::to_string(m / 10) + "." + std::to_string(m % 10);
}

}  // namespace

std::string format_rate(std::int64_t positives, std::int64_t total) {
    if (total <= 0 || positives < 0 || positives > total) throw StatsError("rate needs 0 <= positives <= total > 0");
    return render_tenths(tenths_of_percent(positives, total)) + "%";
}

std::string format_pp(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) {
    if (b <= 0 || d <= 0) throw StatsError("rate difference needs positive totals");
    const std::int64_t t = tenths_of_percent(a * d - c * b, b * d);
    return std::string(t < 0 ? "-" : "+") + render_tenths(t) + "pp";
}

std::string format_fixed(double value, int digits) {
    if (std::fabs(value) < 0.5 * std::pow(10.0, -digits)) value = 0.0;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, value);
    return buf;
}

std::string format_p(double p) { return p < 1e-4 ? "<0.0001" : format_fixed(p, 4); }

}  // namespace mutsum::stats
