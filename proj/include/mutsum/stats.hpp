#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace mutsum::stats {

/// Regularized lower incomplete gamma P(a, x), series below a+1 and a
/// continued fraction above, to ~1e-15.
double gamma_p(double a, double x);
/// Upper complement Q(a, x) = 1 - P(a, x), computed directly for accuracy.
double gamma_q(double a, double x);

/// Survival function of the chi-square distribution.
double chi_square_sf(double x, double df);
/// Upper tail of the standard normal.
double normal_sf(double z);

/// Rows are groups, columns are outcomes (Positive, Negative by default).
struct ContingencyTable {
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels{"positive", "negative"};
    std::vector<std::vector<std::int64_t>> counts;

    std::int64_t total() const;
};

struct StatResult {
    std::string test;  ///< "chi-square" | "mann-whitney-u"
    double statistic = 0.0;
    std::optional<double> df;
    double p_value = 1.0;
    std::optional<double> effect_size;
    std::string effect_name;  ///< "cramers-v" | "rank-biserial"
    std::int64_t n = 0;

    nlohmann::json to_json() const;
};

/// Pearson statistic without continuity correction; Cramér's V attached.
/// Throws StatsError on fewer than 2 rows or columns, ragged rows, negative
/// counts, or a zero row or column total.
StatResult chi_square(const ContingencyTable& table);
double cramers_v(const ContingencyTable& table);

/// Two-sided test on U = min(U_a, U_b) with midranks for ties. Exact
/// enumeration of all group assignments when n_a + n_b <= 12, otherwise the
/// normal approximation with tie and continuity corrections. The effect size
/// is the rank-biserial magnitude 1 - 2U/(n_a n_b).
StatResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b);

inline constexpr std::size_t kExactLimit = 12;

/// confusion[i][j]: rater A said class i, rater B said class j (0 = Positive).
using Confusion = std::array<std::array<std::int64_t, 2>, 2>;

/// Share of items on the diagonal, in [0, 1].
double percent_agreement(const Confusion& c);
/// (p_o - p_e) / (1 - p_e) with marginal-product p_e. Throws StatsError when
/// the table is empty or p_e = 1 (degenerate marginals).
double cohens_kappa(const Confusion& c);

/// pos/total as a percentage rounded half-up to one decimal: "49.3%".
std::string format_rate(std::int64_t positives, std::int64_t total);
/// Difference a/b - c/d in percentage points, one decimal, signed: "+36.0pp".
std::string format_pp(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d);
/// Fixed-point rendering used in every table; `digits` after the point.
std::string format_fixed(double value, int digits);
/// p-values: fixed 4 digits, or "<0.0001" below that.
std::string format_p(double p);

}  // namespace mutsum::stats
