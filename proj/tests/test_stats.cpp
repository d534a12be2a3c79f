#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mutsum/error.hpp"
#include "mutsum/stats.hpp"
#include "support/oracles.hpp"

using namespace mutsum;
using namespace mutsum::stats;
using namespace mutsum::testing;

namespace {

ContingencyTable table_of(std::vector<std::vector<std::int64_t>> counts) {
    ContingencyTable t;
    for (std::size_t i = 0; i < counts.size(); ++i) t.row_labels.push_back("g" + std::to_string(i));
    t.counts = std::move(counts);
    return t;
}

}  // namespace

TEST_CASE("chi-square on the complexity table") {
    const StatResult r = chi_square(table_of(kComplexityCounts));
    CHECK(r.statistic == doctest::Approx(chi_square_shortcut(kComplexityCounts)).epsilon(1e-12));
    CHECK(std::fabs(r.statistic - 69.04) < 0.05);
    CHECK(*r.df == 3);
    CHECK(r.p_value < 0.001);
    CHECK(std::fabs(*r.effect_size - 0.462) < 0.005);
    CHECK(r.n == 324);
    CHECK(format_p(r.p_value) == "<0.0001");
}

TEST_CASE("chi-square on the mutation-type table") {
    const StatResult r = chi_square(table_of(kMutationTypeCounts));
    CHECK(r.statistic == doctest::Approx(1.948051948051948).epsilon(1e-12));
    CHECK(r.p_value == doctest::Approx(0.37755992769704777).epsilon(1e-9));
    CHECK(*r.df == 2);
}

TEST_CASE("chi-square edge tables") {
    const StatResult flat = chi_square(table_of({{10, 20}, {5, 10}, {30, 60}}));
    CHECK(flat.statistic == doctest::Approx(0.0));
    CHECK(flat.p_value == doctest::Approx(1.0));
    CHECK(*flat.effect_size == doctest::Approx(0.0));

    const StatResult perfect = chi_square(table_of({{50, 0}, {0, 50}}));
    CHECK(*perfect.effect_size == doctest::Approx(1.0));

    CHECK_THROWS_AS(chi_square(table_of({{1, 2}})), StatsError);
    CHECK_THROWS_AS(chi_square(table_of({{1, 2}, {3}})), StatsError);
    CHECK_THROWS_AS(chi_square(table_of({{1, -2}, {3, 4}})), StatsError);
    CHECK_THROWS_AS(chi_square(table_of({{0, 0}, {3, 4}})), StatsError);
    CHECK_THROWS_AS(chi_square(table_of({{0, 2}, {0, 4}})), StatsError);
}

TEST_CASE("chi-square is invariant under row permutation and transposition") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::int64_t> cell(1, 60);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t rows = 2 + trial % 4;
        std::vector<std::vector<std::int64_t>> counts(rows, std::vector<std::int64_t>(2));
        for (auto& r : counts)
            for (auto& v : r) v = cell(rng);
        const double base = chi_square(table_of(counts)).statistic;
        CHECK(base == doctest::Approx(chi_square_shortcut(counts)).epsilon(1e-10));
        auto shuffled = counts;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK(chi_square(table_of(shuffled)).statistic == doctest::Approx(base).epsilon(1e-12));
        std::vector<std::vector<std::int64_t>> t(2, std::vector<std::int64_t>(rows));
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < 2; ++j) t[j][i] = counts[i][j];
        CHECK(chi_square(table_of(t)).statistic == doctest::Approx(base).epsilon(1e-10));
    }
}

TEST_CASE("chi-square survival at textbook critical values") {
    const std::pair<int, double> crit[] = {{1, 3.84}, {2, 5.99}, {3, 7.81}};
    for (auto [df, x] : crit) CHECK(std::fabs(chi_square_sf(x, df) - 0.05) < 5e-4);
    const std::pair<int, double> exact[] = {{1, 3.8414588206941285}, {2, 5.991464547107983},
                                            {3, 7.814727903251178}, {4, 9.487729036781158},
                                            {5, 11.070497693516355}, {10, 18.30703805327515},
                                            {20, 31.41043284423092}};
    for (auto [df, x] : exact) CHECK(chi_square_sf(x, df) == doctest::Approx(0.05).epsilon(1e-9));
}

TEST_CASE("chi-square survival matches closed forms over a grid") {
    for (int df = 1; df <= 12; ++df)
        for (double x = 0.05; x < 60.0; x *= 1.37) {
            const double want = chi_square_sf_closed(x, df);
            CHECK(std::fabs(chi_square_sf(x, df) - want) < 1e-12 + 1e-9 * want);
        }
    CHECK(gamma_p(2.5, 1.0) + gamma_q(2.5, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(normal_sf(0.0) == doctest::Approx(0.5));
    CHECK(normal_sf(1.959963984540054) == doctest::Approx(0.025).epsilon(1e-9));
}

TEST_CASE("mann-whitney exact p equals brute-force enumeration") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t na = 1 + rng() % 9;
        const std::size_t nb = 1 + rng() % (10 - na);
        const auto a = random_sample(rng, na, 2 + trial % 8);
        const auto b = random_sample(rng, nb, 2 + trial % 8);
        const StatResult r = mann_whitney_u(a, b);
        const MwuOracle o = mann_whitney_bruteforce(a, b);
        CAPTURE(trial);
        CHECK(std::fabs(r.statistic - o.u) < 1e-9);
        CHECK(std::fabs(r.p_value - o.p) < 1e-9);
    }
}

TEST_CASE("mann-whitney basic cases") {
    const StatResult sep = mann_whitney_u({1, 2, 3}, {4, 5, 6});
    CHECK(sep.statistic == 0.0);
    CHECK(sep.p_value == doctest::Approx(0.1));
    CHECK(*sep.effect_size == doctest::Approx(1.0));

    const StatResult same = mann_whitney_u({5, 5, 5}, {5, 5, 5});
    CHECK(same.statistic == 4.5);
    CHECK(same.p_value == 1.0);
    CHECK(*same.effect_size == doctest::Approx(0.0));

    CHECK_THROWS_AS(mann_whitney_u({}, {1.0}), StatsError);
    CHECK_THROWS_AS(mann_whitney_u({NAN}, {1.0}), StatsError);
}

TEST_CASE("mann-whitney is symmetric in its arguments") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = random_sample(rng, 1 + rng() % 15, 6);
        const auto b = random_sample(rng, 1 + rng() % 15, 6);
        const StatResult ab = mann_whitney_u(a, b), ba = mann_whitney_u(b, a);
        CHECK(ab.statistic == ba.statistic);
        CHECK(ab.p_value == doctest::Approx(ba.p_value).epsilon(1e-12));
    }
}

TEST_CASE("mann-whitney normal approximation matches reference values") {
    // Reference p-values: two-sided asymptotic test with tie and continuity
    // corrections as computed by scipy.stats.mannwhitneyu.
    const StatResult r = mann_whitney_u({3, 5, 7, 7, 9, 11, 12, 15, 20, 22, 25, 30, 31, 40},
                                        {1, 2, 2, 4, 7, 8, 9, 10, 10, 13, 14});
    CHECK(r.statistic == 36.5);
    CHECK(r.p_value == doctest::Approx(0.028325441333750822).epsilon(1e-9));

    std::vector<double> a, b;
    for (int i = 1; i <= 20; ++i) a.push_back(i);
    for (int i = 5; i < 30; ++i) b.push_back(i + 0.5);
    const StatResult s = mann_whitney_u(a, b);
    CHECK(s.statistic == 120.0);
    CHECK(s.p_value == doctest::Approx(0.00309653729308269).epsilon(1e-9));
}

TEST_CASE("kappa on the reconstructed rater matrix") {
    CHECK(std::fabs(cohens_kappa(kRaterConfusion) - 0.928) < 0.005);
    CHECK(std::fabs(100.0 * percent_agreement(kRaterConfusion) - 96.6) < 0.1);
}

TEST_CASE("kappa formula equals the expanded-vector oracle") {
    std::mt19937_64 rng(29);
    int checked = 0;
    while (checked < 500) {
        const Confusion c = random_confusion(rng, 40);
        const std::int64_t n = c[0][0] + c[0][1] + c[1][0] + c[1][1];
        const std::int64_t a0 = c[0][0] + c[0][1], b0 = c[0][0] + c[1][0];
        if (n == 0 || a0 * b0 + (n - a0) * (n - b0) == n * n) {
            CHECK_THROWS_AS(cohens_kappa(c), StatsError);
            continue;
        }
        CHECK(std::fabs(cohens_kappa(c) - kappa_expanded(c)) < 1e-12);
        ++checked;
    }
}

TEST_CASE("kappa edge cases") {
    CHECK(cohens_kappa(Confusion{{{10, 0}, {0, 10}}}) == doctest::Approx(1.0));
    CHECK(cohens_kappa(Confusion{{{25, 25}, {25, 25}}}) == doctest::Approx(0.0));
    CHECK(cohens_kappa(Confusion{{{0, 10}, {10, 0}}}) == doctest::Approx(-1.0));
    CHECK_THROWS_AS(cohens_kappa(Confusion{{{7, 0}, {0, 0}}}), StatsError);
    CHECK_THROWS_AS(cohens_kappa(Confusion{}), StatsError);
}

TEST_CASE("rate formatting rounds half away from zero on exact rationals") {
    CHECK(format_rate(74, 150) == "49.3%");
    CHECK(format_rate(128, 150) == "85.3%");
    CHECK(format_rate(1, 8) == "12.5%");
    CHECK(format_rate(1, 16) == "6.3%");
    CHECK(format_rate(0, 5) == "0.0%");
    CHECK(format_rate(5, 5) == "100.0%");
    CHECK(format_rate(62, 128) == "48.4%");
    CHECK(format_pp(128, 150, 74, 150) == "+36.0pp");
    CHECK(format_pp(22, 50, 44, 50) == "-44.0pp");
    CHECK(format_pp(1, 2, 1, 2) == "+0.0pp");
    CHECK(format_fixed(0.46159, 3) == "0.462");
    CHECK(format_p(0.37755992769704777) == "0.3776");
}

TEST_CASE("stat results serialize") {
    const auto j = chi_square(table_of(kComplexityCounts)).to_json();
    CHECK(j.at("test") == "chi-square");
    CHECK(j.at("df") == 3);
    CHECK(j.at("effect_name") == "cramers-v");
}
