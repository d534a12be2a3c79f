#include "support/oracles.hpp"

#include <bit>
#include <cmath>
#include <numbers>

namespace mutsum::testing {

double chi_square_shortcut(const std::vector<std::vector<std::int64_t>>& counts) {
    std::vector<long double> rows(counts.size(), 0), cols(counts.at(0).size(), 0);
    long double n = 0;
    for (std::size_t i = 0; i < counts.size(); ++i)
        for (std::size_t j = 0; j < counts[i].size(); ++j) {
            rows[i] += counts[i][j];
            cols[j] += counts[i][j];
            n += counts[i][j];
        }
    long double s = 0;
    for (std::size_t i = 0; i < counts.size(); ++i)
        for (std::size_t j = 0; j < counts[i].size(); ++j)
            s += static_cast<long double>(counts[i][j]) * counts[i][j] / (rows[i] * cols[j]);
    return static_cast<double>(n * (s - 1));
}

double chi_square_sf_closed(double x, int df) {
    const double h = x / 2.0;
    if (df % 2 == 0) {
        double term = 1.0, sum = 0.0;
        for (int k = 0; k < df / 2; ++k) {
            if (k > 0) term *= h / k;
            sum += term;
        }
        return std::exp(-h) * sum;
    }
    // Odd df: erfc(sqrt(x/2)) plus the half-integer terms.
    double sum = std::erfc(std::sqrt(h));
    double term = std::sqrt(x) * std::exp(-h) * std::sqrt(2.0 / std::numbers::pi);
    for (int k = 3; k <= df; k += 2) {
        sum += term;
        term *= x / static_cast<double>(k);
    }
    return sum;
}

namespace {

double u_of(const std::vector<double>& a, const std::vector<double>& b) {
    double u = 0.0;
    for (double x : a)
        for (double y : b) u += x > y ? 1.0 : x == y ? 0.5 : 0.0;
    return u;
}

}  // namespace

MwuOracle mann_whitney_bruteforce(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t na = a.size(), n = a.size() + b.size();
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    const double mu = static_cast<double>(na * b.size()) / 2.0;
    const double ua = u_of(a, b);
    const double observed = std::fabs(ua - mu);

    std::uint64_t hits = 0, all = 0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(std::popcount(mask)) != na) continue;
        std::vector<double> x, y;
        for (std::size_t i = 0; i < n; ++i) ((mask >> i) & 1u ? x : y).push_back(pooled[i]);
        ++all;
        if (std::fabs(u_of(x, y) - mu) >= observed - 1e-9) ++hits;
    }
    return {std::min(ua, 2.0 * mu - ua), static_cast<double>(hits) / static_cast<double>(all)};
}

double kappa_expanded(const stats::Confusion& c) {
    std::vector<int> ra, rb;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (std::int64_t k = 0; k < c[i][j]; ++k) {
                ra.push_back(i);
                rb.push_back(j);
            }
    const double n = static_cast<double>(ra.size());
    double agree = 0, a0 = 0, b0 = 0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        agree += ra[i] == rb[i];
        a0 += ra[i] == 0;
        b0 += rb[i] == 0;
    }
    const double po = agree / n;
    const double pe = (a0 / n) * (b0 / n) + ((n - a0) / n) * ((n - b0) / n);
    return (po - pe) / (1.0 - pe);
}

std::vector<double> random_sample(std::mt19937_64& rng, std::size_t n, int distinct) {
    std::uniform_int_distribution<int> d(1, distinct);
    std::vector<double> out(n);
    for (double& v : out) v = d(rng);
    return out;
}

stats::Confusion random_confusion(std::mt19937_64& rng, std::int64_t max_cell) {
    std::uniform_int_distribution<std::int64_t> d(0, max_cell);
    stats::Confusion c{};
    for (auto& row : c)
        for (auto& v : row) v = d(rng);
    return c;
}

}  // namespace mutsum::testing
