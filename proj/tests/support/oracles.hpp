#pragma once

// Slow, independent reimplementations used to check the statistics module.

#include <cstdint>
#include <random>
#include <vector>

#include "mutsum/stats.hpp"

namespace mutsum::testing {

/// n * (sum O^2 / (R C) - 1); no expected-count table.
double chi_square_shortcut(const std::vector<std::vector<std::int64_t>>& counts);

/// Closed-form chi-square survival for integer df (erfc / Poisson sums).
double chi_square_sf_closed(double x, int df);

struct MwuOracle {
    double u = 0.0;  ///< min(U_a, U_b)
    double p = 1.0;
};

/// U by pairwise comparison; p by enumerating every bitmask of the pooled
/// sample with |a| bits set. Only for pooled sizes up to ~20.
MwuOracle mann_whitney_bruteforce(const std::vector<double>& a, const std::vector<double>& b);

/// Kappa from label vectors reconstructed out of the confusion matrix.
double kappa_expanded(const stats::Confusion& c);

/// Random small sample with deliberate ties.
std::vector<double> random_sample(std::mt19937_64& rng, std::size_t n, int distinct);

stats::Confusion random_confusion(std::mt19937_64& rng, std::int64_t max_cell);

/// Aggregate tables reproduced by the statistics tests.
inline const std::vector<std::vector<std::int64_t>> kComplexityCounts{{62, 19}, {27, 54}, {23, 58}, {14, 67}};
inline const std::vector<std::vector<std::int64_t>> kMutationTypeCounts{{42, 66}, {37, 71}, {47, 61}};
inline constexpr stats::Confusion kRaterConfusion{{{121, 5}, {6, 192}}};

}  // namespace mutsum::testing
