#include "mixsurv/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/math/special_functions/erf.hpp>

namespace mixsurv {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t h = mix64(master_seed);
    for (std::uint64_t k : keys) {
        h = mix64(h ^ mix64(k + 0x632BE59BD9B4E019ULL));
    }
    return h;
}

Rng make_stream(std::uint64_t master_seed, std::initializer_list<std::uint64_t> keys) {
    const std::uint64_t s = derive_seed(master_seed, keys);
    std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                      static_cast<std::uint32_t>(mix64(s)), static_cast<std::uint32_t>(mix64(s) >> 32)};
    return Rng(seq);
}

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw DataError("quantile of an empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw DataError("quantile probability outside [0,1]");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double quantile(std::vector<double> values, double p) {
    std::sort(values.begin(), values.end());
    return quantile_sorted(values, p);
}

double quantile_inverse_ecdf_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw DataError("quantile of an empty sample");
    const double n = static_cast<double>(sorted.size());
    // Guard against p*n landing a hair above an integer through rounding.
    auto k = static_cast<std::size_t>(std::ceil(p * n - 1e-9));
    k = std::clamp<std::size_t>(k, 1, sorted.size());
    return sorted[k - 1];
}

double mean(std::span<const double> x) {
    if (x.empty()) return 0.0;
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_sd(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DataError("normal quantile requires p in (0,1)");
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double uniform01(Rng& rng) {
    // 53 random bits, strictly inside (0,1).
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

std::size_t uniform_index(std::size_t n, Rng& rng) {
    if (n == 0) throw DataError("uniform_index over an empty range");
    return std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)));
}

std::vector<int> assign_folds(std::size_t n, int folds, Rng& rng) {
    if (folds < 1) throw ConfigError("fold count must be positive");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[uniform_index(i, rng)]);
    std::vector<int> fold(n);
    for (std::size_t k = 0; k < n; ++k) fold[perm[k]] = static_cast<int>(k % static_cast<std::size_t>(folds));
    return fold;
}

double standard_normal(Rng& rng) {
    const double u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double truncated_normal_above(double lower, Rng& rng) {
    if (lower < 0.5) {
        for (;;) {
            const double z = standard_normal(rng);
            if (z > lower) return z;
        }
    }
    // Exponential proposal (Robert 1995) for the far tail.
    const double rate = 0.5 * (lower + std::sqrt(lower * lower + 4.0));
    for (;;) {
        const double z = lower - std::log(uniform01(rng)) / rate;
        const double accept = std::exp(-0.5 * (z - rate) * (z - rate));
        if (uniform01(rng) <= accept) return z;
    }
}

double roc_auc(std::span<const double> score, std::span<const int> label) {
    if (score.size() != label.size()) throw DataError("roc_auc: size mismatch");
    std::vector<std::size_t> order(score.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });
    double positives = 0.0;
    double negatives = 0.0;
    double rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && score[order[j]] == score[order[i]]) ++j;
        const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) {
            if (label[order[k]] != 0) {
                positives += 1.0;
                rank_sum += mid_rank;
            } else {
                negatives += 1.0;
            }
        }
        i = j;
    }
    if (positives == 0.0 || negatives == 0.0) throw DataError("roc_auc: both classes required");
    return (rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

}  // namespace mixsurv
