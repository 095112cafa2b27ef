#pragma once

// Shared numerical helpers: error types, seeded RNG streams, quantiles,
// normal distribution functions and ROC AUC.

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mixsurv {

/// Invalid input data or arguments.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration (maps to CLI exit code 1).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A model fit failed (non-convergence, rank deficiency, separation...).
class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Deterministic independent stream keyed by (master seed, keys...).
/// Streams depend only on the key tuple, never on scheduling order.
Rng make_stream(std::uint64_t master_seed, std::initializer_list<std::uint64_t> keys);

/// Derive a child seed from a seed and keys (same mixing as make_stream).
std::uint64_t derive_seed(std::uint64_t master_seed, std::initializer_list<std::uint64_t> keys);

/// Stable 64-bit FNV-1a hash of a string.
std::uint64_t fnv1a(std::string_view text);

/// Linear-interpolation sample quantile (type 7). `sorted` must be ascending.
double quantile_sorted(std::span<const double> sorted, double p);

/// Type-7 quantile of an unsorted sample.
double quantile(std::vector<double> values, double p);

/// Inverse empirical CDF (type 1): smallest x with F_n(x) >= p.
double quantile_inverse_ecdf_sorted(std::span<const double> sorted, double p);

double mean(std::span<const double> x);

/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
double sample_sd(std::span<const double> x);

double normal_cdf(double x);
double normal_quantile(double p);

/// Standard normal truncated to (lower, +inf).
double truncated_normal_above(double lower, Rng& rng);

/// Area under the ROC curve (Mann-Whitney, ties count one half).
/// Throws DataError when either class is absent.
double roc_auc(std::span<const double> score, std::span<const int> label);

double uniform01(Rng& rng);

/// Uniform index in [0, n).
std::size_t uniform_index(std::size_t n, Rng& rng);

/// Balanced random fold labels 0..folds-1 for n units (Fisher-Yates shuffle).
std::vector<int> assign_folds(std::size_t n, int folds, Rng& rng);
double standard_normal(Rng& rng);

}  // namespace mixsurv
