#pragma once

// Percentile bootstrap intervals (subject-level resampling) and posterior
// quantile intervals.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mixsurv/estimands.hpp"
#include "mixsurv/survival_core.hpp"

namespace mixsurv {

struct IntervalEstimate {
    double point = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double sd = 0.0;
    std::string source;       // "bootstrap_percentile" or "posterior"
    std::size_t count = 0;    // resamples or draws used
    std::size_t degenerate = 0;
    bool unreliable = false;  // more than 20% degenerate resamples
};

/// (2.5, 97.5) percentile interval of the non-degenerate values; `total` is
/// the number of attempts including degenerate ones.
IntervalEstimate percentile_interval(double point, const std::vector<double>& values, std::size_t total,
                                     double level = 0.95);

/// Posterior mean, SD and equal-tailed interval. Needs at least 10 draws.
IntervalEstimate posterior_interval(const std::vector<double>& draws, double level = 0.95);

/// Statistic computed on a resampled dataset: one EstimandValue per output.
/// `seed` is the resample's own derived seed for any randomness inside the refit.
using BootstrapStatistic = std::function<std::vector<EstimandValue>(const Dataset& resample, std::uint64_t seed)>;

struct BootstrapResult {
    std::vector<std::vector<double>> values;  // per output, the non-degenerate resample values
    std::vector<std::size_t> degenerate;      // per output
    std::size_t failed_refits = 0;
    std::size_t resamples = 0;
};

/// Resamples n subjects with replacement B times (stream (seed, b) per
/// resample) and evaluates the statistic. Refit failures count as degenerate
/// for every output.
BootstrapResult bootstrap(const Dataset& data, std::size_t outputs, const BootstrapStatistic& statistic, int B,
                          std::uint64_t seed);

/// Single-output convenience: interval around `point`.
IntervalEstimate bootstrap_estimand(const Dataset& data, double point,
                                    const std::function<EstimandValue(const Dataset&, std::uint64_t)>& statistic,
                                    int B, std::uint64_t seed);

/// Row indices of bootstrap resample b.
std::vector<std::size_t> bootstrap_rows(std::size_t n, std::uint64_t seed, std::size_t b);

}  // namespace mixsurv
