#pragma once

// Replicate-level accuracy measures: relative bias (truth minus estimate,
// over truth), SD, RMSE, coverage and MISE of exposure-response curves.

#include <span>
#include <string>
#include <vector>

#include "mixsurv/uncertainty.hpp"

namespace mixsurv {

/// (1/F) sum (truth - est) / truth. Throws DataError for truth == 0.
double relative_bias(std::span<const double> estimates, double truth);
/// (1/F) sum (est - truth).
double absolute_bias(std::span<const double> estimates, double truth);
double rmse(std::span<const double> estimates, double truth);
/// Fraction of intervals with lower <= truth <= upper (intervals with NaN bounds miss).
double coverage(std::span<const IntervalEstimate> intervals, double truth);
/// (1/F) sum_f (1/K) sum_k (S_fk - S_k)^2. Throws DataError on a grid-length mismatch.
double mise(const std::vector<std::vector<double>>& curves, const std::vector<double>& truth);

struct MetricsSummary {
    std::size_t F = 0;           // non-degenerate replicates used
    std::size_t degenerate = 0;  // excluded replicates
    double relative_bias = 0.0;  // NaN when truth is 0
    double bias = 0.0;
    double sd = 0.0;             // SD of the estimates across replicates
    double mean_interval_sd = 0.0;
    double rmse = 0.0;
    double coverage = 0.0;       // NaN without intervals
    double median = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
};

/// One cell. `intervals` may be empty; otherwise it is aligned with `estimates`.
/// Entries flagged in `degenerate` are excluded from every metric.
MetricsSummary summarize(const std::vector<double>& estimates, const std::vector<bool>& degenerate,
                         const std::vector<IntervalEstimate>& intervals, double truth);

}  // namespace mixsurv
