#include "mixsurv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mixsurv/stats.hpp"

namespace mixsurv {

double relative_bias(std::span<const double> estimates, double truth) {
    if (truth == 0.0) throw DataError("relative bias is undefined for a zero truth; use the absolute bias");
    if (estimates.empty()) throw DataError("relative bias of no estimates");
    double s = 0.0;
    for (double e : estimates) s += (truth - e) / truth;
    return s / static_cast<double>(estimates.size());
}

double absolute_bias(std::span<const double> estimates, double truth) {
    if (estimates.empty()) throw DataError("bias of no estimates");
    double s = 0.0;
    for (double e : estimates) s += e - truth;
    return s / static_cast<double>(estimates.size());
}

double rmse(std::span<const double> estimates, double truth) {
    if (estimates.empty()) throw DataError("RMSE of no estimates");
    double s = 0.0;
    for (double e : estimates) s += (truth - e) * (truth - e);
    return std::sqrt(s / static_cast<double>(estimates.size()));
}

double coverage(std::span<const IntervalEstimate> intervals, double truth) {
    if (intervals.empty()) throw DataError("coverage of no intervals");
    std::size_t hit = 0;
    for (const auto& iv : intervals) hit += iv.lower <= truth && truth <= iv.upper;
    return static_cast<double>(hit) / static_cast<double>(intervals.size());
}

double mise(const std::vector<std::vector<double>>& curves, const std::vector<double>& truth) {
    if (curves.empty()) throw DataError("MISE of no curves");
    double total = 0.0;
    for (const auto& c : curves) {
        if (c.size() != truth.size()) {
            throw DataError("MISE grid mismatch: curve has " + std::to_string(c.size()) + " points, truth has " +
                            std::to_string(truth.size()));
        }
        double s = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) s += (c[k] - truth[k]) * (c[k] - truth[k]);
        total += s / static_cast<double>(c.size());
    }
    return total / static_cast<double>(curves.size());
}

MetricsSummary summarize(const std::vector<double>& estimates, const std::vector<bool>& degenerate,
                         const std::vector<IntervalEstimate>& intervals, double truth) {
    if (degenerate.size() != estimates.size() || (!intervals.empty() && intervals.size() != estimates.size())) {
        throw DataError("summarize: misaligned inputs");
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> est;
    std::vector<IntervalEstimate> iv;
    MetricsSummary m;
    for (std::size_t f = 0; f < estimates.size(); ++f) {
        if (degenerate[f] || !std::isfinite(estimates[f])) {
            ++m.degenerate;
            continue;
        }
        est.push_back(estimates[f]);
        if (!intervals.empty()) iv.push_back(intervals[f]);
    }
    m.F = est.size();
    if (est.empty()) {
        m.relative_bias = m.bias = m.sd = m.rmse = m.coverage = m.median = m.q25 = m.q75 = m.mean_interval_sd = nan;
        return m;
    }
    m.relative_bias = truth == 0.0 ? nan : relative_bias(est, truth);
    m.bias = absolute_bias(est, truth);
    m.sd = sample_sd(est);
    m.rmse = rmse(est, truth);
    m.coverage = iv.empty() ? nan : coverage(iv, truth);
    if (!iv.empty()) {
        double s = 0.0;
        for (const auto& i : iv) s += i.sd;
        m.mean_interval_sd = s / static_cast<double>(iv.size());
    } else {
        m.mean_interval_sd = nan;
    }
    std::sort(est.begin(), est.end());
    m.median = quantile_sorted(est, 0.5);
    m.q25 = quantile_sorted(est, 0.25);
    m.q75 = quantile_sorted(est, 0.75);
    return m;
}

}  // namespace mixsurv
