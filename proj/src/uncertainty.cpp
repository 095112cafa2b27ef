#include "mixsurv/uncertainty.hpp"

#include <algorithm>
#include <cmath>

#include "mixsurv/stats.hpp"

namespace mixsurv {

IntervalEstimate percentile_interval(double point, const std::vector<double>& values, std::size_t total,
                                     double level) {
    if (!(level > 0.0 && level < 1.0)) throw ConfigError("interval level must lie in (0,1)");
    IntervalEstimate out;
    out.point = point;
    out.source = "bootstrap_percentile";
    out.count = values.size();
    out.degenerate = total - std::min(total, values.size());
    out.unreliable = total > 0 && static_cast<double>(out.degenerate) > 0.2 * static_cast<double>(total);
    if (values.empty()) {
        out.lower = out.upper = out.sd = std::numeric_limits<double>::quiet_NaN();
        out.unreliable = true;
        return out;
    }
    std::vector<double> v = values;
    std::sort(v.begin(), v.end());
    const double tail = (1.0 - level) / 2.0;
    out.lower = quantile_sorted(v, tail);
    out.upper = quantile_sorted(v, 1.0 - tail);
    out.sd = sample_sd(v);
    return out;
}

IntervalEstimate posterior_interval(const std::vector<double>& draws, double level) {
    if (draws.size() < 10) throw DataError("posterior interval needs at least 10 draws");
    IntervalEstimate out = percentile_interval(mean(draws), draws, draws.size(), level);
    out.source = "posterior";
    return out;
}

std::vector<std::size_t> bootstrap_rows(std::size_t n, std::uint64_t seed, std::size_t b) {
    Rng rng = make_stream(seed, {0xB007ULL, static_cast<std::uint64_t>(b)});
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) r = uniform_index(n, rng);
    return rows;
}

BootstrapResult bootstrap(const Dataset& data, std::size_t outputs, const BootstrapStatistic& statistic, int B,
                          std::uint64_t seed) {
    if (B < 2) throw ConfigError("bootstrap needs B >= 2");
    BootstrapResult res;
    res.values.resize(outputs);
    res.degenerate.assign(outputs, 0);
    res.resamples = static_cast<std::size_t>(B);
    for (int b = 0; b < B; ++b) {
        const auto rows = bootstrap_rows(data.size(), seed, static_cast<std::size_t>(b));
        std::vector<EstimandValue> v;
        try {
            const Dataset resample = data.subset(rows, true);
            v = statistic(resample, derive_seed(seed, {0xB007ULL, static_cast<std::uint64_t>(b), 1}));
            if (v.size() != outputs) throw DataError("bootstrap statistic returned the wrong number of outputs");
        } catch (const FitError&) {
            ++res.failed_refits;
            for (auto& d : res.degenerate) ++d;
            continue;
        } catch (const DataError&) {
            ++res.failed_refits;
            for (auto& d : res.degenerate) ++d;
            continue;
        }
        for (std::size_t k = 0; k < outputs; ++k) {
            if (v[k].degenerate || !std::isfinite(v[k].value)) {
                ++res.degenerate[k];
            } else {
                res.values[k].push_back(v[k].value);
            }
        }
    }
    return res;
}

IntervalEstimate bootstrap_estimand(const Dataset& data, double point,
                                    const std::function<EstimandValue(const Dataset&, std::uint64_t)>& statistic,
                                    int B, std::uint64_t seed) {
    const auto res = bootstrap(
        data, 1, [&](const Dataset& d, std::uint64_t s) { return std::vector<EstimandValue>{statistic(d, s)}; }, B,
        seed);
    return percentile_interval(point, res.values[0], res.resamples);
}

}  // namespace mixsurv
