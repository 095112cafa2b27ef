#include "mixsurv/estimands.hpp"

#include <algorithm>
#include <cmath>

#include "mixsurv/stats.hpp"

namespace mixsurv {

// ---- discrete-time reconstruction -------------------------------------------

std::vector<double> DiscreteTimeModel::bin_probabilities(const ExposureProfile& profile) const {
    std::vector<double> p(static_cast<std::size_t>(grid_.bins()));
    for (int r = 1; r <= grid_.bins(); ++r) p[static_cast<std::size_t>(r - 1)] = event_probability(profile, r);
    return p;
}

int DiscreteTimeModel::bin_for(double t) const {
    if (t <= 0.0) return 1;
    if (t >= grid_.edges().back()) return grid_.bins();
    return grid_.bin_of(t);
}

double DiscreteTimeModel::survival(const ExposureProfile& profile, double t) const {
    if (t <= 0.0) return 1.0;
    const int rt = bin_for(t);
    double s = 1.0;
    for (int r = 1; r < rt; ++r) s *= 1.0 - event_probability(profile, r);
    // Constant hazard inside the bin: geometric interpolation between edges.
    const double frac = (t - grid_.left_edge(rt)) / grid_.width(rt);
    const double q = 1.0 - event_probability(profile, rt);
    s *= q <= 0.0 ? (frac > 0.0 ? 0.0 : 1.0) : std::pow(q, frac);
    return std::clamp(s, 0.0, 1.0);
}

double DiscreteTimeModel::hazard(const ExposureProfile& profile, double t) const {
    const int r = bin_for(t);
    return hazard_from_bin_prob(event_probability(profile, r), grid_, r);
}

double PosteriorSurvivalModel::mean_survival(const ExposureProfile& profile, double t) const {
    const std::size_t n = draw_count();
    if (n == 0) throw FitError("posterior has no draws");
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += draw(i).survival(profile, t);
    return s / static_cast<double>(n);
}

// ---- requests and profiles --------------------------------------------------

std::string to_string(EstimandKind kind) {
    switch (kind) {
        case EstimandKind::individual_hr: return "individual_hr";
        case EstimandKind::individual_survdiff: return "individual_survdiff";
        case EstimandKind::mixture_hr: return "mixture_hr";
        case EstimandKind::mixture_survdiff: return "mixture_survdiff";
        case EstimandKind::interaction_mult: return "interaction_mult";
    }
    return "unknown";
}

EstimandKind estimand_from_string(const std::string& name) {
    for (auto k : kAllEstimands) {
        if (to_string(k) == name) return k;
    }
    throw ConfigError("unknown estimand '" + name + "'");
}

std::string estimand_scale(EstimandKind kind) {
    return kind == EstimandKind::individual_survdiff || kind == EstimandKind::mixture_survdiff ? "additive"
                                                                                                 : "multiplicative";
}

void EstimandRequest::validate(std::size_t num_metals) const {
    if (metal >= num_metals) throw ConfigError("estimand metal index out of range");
    if (kind == EstimandKind::interaction_mult) {
        if (second_metal >= num_metals) throw ConfigError("interaction metal index out of range");
        if (second_metal == metal) throw ConfigError("interaction needs two distinct metals");
    }
    if (low_percentile <= 0 || low_percentile >= 100 || high_percentile <= 0 || high_percentile >= 100) {
        throw ConfigError("estimand percentiles must lie in (0, 100)");
    }
    if (!(t_spec > 0.0)) throw ConfigError("t_spec must be positive");
}

ProfileBasis::ProfileBasis(std::vector<std::vector<double>> metal_percentiles, std::vector<double> confounder_medians)
    : metals_(std::move(metal_percentiles)), confounders_(std::move(confounder_medians)) {
    for (const auto& m : metals_) {
        if (m.size() != 99) throw DataError("profile basis needs percentiles 1..99 for every metal");
    }
}

ProfileBasis ProfileBasis::from_dataset(const Dataset& data) {
    std::vector<std::vector<double>> metals(data.num_metals());
    for (std::size_t j = 0; j < data.num_metals(); ++j) {
        const auto col = data.metals().col(static_cast<Eigen::Index>(j));
        std::vector<double> v(col.data(), col.data() + col.size());
        std::sort(v.begin(), v.end());
        for (int p = 1; p <= 99; ++p) metals[j].push_back(quantile_sorted(v, p / 100.0));
    }
    std::vector<double> conf;
    for (std::size_t l = 0; l < data.num_confounders(); ++l) {
        const auto col = data.confounders().col(static_cast<Eigen::Index>(l));
        conf.push_back(quantile(std::vector<double>(col.data(), col.data() + col.size()), 0.5));
    }
    return ProfileBasis(std::move(metals), std::move(conf));
}

ProfileBasis ProfileBasis::from_population(const ScenarioConfig& config) {
    std::vector<std::vector<double>> metals(config.num_metals);
    for (std::size_t j = 0; j < config.num_metals; ++j) {
        for (int p = 1; p <= 99; ++p) metals[j].push_back(population_metal_quantile(config, j, p / 100.0));
    }
    return ProfileBasis(std::move(metals), population_confounder_medians(config));
}

double ProfileBasis::metal_percentile(std::size_t j, int percent) const {
    if (percent < 1 || percent > 99) throw ConfigError("percentile must be an integer in 1..99");
    return metals_.at(j)[static_cast<std::size_t>(percent - 1)];
}

ExposureProfile ProfileBasis::median_profile() const {
    ExposureProfile p;
    for (std::size_t j = 0; j < metals_.size(); ++j) p.metals.push_back(metal_percentile(j, 50));
    p.confounders = confounders_;
    return p;
}

double compute_t_spec(const Dataset& data) {
    if (data.size() == 0) throw DataError("t_spec of an empty dataset");
    return quantile(std::vector<double>(data.times().data(), data.times().data() + data.size()), 0.8);
}

std::vector<ExposureProfile> build_profiles(const ProfileBasis& basis, const EstimandRequest& request) {
    request.validate(basis.num_metals());
    const int hi = request.high_percentile, lo = request.low_percentile;
    const ExposureProfile med = basis.median_profile();
    auto with = [&](std::size_t j, int p, ExposureProfile base) {
        base.metals[j] = basis.metal_percentile(j, p);
        return base;
    };
    switch (request.kind) {
        case EstimandKind::individual_hr:
        case EstimandKind::individual_survdiff:
            return {with(request.metal, hi, med), with(request.metal, lo, med)};
        case EstimandKind::mixture_hr:
        case EstimandKind::mixture_survdiff: {
            ExposureProfile h = med, l = med;
            for (std::size_t j = 0; j < basis.num_metals(); ++j) {
                h.metals[j] = basis.metal_percentile(j, hi);
                l.metals[j] = basis.metal_percentile(j, lo);
            }
            return {h, l};
        }
        case EstimandKind::interaction_mult: {
            const std::size_t a = request.metal, b = request.second_metal;
            return {with(b, hi, with(a, hi, med)), with(b, lo, with(a, hi, med)), with(b, hi, with(a, lo, med)),
                    with(b, lo, with(a, lo, med))};
        }
    }
    throw ConfigError("unknown estimand kind");
}

// ---- estimands ---------------------------------------------------------------

namespace {

EstimandValue ratio(double num, double den) {
    if (!(den > 0.0) || !std::isfinite(num) || !std::isfinite(den)) return {0.0, true};
    const double v = num / den;
    if (!std::isfinite(v)) return {0.0, true};
    return {v, false};
}

}  // namespace

EstimandValue hazard_ratio(const SurvivalModel& model, const ExposureProfile& high, const ExposureProfile& low,
                           double t_spec) {
    if (auto lhr = model.log_hazard_ratio(high, low)) {
        const double v = std::exp(*lhr);
        return {v, !std::isfinite(v) || v == 0.0};
    }
    return ratio(model.hazard(high, t_spec), model.hazard(low, t_spec));
}

EstimandValue survival_difference(const SurvivalModel& model, const ExposureProfile& high,
                                  const ExposureProfile& low, double t_spec) {
    const double d = model.survival(high, t_spec) - model.survival(low, t_spec);
    return {d, !std::isfinite(d)};
}

EstimandValue multiplicative_interaction(const SurvivalModel& model, const std::vector<ExposureProfile>& p,
                                         double t_spec) {
    if (p.size() != 4) throw DataError("interaction needs four profiles");
    const auto l_hh = model.log_hazard_ratio(p[0], p[3]);
    const auto l_hl = model.log_hazard_ratio(p[1], p[3]);
    const auto l_lh = model.log_hazard_ratio(p[2], p[3]);
    if (l_hh && l_hl && l_lh) {
        const double v = std::exp(*l_hh - *l_hl - *l_lh);
        return {v, !std::isfinite(v) || v == 0.0};
    }
    double h[4];
    for (int i = 0; i < 4; ++i) h[i] = model.hazard(p[static_cast<std::size_t>(i)], t_spec);
    if (!(h[3] > 0.0)) return {0.0, true};
    return ratio(h[0] * h[3], h[1] * h[2]);
}

EstimandValue compute_estimand(const SurvivalModel& model, const ProfileBasis& basis, const EstimandRequest& request) {
    const auto p = build_profiles(basis, request);
    switch (request.kind) {
        case EstimandKind::individual_hr:
        case EstimandKind::mixture_hr: return hazard_ratio(model, p[0], p[1], request.t_spec);
        case EstimandKind::individual_survdiff:
        case EstimandKind::mixture_survdiff: return survival_difference(model, p[0], p[1], request.t_spec);
        case EstimandKind::interaction_mult: return multiplicative_interaction(model, p, request.t_spec);
    }
    throw ConfigError("unknown estimand kind");
}

std::vector<int> curve_percentiles() {
    std::vector<int> p;
    for (int k = 5; k <= 95; k += 5) p.push_back(k);
    return p;
}

namespace {

template <class SurvFn>
std::vector<CurvePoint> curve(const ProfileBasis& basis, std::size_t j, SurvFn surv) {
    if (j >= basis.num_metals()) throw ConfigError("curve metal index out of range");
    std::vector<CurvePoint> out;
    ExposureProfile prof = basis.median_profile();
    for (int k : curve_percentiles()) {
        prof.metals[j] = basis.metal_percentile(j, k);
        out.push_back({k, prof.metals[j], surv(prof)});
    }
    return out;
}

}  // namespace

std::vector<CurvePoint> exposure_response_curve(const SurvivalModel& model, const ProfileBasis& basis,
                                                std::size_t j, double t_spec) {
    return curve(basis, j, [&](const ExposureProfile& p) { return model.survival(p, t_spec); });
}

std::vector<CurvePoint> exposure_response_curve(const PosteriorSurvivalModel& model, const ProfileBasis& basis,
                                                std::size_t j, double t_spec) {
    return curve(basis, j, [&](const ExposureProfile& p) { return model.mean_survival(p, t_spec); });
}

std::vector<EstimandRequest> standard_requests(std::size_t j, std::size_t j2, double t_spec) {
    std::vector<EstimandRequest> out;
    for (auto k : kAllEstimands) {
        EstimandRequest r;
        r.kind = k;
        r.metal = j;
        r.second_metal = j2;
        r.t_spec = t_spec;
        out.push_back(r);
    }
    return out;
}

nlohmann::json to_json(const EstimandRecord& r) {
    return {{"method", r.method},     {"estimand", to_string(r.kind)}, {"scale", estimand_scale(r.kind)},
            {"estimate", r.estimate}, {"t_spec", r.t_spec},            {"degenerate", r.degenerate}};
}

}  // namespace mixsurv
