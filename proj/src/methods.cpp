#include "mixsurv/methods.hpp"

#include <cmath>

#include "mixsurv/cox.hpp"
#include "mixsurv/gpr.hpp"

namespace mixsurv {

std::string to_string(Method m) {
    switch (m) {
        case Method::cox: return "cox";
        case Method::cox_int: return "cox_int";
        case Method::cox_ps: return "cox_ps";
        case Method::coxen: return "coxen";
        case Method::coxen_int: return "coxen_int";
        case Method::mars: return "mars";
        case Method::gpr: return "gpr";
        case Method::bart: return "bart";
    }
    return "unknown";
}

Method method_from_string(const std::string& name) {
    for (auto m : kAllMethods) {
        if (to_string(m) == name) return m;
    }
    throw ConfigError("unknown method '" + name + "' (expected cox, cox_int, cox_ps, coxen, coxen_int, mars, gpr, bart)");
}

bool is_discrete_time(Method m) { return m == Method::mars || m == Method::gpr || m == Method::bart; }

void MethodSettings::validate() const {
    if (bins < 2) throw ConfigError("bins must be at least 2");
    pspline.validate();
    coxen.validate();
    bart.validate();
    if (mars.p_grid.empty() || mars.d_grid.empty()) throw ConfigError("MARS grids must be non-empty");
    for (int d : mars.d_grid) {
        if (d < 1 || d > 2) throw ConfigError("MARS degree must be 1 or 2");
    }
    for (int p : mars.p_grid) {
        if (p < 1) throw ConfigError("MARS P must be positive");
    }
    if (mars.folds < 2) throw ConfigError("MARS folds must be at least 2");
}

nlohmann::json to_json(const MethodSettings& s) {
    nlohmann::json ps = {{"main_basis_size", s.pspline.main_basis_size},
                         {"tensor_marginal_size", s.pspline.tensor_marginal_size},
                         {"degree", s.pspline.degree},
                         {"penalty_order", s.pspline.penalty_order},
                         {"interactions", s.pspline.interactions},
                         {"tau_grid", s.pspline.tau_grid},
                         {"cv_folds", s.pspline.cv_folds}};
    ps["fixed_tau"] = s.pspline.fixed_tau ? nlohmann::json(*s.pspline.fixed_tau) : nlohmann::json(nullptr);
    return {{"bins", s.bins},
            {"pspline", ps},
            {"coxen",
             {{"omega_grid", s.coxen.omega_grid},
              {"path_length", s.coxen.path_length},
              {"min_ratio", s.coxen.min_ratio},
              {"tolerance", s.coxen.tolerance},
              {"folds", s.coxen.folds}}},
            {"mars",
             {{"max_forward_terms", s.mars.max_forward_terms},
              {"min_improvement", s.mars.min_improvement},
              {"gcv_penalty", s.mars.gcv_penalty},
              {"p_grid", s.mars.p_grid},
              {"d_grid", s.mars.d_grid},
              {"folds", s.mars.folds}}},
            {"bart", to_json(s.bart)}};
}

MethodSettings method_settings_from_json(const nlohmann::json& j, MethodSettings s) {
    try {
        s.bins = j.value("bins", s.bins);
        if (j.contains("pspline")) {
            const auto& p = j.at("pspline");
            s.pspline.main_basis_size = p.value("main_basis_size", s.pspline.main_basis_size);
            s.pspline.tensor_marginal_size = p.value("tensor_marginal_size", s.pspline.tensor_marginal_size);
            s.pspline.degree = p.value("degree", s.pspline.degree);
            s.pspline.penalty_order = p.value("penalty_order", s.pspline.penalty_order);
            s.pspline.interactions = p.value("interactions", s.pspline.interactions);
            s.pspline.tau_grid = p.value("tau_grid", s.pspline.tau_grid);
            s.pspline.cv_folds = p.value("cv_folds", s.pspline.cv_folds);
            if (p.contains("fixed_tau")) {
                s.pspline.fixed_tau = p.at("fixed_tau").is_null() ? std::nullopt
                                                                   : std::optional<double>(p.at("fixed_tau").get<double>());
            }
        }
        if (j.contains("coxen")) {
            const auto& c = j.at("coxen");
            s.coxen.omega_grid = c.value("omega_grid", s.coxen.omega_grid);
            s.coxen.path_length = c.value("path_length", s.coxen.path_length);
            s.coxen.min_ratio = c.value("min_ratio", s.coxen.min_ratio);
            s.coxen.tolerance = c.value("tolerance", s.coxen.tolerance);
            s.coxen.folds = c.value("folds", s.coxen.folds);
        }
        if (j.contains("mars")) {
            const auto& m = j.at("mars");
            s.mars.max_forward_terms = m.value("max_forward_terms", s.mars.max_forward_terms);
            s.mars.min_improvement = m.value("min_improvement", s.mars.min_improvement);
            s.mars.gcv_penalty = m.value("gcv_penalty", s.mars.gcv_penalty);
            s.mars.p_grid = m.value("p_grid", s.mars.p_grid);
            s.mars.d_grid = m.value("d_grid", s.mars.d_grid);
            s.mars.folds = m.value("folds", s.mars.folds);
        }
        if (j.contains("bart")) {
            const auto& b = j.at("bart");
            s.bart.a = b.value("a", s.bart.a);
            s.bart.b = b.value("b", s.bart.b);
            s.bart.k = b.value("k", s.bart.k);
            s.bart.trees = b.value("trees", s.bart.trees);
            s.bart.burn_in = b.value("burn_in", s.bart.burn_in);
            s.bart.draws = b.value("draws", s.bart.draws);
            s.bart.thin = b.value("thin", s.bart.thin);
            s.bart.min_leaf = b.value("min_leaf", s.bart.min_leaf);
            if (b.contains("move_probabilities")) {
                const auto mp = b.at("move_probabilities").get<std::vector<double>>();
                if (mp.size() != 3) throw ConfigError("bart.move_probabilities needs three values");
                s.bart.p_grow = mp[0];
                s.bart.p_prune = mp[1];
                s.bart.p_change = mp[2];
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("method settings: ") + e.what());
    }
    s.validate();
    return s;
}

nlohmann::json to_json(const Tuning& t) {
    nlohmann::json j = nlohmann::json::object();
    if (t.tau) j["tau"] = *t.tau;
    if (t.omega) j["omega"] = *t.omega;
    if (t.kappa) j["kappa"] = *t.kappa;
    if (t.mars_p) j["mars_p"] = *t.mars_p;
    if (t.mars_d) j["mars_d"] = *t.mars_d;
    return j;
}

FittedMethod fit_method(Method method, const Dataset& data, const BinGrid& grid, const MethodSettings& settings,
                        std::uint64_t seed, const Tuning* reuse) {
    require_events(data);
    FittedMethod out;
    out.method = method;
    switch (method) {
        case Method::cox:
        case Method::cox_int: {
            CoxFit fit = fit_cox(data, method == Method::cox_int);
            out.info = fit_summary(fit);
            out.model = std::make_shared<CoxModel>(std::move(fit));
            break;
        }
        case Method::cox_ps: {
            SplineBasisSpec spec = settings.pspline;
            spec.seed = seed;
            if (reuse && reuse->tau) spec.fixed_tau = reuse->tau;
            CoxFit fit = fit_cox_psplines(data, spec);
            out.tuning.tau = fit.extra.at("tau").get<double>();
            out.info = fit_summary(fit);
            out.model = std::make_shared<CoxModel>(std::move(fit));
            break;
        }
        case Method::coxen:
        case Method::coxen_int: {
            CoxEnOptions opts = settings.coxen;
            opts.seed = seed;
            opts.include_interactions = method == Method::coxen_int;
            CoxFit fit = reuse && reuse->omega && reuse->kappa ? fit_cox_en_at(data, *reuse->omega, *reuse->kappa, opts)
                                                               : fit_cox_en(data, opts).fit;
            out.tuning.omega = fit.extra.at("omega").get<double>();
            out.tuning.kappa = fit.extra.at("kappa").get<double>();
            out.info = fit_summary(fit);
            out.model = std::make_shared<CoxModel>(std::move(fit));
            break;
        }
        case Method::mars: {
            MarsOptions opts = settings.mars;
            opts.seed = seed;
            const AugmentedDataset aug = augment(data, grid);
            int p, d;
            if (reuse && reuse->mars_p && reuse->mars_d) {
                p = *reuse->mars_p;
                d = *reuse->mars_d;
            } else {
                const MarsCvResult cv = cv_tune_mars(aug, opts);
                p = cv.best_p;
                d = cv.best_d;
                out.info["cv_dropped_folds"] = cv.dropped_folds;
            }
            HingeBasis hb = fit_mars(aug, p, d, opts);
            out.tuning.mars_p = p;
            out.tuning.mars_d = d;
            out.info["terms"] = hb.terms.size();
            out.info["ridge_fallback"] = hb.ridge_fallback;
            out.info["gcv"] = hb.gcv;
            out.model = std::make_shared<MarsModel>(grid, std::move(hb));
            break;
        }
        case Method::gpr: {
            const AugmentedDataset aug = augment(data, grid);
            auto model = std::make_shared<GprModel>(fit_gpr(aug, seed));
            const auto& bw = model->kernel().bandwidth();
            out.info = {{"rho", bw.rho}, {"rho_q10", bw.q10}, {"rho_q90", bw.q90}, {"rows", aug.rows()}};
            out.model = std::move(model);
            break;
        }
        case Method::bart: {
            BartOptions opts = settings.bart;
            opts.seed = seed;
            const AugmentedDataset aug = augment(data, grid);
            auto post = std::make_shared<const BartPosterior>(fit_bart(aug, opts));
            const auto& diag = post->posterior().diagnostics;
            int prop[3] = {0, 0, 0}, acc[3] = {0, 0, 0};
            for (const auto& d : diag) {
                for (int m = 0; m < 3; ++m) {
                    prop[m] += d.proposed[m];
                    acc[m] += d.accepted[m];
                }
            }
            out.info = {{"draws", post->draw_count()},
                        {"settings", to_json(opts)},
                        {"acceptance",
                         {{"grow", prop[0] ? static_cast<double>(acc[0]) / prop[0] : 0.0},
                          {"prune", prop[1] ? static_cast<double>(acc[1]) / prop[1] : 0.0},
                          {"change", prop[2] ? static_cast<double>(acc[2]) / prop[2] : 0.0}}},
                        {"split_counts", post->posterior().split_counts}};
            out.posterior = std::move(post);
            break;
        }
    }
    return out;
}

std::vector<std::vector<EstimandValue>> draw_estimates(const FittedMethod& fit, const ProfileBasis& basis,
                                                       const std::vector<EstimandRequest>& requests) {
    if (!fit.bayesian()) throw ConfigError("draw estimates need a posterior");
    std::vector<std::vector<EstimandValue>> out(fit.posterior->draw_count());
    for (std::size_t d = 0; d < out.size(); ++d) {
        for (const auto& r : requests) out[d].push_back(compute_estimand(fit.posterior->draw(d), basis, r));
    }
    return out;
}

std::vector<EstimandValue> point_estimates(const FittedMethod& fit, const ProfileBasis& basis,
                                           const std::vector<EstimandRequest>& requests) {
    std::vector<EstimandValue> out;
    if (!fit.bayesian()) {
        for (const auto& r : requests) out.push_back(compute_estimand(*fit.model, basis, r));
        return out;
    }
    const auto draws = draw_estimates(fit, basis, requests);
    for (std::size_t k = 0; k < requests.size(); ++k) {
        double s = 0.0;
        std::size_t n = 0;
        for (const auto& d : draws) {
            if (!d[k].degenerate) {
                s += d[k].value;
                ++n;
            }
        }
        out.push_back(n ? EstimandValue{s / static_cast<double>(n), false} : EstimandValue{0.0, true});
    }
    return out;
}

std::vector<CurvePoint> method_curve(const FittedMethod& fit, const ProfileBasis& basis, std::size_t j, double t_spec) {
    return fit.bayesian() ? exposure_response_curve(*fit.posterior, basis, j, t_spec)
                          : exposure_response_curve(*fit.model, basis, j, t_spec);
}

}  // namespace mixsurv
