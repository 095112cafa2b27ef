#pragma once

// The eight benchmarked fits behind one interface: fit on a dataset, then
// evaluate estimands and curves whether the result is a single model or a
// posterior.

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixsurv/bart.hpp"
#include "mixsurv/cox_en.hpp"
#include "mixsurv/estimands.hpp"
#include "mixsurv/mars.hpp"
#include "mixsurv/splines.hpp"

namespace mixsurv {

enum class Method { cox, cox_int, cox_ps, coxen, coxen_int, mars, gpr, bart };

inline constexpr std::array<Method, 8> kAllMethods = {Method::cox,       Method::cox_int, Method::cox_ps,
                                                      Method::coxen,     Method::coxen_int, Method::mars,
                                                      Method::gpr,       Method::bart};

std::string to_string(Method m);
Method method_from_string(const std::string& name);
bool is_discrete_time(Method m);

struct MethodSettings {
    int bins = 5;
    SplineBasisSpec pspline;
    CoxEnOptions coxen;
    MarsOptions mars;
    BartOptions bart;

    void validate() const;
};

nlohmann::json to_json(const MethodSettings& s);
/// Fields present in `j` override `base`.
MethodSettings method_settings_from_json(const nlohmann::json& j, MethodSettings base);

/// Hyperparameters picked by a method's tuning step.
struct Tuning {
    std::optional<double> tau;
    std::optional<double> omega, kappa;
    std::optional<int> mars_p, mars_d;
};

nlohmann::json to_json(const Tuning& t);

struct FittedMethod {
    Method method = Method::cox;
    std::shared_ptr<const SurvivalModel> model;        // every method except BART
    std::shared_ptr<const BartPosterior> posterior;    // BART only
    Tuning tuning;
    nlohmann::json info;

    bool bayesian() const { return posterior != nullptr; }
};

/// Fits the method. Discrete-time methods use `grid`; `reuse` skips the
/// tuning step and fixes its hyperparameters.
FittedMethod fit_method(Method method, const Dataset& data, const BinGrid& grid, const MethodSettings& settings,
                        std::uint64_t seed, const Tuning* reuse = nullptr);

/// Point estimates; for a posterior, the mean over draws with non-degenerate values.
std::vector<EstimandValue> point_estimates(const FittedMethod& fit, const ProfileBasis& basis,
                                           const std::vector<EstimandRequest>& requests);

/// Per-draw values (draws x requests); BART only.
std::vector<std::vector<EstimandValue>> draw_estimates(const FittedMethod& fit, const ProfileBasis& basis,
                                                       const std::vector<EstimandRequest>& requests);

std::vector<CurvePoint> method_curve(const FittedMethod& fit, const ProfileBasis& basis, std::size_t j, double t_spec);

}  // namespace mixsurv
