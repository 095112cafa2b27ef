#pragma once

// The five IQR-contrast estimands, exposure-response curves and t_spec,
// computed the same way for every model family.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixsurv/model.hpp"
#include "mixsurv/sim_engine.hpp"
#include "mixsurv/survival_core.hpp"

namespace mixsurv {

enum class EstimandKind { individual_hr, individual_survdiff, mixture_hr, mixture_survdiff, interaction_mult };

inline constexpr std::array<EstimandKind, 5> kAllEstimands = {
    EstimandKind::individual_hr, EstimandKind::individual_survdiff, EstimandKind::mixture_hr,
    EstimandKind::mixture_survdiff, EstimandKind::interaction_mult};

std::string to_string(EstimandKind kind);
EstimandKind estimand_from_string(const std::string& name);
/// "multiplicative" or "additive".
std::string estimand_scale(EstimandKind kind);

struct EstimandRequest {
    EstimandKind kind = EstimandKind::individual_hr;
    std::size_t metal = 0;         // j
    std::size_t second_metal = 2;  // j' for the interaction
    int low_percentile = 25;
    int high_percentile = 75;
    double t_spec = 0.0;

    void validate(std::size_t num_metals) const;
};

/// Percentiles (integer percent 1..99) of every metal plus confounder medians.
class ProfileBasis {
public:
    ProfileBasis(std::vector<std::vector<double>> metal_percentiles, std::vector<double> confounder_medians);

    /// Sample quantiles (type 7) of the dataset.
    static ProfileBasis from_dataset(const Dataset& data);
    /// Population quantiles of the generating law.
    static ProfileBasis from_population(const ScenarioConfig& config);

    std::size_t num_metals() const { return metals_.size(); }
    double metal_percentile(std::size_t j, int percent) const;
    const std::vector<double>& confounder_medians() const { return confounders_; }
    /// Every metal at its median, confounders at their medians.
    ExposureProfile median_profile() const;

private:
    std::vector<std::vector<double>> metals_;
    std::vector<double> confounders_;
};

/// 80th percentile (type 7) of the observed times.
double compute_t_spec(const Dataset& data);

/// (high, low) for the HR and survival-difference kinds; for the interaction
/// (high,high), (high,low), (low,high), (low,low) on (j, j').
std::vector<ExposureProfile> build_profiles(const ProfileBasis& basis, const EstimandRequest& request);

struct EstimandValue {
    double value = 0.0;
    bool degenerate = false;  // zero or non-finite hazard in a denominator
};

EstimandValue hazard_ratio(const SurvivalModel& model, const ExposureProfile& high, const ExposureProfile& low,
                           double t_spec);
EstimandValue survival_difference(const SurvivalModel& model, const ExposureProfile& high,
                                  const ExposureProfile& low, double t_spec);
/// [h(hh) h(ll)] / [h(lh) h(hl)] at t_spec; profiles ordered as build_profiles returns them.
EstimandValue multiplicative_interaction(const SurvivalModel& model, const std::vector<ExposureProfile>& profiles,
                                         double t_spec);

EstimandValue compute_estimand(const SurvivalModel& model, const ProfileBasis& basis, const EstimandRequest& request);

/// Percentiles 5, 10, ..., 95.
std::vector<int> curve_percentiles();

struct CurvePoint {
    int percentile = 0;
    double exposure = 0.0;
    double survival = 0.0;
};

/// S(t_spec) with metal j at each curve percentile, everything else at its median.
std::vector<CurvePoint> exposure_response_curve(const SurvivalModel& model, const ProfileBasis& basis,
                                                std::size_t j, double t_spec);
std::vector<CurvePoint> exposure_response_curve(const PosteriorSurvivalModel& model, const ProfileBasis& basis,
                                                std::size_t j, double t_spec);

/// Standard requests for metal j, interaction pair (j, j') and a given t_spec.
std::vector<EstimandRequest> standard_requests(std::size_t j, std::size_t j2, double t_spec);

struct EstimandRecord {
    std::string method;
    EstimandKind kind;
    double estimate = 0.0;
    double t_spec = 0.0;
    bool degenerate = false;
};

nlohmann::json to_json(const EstimandRecord& record);

}  // namespace mixsurv
